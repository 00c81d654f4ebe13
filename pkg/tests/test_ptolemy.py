import itertools

import numpy as np
import pytest

from artifact.grassmann import GrassmannNumber, sqrt_even
from artifact.lightcone import pairing
from artifact.moduli import reconstruct_quad
from artifact.ptolemy import (UnsupportedFlipError, classify_quad, constants_identity_error, d2_identity_error,
                              double_flip, flip, flip_quad, flip_quad_twice, flip_twice_expected,
                              neighbour_ratio_error, pattern_tags, quad_labels)
from artifact.surface import (all_orientations, default_orientation, genus_surface, make_coordinates,
                              random_coordinates, sphere_f03, sphere_f03_theta, sphere_f04, torus_f11)
from artifact.teichmueller import build_lift, closed_paths, holonomy, trace_body
from artifact.verification import odd_oracle

from conftest import NGEN, const

ZERO = GrassmannNumber({}, NGEN)


def test_bosonic_unit_flip():
    one = const(1.0)
    r = flip_quad((one,) * 5, (one,) * 5, (ZERO, ZERO), (ZERO, ZERO))
    assert (r["f"] - 2.0).max_abs() == 0.0
    assert all(x.is_zero() for x in r["mu"] + r["nu"])
    for k in ("ha", "hb", "hc", "hd", "hf"):
        assert (r[k] - 1.0).max_abs() == 0.0


def test_zero_fermions_reduce_to_bosonic(draws):
    lam, h, _, _ = draws.quad()
    a, b, c, d, e = lam
    r = flip_quad(lam, h, (ZERO, ZERO), (ZERO, ZERO))
    assert (r["f"] * e - (a * c + b * d)).max_abs() < 1e-12
    for k in ("c_theta", "c_sigma", "c_mu", "c_nu"):
        assert (r[k] - 1.0).max_abs() == 0.0
    ha, hb, hc, hd, he = h
    assert (r["ha"] - ha / he).max_abs() < 1e-12
    assert (r["hb"] - hb / he).max_abs() < 1e-12
    assert (r["hc"] - hc).max_abs() < 1e-12 and (r["hf"] - 1.0).max_abs() < 1e-12


def test_n1_reduction(draws):
    lam, h, _, _ = draws.quad()
    th, sg = draws.odd(), draws.odd()
    one = const(1.0)
    r = flip_quad(lam, h[:4] + (one,), (th, th), (sg, sg))
    rc = sqrt_even(r["chi"])
    mu = (th + rc * sg) / r["D"]
    nu = (sg - rc * th) / r["D"]
    for got, want in ((r["mu"], mu), (r["nu"], nu)):
        assert (got[0] - want).max_abs() < 1e-12
        assert (got[1] - want).max_abs() < 1e-12
    assert (r["hf"] - 1.0).max_abs() < 1e-12


def test_even_oracle(draws):
    for _ in range(10):
        lam, h, th, sg = draws.quad()
        r = flip_quad(lam, h, th, sg)
        _, B, _, D = reconstruct_quad(lam, h[4], th, sg)
        f2 = r["f"] * r["f"]
        assert (f2 - pairing(B, D)).max_abs() < 1e-9 * max(1.0, f2.max_abs())


def test_odd_oracle(draws):
    for _ in range(5):
        q = draws.quad()
        r = flip_quad(*q)
        mu, nu = odd_oracle(*q, r=r)
        for got, want in ((r["mu"], mu), (r["nu"], nu)):
            assert max((got[i] - want[i]).max_abs() for i in range(2)) < 1e-9


def test_flip_identities(draws):
    for _ in range(10):
        lam, h, th, sg = draws.quad()
        r = flip_quad(lam, h, th, sg)
        assert constants_identity_error(r) < 1e-12
        assert d2_identity_error(r, h[4], th, sg) < 1e-12
        assert neighbour_ratio_error(lam, r) < 1e-12


def test_flip_twice_closure(draws):
    for _ in range(10):
        lam, h, th, sg = draws.quad()
        r1, _, got = flip_quad_twice(lam, h, th, sg)
        want = flip_twice_expected(lam, h, th, sg, r1)
        for k in ("ha", "hb", "hc", "hd", "he"):
            assert (got[k] - want[k]).max_abs() < 1e-9
        assert (got["e"] - lam[4]).max_abs() < 1e-9
        for k in ("sigma", "theta"):
            assert max((got[k][i] - want[k][i]).max_abs() for i in range(2)) < 1e-9


# surface level ---------------------------------------------------------------

def test_classification():
    S = torus_f11()
    for e in range(3):
        assert classify_quad(S, e) == "combined:opposite_AB_DC+opposite_BC_AD"
    S = sphere_f03_theta()
    assert all(pattern_tags(classify_quad(S, e))[0].startswith("adjacent") for e in range(3))
    assert len(pattern_tags(classify_quad(S, 0))) == 2
    S = sphere_f04()
    assert {classify_quad(S, e) for e in range(S.nedges)} == {"generic"}
    # on the dumbbell only the bridge is flippable, and it sees both loops
    S = sphere_f03()
    assert classify_quad(S, 2) == "combined:adjacent_AB_CB+adjacent_CD_AD"


def test_self_folded_edge_rejected():
    S = sphere_f03()
    c = random_coordinates(S, np.random.default_rng(0), ngen=NGEN)
    om = default_orientation(S)
    for e in (0, 1):
        with pytest.raises(UnsupportedFlipError, match="self-folded"):
            flip(S, c, e, om, om)


def test_orientation_disagreement_rejected():
    S = torus_f11()
    c = random_coordinates(S, np.random.default_rng(0), ngen=NGEN)
    with pytest.raises(UnsupportedFlipError, match="disagree"):
        flip(S, c, 0, (1, 1, 1), (-1, 1, 1))
    # disagreement away from the flipped edge is fine
    flip(S, c, 0, (1, 1, 1), (1, -1, 1))


def test_labels_follow_orientation():
    S = torus_f11()
    q1 = quad_labels(S, 0, (1, 1, 1))
    q2 = quad_labels(S, 0, (-1, 1, 1))
    assert (q1.T, q1.Tp) == (q2.Tp, q2.T)


def test_extrapolated_flag():
    S = genus_surface(2)
    c = random_coordinates(S, np.random.default_rng(5), ngen=NGEN)
    om = default_orientation(S)
    assert flip(S, c, 0, om, om).extrapolated
    assert not flip(S, c, 1, om, om).extrapolated
    assert not flip(torus_f11(), random_coordinates(torus_f11(), np.random.default_rng(1)), 0,
                    (1, 1, 1), (1, 1, 1)).extrapolated


def test_bosonic_surface_flip():
    S = sphere_f04()
    c = random_coordinates(S, np.random.default_rng(3), ngen=NGEN, fermions=False, souls=False)
    om = default_orientation(S)
    r = flip(S, c, 2, om, om)
    q = r.labels.sides
    a, b, cc, d, e = (c.lam_side(S, q[x]).body() for x in ("a", "b", "c", "d", "e"))
    assert abs(r.coords.lam[2].body() - (a * cc + b * d) / e) < 1e-12


@pytest.mark.parametrize("make", [torus_f11, sphere_f03, sphere_f03_theta])
def test_double_flip_on_fixtures(make):
    S = make()
    c = random_coordinates(S, np.random.default_rng(4), ngen=NGEN)
    for om in all_orientations(S):
        for e in range(S.nedges):
            if not S.is_loop(e):
                assert double_flip(S, c, e, om, om).ok


def test_double_flip_generic_and_extrapolated():
    for S, edges in ((sphere_f04(), range(6)), (genus_surface(2), (0, 1, 4))):
        c = random_coordinates(S, np.random.default_rng(8), ngen=NGEN)
        om = default_orientation(S)
        for e in edges:
            assert double_flip(S, c, e, om, om).ok


def test_double_flip_detects_wrong_coordinates():
    S = torus_f11()
    c = random_coordinates(S, np.random.default_rng(4), ngen=NGEN)
    rep = double_flip(S, c, 0, (1, 1, 1), (1, 1, 1))
    bumped = make_coordinates(S, [x * 1.001 for x in rep.pulled.lam], rep.pulled.theta, rep.pulled.hval, NGEN)
    from artifact.surface import same_coordinate_class
    assert not same_coordinate_class(S, c, bumped)[0]


def _signed_traces(S, c, om, maxlen):
    vals = set()
    for t in range(S.ntri):
        for g in closed_paths(S, t, maxlen):
            vals.add(round(trace_body(holonomy(S, c, om, om, g)), 9))
    return np.array(sorted(vals))


@pytest.mark.parametrize("make", [torus_f11, sphere_f03_theta])
def test_flip_preserves_traces(make):
    S = make()
    c = random_coordinates(S, np.random.default_rng(1), ngen=NGEN)
    for om in [(1, 1, 1), (1, -1, 1)]:
        before = _signed_traces(S, c, om, 2)
        for e in range(S.nedges):
            r = flip(S, c, e, om, om)
            after = _signed_traces(r.surface, r.coords, r.omega_sigma, 4)
            for x in before:
                assert np.abs(after - x).min() <= 1e-7 * max(1.0, abs(x))


def _pairings_preserved(S, c, e, om, depth=3):
    """Worst relative change of window pairings matched across the flip."""
    q = quad_labels(S, e, om)
    T, k = q.T, q.k
    L0 = build_lift(S, c, om, om, base=(T, k), depth=depth)
    R = flip(S, c, e, om, om)
    L1 = build_lift(R.surface, R.coords, R.omega_sigma, R.omega_iota, base=(T, 2), depth=depth)
    r0, r1 = L0.nodes[0].vertices, L1.nodes[0].vertices
    ref0 = [L0.points[r0[(k + 1) % 3]], L0.points[r0[(k + 2) % 3]], L0.points[r0[k]]]
    child = L1.nodes[L1.node_index(((T, 2),))]
    ref1 = [L1.points[r1[1]], L1.points[r1[2]], L1.points[child.vertices[1]]]
    # identify window vertices by their bosonic pairings with A, B, C
    key0 = np.array([[pairing(x, r).body() for r in ref0] for x in L0.points])
    key1 = np.array([[pairing(x, r).body() for r in ref1] for x in L1.points])
    match = []
    for i, v in enumerate(key0):
        dist = np.abs(key1 - v).max(axis=1)
        j = int(dist.argmin())
        if dist[j] < 1e-6 * max(1.0, np.abs(v).max()):
            match.append((i, j))
    worst = 0.0
    for (i, a), (j, b) in itertools.combinations(match, 2):
        p = pairing(L0.points[i], L0.points[j])
        err = (p - pairing(L1.points[a], L1.points[b])).max_abs()
        worst = max(worst, err / max(1.0, p.max_abs()))
    return worst, len(match)


@pytest.mark.parametrize("make, edges", [(torus_f11, (0, 1)), (sphere_f03_theta, (0,)), (sphere_f04, (0, 3)),
                                         (lambda: genus_surface(2), (0,))])
def test_flip_preserves_lifted_pairings(make, edges):
    S = make()
    c = random_coordinates(S, np.random.default_rng(5), ngen=NGEN)
    om = default_orientation(S)
    for e in edges:
        worst, n = _pairings_preserved(S, c, e, om)
        assert n >= 14
        assert worst < 1e-9


def test_pairing_check_catches_wrong_ratio(monkeypatch):
    import artifact.ptolemy as P
    orig = P.flip_quad

    def bad(*args):
        r = dict(orig(*args))
        r["ha"] = r["ha"] * 1.01
        return r

    monkeypatch.setattr(P, "flip_quad", bad)
    S = sphere_f04()
    c = random_coordinates(S, np.random.default_rng(5), ngen=NGEN)
    worst, _ = _pairings_preserved(S, c, 0, default_orientation(S))
    assert worst > 1e-3
