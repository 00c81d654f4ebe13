import itertools

import numpy as np
import pytest

from artifact.grassmann import GrassmannNumber
from artifact.surface import (PathError, SurfaceError, SurfaceParseError, all_orientations, build_surface,
                              canonical_orientation, check_path, default_orientation, dimension_audit,
                              dump_surface, genus_surface, load_surface, make_coordinates, normalize_ratios,
                              orientation_class_count, puncture_loops, random_coordinates, reflect,
                              same_coordinate_class, same_orientation_class, sphere_f03, sphere_f03_theta,
                              sphere_f04, spin_quadratic_form, spin_quadratic_form_right, surface_from_faces,
                              torus_f11, turns, vertex_products, vertex_rescale)

BUILDERS = {
    "F11": torus_f11,
    "F03": sphere_f03,
    "F03theta": sphere_f03_theta,
    "F04": sphere_f04,
    "F21": lambda: genus_surface(2),
    "F31": lambda: genus_surface(3),
}
TOPOLOGY = {"F11": (1, 1), "F03": (0, 3), "F03theta": (0, 3), "F04": (0, 4), "F21": (2, 1), "F31": (3, 1)}


@pytest.mark.parametrize("name", BUILDERS)
def test_builders_topology(name):
    S = BUILDERS[name]()
    assert (S.genus, S.punctures) == TOPOLOGY[name]
    assert S.punctures - S.nedges + S.ntri == 2 - 2 * S.genus
    assert 2 * S.nedges == 3 * S.ntri
    assert len(puncture_loops(S)) == S.punctures


@pytest.mark.parametrize("gl, msg", [
    ([((0, 0), (1, 0)), ((0, 1), (1, 1))], "unglued"),
    ([((0, 0), (1, 0)), ((0, 0), (1, 1)), ((0, 2), (1, 2))], "glued twice"),
    ([((0, 0), (0, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))], "itself"),
    ([((0, 0), (1, 3)), ((0, 1), (1, 1)), ((0, 2), (1, 2))], "unknown side"),
])
def test_build_errors(gl, msg):
    with pytest.raises(SurfaceError, match=msg):
        build_surface(2, gl)


def test_build_rejects_disconnected_and_unmatched():
    with pytest.raises(SurfaceError, match="disconnected"):
        build_surface(4, [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2)),
                          ((2, 0), (3, 0)), ((2, 1), (3, 1)), ((2, 2), (3, 2))])
    assert surface_from_faces([(0, 1, 2), (0, 2, 1)]).punctures == 3
    with pytest.raises(SurfaceError, match="used twice"):
        surface_from_faces([(0, 1, 2), (0, 1, 3)])
    with pytest.raises(SurfaceError, match="partner"):
        surface_from_faces([(0, 1, 2), (0, 3, 1)])


def test_reflect_is_involution_and_commutes():
    S = genus_surface(2)
    om = tuple(np.random.default_rng(1).choice([1, -1], S.nedges))
    for v in range(S.ntri):
        assert reflect(S, reflect(S, om, v), v) == om
    for v, w in itertools.combinations(range(S.ntri), 2):
        assert reflect(S, reflect(S, om, v), w) == reflect(S, reflect(S, om, w), v)
    with pytest.raises(SurfaceError):
        reflect(S, om, S.ntri)
    with pytest.raises(SurfaceError):
        reflect(S, om[:-1], 0)


def test_torus_reflection_reverses_every_edge():
    S = torus_f11()
    om = default_orientation(S)
    assert reflect(S, om, 0) == (-1, -1, -1)
    assert reflect(S, om, 1) == (-1, -1, -1)


def test_loops_are_not_reversed():
    S = sphere_f03()
    assert reflect(S, (1, 1, 1), 0) == (1, 1, -1)


@pytest.mark.parametrize("name", BUILDERS)
def test_orientation_class_count(name):
    S = BUILDERS[name]()
    assert orientation_class_count(S) == 2 ** (2 * S.genus + S.punctures - 1)


@pytest.mark.parametrize("name", ["F11", "F03", "F03theta", "F04"])
def test_classes_by_enumeration(name):
    S = BUILDERS[name]()
    reps = {canonical_orientation(S, om) for om in all_orientations(S)}
    assert len(reps) == orientation_class_count(S)
    for om in all_orientations(S):
        c = canonical_orientation(S, om)
        assert same_orientation_class(S, om, c)
        assert canonical_orientation(S, reflect(S, om, 0)) == c


@pytest.mark.parametrize("name", ["F11", "F03theta", "F21"])
def test_spin_forms_agree_and_are_class_functions(name):
    S = BUILDERS[name]()
    om = default_orientation(S)
    for g in puncture_loops(S):
        assert set(turns(S, g)) == {"L"}
        assert spin_quadratic_form(S, om, g) == spin_quadratic_form_right(S, om, g)
        for v in range(S.ntri):
            assert spin_quadratic_form(S, reflect(S, om, v), g) == spin_quadratic_form(S, om, g)


def test_check_path():
    S = torus_f11()
    assert check_path(S, [(0, 0), (1, 1)], closed=True) == ((0, 0), (1, 1))
    with pytest.raises(PathError, match="not in triangle"):
        check_path(S, [(0, 0), (0, 1)])
    with pytest.raises(PathError, match="backtracks"):
        check_path(S, [(0, 0), (1, 0)])
    with pytest.raises(PathError, match="no side"):
        check_path(S, [(0, 5)])
    with pytest.raises(PathError, match="not closed"):
        check_path(S, [(0, 0)], closed=True)


@pytest.mark.parametrize("name", ["F11", "F03", "F04"])
def test_dump_load_roundtrip(name):
    S = BUILDERS[name]()
    c = random_coordinates(S, np.random.default_rng(5))
    om = {"sigma": reflect(S, default_orientation(S), 0), "iota": default_orientation(S)}
    text = dump_surface(S, c, om)
    S2, c2, om2 = load_surface(text)
    assert S2 == S and om2 == om
    assert c.max_diff(c2) == 0.0
    assert dump_surface(S2, c2, om2) == text


def test_load_without_coordinates():
    S, c, om = load_surface(dump_surface(torus_f11()))
    assert S == torus_f11() and c is None and om == {}


GOOD = dump_surface(torus_f11()).splitlines()


@pytest.mark.parametrize("edit, line, msg", [
    (lambda L: ["surface 2"] + L[1:], 1, "version"),
    (lambda L: L[:2] + ["  0: 0.0 0.1 0.3"] + L[3:], 3, "bad side|triangle line"),
    (lambda L: L[:6] + ["  0: 0.0 1.x"] + L[7:], 7, "bad side"),
    (lambda L: L[:-1] + ["bogus 1", "end"], 9, "unknown keyword"),
    (lambda L: L + ["triangles 2"], 10, "after 'end'"),
    (lambda L: L[:-1] + ["orientation sigma + x +", "end"], 9, "orientation sign"),
])
def test_parse_errors_carry_line_numbers(edit, line, msg):
    with pytest.raises(SurfaceParseError, match=msg) as exc:
        load_surface("\n".join(edit(list(GOOD))))
    assert exc.value.line == line


def test_gluing_errors_name_the_pair():
    text = "\n".join(GOOD).replace("1: 0.1 1.1", "1: 0.0 1.1")
    with pytest.raises(SurfaceParseError, match=r"0\.0 in gluing 0\.0~1\.1 is already glued on line 6") as exc:
        load_surface(text)
    assert exc.value.line == 7
    with pytest.raises(SurfaceParseError, match="missing triangle") as exc:
        load_surface("\n".join(GOOD).replace("2: 0.2 1.2", "2: 0.2 4.2"))
    assert exc.value.line == 8


def test_parse_errors_without_line():
    with pytest.raises(SurfaceParseError, match="missing 'end'"):
        load_surface("\n".join(GOOD[:-1]))
    with pytest.raises(SurfaceParseError, match="unglued"):
        load_surface("\n".join(GOOD).replace("gluings 3", "gluings 2").replace("  2: 0.2 1.2\n", ""))
    with pytest.raises(SurfaceParseError, match="empty"):
        load_surface("# nothing\n")


def test_make_coordinates_validation():
    S = torus_f11()
    with pytest.raises(SurfaceError):
        make_coordinates(S, [1, 1], [(0, 0)] * 2, [1, 1, 1], 4)
    with pytest.raises(Exception, match="positive body"):
        make_coordinates(S, [1, -1, 1], [(0, 0)] * 2, [1, 1, 1], 4)
    g = GrassmannNumber.gen(0, 4)
    with pytest.raises(Exception, match="odd"):
        make_coordinates(S, [1, 1, 1], [(g * g + 1.0, 0), (0, 0)], [1, 1, 1], 4)


def test_normalize_simple_ratios():
    S = torus_f11()
    c = make_coordinates(S, [1, 1, 1], [(0, 0)] * 2, [2, 1, 1], 4)
    prods = vertex_products(S, c)
    assert [p.body() for p in prods] == [2.0, 0.5]
    n = normalize_ratios(S, c)
    assert all(abs(p.body() - 1) < 1e-14 for p in vertex_products(S, n))
    assert same_coordinate_class(S, c, n)[0]


@pytest.mark.parametrize("name", ["F11", "F03theta", "F04", "F21"])
def test_normalize_generic(name):
    S = BUILDERS[name]()
    c = random_coordinates(S, np.random.default_rng(8))
    n = normalize_ratios(S, c)
    for p in vertex_products(S, n):
        assert (p - 1.0).max_abs() < 1e-12
    ok, signs = same_coordinate_class(S, c, n)
    assert ok and signs == [1] * S.ntri


def test_rescaling_keeps_class():
    S = sphere_f04()
    rng = np.random.default_rng(9)
    c = random_coordinates(S, rng)
    d = vertex_rescale(S, c, 2, 1.7)
    d = vertex_rescale(S, d, 0, random_coordinates(S, rng).lam[0])
    assert d.max_diff(c) > 0.1
    assert same_coordinate_class(S, c, d)[0]
    # flipping the fermions of one triangle is detected as a sign
    th = list(d.theta)
    th[1] = (-th[1][0], -th[1][1])
    ok, signs = same_coordinate_class(S, c, d.__class__(d.lam, tuple(th), d.hval, d.ngen))
    assert ok and signs.count(-1) in (1, S.ntri - 1)
    e = make_coordinates(S, [x * 1.01 for x in c.lam], c.theta, c.hval, c.ngen)
    assert not same_coordinate_class(S, c, e)[0]


@pytest.mark.parametrize("name", BUILDERS)
def test_dimension_audit(name):
    a = dimension_audit(BUILDERS[name]())
    assert a["even"] == a["even_expected"]
    assert a["odd"] == a["odd_expected"]
