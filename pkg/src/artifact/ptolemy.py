"""Super Ptolemy flips.

The quadrilateral around an edge e is labelled so that the first orientation
field points across e into triangle ABC; the other triangle is CDA.  Sides
are a = AB, b = BC, c = CD, d = DA.  After the flip the diagonal f = BD
separates DAB (odd pair mu) from BCD (odd pair nu).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .grassmann import GrassmannNumber, inv, sqrt_even
from .moduli import c_theta
from .surface import (CoordinateVector, Orientation, Side, SurfaceComplex, SurfaceError, build_surface,
                      validate_coordinates)

Odd2 = Tuple[GrassmannNumber, GrassmannNumber]

SIDE_NAMES = ("a", "b", "c", "d")

# tag for each identified pair of quadrilateral sides
PAIR_TAGS = {
    ("a", "b"): "adjacent_AB_CB",
    ("b", "c"): "adjacent_BC_DC",
    ("c", "d"): "adjacent_CD_AD",
    ("a", "d"): "adjacent_AB_AD",
    ("a", "c"): "opposite_AB_DC",
    ("b", "d"): "opposite_BC_AD",
}


class UnsupportedFlipError(SurfaceError):
    pass


# quadrilateral level --------------------------------------------------------

def flip_quad(lam, h, theta: Odd2, sigma: Odd2) -> Dict[str, object]:
    """Generic flip of one quadrilateral.

    lam = (a, b, c, d, e), h = (h_a, h_b, h_c, h_d, h_e).  Returns the new
    diagonal, odd pairs, ratios and the intermediate constants.
    """
    a, b, c, d, e = lam
    ha, hb, hc, hd, he = h
    hei = inv(he)
    chi = a * c * inv(b * d)
    rc = sqrt_even(chi)
    t1, t2 = theta
    s1, s2 = sigma
    D2 = 1.0 + chi + rc * 0.5 * (hei * s1 * t2 + he * s2 * t1)
    D = sqrt_even(D2)
    Di = inv(D)
    k = inv((rc + inv(rc)) * 2.0)
    f = (a * c + b * d) * (1.0 + hei * s1 * t2 * k + he * s2 * t1 * k) * inv(e)
    mu = ((he * t1 + rc * s1) * Di, (hei * t2 + rc * s2) * Di)
    nu = ((s1 - rc * he * t1) * Di, (s2 - rc * hei * t2) * Di)
    ct, cs, cm, cn = c_theta(theta), c_theta(sigma), c_theta(mu), c_theta(nu)
    return dict(
        f=f, mu=mu, nu=nu, chi=chi, D=D, D2=D2,
        c_theta=ct, c_sigma=cs, c_mu=cm, c_nu=cn,
        ha=ha * inv(he * ct), hb=hb * ct * hei, hc=hc * ct * inv(cm), hd=hd * cn * inv(ct),
        hf=cs * inv(ct * ct),
    )


def flip_twice_expected(lam, h, theta: Odd2, sigma: Odd2, first: Dict[str, object]) -> Dict[str, object]:
    """The configuration a double flip should return, from the first flip's constants."""
    ha, hb, hc, hd, he = h
    ct, cm, cn = first["c_theta"], first["c_mu"], first["c_nu"]
    al1 = ct * ct * inv(he * cn)
    al2 = ct * ct * inv(cm * cm)
    s1, s2 = sigma
    t1, t2 = theta
    return dict(
        ha=ha * al1, hb=hb * al1, hc=hc * al2, hd=hd * al2, he=inv(he * al1) * al2,
        sigma=(inv(al2) * s1, al2 * s2), theta=(-(inv(al1) * t1), -(al1 * t2)),
        alpha1=al1, alpha2=al2,
    )


def flip_quad_twice(lam, h, theta: Odd2, sigma: Odd2):
    """Flip, relabel the new quadrilateral as DABC, and flip again."""
    a, b, c, d, e = lam
    r1 = flip_quad(lam, h, theta, sigma)
    lam2 = (d, a, b, c, r1["f"])
    h2 = (r1["hd"], r1["ha"], r1["hb"], r1["hc"], r1["hf"])
    r2 = flip_quad(lam2, h2, r1["mu"], r1["nu"])
    got = dict(
        ha=r2["hb"], hb=r2["hc"], hc=r2["hd"], hd=r2["ha"], he=r2["hf"],
        e=r2["f"], sigma=r2["mu"], theta=r2["nu"],
    )
    return r1, r2, got


def d2_identity_error(r: Dict[str, object], h_e, theta: Odd2, sigma: Odd2) -> float:
    """|D^2 - (1 + chi + sqrt(chi)/2 (h_e^-1 s1 t2 + h_e s2 t1))| with D from the flip."""
    chi = r["chi"]
    t1, t2 = theta
    s1, s2 = sigma
    want = 1.0 + chi + sqrt_even(chi) * 0.5 * (inv(h_e) * s1 * t2 + h_e * s2 * t1)
    return (r["D"] * r["D"] - want).max_abs()


def constants_identity_error(r: Dict[str, object]) -> float:
    return (r["c_mu"] * r["c_nu"] - r["c_theta"] * r["c_sigma"]).max_abs()


# surface level --------------------------------------------------------------

@dataclass(frozen=True)
class QuadLabels:
    edge: int
    T: int
    k: int
    Tp: int
    j: int

    @property
    def sides(self) -> Dict[str, Side]:
        T, k, Tp, j = self.T, self.k, self.Tp, self.j
        return {"e": (T, k), "a": (T, (k + 1) % 3), "b": (T, (k + 2) % 3),
                "c": (Tp, (j + 1) % 3), "d": (Tp, (j + 2) % 3), "e'": (Tp, j)}


def quad_labels(S: SurfaceComplex, e: int, omega_sigma: Optional[Orientation] = None) -> QuadLabels:
    """Label the quadrilateral of edge e; ABC is the triangle omega_sigma points into."""
    if not 0 <= e < S.nedges:
        raise SurfaceError(f"unknown edge {e}")
    s1, s2 = S.edges[e]
    if s1[0] == s2[0]:
        raise UnsupportedFlipError(f"edge {e} is self-folded (both sides in triangle {s1[0]})")
    if omega_sigma is None or omega_sigma[e] == -1:
        # the field points from the triangle of s2 into that of s1
        inside, outside = s1, s2
    else:
        inside, outside = s2, s1
    return QuadLabels(e, inside[0], inside[1], outside[0], outside[1])


def identified_pairs(S: SurfaceComplex, q: QuadLabels) -> List[Tuple[str, str]]:
    sd = q.sides
    out = []
    for i, x in enumerate(SIDE_NAMES):
        for y in SIDE_NAMES[i + 1:]:
            if S.edge_of[sd[x]] == S.edge_of[sd[y]]:
                out.append((x, y))
    return out


def classify_quad(S: SurfaceComplex, e: int, omega_sigma: Optional[Orientation] = None) -> str:
    q = quad_labels(S, e, omega_sigma)
    pairs = identified_pairs(S, q)
    if not pairs:
        return "generic"
    if len(pairs) == 1:
        return PAIR_TAGS[pairs[0]]
    return "combined:" + "+".join(PAIR_TAGS[p] for p in pairs)


def pattern_tags(tag: str) -> List[str]:
    if tag.startswith("combined:"):
        return tag.split(":", 1)[1].split("+")
    return [tag]


@dataclass
class FlipResult:
    surface: SurfaceComplex
    coords: CoordinateVector
    omega_sigma: Orientation
    omega_iota: Orientation
    case: str
    diagnostics: Dict[str, GrassmannNumber]
    labels: QuadLabels
    # old side -> new side for the four outer sides and the diagonal
    side_map: Dict[Side, Side] = field(default_factory=dict)
    extrapolated: bool = False

    def report(self) -> str:
        from .grassmann import to_text
        lines = [f"case {self.case}" + (" (extrapolated rule)" if self.extrapolated else "")]
        for k in ("chi", "D", "c_theta", "c_sigma", "c_mu", "c_nu", "f"):
            lines.append(f"{k} = {to_text(self.diagnostics[k])}")
        return "\n".join(lines)


def _new_sides(q: QuadLabels) -> Dict[str, Side]:
    # DAB keeps index T with corners (D, A, B); BCD keeps index Tp with corners (B, C, D)
    T1, T2 = q.T, q.Tp
    return {"d": (T1, 0), "a": (T1, 1), "f": (T1, 2), "b": (T2, 0), "c": (T2, 1), "f'": (T2, 2)}


def flip(S: SurfaceComplex, c: CoordinateVector, e: int, omega_sigma: Orientation,
         omega_iota: Orientation) -> FlipResult:
    """Flip edge e of the triangulation, updating coordinates and both orientation fields."""
    q = quad_labels(S, e, omega_sigma)
    if omega_sigma[e] != omega_iota[e]:
        raise UnsupportedFlipError(f"edge {e}: the two orientation fields disagree on the diagonal")
    tag = classify_quad(S, e, omega_sigma)
    sd = q.sides
    lam = tuple(c.lam_side(S, sd[x]) for x in ("a", "b", "c", "d", "e"))
    h = tuple(c.ratio(S, sd[x]) for x in ("a", "b", "c", "d", "e"))
    theta, sigma = c.theta[q.T], c.theta[q.Tp]
    r = flip_quad(lam, h, theta, sigma)
    tags = pattern_tags(tag)
    extrapolated = len(tags) == 1 and tags != ["generic"] and S.ntri > 2

    new = _new_sides(q)
    side_map = {sd["a"]: new["a"], sd["b"]: new["b"], sd["c"]: new["c"], sd["d"]: new["d"],
                sd["e"]: new["f"], sd["e'"]: new["f'"]}
    S2 = _rebuild(S, side_map, e, new)
    lamv = list(c.lam)
    lamv[e] = r["f"]
    th = list(c.theta)
    th[q.T], th[q.Tp] = r["mu"], r["nu"]
    c2 = CoordinateVector(tuple(lamv), tuple(th), tuple(c.hval), c.ngen)
    # Each quadrilateral side takes its own generic factor; when two sides
    # are one edge both factors land on it, one per half-edge.
    for x, phi in _ratio_factors(r, h).items():
        c2 = c2.with_ratio(S2, new[x], c2.ratio(S2, new[x]) * phi)
    c2 = c2.with_ratio(S2, new["f"], r["hf"])
    validate_coordinates(S2, c2)
    # orientation fields: f points into DAB; listed outer branches reverse
    os2 = _evolve(S, omega_sigma, q)
    oi2 = _evolve(S, omega_iota, q)
    diag = {k: r[k] for k in ("chi", "D", "c_theta", "c_sigma", "c_mu", "c_nu", "f")}
    return FlipResult(S2, c2, os2, oi2, tag, diag, q, side_map, extrapolated)


def _ratio_factors(r, h) -> Dict[str, GrassmannNumber]:
    """Multiplicative change of each outer half-edge ratio in the generic flip."""
    return {x: r["h" + x] * inv(hx) for x, hx in zip(SIDE_NAMES, h)}


def _rebuild(S: SurfaceComplex, side_map: Dict[Side, Side], e: int, new: Dict[str, Side]) -> SurfaceComplex:
    edges = []
    for i, (s1, s2) in enumerate(S.edges):
        if i == e:
            edges.append((new["f"], new["f'"]))
        else:
            edges.append((side_map.get(s1, s1), side_map.get(s2, s2)))
    return build_surface(S.ntri, edges)


def _evolve(S: SurfaceComplex, omega: Orientation, q: QuadLabels) -> Orientation:
    """f points from BCD into DAB and the branch through b reverses."""
    out = list(omega)
    out[q.edge] = -1
    i = S.edge_of[q.sides["b"]]
    out[i] = -out[i]
    return tuple(out)


# double flips ---------------------------------------------------------------

def _compose_maps(S: SurfaceComplex, q: QuadLabels, m1: Dict[Side, Side], m2: Dict[Side, Side],
                  S2: SurfaceComplex) -> Dict[Side, Side]:
    """Old side -> side after two flips of the same edge."""
    out = {}
    for s in S.sides():
        x = m1.get(s, s)
        out[s] = m2.get(x, x)
    # the two diagonal halves swap triangles: send each to the triangle that
    # now holds its outer sides
    for tri, half in ((q.T, q.sides["e"]), (q.Tp, q.sides["e'"])):
        others = [out[(tri, k)] for k in range(3) if (tri, k) != half]
        u = others[0][0]
        if any(o[0] != u for o in others):
            raise SurfaceError("double flip does not restore the triangles")
        used = {o[1] for o in others}
        out[half] = (u, ({0, 1, 2} - used).pop())
    return out


def pull_back(S: SurfaceComplex, S2: SurfaceComplex, c2: CoordinateVector, om2: Sequence[Orientation],
              pi: Dict[Side, Side]):
    """Express coordinates on S2 in the labels of S through the side bijection pi."""
    lam, hval, oms = [], [], [[] for _ in om2]
    for i, (s1, s2) in enumerate(S.edges):
        p1, p2 = pi[s1], pi[s2]
        j = S2.edge_of[p1]
        if S2.edge_of[p2] != j or p1 == p2:
            raise SurfaceError(f"edge {i} does not map to an edge")
        lam.append(c2.lam[j])
        hval.append(c2.ratio(S2, p1))
        sgn = 1 if S2.is_first(p1) else -1
        for o, out in zip(om2, oms):
            out.append(o[j] * sgn)
    theta = []
    for t in range(S.ntri):
        imgs = [pi[(t, k)] for k in range(3)]
        u = imgs[0][0]
        rot = (imgs[0][1]) % 3
        if any(im != (u, (k + rot) % 3) for k, im in enumerate(imgs)):
            raise SurfaceError(f"triangle {t} is not mapped rigidly")
        theta.append(c2.theta[u])
    c = CoordinateVector(tuple(lam), tuple(theta), tuple(hval), c2.ngen)
    return c, [tuple(o) for o in oms]


@dataclass
class DoubleFlipReport:
    first: FlipResult
    second: FlipResult
    pulled: CoordinateVector
    omegas: Tuple[Orientation, Orientation]
    equivalent: bool
    signs: Optional[List[int]]
    orientation_ok: bool

    @property
    def ok(self) -> bool:
        return self.equivalent and self.orientation_ok


def double_flip(S: SurfaceComplex, c: CoordinateVector, e: int, omega_sigma: Orientation,
                omega_iota: Orientation, tol: float = 1e-9) -> DoubleFlipReport:
    """Flip e twice and compare with the start up to rescaling and reflections."""
    from .surface import reflect, same_coordinate_class
    r1 = flip(S, c, e, omega_sigma, omega_iota)
    r2 = flip(r1.surface, r1.coords, e, r1.omega_sigma, r1.omega_iota)
    pi = _compose_maps(S, r1.labels, r1.side_map, r2.side_map, r2.surface)
    cb, (os_b, oi_b) = pull_back(S, r2.surface, r2.coords, (r2.omega_sigma, r2.omega_iota), pi)
    eq, signs = same_coordinate_class(S, c, cb, tol)
    ok = False
    if eq:
        ws, wi = tuple(omega_sigma), tuple(omega_iota)
        for t, sg in enumerate(signs):
            if sg == -1:
                ws, wi = reflect(S, ws, t), reflect(S, wi, t)
        ok = ws == os_b and wi == oi_b
    return DoubleFlipReport(r1, r2, cb, (os_b, oi_b), eq, signs, ok)


def neighbour_ratio_error(lam, r: Dict[str, object]) -> float:
    """|e f/(b d) - D^2|: the cross-ratio across side a picks up D^2 in the flip."""
    _, b, _, d, e = lam
    return (e * r["f"] * inv(b * d) - r["D"] * r["D"]).max_abs()
