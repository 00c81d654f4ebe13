"""Triangulated punctured surfaces and their coordinates.

A surface is a finite set of oriented triangles whose sides are glued in
pairs.  Triangle ``t`` has corners ``0, 1, 2`` in positive order and side
``k`` runs from corner ``k`` to corner ``k+1``.  Gluing side ``(t, k)`` to
``(u, j)`` always reverses orientation: corner ``k`` of ``t`` meets corner
``j+1`` of ``u`` and corner ``k+1`` meets corner ``j``.

The dual fatgraph has one vertex per triangle and one edge per glued pair.
Edge ``i`` joins the triangles of its two sides ``edges[i] = (first, second)``;
an orientation stores ``+1`` when the edge points from the triangle of
``first`` to the triangle of ``second``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .grassmann import (DomainError, GrassmannError, GrassmannNumber, ParityError, exp_even,
                        from_text, inv, log_even, to_text)

Side = Tuple[int, int]
Odd2 = Tuple[GrassmannNumber, GrassmannNumber]

FORMAT_VERSION = 1


class SurfaceError(ValueError):
    pass


class SurfaceParseError(SurfaceError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class PathError(SurfaceError):
    pass


# complexes ------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceComplex:
    ntri: int
    edges: Tuple[Tuple[Side, Side], ...]
    mate: Dict[Side, Side] = field(repr=False, compare=False)
    edge_of: Dict[Side, int] = field(repr=False, compare=False)
    punctures: int
    genus: int

    @property
    def nedges(self) -> int:
        return len(self.edges)

    def sides(self) -> Iterable[Side]:
        for t in range(self.ntri):
            for k in range(3):
                yield (t, k)

    def is_first(self, side: Side) -> bool:
        return self.edges[self.edge_of[side]][0] == side

    def is_loop(self, i: int) -> bool:
        (t, _), (u, _) = self.edges[i]
        return t == u

    def incident(self, t: int) -> List[int]:
        """Edge ids around vertex t in cyclic order (loops appear twice)."""
        return [self.edge_of[(t, k)] for k in range(3)]

    def corner_classes(self) -> List[List[Tuple[int, int]]]:
        return _corner_classes(self.ntri, self.mate)

    def describe(self) -> str:
        return f"F_{self.genus}^{self.punctures} ({self.ntri} triangles, {self.nedges} edges)"


def _corner_classes(ntri: int, mate: Dict[Side, Side]):
    parent = {(t, k): (t, k) for t in range(ntri) for k in range(3)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (t, k), (u, j) in mate.items():
        for p, q in (((t, k), (u, (j + 1) % 3)), ((t, (k + 1) % 3), (u, j))):
            a, b = find(p), find(q)
            if a != b:
                parent[a] = b
    classes: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for c in parent:
        classes.setdefault(find(c), []).append(c)
    return sorted(sorted(v) for v in classes.values())


def build_surface(ntri: int, gluings: Sequence[Tuple[Side, Side]]) -> SurfaceComplex:
    """Validate gluing data and compute genus and punctures."""
    if ntri <= 0:
        raise SurfaceError("empty surface")
    mate: Dict[Side, Side] = {}
    edges = []
    for pair in gluings:
        s1, s2 = (tuple(int(x) for x in s) for s in pair)
        for s in (s1, s2):
            if not (0 <= s[0] < ntri and 0 <= s[1] < 3):
                raise SurfaceError(f"unknown side {s} in gluing {s1}~{s2}")
            if s in mate:
                raise SurfaceError(f"side {s} glued twice (gluing {s1}~{s2})")
        if s1 == s2:
            raise SurfaceError(f"side {s1} glued to itself")
        mate[s1], mate[s2] = s2, s1
        edges.append((s1, s2))
    free = [(t, k) for t in range(ntri) for k in range(3) if (t, k) not in mate]
    if free:
        raise SurfaceError(f"unglued sides: {free}")
    if not _connected(ntri, edges):
        raise SurfaceError("gluing is disconnected")
    s = len(_corner_classes(ntri, mate))
    chi = s - len(edges) + ntri
    if chi % 2:
        raise SurfaceError("odd Euler characteristic")
    g = (2 - chi) // 2
    if 2 * g + s - 2 <= 0:
        raise SurfaceError("surface must have negative Euler characteristic after puncturing")
    edge_of = {}
    for i, (s1, s2) in enumerate(edges):
        edge_of[s1] = edge_of[s2] = i
    return SurfaceComplex(ntri, tuple(edges), mate, edge_of, s, g)


def _connected(ntri, edges) -> bool:
    seen = {0}
    stack = [0]
    adj: Dict[int, List[int]] = {}
    for (t, _), (u, _) in edges:
        adj.setdefault(t, []).append(u)
        adj.setdefault(u, []).append(t)
    while stack:
        v = stack.pop()
        for w in adj.get(v, []):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == ntri


def surface_from_faces(faces: Sequence[Sequence]) -> SurfaceComplex:
    """Glue triangles given by vertex labels along matching reversed sides."""
    by_dir: Dict[Tuple, Side] = {}
    for t, f in enumerate(faces):
        for k in range(3):
            key = (f[k], f[(k + 1) % 3])
            if key in by_dir:
                raise SurfaceError(f"directed side {key} used twice")
            by_dir[key] = (t, k)
    gl = []
    for (u, v), s in sorted(by_dir.items(), key=lambda kv: kv[1]):
        o = by_dir.get((v, u))
        if o is None:
            raise SurfaceError(f"side {u}->{v} has no partner")
        if s < o:
            gl.append((s, o))
    return build_surface(len(faces), gl)


def torus_f11() -> SurfaceComplex:
    return build_surface(2, [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))])


def sphere_f03() -> SurfaceComplex:
    """Two triangles: sides 0 and 1 of each folded together, sides 2 glued across."""
    return build_surface(2, [((0, 0), (0, 1)), ((1, 0), (1, 1)), ((0, 2), (1, 2))])


def sphere_f03_theta() -> SurfaceComplex:
    """The other two-triangle complex of the thrice-punctured sphere."""
    return build_surface(2, [((0, 0), (1, 0)), ((0, 1), (1, 2)), ((0, 2), (1, 1))])


def sphere_f04() -> SurfaceComplex:
    """Boundary of a tetrahedron."""
    return surface_from_faces([(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)])


def genus_surface(g: int) -> SurfaceComplex:
    """Once-punctured genus-g surface from a fan-triangulated 4g-gon."""
    if g < 1:
        raise SurfaceError("genus must be at least 1")
    n = 4 * g
    # polygon side j -> (triangle, side); fan from vertex 0
    poly: Dict[int, Side] = {0: (0, 0), n - 1: (n - 3, 2)}
    for i in range(1, n - 1):
        poly[i] = (i - 1, 1)
    gl = [((i - 1, 2), (i, 0)) for i in range(1, n - 2)]
    for b in range(g):
        j = 4 * b
        gl.append((poly[j], poly[j + 2]))
        gl.append((poly[j + 1], poly[j + 3]))
    return build_surface(n - 2, gl)


# orientations ---------------------------------------------------------------

Orientation = Tuple[int, ...]


def default_orientation(S: SurfaceComplex) -> Orientation:
    return tuple([1] * S.nedges)


def _check_orientation(S: SurfaceComplex, omega: Orientation):
    if len(omega) != S.nedges or any(x not in (1, -1) for x in omega):
        raise SurfaceError(f"orientation must give +1/-1 on each of {S.nedges} edges")


def reflect(S: SurfaceComplex, omega: Orientation, v: int) -> Orientation:
    """Reverse every edge at vertex v; loops at v are reversed twice."""
    _check_orientation(S, omega)
    if not 0 <= v < S.ntri:
        raise SurfaceError(f"unknown vertex {v}")
    out = list(omega)
    for i in S.incident(v):
        out[i] = -out[i]
    return tuple(out)


def _reflection_rows(S: SurfaceComplex) -> List[int]:
    rows = []
    for v in range(S.ntri):
        m = 0
        for i in S.incident(v):
            m ^= 1 << i
        rows.append(m)
    return rows


def _z2_reduce(rows: List[int]) -> List[int]:
    """Row echelon basis over Z2, rows as bit masks."""
    basis: List[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
    return basis


def _difference(omega1: Orientation, omega2: Orientation) -> int:
    m = 0
    for i, (a, b) in enumerate(zip(omega1, omega2)):
        if a != b:
            m |= 1 << i
    return m


def same_orientation_class(S: SurfaceComplex, o1: Orientation, o2: Orientation) -> bool:
    _check_orientation(S, o1)
    _check_orientation(S, o2)
    r = _difference(o1, o2)
    for b in _z2_reduce(_reflection_rows(S)):
        r = min(r, r ^ b)
    return r == 0


def orientation_class_count(S: SurfaceComplex) -> int:
    return 2 ** (S.nedges - len(_z2_reduce(_reflection_rows(S))))


def canonical_orientation(S: SurfaceComplex, omega: Orientation) -> Orientation:
    """Normal form of the class of omega: the reduced difference from all-plus."""
    _check_orientation(S, omega)
    r = _difference(default_orientation(S), omega)
    for b in _z2_reduce(_reflection_rows(S)):
        r = min(r, r ^ b)
    return tuple(-1 if (r >> i) & 1 else 1 for i in range(S.nedges))


def all_orientations(S: SurfaceComplex):
    for signs in itertools.product((1, -1), repeat=S.nedges):
        yield tuple(signs)


def points_along(S: SurfaceComplex, omega: Orientation, exit_side: Side) -> bool:
    """True when omega points from the triangle of exit_side across it."""
    i = S.edge_of[exit_side]
    return (omega[i] == 1) == S.is_first(exit_side)


# paths on the fatgraph ------------------------------------------------------

Path = Tuple[Side, ...]


def check_path(S: SurfaceComplex, path: Sequence[Side], start: Optional[int] = None,
               closed: bool = False) -> Path:
    """Validate a sequence of exit sides; each exit lies in the triangle just entered."""
    path = tuple((int(t), int(k)) for t, k in path)
    if not path:
        return path
    for s in path:
        if s not in S.mate:
            raise PathError(f"no side {s[0]}.{s[1]}")
    if start is not None and path[0][0] != start:
        raise PathError(f"path starts in triangle {path[0][0]}, expected {start}")
    for p, q in zip(path, path[1:]):
        u, j = S.mate[p]
        if q[0] != u:
            raise PathError(f"exit {q} is not in triangle {u} entered through {p}")
        if q[1] == j:
            raise PathError(f"path backtracks at {q}")
    if closed:
        u, j = S.mate[path[-1]]
        if u != path[0][0]:
            raise PathError("path is not closed")
    return path


def turns(S: SurfaceComplex, gamma: Sequence[Side]) -> List[str]:
    """Turn letters 'L'/'R' at each triangle of a closed path (cyclically)."""
    gamma = check_path(S, gamma, closed=True)
    out = []
    n = len(gamma)
    for i in range(n):
        _, j = S.mate[gamma[i - 1]]
        k = gamma[i][1]
        if k == (j + 1) % 3:
            out.append("L")
        elif k == (j + 2) % 3:
            out.append("R")
        else:
            raise PathError("closed path backtracks")
    return out


def spin_counts(S: SurfaceComplex, omega: Orientation, gamma: Sequence[Side]) -> Dict[str, int]:
    _check_orientation(S, omega)
    t = turns(S, gamma)
    agree = sum(1 for s in gamma if points_along(S, omega, s))
    return {"L": t.count("L"), "R": t.count("R"), "N": agree, "Nbar": len(gamma) - agree}


def spin_quadratic_form(S: SurfaceComplex, omega: Orientation, gamma: Sequence[Side]) -> int:
    c = spin_counts(S, omega, gamma)
    return -1 if (c["L"] + c["N"]) % 2 else 1


def spin_quadratic_form_right(S: SurfaceComplex, omega: Orientation, gamma: Sequence[Side]) -> int:
    c = spin_counts(S, omega, gamma)
    return -1 if (c["R"] + c["Nbar"]) % 2 else 1


def puncture_loops(S: SurfaceComplex) -> List[Path]:
    """One closed path per puncture, turning left at every triangle."""
    seen = set()
    loops = []
    for start in S.sides():
        if start in seen:
            continue
        path = []
        s = start
        while s not in seen:
            seen.add(s)
            path.append(s)
            u, j = S.mate[s]
            s = (u, (j + 1) % 3)
        if s == start:
            loops.append(tuple(path))
    return loops


# coordinates ----------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateVector:
    """Edge lengths, triangle fermion pairs and ratios.

    ``hval[i]`` is the ratio on the first side of edge i (the half-edge
    pointing into that side's triangle); the second side carries its inverse.
    """

    lam: Tuple[GrassmannNumber, ...]
    theta: Tuple[Odd2, ...]
    hval: Tuple[GrassmannNumber, ...]
    ngen: int

    def ratio(self, S: SurfaceComplex, side: Side) -> GrassmannNumber:
        i = S.edge_of[side]
        return self.hval[i] if S.is_first(side) else inv(self.hval[i])

    def with_ratio(self, S: SurfaceComplex, side: Side, value: GrassmannNumber) -> "CoordinateVector":
        i = S.edge_of[side]
        h = list(self.hval)
        h[i] = value if S.is_first(side) else inv(value)
        return replace(self, hval=tuple(h))

    def lam_side(self, S: SurfaceComplex, side: Side) -> GrassmannNumber:
        return self.lam[S.edge_of[side]]

    def max_diff(self, other: "CoordinateVector") -> float:
        vals = [(a - b).max_abs() for a, b in zip(self.lam, other.lam)]
        vals += [(a - b).max_abs() for a, b in zip(self.hval, other.hval)]
        for p, q in zip(self.theta, other.theta):
            vals += [(p[0] - q[0]).max_abs(), (p[1] - q[1]).max_abs()]
        return max(vals, default=0.0)


def _g(x, ngen) -> GrassmannNumber:
    return x if isinstance(x, GrassmannNumber) else GrassmannNumber.const(x, ngen)


def make_coordinates(S: SurfaceComplex, lam, theta, hval, ngen: int) -> CoordinateVector:
    c = CoordinateVector(tuple(_g(x, ngen) for x in lam),
                         tuple((_g(p, ngen), _g(q, ngen)) for p, q in theta),
                         tuple(_g(x, ngen) for x in hval), ngen)
    validate_coordinates(S, c)
    return c


def validate_coordinates(S: SurfaceComplex, c: CoordinateVector):
    if len(c.lam) != S.nedges or len(c.hval) != S.nedges or len(c.theta) != S.ntri:
        raise SurfaceError("coordinate vector does not match the surface")
    for i, x in enumerate(c.lam):
        if x.parity() != "even" or x.body() <= 0:
            raise DomainError(f"lambda on edge {i} must be even with positive body")
    for i, x in enumerate(c.hval):
        if x.parity() != "even" or x.body() <= 0:
            raise DomainError(f"ratio on edge {i} must be even with positive body")
    for t, pair in enumerate(c.theta):
        for x in pair:
            if not x.is_zero() and x.parity() != "odd":
                raise ParityError(f"fermions of triangle {t} must be odd")


def default_ngen(S: SurfaceComplex) -> int:
    return 2 * S.ntri + 2


def random_coordinates(S: SurfaceComplex, rng: np.random.Generator, ngen: Optional[int] = None,
                       fermions: bool = True, ratios: bool = True, souls: bool = True) -> CoordinateVector:
    """Generic coordinates: lambda and ratios with even souls, fermions mixing all generators."""
    n = ngen if ngen is not None else default_ngen(S)
    gens = [GrassmannNumber.gen(i, n) for i in range(n)]

    def odd():
        out = GrassmannNumber({}, n)
        for g in gens:
            out = out + g * float(rng.normal(scale=0.6))
        return out

    def even(lo, hi, use_soul):
        x = GrassmannNumber.const(float(rng.uniform(lo, hi)), n)
        if use_soul and n >= 2:
            i, j = rng.choice(n, size=2, replace=False)
            x = x + gens[int(i)] * gens[int(j)] * float(rng.normal(scale=0.3))
        return x

    lam = [even(0.5, 2.0, souls) for _ in range(S.nedges)]
    hval = [even(0.5, 2.0, souls) if ratios else GrassmannNumber.const(1.0, n) for _ in range(S.nedges)]
    zero = GrassmannNumber({}, n)
    theta = [(odd(), odd()) if fermions else (zero, zero) for _ in range(S.ntri)]
    return make_coordinates(S, lam, theta, hval, n)


def vertex_rescale(S: SurfaceComplex, c: CoordinateVector, T: int, alpha) -> CoordinateVector:
    alpha = _g(alpha, c.ngen)
    if alpha.parity() != "even" or alpha.body() <= 0:
        raise DomainError("rescaling factor must be even with positive body")
    ai = inv(alpha)
    h = list(c.hval)
    for k in range(3):
        i = S.edge_of[(T, k)]
        if S.is_loop(i):
            continue
        h[i] = h[i] * (alpha if S.is_first((T, k)) else ai)
    th = list(c.theta)
    t1, t2 = th[T]
    th[T] = (ai * t1, alpha * t2)
    return replace(c, hval=tuple(h), theta=tuple(th))


def vertex_products(S: SurfaceComplex, c: CoordinateVector) -> List[GrassmannNumber]:
    """Product of the three ratios into each triangle."""
    out = []
    for t in range(S.ntri):
        p = GrassmannNumber.const(1.0, c.ngen)
        for k in range(3):
            p = p * c.ratio(S, (t, k))
        out.append(p)
    return out


def _gauge_matrix(S: SurfaceComplex) -> np.ndarray:
    """Rows: triangles; columns: edges; entry is the log-exponent of hval in the vertex product."""
    C = np.zeros((S.ntri, S.nedges))
    for i, ((t, _), (u, _)) in enumerate(S.edges):
        C[t, i] += 1.0
        C[u, i] -= 1.0
    return C


def gauge_factors(S: SurfaceComplex, c: CoordinateVector) -> List[GrassmannNumber]:
    """Rescaling factors that bring every vertex product to one."""
    C = _gauge_matrix(S)
    # rescaling by exp(x_t) adds (C C^T x)_t to log of the product at t
    L = C @ C.T
    rhs = [log_even(p) for p in vertex_products(S, c)]
    masks = sorted(set().union(*(r.coeffs.keys() for r in rhs)))
    pinv = np.linalg.pinv(L)
    x = [GrassmannNumber({}, c.ngen) for _ in range(S.ntri)]
    for m in masks:
        b = np.array([-r.coeffs.get(m, 0.0) for r in rhs])
        sol = pinv @ b
        for t in range(S.ntri):
            x[t] = x[t] + GrassmannNumber({m: float(sol[t])}, c.ngen)
    return [exp_even(v) for v in x]


def normalize_ratios(S: SurfaceComplex, c: CoordinateVector) -> CoordinateVector:
    out = c
    for t, a in enumerate(gauge_factors(S, c)):
        out = vertex_rescale(S, out, t, a)
    return out


def independent_ratio_count(S: SurfaceComplex) -> int:
    return S.nedges - int(np.linalg.matrix_rank(_gauge_matrix(S)))


def dimension_audit(S: SurfaceComplex) -> Dict[str, int]:
    even = S.nedges + independent_ratio_count(S)
    odd = 2 * S.ntri
    g, s = S.genus, S.punctures
    return {"even": even, "odd": odd, "even_expected": 8 * g + 4 * s - 7, "odd_expected": 8 * g + 4 * s - 8}


# file format ----------------------------------------------------------------

def _side_text(s: Side) -> str:
    return f"{s[0]}.{s[1]}"


def _parse_side(tok: str, line: int) -> Side:
    m = re.fullmatch(r"(\d+)\.([012])", tok)
    if not m:
        raise SurfaceParseError(f"bad side identifier {tok!r}", line)
    return int(m.group(1)), int(m.group(2))


def _sign_text(x: int) -> str:
    return "+" if x == 1 else "-"


def dump_surface(S: SurfaceComplex, c: Optional[CoordinateVector] = None,
                 orientations: Optional[Dict[str, Orientation]] = None) -> str:
    lines = [f"surface {FORMAT_VERSION}", f"triangles {S.ntri}"]
    for t in range(S.ntri):
        lines.append(f"  {t}: " + " ".join(_side_text((t, k)) for k in range(3)))
    lines.append(f"gluings {S.nedges}")
    for i, (a, b) in enumerate(S.edges):
        lines.append(f"  {i}: {_side_text(a)} {_side_text(b)}")
    for name, om in (orientations or {}).items():
        lines.append(f"orientation {name} " + " ".join(_sign_text(x) for x in om))
    if c is not None:
        lines.append(f"coordinates {c.ngen}")
        for i, x in enumerate(c.lam):
            lines.append(f"  lambda {i} {to_text(x)}")
        for t, (p, q) in enumerate(c.theta):
            lines.append(f"  theta {t} {to_text(p)} | {to_text(q)}")
        for i, x in enumerate(c.hval):
            lines.append(f"  ratio {_side_text(S.edges[i][0])} {to_text(x)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def load_surface(text: str):
    """Parse surface text; returns (surface, coordinates or None, orientations)."""
    rows = [(n + 1, ln.split("#", 1)[0].rstrip()) for n, ln in enumerate(text.splitlines())]
    rows = [(n, ln) for n, ln in rows if ln.strip()]
    if not rows:
        raise SurfaceParseError("empty file")
    n0, head = rows[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "surface":
        raise SurfaceParseError("missing 'surface <version>' header", n0)
    if parts[1] != str(FORMAT_VERSION):
        raise SurfaceParseError(f"unsupported version {parts[1]}", n0)
    ntri = None
    gluings: List[Tuple[Side, Side]] = []
    orients: Dict[str, List[int]] = {}
    coords = None
    lam: Dict[int, GrassmannNumber] = {}
    theta: Dict[int, Odd2] = {}
    ratio: Dict[Side, GrassmannNumber] = {}
    glued_at: Dict[Side, int] = {}
    block = None
    ended = False
    for n, ln in rows[1:]:
        if ended:
            raise SurfaceParseError("content after 'end'", n)
        toks = ln.split()
        indented = ln[0].isspace()
        if not indented:
            key = toks[0]
            if key == "triangles":
                ntri = _int(toks, 1, n)
                block = "triangles"
            elif key == "gluings":
                block = "gluings"
            elif key == "orientation":
                if len(toks) < 3:
                    raise SurfaceParseError("orientation needs a name and signs", n)
                bad = [x for x in toks[2:] if x not in "+-"]
                if bad:
                    raise SurfaceParseError(f"bad orientation sign {bad[0]!r}", n)
                orients[toks[1]] = [1 if x == "+" else -1 for x in toks[2:]]
                block = None
            elif key == "coordinates":
                coords = _int(toks, 1, n)
                block = "coordinates"
            elif key == "end":
                ended = True
            else:
                raise SurfaceParseError(f"unknown keyword {key!r}", n)
            continue
        if block == "triangles":
            want = [_side_text((int(toks[0].rstrip(":")), k)) for k in range(3)] if toks[0].rstrip(":").isdigit() else None
            if want is None or toks[1:] != want:
                raise SurfaceParseError(f"triangle line must read '<t>: t.0 t.1 t.2', got {ln.strip()!r}", n)
        elif block == "gluings":
            if len(toks) != 3:
                raise SurfaceParseError("gluing line needs an index and two sides", n)
            pair = (_parse_side(toks[1], n), _parse_side(toks[2], n))
            for sd in pair:
                if ntri is not None and sd[0] >= ntri:
                    raise SurfaceParseError(f"side {_side_text(sd)} in gluing {toks[1]}~{toks[2]} "
                                            f"names a missing triangle", n)
                if sd in glued_at:
                    raise SurfaceParseError(f"side {_side_text(sd)} in gluing {toks[1]}~{toks[2]} "
                                            f"is already glued on line {glued_at[sd]}", n)
                glued_at[sd] = n
            gluings.append(pair)
        elif block == "coordinates":
            try:
                if toks[0] == "lambda":
                    lam[int(toks[1])] = from_text(" ".join(toks[2:]), coords)
                elif toks[0] == "theta":
                    rest = " ".join(toks[2:]).split("|")
                    if len(rest) != 2:
                        raise SurfaceParseError("theta needs two entries separated by '|'", n)
                    theta[int(toks[1])] = (from_text(rest[0].strip(), coords), from_text(rest[1].strip(), coords))
                elif toks[0] == "ratio":
                    ratio[_parse_side(toks[1], n)] = from_text(" ".join(toks[2:]), coords)
                else:
                    raise SurfaceParseError(f"unknown coordinate {toks[0]!r}", n)
            except (GrassmannError, ValueError) as exc:
                if isinstance(exc, SurfaceParseError):
                    raise
                raise SurfaceParseError(str(exc), n) from exc
        else:
            raise SurfaceParseError("indented line outside a block", n)
    if not ended:
        raise SurfaceParseError("missing 'end'")
    if ntri is None:
        raise SurfaceParseError("missing triangles block")
    try:
        S = build_surface(ntri, gluings)
    except SurfaceError as exc:
        raise SurfaceParseError(str(exc)) from exc
    om = {}
    for name, signs in orients.items():
        if len(signs) != S.nedges:
            raise SurfaceParseError(f"orientation {name} has {len(signs)} signs for {S.nedges} edges")
        om[name] = tuple(signs)
    c = None
    if coords is not None:
        try:
            hv = []
            for i, (a, b) in enumerate(S.edges):
                if a in ratio:
                    hv.append(ratio[a])
                elif b in ratio:
                    hv.append(inv(ratio[b]))
                else:
                    raise SurfaceParseError(f"missing ratio on edge {i}")
            c = make_coordinates(S, [lam[i] for i in range(S.nedges)],
                                 [theta[t] for t in range(S.ntri)], hv, coords)
        except KeyError as exc:
            raise SurfaceParseError(f"missing coordinate entry {exc}") from exc
        except GrassmannError as exc:
            raise SurfaceParseError(str(exc)) from exc
    return S, c, om


def _int(toks, i, line) -> int:
    try:
        return int(toks[i])
    except (IndexError, ValueError):
        raise SurfaceParseError("expected an integer", line) from None


# equivalence ----------------------------------------------------------------

def gauge_between(S: SurfaceComplex, c1: CoordinateVector, c2: CoordinateVector):
    """Rescaling factors alpha_t taking the ratios of c1 to those of c2, and the residual."""
    C = _gauge_matrix(S)
    # vertex rescaling multiplies hval[i] by alpha_first / alpha_second
    rhs = [log_even(b * inv(a)) for a, b in zip(c1.hval, c2.hval)]
    masks = sorted(set().union(*(r.coeffs.keys() for r in rhs)))
    pinv = np.linalg.pinv(C.T)
    x = [GrassmannNumber({}, c1.ngen) for _ in range(S.ntri)]
    resid = 0.0
    for m in masks:
        b = np.array([r.coeffs.get(m, 0.0) for r in rhs])
        sol = pinv @ b
        resid = max(resid, float(np.abs(C.T @ sol - b).max()))
        for t in range(S.ntri):
            x[t] = x[t] + GrassmannNumber({m: float(sol[t])}, c1.ngen)
    return [exp_even(v) for v in x], resid


def same_coordinate_class(S: SurfaceComplex, c1: CoordinateVector, c2: CoordinateVector,
                          tol: float = 1e-9):
    """Whether c2 is c1 after vertex rescalings and fermion sign changes.

    Returns (equivalent, signs) where signs[t] = -1 marks a triangle whose
    fermions changed sign (a reflection of the orientation fields at t).
    """
    if any((a - b).max_abs() > tol for a, b in zip(c1.lam, c2.lam)):
        return False, None
    alphas, resid = gauge_between(S, c1, c2)
    if resid > tol:
        return False, None
    # alphas are fixed up to a common factor, which rescales every triangle
    # at once; compare the products theta_{t,1} theta_{u,2}, which do not see it
    want = [(inv(a) * p[0], a * p[1]) for a, p in zip(alphas, c1.theta)]
    got = c2.theta
    signs = [1] * S.ntri
    ref = max(range(S.ntri), key=lambda t: (want[t][0] * want[t][1]).max_abs())
    for t in range(S.ntri):
        for sg in (1, -1):
            if (got[t][0] * got[ref][1] - want[t][0] * want[ref][1] * sg).max_abs() <= tol:
                signs[t] = sg
                break
        else:
            return False, None
    for t in range(S.ntri):
        for u in range(S.ntri):
            err = (got[t][0] * got[u][1] - want[t][0] * want[u][1] * (signs[t] * signs[u])).max_abs()
            if err > tol:
                return False, None
    return True, signs
