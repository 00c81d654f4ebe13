"""Lift of a coordinate vector to the special light cone, and holonomy.

A frame ``(T, k)`` is triangle T viewed from its side k: the corners are
``C = k``, ``A = k+1``, ``B = k+2`` and side k is the diagonal of the
standard quadrilateral.  Every frame has a standard triple built from the
three lambda-lengths and the fermions of T rescaled by the ratio on side k.

A node of the cover window is a reduced path of side crossings starting at
the base frame.  Its transformation ``F`` satisfies
``lift(node) = F . standard(frame)``; each step multiplies on the right by
the inverse of a rotation inside the current triangle and the inverse of the
crossing move into the next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .grassmann import GrassmannNumber, inv
from .lightcone import LightVector, act_folded, lambda_length, special_defect
from .moduli import prime, rescale, standard_triple, upside_down
from .superalgebra import GroupElement, compose, make_generator, project_sl2
from .surface import (CoordinateVector, Orientation, PathError, Side, SurfaceComplex, check_path,
                      points_along, spin_counts, spin_quadratic_form, spin_quadratic_form_right)

Frame = Tuple[int, int]

DEFAULT_DEPTH = 4


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class LiftData:
    """Everything the lift depends on."""

    S: SurfaceComplex
    c: CoordinateVector
    omega_sigma: Orientation
    omega_iota: Orientation

    @property
    def ngen(self) -> int:
        return self.c.ngen

    def delta(self, i: int) -> int:
        return 1 if self.omega_sigma[i] == self.omega_iota[i] else -1


def frame_lengths(d: LiftData, fr: Frame):
    """(e, a, b) for frame (T, k)."""
    T, k = fr
    lam = lambda j: d.c.lam_side(d.S, (T, j % 3))
    return lam(k), lam(k + 1), lam(k + 2)


def standard_points(d: LiftData, fr: Frame):
    """Corners (A, B, C) of the frame's standard triple."""
    T, k = fr
    e, a, b = frame_lengths(d, fr)
    r2 = math.sqrt(2.0)
    r = a * e * inv(b) * r2
    s = b * e * inv(a) * r2
    t = a * b * inv(e) * r2
    h = d.c.ratio(d.S, fr)
    return standard_triple(r, s, t, rescale(h, d.c.theta[T]))


def corner_of(fr: Frame, label: str) -> int:
    return (fr[1] + {"C": 0, "A": 1, "B": 2}[label]) % 3


def rotation(d: LiftData, T: int, k: int, m: int) -> GroupElement:
    """Move sending frame (T,k)'s triple onto frame (T,m)'s with corners relabelled."""
    if m == k:
        return GroupElement.identity(d.ngen)
    th = d.c.theta[T]
    h_in = d.c.ratio(d.S, (T, k))
    h_out = d.c.ratio(d.S, (T, m))
    direction = "+" if m == (k + 1) % 3 else "-"
    return prime(th, h_in, h_out, direction)


def crossing(d: LiftData, exit_side: Side) -> GroupElement:
    """Move from frame (T, k) across side k to the frame of the glued side."""
    S = d.S
    T, k = exit_side
    i = S.edge_of[exit_side]
    u, j = S.mate[exit_side]
    a = d.c.lam_side(S, (T, (k + 1) % 3))
    b = d.c.lam_side(S, (T, (k + 2) % 3))
    cc = d.c.lam_side(S, (u, (j + 1) % 3))
    dd = d.c.lam_side(S, (u, (j + 2) % 3))
    chi = a * cc * inv(b * dd)
    n = d.ngen
    flip = d.delta(i) == -1
    x = GrassmannNumber.const(1.0, n) if flip else d.c.ratio(S, exit_side)
    parts = []
    if flip:
        parts.append(make_generator("Psi", ngen=n))
    if points_along(S, d.omega_sigma, exit_side):
        parts.append(make_generator("Z", -1.0, ngen=n))
    parts.append(upside_down(chi, x))
    return compose(*parts)


def path_transform(d: LiftData, base: Frame, path: Sequence[Side]) -> Tuple[GroupElement, Frame]:
    """F of the node reached by following path from the base frame."""
    S = d.S
    F = GroupElement.identity(d.ngen)
    fr = base
    for m, side in enumerate(path):
        T, k = fr
        if side[0] != T:
            raise PathError(f"step {m}: side {side} is not in triangle {T}")
        if m > 0 and side[1] == k:
            raise PathError(f"step {m}: path backtracks")
        R = rotation(d, T, k, side[1])
        X = crossing(d, side)
        F = compose(F, R.inverse(), X.inverse())
        fr = S.mate[side]
    return F, fr


def node_points(d: LiftData, base: Frame, path: Sequence[Side]):
    """Lifted corners of a node as a dict corner index -> LightVector."""
    F, fr = path_transform(d, base, path)
    A, B, C = standard_points(d, fr)
    T, k = fr
    return fr, {k: act_folded(F, C), (k + 1) % 3: act_folded(F, A), (k + 2) % 3: act_folded(F, B)}


# cover window ---------------------------------------------------------------

@dataclass
class WindowNode:
    path: Tuple[Side, ...]
    frame: Frame
    F: GroupElement
    vertices: Dict[int, int]  # corner index -> window vertex id


@dataclass
class Lift:
    data: LiftData
    base: Frame
    depth: int
    nodes: List[WindowNode] = field(default_factory=list)
    points: List[LightVector] = field(default_factory=list)
    # vertex id -> (node index, corner) that created it
    origin: List[Tuple[int, int]] = field(default_factory=list)
    # largest mismatch between a child's shared corners and its parent's
    seam_error: float = 0.0

    def node_index(self, path: Sequence[Side]) -> int:
        key = tuple(path)
        for i, nd in enumerate(self.nodes):
            if nd.path == key:
                return i
        raise KeyError(path)

    def corner_point(self, node: int, corner: int) -> LightVector:
        return self.points[self.nodes[node].vertices[corner]]

    def dump(self) -> str:
        lines = []
        for vid, (ni, corner) in enumerate(self.origin):
            nd = self.nodes[ni]
            where = ",".join(f"{t}.{k}" for t, k in nd.path) or "base"
            lines.append(f"v{vid} [{where} corner {corner}] {self.points[vid].to_text()}")
        return "\n".join(lines)


def _check_base(d: LiftData, base: Frame):
    T, k = base
    if not (0 <= T < d.S.ntri and 0 <= k < 3):
        raise LiftError(f"no frame {base}")


def build_lift(S: SurfaceComplex, c: CoordinateVector, omega_sigma: Orientation,
               omega_iota: Orientation, base: Frame = (0, 0), depth: int = DEFAULT_DEPTH) -> Lift:
    """Lift of the window of reduced crossing paths of length at most depth."""
    if depth < 1:
        raise LiftError("depth must be at least 1")
    d = LiftData(S, c, tuple(omega_sigma), tuple(omega_iota))
    _check_base(d, base)
    L = Lift(d, base, depth)
    A, B, C = standard_points(d, base)
    root = WindowNode((), base, GroupElement.identity(d.ngen), {})
    for corner, P in ((base[1], C), ((base[1] + 1) % 3, A), ((base[1] + 2) % 3, B)):
        root.vertices[corner] = len(L.points)
        L.points.append(P)
        L.origin.append((0, corner))
    L.nodes.append(root)
    frontier = [0]
    for level in range(depth):
        nxt = []
        for ni in frontier:
            nd = L.nodes[ni]
            T, k = nd.frame
            exits = [k, (k + 1) % 3, (k + 2) % 3] if not nd.path else [(k + 1) % 3, (k + 2) % 3]
            for m in exits:
                side = (T, m)
                R = rotation(d, T, k, m)
                X = crossing(d, side)
                F = compose(nd.F, R.inverse(), X.inverse())
                fr = S.mate[side]
                u, j = fr
                child = WindowNode(nd.path + (side,), fr, F, {})
                pA, pB, pC = standard_points(d, fr)
                P = {j: act_folded(F, pC), (j + 1) % 3: act_folded(F, pA), (j + 2) % 3: act_folded(F, pB)}
                # shared corners: child corner j is parent corner m+1, child j+1 is parent m
                shared = {j: nd.vertices[(m + 1) % 3], (j + 1) % 3: nd.vertices[m]}
                ci = len(L.nodes)
                for corner, vid in shared.items():
                    child.vertices[corner] = vid
                    L.seam_error = max(L.seam_error, P[corner].max_diff(L.points[vid]))
                new = (j + 2) % 3
                child.vertices[new] = len(L.points)
                L.points.append(P[new])
                L.origin.append((ci, new))
                L.nodes.append(child)
                nxt.append(ci)
        frontier = nxt
    return L


def lift_report(L: Lift) -> Dict[str, float]:
    """Largest special-cone defect and lambda-length mismatch over the window."""
    d = L.data
    S = d.S
    defect = max(special_defect(P) for P in L.points)
    lam_err = 0.0
    for nd in L.nodes:
        T, _ = nd.frame
        for k in range(3):
            P = L.points[nd.vertices[k]]
            Q = L.points[nd.vertices[(k + 1) % 3]]
            lam_err = max(lam_err, (lambda_length(P, Q) - d.c.lam_side(S, (T, k))).max_abs())
    return {"special_defect": defect, "lambda_error": lam_err, "seam_error": L.seam_error,
            "vertices": len(L.points), "triangles": len(L.nodes)}


# holonomy -------------------------------------------------------------------

def holonomy(S: SurfaceComplex, c: CoordinateVector, omega_sigma: Orientation, omega_iota: Orientation,
             gamma: Sequence[Side], base: Optional[Frame] = None) -> GroupElement:
    """Deck transformation of a closed crossing path starting in the base triangle.

    The base frame defaults to (T, k) where T is the triangle gamma starts in
    and k is the side through which gamma returns.
    """
    d = LiftData(S, c, tuple(omega_sigma), tuple(omega_iota))
    if not gamma:
        return GroupElement.identity(c.ngen)
    gamma = tuple(gamma)
    try:
        check_path(S, gamma, closed=True)
    except PathError:
        raise
    if base is None:
        base = S.mate[gamma[-1]]
    _check_base(d, base)
    if gamma[0][0] != base[0]:
        raise PathError("path does not start in the base triangle")
    F, fr = path_transform(d, base, gamma)
    if fr[0] != base[0]:
        raise PathError("path is not closed")
    return compose(F, rotation(d, base[0], fr[1], base[1]).inverse())


def trace_body(g: GroupElement) -> float:
    return float(np.trace(project_sl2(g)))


def closed_paths(S: SurfaceComplex, start: int = 0, maxlen: int = 4) -> List[Tuple[Side, ...]]:
    """Cyclically reduced closed crossing paths from triangle start, shortest first."""
    out = []
    layer = [((start, k),) for k in range(3)]
    for _ in range(maxlen):
        nxt = []
        for path in layer:
            u, j = S.mate[path[-1]]
            if u == start and path[0][1] != j:
                out.append(path)
            for m in range(3):
                if m != j:
                    nxt.append(path + ((u, m),))
        layer = nxt
    return out


def f11_generators(S: SurfaceComplex) -> Dict[str, Tuple[Side, ...]]:
    """Two closed paths generating the fundamental group of the torus complex."""
    return {"a": ((0, 0), (1, 1)), "b": ((0, 0), (1, 2))}


def reduce_path(S: SurfaceComplex, path: Sequence[Side]) -> Tuple[Side, ...]:
    """Cancel immediate backtracking: crossing a side and straight back."""
    out: List[Side] = []
    for s in path:
        if out and S.mate[out[-1]] == s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def concat_at_base(S: SurfaceComplex, gamma: Sequence[Side], path: Sequence[Side]) -> Tuple[Side, ...]:
    return reduce_path(S, tuple(gamma) + tuple(path))


def _scale(P: LightVector) -> float:
    return max(1.0, max(x.max_abs() for x in P.slots()))


def equivariance_error(L: Lift, gammas: Dict[str, Sequence[Side]], relative: bool = False) -> float:
    """max over window corners of |rho(gamma).lift(x) - lift(gamma x)|.

    With ``relative`` each difference is divided by the largest coefficient
    of lift(gamma x) (at least 1).  Coefficients of deep window points grow
    quickly and rounding grows with them.
    """
    d = L.data
    worst = 0.0
    for gamma in gammas.values():
        rho = holonomy(d.S, d.c, d.omega_sigma, d.omega_iota, gamma, base=L.base)
        for nd in L.nodes:
            moved = concat_at_base(d.S, gamma, nd.path)
            fr, pts = node_points(d, L.base, moved)
            if fr[0] != nd.frame[0]:
                raise LiftError("translated node lands in a different triangle")
            for corner, vid in nd.vertices.items():
                err = act_folded(rho, L.points[vid]).max_diff(pts[corner])
                worst = max(worst, err / _scale(pts[corner]) if relative else err)
    return worst


@dataclass
class SpinReport:
    rows: List[Dict]

    @property
    def ok(self) -> bool:
        return all(r["match"] for r in self.rows)

    def text(self) -> str:
        out = []
        for r in self.rows:
            out.append(f"{r['name']}: trace={r['trace']:+.12g} q={r['q']:+d} "
                       f"L={r['L']} N={r['N']} R={r['R']} Nbar={r['Nbar']} "
                       f"{'match' if r['match'] else 'MISMATCH'}")
        return "\n".join(out)


def check_spin_consistency(S: SurfaceComplex, c: CoordinateVector, omega_sigma: Orientation,
                           omega_iota: Orientation, cycles: Dict[str, Sequence[Side]]) -> SpinReport:
    rows = []
    for name, gamma in cycles.items():
        g = holonomy(S, c, omega_sigma, omega_iota, gamma)
        tr = trace_body(g)
        q = spin_quadratic_form(S, omega_sigma, gamma)
        qr = spin_quadratic_form_right(S, omega_sigma, gamma)
        cnt = spin_counts(S, omega_sigma, gamma)
        rows.append(dict(name=name, trace=tr, q=q, q_right=qr, match=(tr > 0) == (q > 0) and q == qr, **cnt))
    return SpinReport(rows)
