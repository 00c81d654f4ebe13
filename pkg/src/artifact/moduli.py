"""Orbits of triples and quadruples on the special light cone.

Standard position of a triple, odd invariants, prime and upside-down
transformations, fermion extraction and reconstruction of a quadrilateral
from its lambda-lengths, odd pair and ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .grassmann import DomainError, GrassmannError, GrassmannNumber, ParityError, inv, power_even, sqrt_even
from .lightcone import LightVector, act, pairing
from .superalgebra import GroupElement, compose, make_generator

ORIENT_TOL = 1e-9

Odd2 = Tuple[GrassmannNumber, GrassmannNumber]


class OrientationError(GrassmannError):
    pass


class DegeneracyError(GrassmannError):
    pass


def _g(x, ngen) -> GrassmannNumber:
    return x if isinstance(x, GrassmannNumber) else GrassmannNumber.const(x, ngen)


def _positive(x: GrassmannNumber, what: str):
    if x.parity() != "even":
        raise ParityError(f"{what} must be even")
    if x.body() <= 0:
        raise DomainError(f"{what} needs a positive body")


def _odd_pair(theta: Odd2, what: str = "theta"):
    for x in theta:
        if not x.is_zero() and x.parity() != "odd":
            raise ParityError(f"{what} must be a pair of odd elements")


def rescale(a: GrassmannNumber, theta: Odd2) -> Odd2:
    """a.theta = (a theta_1, a^-1 theta_2)."""
    return (a * theta[0], inv(a) * theta[1])


def op(theta: Odd2) -> Odd2:
    return (theta[1], theta[0])


def neg(theta: Odd2) -> Odd2:
    return (-theta[0], -theta[1])


def c_theta(theta: Odd2) -> GrassmannNumber:
    """The constant 1 + theta_1 theta_2 / 6; its cube times Z_{1 - theta_1 theta_2/2} is 1."""
    return 1.0 + theta[0] * theta[1] * (1.0 / 6.0)


@dataclass(frozen=True)
class StandardTriple:
    r: GrassmannNumber
    s: GrassmannNumber
    t: GrassmannNumber
    theta: Odd2

    def points(self):
        return standard_triple(self.r, self.s, self.t, self.theta)


def standard_triple(r, s, t, theta: Odd2):
    """A = r(0,1,0,0|0), B = t(1,1,1,th1 th2/2|th1,th2,-th2,th1), C = s(1,0,0,0|0)."""
    n = theta[0].ngen
    r, s, t = _g(r, n), _g(s, n), _g(t, n)
    for x, w in ((r, "r"), (s, "s"), (t, "t")):
        _positive(x, w)
    _odd_pair(theta)
    t1, t2 = theta
    A = LightVector.make(n, x2=r)
    B = LightVector.make(n, t, t, t, t * t1 * t2 * 0.5, t * t1, t * t2, -(t * t2), t * t1)
    C = LightVector.make(n, x1=s)
    return A, B, C


def orientation(A: LightVector, B: LightVector, C: LightVector) -> float:
    m = np.array([[P.x1.body(), P.x2.body(), P.y.body()] for P in (A, B, C)])
    return float(np.linalg.det(m))


def _to_e0_direction(C: LightVector) -> GroupElement:
    """An element sending C to a positive multiple of (1,0,0,0|0)."""
    n = C.ngen
    J = make_generator("J", ngen=n)
    g = compose(_to_a_direction(act(J, C)), J)
    # J^-1 rather than J so that a standard triple is fixed, not sent to Z_{-1} of itself
    return compose(make_generator("Jinv", ngen=n), g)


def _to_a_direction(A: LightVector) -> GroupElement:
    """U, V, W moves sending A (x2 body > 0) to a multiple of (0,1,0,0|0)."""
    n = A.ngen
    if A.x2.body() <= ORIENT_TOL:
        raise DegeneracyError("x2 has vanishing body")
    x2i = inv(A.x2)
    U = make_generator("U", -(A.xi2m * x2i), ngen=n)
    V = make_generator("V", A.xi1m * x2i, ngen=n)
    g = compose(V, U)
    A1 = act(g, A)
    W = make_generator("W", -(A1.y * inv(A1.x2)), ngen=n)
    return compose(W, g)


def triple_to_standard(A: LightVector, B: LightVector, C: LightVector):
    """Return (g, StandardTriple) with g.(A,B,C) in standard position."""
    n = A.ngen
    if orientation(A, B, C) <= ORIENT_TOL:
        raise OrientationError("triple is not positively ordered")
    for P, Q in ((A, B), (B, C), (A, C)):
        if pairing(P, Q).body() <= ORIENT_TOL:
            raise DegeneracyError("pairing body vanishes")
    g = _to_e0_direction(C)
    g = compose(_to_a_direction(act(g, A)), g)
    B1 = act(g, B)
    a = power_even(B1.x2 * inv(B1.x1), 0.25)
    g = compose(make_generator("Da", a, ngen=n), g)
    A2, B2, C2 = act(g, A), act(g, B), act(g, C)
    t = B2.x1
    ti = inv(t)
    return g, StandardTriple(A2.x2, C2.x1, t, (B2.xi1p * ti, B2.xi2p * ti))


def same_class(theta: Odd2, other: Odd2, tol: float = 1e-9) -> bool:
    """Necessary test for [theta] = [other]: the invariant product agrees."""
    return (theta[0] * theta[1]).close(other[0] * other[1], tol)


# transformations ------------------------------------------------------------

def prime(theta: Odd2, h_B, h_C, direction: str = "+") -> GroupElement:
    n = theta[0].ngen
    h_B, h_C = _g(h_B, n), _g(h_C, n)
    _positive(h_B, "h_B")
    _positive(h_C, "h_C")
    _odd_pair(theta)
    c = c_theta(theta)
    Z = lambda x: make_generator("Z", x, ngen=n)
    if direction == "+":
        return compose(Z(c), Z(inv(h_C)), make_generator("P", *theta, ngen=n), Z(h_B))
    if direction == "-":
        return compose(Z(inv(c)), Z(inv(h_C)), make_generator("Pinv", *theta, ngen=n), Z(h_B))
    raise ValueError(f"direction must be '+' or '-', got {direction!r}")


def prime_closed_form(theta: Odd2, h_B, h_C, M: LightVector) -> LightVector:
    """Closed form of the clockwise prime transformation on the special cone."""
    n = M.ngen
    h_B, h_C = _g(h_B, n), _g(h_C, n)
    t1, t2 = theta
    c = c_theta(theta)
    hBi = inv(h_B)
    x2 = M.x1
    z = M.z + (hBi * t2 * M.xi1p - h_B * t1 * M.xi2p + t1 * t2 * M.x1) * 0.5
    y = -M.y + (hBi * t2 * M.xi1p + h_B * t1 * M.xi2p) * 0.5 + M.x1
    xi1m = c * inv(h_C) * (h_B * M.xi2p - t2 * M.x1)
    xi2m = inv(c) * h_C * (-(hBi * M.xi1p) + t1 * M.x1)
    x2i = inv(x2)
    return LightVector(y * y * x2i, x2, y, z, y * x2i * xi2m, -(y * x2i * xi1m), xi1m, xi2m)


def upside_down(chi, h_e) -> GroupElement:
    """J o D_{sqrt chi} o Z_{h_e}."""
    n = chi.ngen if isinstance(chi, GrassmannNumber) else h_e.ngen
    chi, h_e = _g(chi, n), _g(h_e, n)
    _positive(chi, "chi")
    _positive(h_e, "h_e")
    return compose(make_generator("J", ngen=n),
                   make_generator("Da", sqrt_even(chi), ngen=n),
                   make_generator("Z", h_e, ngen=n))


def extract_fermions(D: LightVector) -> Odd2:
    """Odd pair of the triangle CDA read off D = (x1,x2,-y,z|...) with y > 0."""
    y = -D.y
    if y.body() <= 0 or D.x1.body() <= 0:
        raise DomainError("extraction needs positive bodies of -y and x1")
    k = inv(sqrt_even(y * D.x1))
    return (-(D.xi1p * k), -(D.xi2p * k))


def standard_fermions(B: LightVector) -> Odd2:
    """Odd pair of a vertex B = t(1,1,1,...|th1,th2,...) in standard position."""
    if B.x1.body() <= 0:
        raise DomainError("x1 body must be positive")
    ti = inv(B.x1)
    return (B.xi1p * ti, B.xi2p * ti)


# quadrilaterals -------------------------------------------------------------

@dataclass(frozen=True)
class QuadConfig:
    lam: Tuple[GrassmannNumber, ...]  # (a, b, c, d, e)
    theta: Odd2
    sigma: Odd2
    h_e: GrassmannNumber

    @property
    def chi(self) -> GrassmannNumber:
        a, b, c, d, _ = self.lam
        return a * c * inv(b * d)

    def points(self):
        return reconstruct_quad(self.lam, self.h_e, self.theta, self.sigma)


def reconstruct_quad(lam, h_e, theta: Odd2, sigma: Odd2):
    """Points A, B, C, D of the standard quadrilateral with the given data.

    Triangle ABC carries h_e.theta; the raw D carries sigma, so that the
    upside-down move sends triangle CDA to h_e^-1.sigma.
    """
    n = theta[0].ngen
    a, b, c, d, e = (_g(x, n) for x in lam)
    h_e = _g(h_e, n)
    for x, w in zip((a, b, c, d, e, h_e), "abcdeh"):
        _positive(x, w)
    _odd_pair(sigma, "sigma")
    r2 = math.sqrt(2.0)
    ei = inv(e)
    r = a * e * inv(b) * r2
    s = b * e * inv(a) * r2
    t = a * b * ei * r2
    A, B, C = standard_triple(r, s, t, rescale(h_e, theta))
    chi = a * c * inv(b * d)
    y = c * d * ei * r2
    rc = sqrt_even(chi)
    rci = inv(rc)
    s1, s2 = sigma
    D = LightVector(
        y * inv(chi), y * chi, -y, c * d * ei * s1 * s2 * (1.0 / r2),
        -(rci * y * s1), -(rci * y * s2), -(rc * y * s2), rc * y * s1,
    )
    return A, B, C, D
