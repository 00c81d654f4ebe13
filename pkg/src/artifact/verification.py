"""Randomised property checks grouped into suites.

Every check draws its inputs from a seeded generator and reports the worst
error seen together with the inputs that produced it.
"""

from __future__ import annotations

import contextlib
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional

import numpy as np

from . import moduli, ptolemy
from .grassmann import GrassmannNumber, inv, power_even, sqrt_even, to_text
from .lightcone import LightVector, act, e0, pairing, special_defect
from .moduli import prime, reconstruct_quad, rescale, standard_fermions
from .superalgebra import GroupElement, compose, make_generator, sdet, smul, str_
from .surface import (SurfaceComplex, all_orientations, default_orientation, dimension_audit, genus_surface,
                      puncture_loops, random_coordinates, sphere_f03, sphere_f03_theta, torus_f11)
from .teichmueller import build_lift, check_spin_consistency, equivariance_error, f11_generators, holonomy, trace_body

SUITES = ("grassmann", "algebra", "lightcone", "moduli", "spin", "ptolemy", "lift")


@dataclass
class CheckResult:
    name: str
    error: float
    tol: float
    samples: int
    seconds: float = 0.0
    counterexample: str = ""
    relative: bool = False

    @property
    def passed(self) -> bool:
        return self.error <= self.tol

    def line(self) -> str:
        kind = "rel" if self.relative else "abs"
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: max {kind} error {self.error:.3e} "
                f"(tol {self.tol:.0e}, n={self.samples}, {self.seconds:.2f}s)")


class _Worst:
    """Running maximum with the inputs that produced it."""

    def __init__(self):
        self.err = 0.0
        self.where = ""

    def see(self, err: float, where: Callable[[], str]):
        if err > self.err or not np.isfinite(err):
            self.err = err if np.isfinite(err) else float("inf")
            self.where = where()


class Draws:
    """Random Grassmann data on a fixed generator pool."""

    def __init__(self, rng: np.random.Generator, ngen: int = 6):
        self.rng = rng
        self.ngen = ngen
        self.gens = [GrassmannNumber.gen(i, ngen) for i in range(ngen)]

    def homogeneous(self, parity: str, density: float = 0.7) -> GrassmannNumber:
        want = 0 if parity == "even" else 1
        c = {}
        for m in range(1 << self.ngen):
            if bin(m).count("1") % 2 == want and self.rng.random() < density:
                c[m] = float(self.rng.normal())
        return GrassmannNumber(c, self.ngen)

    def element(self) -> GrassmannNumber:
        return self.homogeneous("even") + self.homogeneous("odd")

    def odd(self, scale: float = 0.6) -> GrassmannNumber:
        out = GrassmannNumber({}, self.ngen)
        for g in self.gens:
            out = out + g * float(self.rng.normal(scale=scale))
        return out

    def positive(self, lo: float = 0.5, hi: float = 2.0) -> GrassmannNumber:
        i, j = self.rng.choice(self.ngen, size=2, replace=False)
        x = GrassmannNumber.const(float(self.rng.uniform(lo, hi)), self.ngen)
        return x + self.gens[int(i)] * self.gens[int(j)] * float(self.rng.normal(scale=0.3))

    def pair(self):
        return (self.odd(), self.odd())

    def quad(self):
        lam = tuple(self.positive() for _ in range(5))
        h = tuple(self.positive() for _ in range(5))
        return lam, h, self.pair(), self.pair()

    def token_word(self, maxlen: int = 6, psi: bool = True) -> GroupElement:
        kinds = ["D", "Da", "Z", "J", "Jinv", "U", "V", "W", "Ucal", "Ucalinv", "P", "Pinv"]
        if psi:
            kinds.append("Psi")
        out = GroupElement.identity(self.ngen)
        for _ in range(int(self.rng.integers(1, maxlen + 1))):
            out = compose(out, self.generator(kinds[int(self.rng.integers(len(kinds)))]))
        return out

    def generator(self, kind: str) -> GroupElement:
        n = self.ngen
        if kind == "D":
            return make_generator("D", self.positive(), self.positive(), ngen=n)
        if kind in ("Da", "Z"):
            return make_generator(kind, self.positive(), ngen=n)
        if kind in ("U", "V"):
            return make_generator(kind, self.odd(), ngen=n)
        if kind == "W":
            return make_generator("W", self.positive(-1.0, 1.0), ngen=n)
        if kind in ("Ucal", "Ucalinv", "P", "Pinv"):
            return make_generator(kind, self.odd(), self.odd(), ngen=n)
        return make_generator(kind, ngen=n)

    def special(self) -> LightVector:
        return act(self.token_word(4), e0(self.ngen).scale(self.positive()))


def _timed(name: str, tol: float, fn, relative: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    w, n = fn()
    return CheckResult(name, w.err, tol, n, time.perf_counter() - t0, w.where, relative)


# grassmann ------------------------------------------------------------------

def check_grassmann(rng: np.random.Generator, count: int = 1000, ngen: int = 6) -> List[CheckResult]:
    dr = Draws(rng, ngen)
    pool = [dr.element() for _ in range(count)]
    evens = [dr.homogeneous("even") for _ in range(count)]
    odds = [dr.homogeneous("odd") for _ in range(count)]
    idx = lambda: int(rng.integers(count))

    def assoc():
        w = _Worst()
        for _ in range(count):
            a, b, c = pool[idx()], pool[idx()], pool[idx()]
            w.see(((a * b) * c - a * (b * c)).max_abs(), lambda: f"a={to_text(a)} b={to_text(b)} c={to_text(c)}")
        return w, count

    def supercomm():
        w = _Worst()
        for _ in range(count):
            for x, y, sgn in ((evens[idx()], pool[idx()], 1.0), (odds[idx()], odds[idx()], -1.0),
                              (odds[idx()], evens[idx()], 1.0)):
                w.see((x * y - y * x * sgn).max_abs(), lambda: f"x={to_text(x)} y={to_text(y)}")
        return w, 3 * count

    def body_mult():
        w = _Worst()
        for _ in range(count):
            a, b = pool[idx()], pool[idx()]
            w.see(abs((a * b).body() - a.body() * b.body()), lambda: f"a={to_text(a)} b={to_text(b)}")
        return w, count

    def inverse():
        w = _Worst()
        one = GrassmannNumber.const(1.0, ngen)
        for a in evens:
            if abs(a.body()) < 0.1:
                a = a + 1.0
            w.see(max((a * inv(a) - one).max_abs(), (inv(a) * a - one).max_abs()), lambda: f"a={to_text(a)}")
        return w, count

    def square_root():
        w = _Worst()
        for a in evens:
            a = a + (abs(a.body()) + 0.5 - a.body())
            r = sqrt_even(a)
            w.see((r * r - a).max_abs(), lambda: f"a={to_text(a)}")
        return w, count

    return [
        _timed("grassmann.associativity", 1e-9, assoc),
        _timed("grassmann.supercommutativity", 1e-9, supercomm),
        _timed("grassmann.body_multiplicative", 1e-9, body_mult),
        _timed("grassmann.inverse_roundtrip", 1e-9, inverse),
        _timed("grassmann.sqrt_roundtrip", 1e-9, square_root),
    ]


# superalgebra ---------------------------------------------------------------

GENERATOR_KINDS = ("D", "Da", "Z", "J", "Jinv", "U", "V", "W", "Ucal", "Ucalinv", "P", "Pinv")


def check_algebra(rng: np.random.Generator, count: int = 500, ngen: int = 6) -> List[CheckResult]:
    dr = Draws(rng, ngen)
    words = [(dr.token_word(6), dr.token_word(6)) for _ in range(count)]

    def mult():
        w = _Worst()
        for g, h in words:
            err = (sdet(smul(g.mat, h.mat)) - sdet(g.mat) * sdet(h.mat)).max_abs()
            w.see(err, lambda: f"g={g.word_text()} h={h.word_text()}")
        return w, count

    def cyclic():
        w = _Worst()
        for g, h in words:
            err = (str_(smul(g.mat, h.mat)) - str_(smul(h.mat, g.mat))).max_abs()
            w.see(err, lambda: f"g={g.word_text()} h={h.word_text()}")
        return w, count

    def unit():
        w = _Worst()
        for _ in range(max(1, count // len(GENERATOR_KINDS))):
            for kind in GENERATOR_KINDS:
                g = dr.generator(kind)
                w.see((sdet(g.mat) - 1.0).max_abs(), lambda: f"g={g.word_text()}")
        return w, max(1, count // len(GENERATOR_KINDS)) * len(GENERATOR_KINDS)

    return [
        _timed("algebra.sdet_multiplicative", 1e-9, mult),
        _timed("algebra.str_cyclic", 1e-9, cyclic),
        _timed("algebra.generator_sdet_one", 1e-9, unit),
    ]


# light cone -----------------------------------------------------------------

def check_lightcone(rng: np.random.Generator, count: int = 500, ngen: int = 6) -> List[CheckResult]:
    dr = Draws(rng, ngen)
    kinds = GENERATOR_KINDS + ("Psi",)
    cases = []
    for i in range(count):
        cases.append((dr.special(), dr.special(), dr.generator(kinds[i % len(kinds)])))

    def invariance():
        w = _Worst()
        for M, N, g in cases:
            err = (pairing(act(g, M), act(g, N)) - pairing(M, N)).max_abs()
            w.see(err, lambda: f"g={g.word_text()} M={M.to_text()} N={N.to_text()}")
        return w, count

    def cone():
        w = _Worst()
        for M, _, g in cases:
            w.see(max(special_defect(M), special_defect(act(g, M))), lambda: f"g={g.word_text()} M={M.to_text()}")
        return w, count

    return [
        _timed("lightcone.pairing_invariant", 1e-9, invariance),
        _timed("lightcone.special_cone_preserved", 1e-9, cone),
    ]


# moduli ---------------------------------------------------------------------

def check_moduli(rng: np.random.Generator, count: int = 100, ngen: int = 6) -> List[CheckResult]:
    dr = Draws(rng, ngen)
    draws = [(dr.pair(), dr.positive(), dr.positive(), dr.positive()) for _ in range(count)]
    ident = GroupElement.identity(ngen).mat

    def cube():
        return _prime_cube([th for th, *_ in draws], ngen)

    def cocycle():
        w = _Worst()
        for th, hA, hB, hC in draws:
            g = compose(prime(th, hA, hB), prime(th, hC, hA), prime(th, hB, hC))
            err = g.mat.max_diff(ident) + (1.0 if g.psi else 0.0)
            w.see(err, lambda: f"theta=({to_text(th[0])}, {to_text(th[1])}) h=({to_text(hA)}, {to_text(hB)}, {to_text(hC)})")
        return w, count

    return [
        _timed("moduli.prime_cube", 1e-12, cube),
        _timed("moduli.prime_cocycle", 1e-12, cocycle),
        check_dimension_audit(),
    ]


def _prime_cube(pairs, ngen: int):
    ident = GroupElement.identity(ngen).mat
    w = _Worst()
    for th in pairs:
        # the normalised prime element with unit ratios is Z_c o P'; its cube is Z_{c^3} P'^3
        P = make_generator("P", *th, ngen=ngen)
        want = make_generator("Z", 1.0 - th[0] * th[1] * 0.5, ngen=ngen)
        err_p = compose(P, P, P).mat.max_diff(want.mat)
        g = prime(th, 1.0, 1.0)
        err_n = compose(g, g, g).mat.max_diff(ident)
        w.see(max(err_p, err_n), lambda: f"theta=({to_text(th[0])}, {to_text(th[1])})")
    return w, len(pairs)


def check_dimension_audit() -> CheckResult:
    def run():
        w = _Worst()
        for name, S in (("F11", torus_f11()), ("F03", sphere_f03()), ("F03theta", sphere_f03_theta()),
                        ("F21", genus_surface(2))):
            a = dimension_audit(S)
            err = float(abs(a["even"] - a["even_expected"]) + abs(a["odd"] - a["odd_expected"]))
            w.see(err, lambda: f"{name}: {a}")
        return w, 4
    return _timed("moduli.dimension_audit", 0.0, run)


# ptolemy --------------------------------------------------------------------

def _rel(x: GrassmannNumber, y: GrassmannNumber) -> float:
    return (x - y).max_abs() / max(abs(y.body()), 1e-300)


def _quad_text(lam, h, th, sg) -> str:
    t = lambda xs: "(" + ", ".join(to_text(x) for x in xs) + ")"
    return f"lam={t(lam)} h={t(h)} theta={t(th)} sigma={t(sg)}"


def odd_oracle(lam, h, theta, sigma, r=None):
    """Fermions of the new triangles replayed through prime and diagonal moves.

    Returns the (mu, nu) pairs the geometric construction produces, with the
    rescalings by the new ratios undone and the sign of nu applied.
    """
    n = theta[0].ngen
    r = r or ptolemy.flip_quad(lam, h, theta, sigma)
    _, _, _, D = reconstruct_quad(lam, h[4], theta, sigma)
    out = []
    for hx, direction, sign, key in ((h[0], "+", 1.0, "ha"), (h[1], "-", -1.0, "hb")):
        D1 = act(prime(theta, h[4], hx, direction), D)
        a = power_even(D1.x2 * inv(D1.x1), 0.25)
        f = standard_fermions(act(make_generator("Da", a, ngen=n), D1))
        out.append(rescale(inv(r[key]), (f[0] * sign, f[1] * sign)))
    return tuple(out)


def check_ptolemy_quads(rng: np.random.Generator, count: int = 200, ngen: int = 6) -> List[CheckResult]:
    dr = Draws(rng, ngen)
    quads = [dr.quad() for _ in range(count)]
    firsts = [ptolemy.flip_quad(*q) for q in quads]
    twice = [ptolemy.flip_quad_twice(*q) for q in quads[: max(count // 2, 1)]]
    flips = list(zip(quads, firsts)) + [(q, t[0]) for q, t in zip(quads, twice)]
    for q, t in zip(quads, twice):
        lam, h, th, sg = q
        r1 = t[0]
        q2 = ((lam[3], lam[0], lam[1], lam[2], r1["f"]), (r1["hd"], r1["ha"], r1["hb"], r1["hc"], r1["hf"]),
              r1["mu"], r1["nu"])
        flips.append((q2, t[1]))

    def even():
        w = _Worst()
        for (lam, h, th, sg), r in zip(quads, firsts):
            A, B, C, D = reconstruct_quad(lam, h[4], th, sg)
            lhs = (lam[4] * r["f"]) * (lam[4] * r["f"])
            rhs = pairing(A, C) * pairing(B, D)
            w.see(_rel(lhs, rhs), lambda: _quad_text(lam, h, th, sg))
        return w, count

    def odd():
        w = _Worst()
        for q, r in zip(quads, firsts):
            mu, nu = odd_oracle(*q, r=r)
            err = max((mu[i] - r["mu"][i]).max_abs() for i in range(2))
            err = max(err, max((nu[i] - r["nu"][i]).max_abs() for i in range(2)))
            w.see(err, lambda: _quad_text(*q))
        return w, count

    def closure():
        w = _Worst()
        for q, (r1, r2, got) in zip(quads, twice):
            lam, h, th, sg = q
            want = ptolemy.flip_twice_expected(lam, h, th, sg, r1)
            errs = [(got[k] - want[k]).max_abs() for k in ("ha", "hb", "hc", "hd", "he")]
            errs.append((got["e"] - lam[4]).max_abs())
            for k, ref in (("sigma", want["sigma"]), ("theta", want["theta"])):
                errs += [(got[k][i] - ref[i]).max_abs() for i in range(2)]
            w.see(max(errs), lambda: _quad_text(*q))
        return w, len(twice)

    def constants():
        w = _Worst()
        for (lam, h, th, sg), r in flips:
            w.see(ptolemy.constants_identity_error(r), lambda: _quad_text(lam, h, th, sg))
        return w, len(flips)

    def d2():
        w = _Worst()
        for (lam, h, th, sg), r in flips:
            err = max(ptolemy.d2_identity_error(r, h[4], th, sg), ptolemy.neighbour_ratio_error(lam, r))
            w.see(err, lambda: _quad_text(lam, h, th, sg))
        return w, len(flips)

    def cube():
        # the rotation elements of the new triangles DAB and BCD
        return _prime_cube([p for _, r in zip(quads, firsts) for p in (r["mu"], r["nu"])], ngen)

    return [
        _timed("ptolemy.prime_cube", 1e-12, cube),
        _timed("ptolemy.even_oracle", 1e-9, even, relative=True),
        _timed("ptolemy.odd_oracle", 1e-9, odd),
        _timed("ptolemy.flip_twice", 1e-9, closure),
        _timed("ptolemy.c_mu_c_nu", 1e-9, constants),
        _timed("ptolemy.D_squared", 1e-9, d2),
    ]


def check_n1_locus(rng: np.random.Generator, count: int = 100, ngen: int = 6) -> CheckResult:
    dr = Draws(rng, ngen)

    def run():
        w = _Worst()
        one = GrassmannNumber.const(1.0, ngen)
        for _ in range(count):
            lam = tuple(dr.positive() for _ in range(5))
            t, s = dr.odd(), dr.odd()
            r = ptolemy.flip_quad(lam, (one,) * 5, (t, t), (s, s))
            errs = [(r["mu"][0] - r["mu"][1]).max_abs(), (r["nu"][0] - r["nu"][1]).max_abs()]
            errs += [(r[k] - one).max_abs() for k in ("ha", "hb", "hc", "hd", "hf")]
            w.see(max(errs), lambda: _quad_text(lam, (one,) * 5, (t, t), (s, s)))
        return w, count

    return _timed("ptolemy.n1_locus", 1e-9, run)


FLIP_FIXTURES = (("F11", torus_f11), ("F03", sphere_f03), ("F03theta", sphere_f03_theta))


def check_surface_double_flips(rng: np.random.Generator, ngen: Optional[int] = None) -> CheckResult:
    def run():
        w = _Worst()
        n = 0
        for name, build in FLIP_FIXTURES:
            S = build()
            c = random_coordinates(S, rng, ngen)
            for om in all_orientations(S):
                for e in range(S.nedges):
                    if S.is_loop(e):
                        continue
                    rep = ptolemy.double_flip(S, c, e, om, om)
                    n += 1
                    w.see(0.0 if rep.ok else 1.0, lambda: f"{name} edge {e} orientation {om}")
        return w, n

    return _timed("ptolemy.surface_double_flip", 0.0, run)


def check_ptolemy(rng: np.random.Generator, count: int = 200, ngen: int = 6) -> List[CheckResult]:
    out = check_ptolemy_quads(rng, count, ngen)
    out.append(check_n1_locus(rng, max(count // 2, 1), ngen))
    out.append(check_surface_double_flips(rng, ngen))
    return out


# spin and lift --------------------------------------------------------------

def spin_cycles(S: SurfaceComplex, name: str):
    if name == "F11":
        return f11_generators(S)
    return {f"loop{i}": g for i, g in enumerate(puncture_loops(S))}


def check_spin(rng: np.random.Generator, ngen: Optional[int] = None) -> List[CheckResult]:
    out = []
    for name, build in (("F11", torus_f11), ("F03", sphere_f03)):
        S = build()
        c = random_coordinates(S, rng, ngen)
        cycles = spin_cycles(S, name)

        def run():
            w = _Worst()
            n = 0
            for os_ in all_orientations(S):
                for oi in all_orientations(S):
                    rep = check_spin_consistency(S, c, os_, oi, cycles)
                    n += len(rep.rows)
                    w.see(0.0 if rep.ok else 1.0, lambda: f"sigma={os_} iota={oi}\n{rep.text()}")
            return w, n

        out.append(_timed(f"spin.trace_sign_{name}", 0.0, run))
    return out


def check_lift(rng: np.random.Generator, depth: int = 4, ngen: Optional[int] = None) -> List[CheckResult]:
    S = torus_f11()
    c = random_coordinates(S, rng, ngen)
    om = default_orientation(S)

    L = build_lift(S, c, om, om, depth=depth)
    gens = f11_generators(S)

    def equi():
        w = _Worst()
        absolute = equivariance_error(L, gens)
        w.see(equivariance_error(L, gens, relative=True), lambda: f"depth {depth}, absolute error {absolute:.3e}")
        return w, len(L.points)

    def puncture():
        w = _Worst()
        loops = puncture_loops(S)
        for g in loops:
            tr = trace_body(holonomy(S, c, om, om, g))
            w.see(abs(abs(tr) - 2.0), lambda: f"loop {g} trace {tr!r}")
        return w, len(loops)

    return [_timed("lift.equivariance", 1e-8, equi, relative=True), _timed("lift.puncture_parabolic", 1e-6, puncture)]


# driver ---------------------------------------------------------------------

def run_suite(name: str, seed: int = 0, depth: int = 4, quick: bool = False) -> List[CheckResult]:
    if name not in SUITES and name != "all":
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    names = SUITES if name == "all" else (name,)
    out: List[CheckResult] = []
    for i, nm in enumerate(names):
        rng = np.random.default_rng([seed, i])
        k = 5 if quick else 1
        if nm == "grassmann":
            out += check_grassmann(rng, 1000 // k)
        elif nm == "algebra":
            out += check_algebra(rng, 500 // k)
        elif nm == "lightcone":
            out += check_lightcone(rng, 500 // k)
        elif nm == "moduli":
            out += check_moduli(rng, 100 // k)
        elif nm == "ptolemy":
            out += check_ptolemy(rng, 200 // k)
        elif nm == "spin":
            out += check_spin(rng)
        elif nm == "lift":
            out += check_lift(rng, depth)
    return out


@contextlib.contextmanager
def injected_bug(name: str) -> Iterator[None]:
    """Temporarily break one formula so the suites can be seen to fail."""
    if name != "c_theta":
        raise ValueError(f"unknown bug {name!r}")

    def wrong(theta):
        return (1.0 + theta[0] * theta[1]) * (1.0 / 6.0)

    saved = moduli.c_theta, ptolemy.c_theta
    moduli.c_theta = ptolemy.c_theta = wrong
    try:
        yield
    finally:
        moduli.c_theta, ptolemy.c_theta = saved
