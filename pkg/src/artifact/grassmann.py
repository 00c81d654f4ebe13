"""Real Grassmann algebra on a finite pool of odd generators.

Elements are stored as a map from generator subsets (bitmasks) to float
coefficients.  Values are immutable.
"""

from __future__ import annotations

import functools
import math
import re
from typing import Dict, Iterable, Union

import numpy as np

ZERO_TOL = 1e-12

Scalar = Union[int, float]


class GrassmannError(ValueError):
    pass


class PoolMismatchError(GrassmannError):
    pass


class NotInvertibleError(GrassmannError):
    pass


class ParityError(GrassmannError):
    pass


class DomainError(GrassmannError):
    pass


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _sign(a: int, b: int) -> int:
    # Number of transpositions to sort (a, b): for each generator of b,
    # count generators of a with a larger index.
    n = 0
    for j in _bits(b):
        n += _popcount(a >> (j + 1))
    return -1 if n & 1 else 1


_sign = functools.lru_cache(maxsize=1 << 16)(_sign)

# Products with many terms go through a precomputed sign table.
_DENSE_MIN = 24
_DENSE_MAX_GEN = 10


@functools.lru_cache(maxsize=None)
def _sign_table(ngen: int) -> np.ndarray:
    """t[a, b] = sign of g_a g_b = t g_{a|b}, zero when a and b share a generator."""
    m = np.arange(1 << ngen)
    a, b = np.meshgrid(m, m, indexing="ij")
    swaps = np.zeros(a.shape, dtype=np.int64)
    for j in range(ngen):
        above = (a >> (j + 1))
        cnt = np.zeros(a.shape, dtype=np.int64)
        for i in range(ngen - j - 1):
            cnt += (above >> i) & 1
        swaps += ((b >> j) & 1) * cnt
    t = np.where(swaps % 2 == 1, -1.0, 1.0)
    t[(a & b) != 0] = 0.0
    return t


def _mul_dense(x: "GrassmannNumber", y: "GrassmannNumber") -> "GrassmannNumber":
    ka = np.fromiter(x._c.keys(), dtype=np.int64, count=len(x._c))
    va = np.fromiter(x._c.values(), dtype=float, count=len(x._c))
    kb = np.fromiter(y._c.keys(), dtype=np.int64, count=len(y._c))
    vb = np.fromiter(y._c.values(), dtype=float, count=len(y._c))
    prod = _sign_table(x.ngen)[np.ix_(ka, kb)] * np.multiply.outer(va, vb)
    idx = np.bitwise_or.outer(ka, kb)
    out = np.bincount(idx.ravel(), weights=prod.ravel(), minlength=1 << x.ngen)
    nz = np.flatnonzero(out)
    return GrassmannNumber(dict(zip(nz.tolist(), out[nz].tolist())), x.ngen)


class GrassmannNumber:
    """An element of the Grassmann algebra on ``ngen`` generators."""

    __slots__ = ("_c", "ngen")

    def __init__(self, coeffs: Dict[int, float] | None = None, ngen: int = 0):
        self.ngen = int(ngen)
        c = {}
        if coeffs:
            limit = 1 << self.ngen
            for k, v in coeffs.items():
                if k < 0 or k >= limit:
                    raise GrassmannError(f"monomial {k:b} outside pool of {ngen}")
                v = float(v)
                if abs(v) > ZERO_TOL:
                    c[k] = v
        self._c = c

    # construction helpers
    @classmethod
    def const(cls, value: Scalar, ngen: int) -> "GrassmannNumber":
        return cls({0: value}, ngen)

    @classmethod
    def gen(cls, i: int, ngen: int, coef: Scalar = 1.0) -> "GrassmannNumber":
        if not 0 <= i < ngen:
            raise GrassmannError(f"generator {i} outside pool of {ngen}")
        return cls({1 << i: coef}, ngen)

    @property
    def coeffs(self) -> Dict[int, float]:
        return dict(self._c)

    def terms(self):
        """Terms sorted by (cardinality, ascending index tuple)."""
        keys = sorted(self._c, key=lambda k: (_popcount(k), tuple(_bits(k))))
        return [(k, self._c[k]) for k in keys]

    # basic queries
    def body(self) -> float:
        return self._c.get(0, 0.0)

    def soul(self) -> "GrassmannNumber":
        return GrassmannNumber({k: v for k, v in self._c.items() if k}, self.ngen)

    def parity(self) -> str:
        kinds = {_popcount(k) & 1 for k in self._c}
        if len(kinds) > 1:
            return "mixed"
        if kinds == {1}:
            return "odd"
        return "even"

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return all(abs(v) <= tol for v in self._c.values())

    def max_abs(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    def even_part(self) -> "GrassmannNumber":
        return GrassmannNumber({k: v for k, v in self._c.items() if not _popcount(k) & 1}, self.ngen)

    def odd_part(self) -> "GrassmannNumber":
        return GrassmannNumber({k: v for k, v in self._c.items() if _popcount(k) & 1}, self.ngen)

    # arithmetic
    def _coerce(self, other) -> "GrassmannNumber":
        if isinstance(other, GrassmannNumber):
            if other.ngen != self.ngen:
                raise PoolMismatchError(f"pool sizes {self.ngen} and {other.ngen} differ")
            return other
        if isinstance(other, (int, float)):
            return GrassmannNumber({0: other}, self.ngen)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0.0) + v
        return GrassmannNumber(c, self.ngen)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannNumber({k: -v for k, v in self._c.items()}, self.ngen)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return GrassmannNumber({k: v * other for k, v in self._c.items()}, self.ngen)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self._c) * len(other._c) >= _DENSE_MIN and self.ngen <= _DENSE_MAX_GEN:
            return _mul_dense(self, other)
        c: Dict[int, float] = {}
        for ka, va in self._c.items():
            for kb, vb in other._c.items():
                if ka & kb:
                    continue
                k = ka | kb
                c[k] = c.get(k, 0.0) + _sign(ka, kb) * va * vb
        return GrassmannNumber(c, self.ngen)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * inv(other)

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return inv(self) * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return inv(self) ** (-n)
        out = GrassmannNumber({0: 1.0}, self.ngen)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def close(self, other, tol: float = 1e-9) -> bool:
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = GrassmannNumber({0: other}, self.ngen)
        if not isinstance(other, GrassmannNumber):
            return NotImplemented
        return self.ngen == other.ngen and self._c == other._c

    def __hash__(self):
        return hash((self.ngen, frozenset(self._c.items())))

    def __repr__(self):
        return f"GrassmannNumber({to_text(self)!r}, ngen={self.ngen})"

    __str__ = lambda self: to_text(self)


def mul(a: GrassmannNumber, b: GrassmannNumber) -> GrassmannNumber:
    if a.ngen != b.ngen:
        raise PoolMismatchError(f"pool sizes {a.ngen} and {b.ngen} differ")
    return a * b


def body(a) -> float:
    if isinstance(a, (int, float)):
        return float(a)
    return a.body()


def parity(a: GrassmannNumber) -> str:
    return a.parity()


def _require_even(a: GrassmannNumber, what: str):
    if a.parity() != "even":
        raise ParityError(f"{what} needs an even argument, got {a.parity()}")


def _series(a: GrassmannNumber, coefs) -> GrassmannNumber:
    """sum_k coefs[k] * n**k where n is the nilpotent part of a (scaled)."""
    n = a.soul()
    out = GrassmannNumber({0: 1.0}, a.ngen)
    power = GrassmannNumber({0: 1.0}, a.ngen)
    k = 1
    while True:
        power = power * n
        if not power._c:
            break
        out = out + power * coefs(k)
        k += 1
    return out


def inv(a: GrassmannNumber) -> GrassmannNumber:
    """Inverse of an even element with nonzero body."""
    _require_even(a, "inv")
    b = a.body()
    if abs(b) <= ZERO_TOL:
        raise NotInvertibleError("element has zero body")
    # a = b(1 + n/b); (1+u)^-1 = sum (-u)^k
    u = a * (1.0 / b)
    return _series(u, lambda k: (-1.0) ** k) * (1.0 / b)


def sqrt_even(a: GrassmannNumber) -> GrassmannNumber:
    """Square root with positive body of an even element."""
    _require_even(a, "sqrt_even")
    b = a.body()
    if b <= ZERO_TOL:
        raise DomainError("square root needs a positive body")
    u = a * (1.0 / b)
    return _series(u, _binom_half) * math.sqrt(b)


def _binom_half(k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (0.5 - j) / (j + 1)
    return out


def power_even(a: GrassmannNumber, p: float) -> GrassmannNumber:
    """a**p for even a with positive body, via the binomial series."""
    _require_even(a, "power_even")
    b = a.body()
    if b <= ZERO_TOL:
        raise DomainError("real power needs a positive body")

    def c(k):
        out = 1.0
        for j in range(k):
            out *= (p - j) / (j + 1)
        return out

    return _series(a * (1.0 / b), c) * (b ** p)


# text form

def to_text(a: GrassmannNumber) -> str:
    parts = []
    for k, v in a.terms():
        mono = "".join(f"g{i}" for i in _bits(k))
        coef = repr(float(v))
        parts.append(f"{coef}*{mono}" if mono else coef)
    return " + ".join(parts) if parts else "0.0"


_TERM = re.compile(r"^([-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|inf|nan))((?:\*(?:g\d+)+)?)$")


def from_text(s: str, ngen: int) -> GrassmannNumber:
    s = s.strip()
    if s in ("0", "0.0", ""):
        return GrassmannNumber({}, ngen)
    c: Dict[int, float] = {}
    for raw in s.split(" + "):
        raw = raw.strip()
        m = _TERM.match(raw)
        if not m:
            raise GrassmannError(f"cannot parse term {raw!r}")
        coef = float(m.group(1))
        idx = [int(t) for t in re.findall(r"g(\d+)", m.group(2))]
        if len(set(idx)) != len(idx):
            raise GrassmannError(f"repeated generator in {raw!r}")
        if idx != sorted(idx):
            raise GrassmannError(f"indices not ascending in {raw!r}")
        mask = 0
        for i in idx:
            if i >= ngen:
                raise GrassmannError(f"generator g{i} outside pool of {ngen}")
            mask |= 1 << i
        if mask in c:
            raise GrassmannError(f"duplicate monomial in {s!r}")
        c[mask] = coef
    return GrassmannNumber(c, ngen)


def as_grassmann(x, ngen: int) -> GrassmannNumber:
    if isinstance(x, GrassmannNumber):
        if x.ngen != ngen:
            raise PoolMismatchError(f"pool sizes {x.ngen} and {ngen} differ")
        return x
    return GrassmannNumber({0: x}, ngen)


def total(items: Iterable[GrassmannNumber], ngen: int) -> GrassmannNumber:
    out = GrassmannNumber({}, ngen)
    for x in items:
        out = out + x
    return out


def log_even(a: GrassmannNumber) -> GrassmannNumber:
    """Logarithm of an even element with positive body."""
    _require_even(a, "log_even")
    b = a.body()
    if b <= ZERO_TOL:
        raise DomainError("logarithm needs a positive body")
    out = _series(a * (1.0 / b), lambda k: (-1.0) ** (k + 1) / k) - 1.0
    return out + math.log(b)


def exp_even(x: GrassmannNumber) -> GrassmannNumber:
    """Exponential of an even element."""
    _require_even(x, "exp_even")
    b = x.body()
    n = x.soul()
    out = GrassmannNumber({0: 1.0}, x.ngen)
    power = GrassmannNumber({0: 1.0}, x.ngen)
    k = 1
    while True:
        power = power * n * (1.0 / k)
        if not power._c:
            break
        out = out + power
        k += 1
    return out * math.exp(b)
