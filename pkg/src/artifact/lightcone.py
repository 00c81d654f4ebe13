"""The superspace R^{2,2|4}, its pairing, the special light cone and the
adjoint action of the group elements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

from .grassmann import GrassmannNumber, DomainError, from_text, inv, sqrt_even, to_text
from .superalgebra import GroupElement, SuperMatrix, Token, sinv, smul

MEMBER_TOL = 1e-9

SLOTS = ("x1", "x2", "y", "z", "xi1p", "xi2p", "xi1m", "xi2m")


@dataclass(frozen=True)
class LightVector:
    x1: GrassmannNumber
    x2: GrassmannNumber
    y: GrassmannNumber
    z: GrassmannNumber
    xi1p: GrassmannNumber
    xi2p: GrassmannNumber
    xi1m: GrassmannNumber
    xi2m: GrassmannNumber

    @classmethod
    def make(cls, ngen: int, x1=0, x2=0, y=0, z=0, xi1p=0, xi2p=0, xi1m=0, xi2m=0) -> "LightVector":
        def g(v):
            return v if isinstance(v, GrassmannNumber) else GrassmannNumber.const(v, ngen)
        return cls(g(x1), g(x2), g(y), g(z), g(xi1p), g(xi2p), g(xi1m), g(xi2m))

    @property
    def ngen(self) -> int:
        return self.x1.ngen

    def slots(self) -> Tuple[GrassmannNumber, ...]:
        return tuple(getattr(self, s) for s in SLOTS)

    def __iter__(self) -> Iterator[GrassmannNumber]:
        return iter(self.slots())

    def scale(self, s) -> "LightVector":
        return LightVector(*(v * s for v in self.slots()))

    def __neg__(self):
        return self.scale(-1.0)

    def close(self, other: "LightVector", tol: float = 1e-9) -> bool:
        return all(a.close(b, tol) for a, b in zip(self.slots(), other.slots()))

    def max_diff(self, other: "LightVector") -> float:
        return max((a - b).max_abs() for a, b in zip(self.slots(), other.slots()))

    def to_text(self) -> str:
        s = [to_text(v) for v in self.slots()]
        return "(" + ",".join(s[:4]) + "|" + ",".join(s[4:]) + ")"

    @classmethod
    def from_text(cls, text: str, ngen: int) -> "LightVector":
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")) or text.count("|") != 1:
            raise ValueError(f"bad light vector {text!r}")
        even, odd = text[1:-1].split("|")
        parts = even.split(",") + odd.split(",")
        if len(parts) != 8:
            raise ValueError(f"light vector needs 8 slots, got {len(parts)}")
        return cls(*(from_text(p, ngen) for p in parts))


def pairing(M: LightVector, N: LightVector) -> GrassmannNumber:
    even = (M.x1 * N.x2 + M.x2 * N.x1) * 0.5 - M.y * N.y + M.z * N.z
    odd = (M.xi1p * N.xi1m - M.xi2p * N.xi2m - M.xi1m * N.xi1p + M.xi2m * N.xi2p) * 0.5
    return even + odd


def norm(M: LightVector) -> GrassmannNumber:
    return pairing(M, M)


def lambda_length(M: LightVector, N: LightVector) -> GrassmannNumber:
    p = pairing(M, N)
    if p.body() <= 0:
        raise DomainError("pairing has non-positive body")
    return sqrt_even(p)


# matrix form ----------------------------------------------------------------

def to_matrix(M: LightVector) -> SuperMatrix:
    return SuperMatrix(
        [[M.z - M.y, M.xi1p, M.x1],
         [M.xi1m, M.z * 2.0, M.xi2p],
         [-M.x2, M.xi2m, M.z + M.y]],
        M.ngen,
        check=False,
    )


def from_matrix(X: SuperMatrix) -> LightVector:
    z = X[1, 1] * 0.5
    y = (X[2, 2] - X[0, 0]) * 0.5
    return LightVector(X[0, 2], -X[2, 0], y, z, X[0, 1], X[1, 2], X[1, 0], X[2, 1])


def conjugate(mat: SuperMatrix, M: LightVector, mat_inv: SuperMatrix | None = None) -> LightVector:
    """M -> g M g^-1 on the matrix form."""
    if mat_inv is None:
        mat_inv = sinv(mat)
    return from_matrix(smul(smul(mat, to_matrix(M)), mat_inv))


# closed forms ---------------------------------------------------------------

def act_psi(M: LightVector) -> LightVector:
    return LightVector(M.x1, M.x2, M.y, -M.z, M.xi2p, M.xi1p, -M.xi2m, -M.xi1m)


def _act_D(a, c, M):
    ai, ci = inv(a), inv(c)
    return LightVector(a * ci * M.x1, ai * c * M.x2, M.y, M.z,
                       ci * M.xi1p, a * M.xi2p, c * M.xi1m, ai * M.xi2m)


def _act_J(M):
    return LightVector(M.x2, M.x1, -M.y, M.z, M.xi2m, -M.xi1m, M.xi2p, -M.xi1p)


def _act_U(al, M):
    return LightVector(M.x1 - al * M.xi2p, M.x2,
                       M.y + al * M.xi1m * 0.5, M.z - al * M.xi1m * 0.5,
                       M.xi1p + (M.y + M.z) * al, M.xi2p, M.xi1m, M.xi2m + M.x2 * al)


def _act_V(be, M):
    return LightVector(M.x1 - be * M.xi1p, M.x2,
                       M.y - be * M.xi2m * 0.5, M.z - be * M.xi2m * 0.5,
                       M.xi1p, M.xi2p + (M.y - M.z) * be, M.xi1m - M.x2 * be, M.xi2m)


def _act_W(b, M):
    return LightVector(M.x1 + b * b * M.x2 + b * M.y * 2.0, M.x2, M.y + b * M.x2, M.z,
                       M.xi1p + b * M.xi2m, -(b * M.xi1m) + M.xi2p, M.xi1m, M.xi2m)


def act_token(tok: Token, M: LightVector) -> LightVector:
    kind, p = tok
    if kind == "Psi":
        return act_psi(M)
    if kind == "D":
        return _act_D(p[0], p[1], M)
    if kind == "Da":
        return _act_D(p[0], inv(p[0]), M)
    if kind == "Z":
        return _act_D(p[0], p[0], M)
    if kind == "J":
        return _act_J(M)
    if kind == "Jinv":
        return _act_J(_act_J(_act_J(M)))
    if kind == "U":
        return _act_U(p[0], M)
    if kind == "V":
        return _act_V(p[0], M)
    if kind == "W":
        return _act_W(p[0], M)
    from .superalgebra import token_matrix
    return conjugate(token_matrix(tok, M.ngen), M)


def act(g: GroupElement, M: LightVector) -> LightVector:
    """Apply g = t_1 o ... o t_n to M, innermost token first."""
    for tok in reversed(g.word):
        M = act_token(tok, M)
    return M


def act_folded(g: GroupElement, M: LightVector) -> LightVector:
    """Same as :func:`act` but through the folded matrix (and the Psi flag)."""
    if g.psi:
        M = act_psi(M)
    return conjugate(g.mat, M, g.mat_inv)


# special light cone ---------------------------------------------------------

def special_defect(M: LightVector) -> float:
    """Largest violation of the relations cutting out the special light cone.

    Uses the branch of the relations belonging to the larger of x1, x2.
    Returns inf if the bodies of x1, x2 are negative or both vanish.
    """
    b1, b2 = M.x1.body(), M.x2.body()
    if b1 < -MEMBER_TOL or b2 < -MEMBER_TOL:
        return float("inf")
    if max(b1, b2) <= MEMBER_TOL:
        return float("inf")
    checks = [norm(M), M.y * M.y - M.x1 * M.x2]
    if b1 >= b2:
        r = M.y * inv(M.x1)
        checks += [M.xi1m + r * M.xi2p, M.xi2m - r * M.xi1p,
                   M.z - M.xi1p * M.xi2p * inv(M.x1 * 2.0)]
    else:
        r = M.y * inv(M.x2)
        checks += [M.xi2p + r * M.xi1m, M.xi1p - r * M.xi2m,
                   M.z - M.xi1m * M.xi2m * inv(M.x2 * 2.0)]
    return max(c.max_abs() for c in checks)


def is_special(M: LightVector, tol: float = MEMBER_TOL) -> bool:
    return special_defect(M) <= tol


def e0(ngen: int) -> LightVector:
    return LightVector.make(ngen, x1=1)
