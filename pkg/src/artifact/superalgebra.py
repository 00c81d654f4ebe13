"""(2|1)x(2|1) supermatrices, the named group elements and the involution Psi.

Basis order is (even, odd, even): index 1 (0-based) is the odd direction,
so entries (0,1), (1,0), (1,2), (2,1) are odd and the rest even.  The
matrix product uses the sign rule where every odd*odd product picks up a
minus sign.

A :class:`GroupElement` is ``mat o Psi**psi``.  Psi is never realised as a
matrix: composing moves it to the right through the conjugation table.
"""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple

import numpy as np

from .grassmann import (
    GrassmannError,
    GrassmannNumber,
    ParityError,
    from_text,
    inv,
    to_text,
)

SDET_TOL = 1e-9


class SuperMatrixError(GrassmannError):
    pass


class ComponentError(SuperMatrixError):
    pass


def _odd_slot(i: int, j: int) -> bool:
    return (i == 1) != (j == 1)


class SuperMatrix:
    """3x3 array of GrassmannNumber with parity pattern (e,o,e / o,e,o / e,o,e)."""

    __slots__ = ("entries", "ngen")

    def __init__(self, entries: Sequence[Sequence], ngen: int, check: bool = True):
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                x = entries[i][j]
                if not isinstance(x, GrassmannNumber):
                    x = GrassmannNumber.const(x, ngen)
                elif x.ngen != ngen:
                    raise SuperMatrixError("entry pool differs from matrix pool")
                if check and not x.is_zero():
                    want = "odd" if _odd_slot(i, j) else "even"
                    if x.parity() != want:
                        raise ParityError(f"entry ({i},{j}) should be {want}, got {x.parity()}")
                row.append(x)
            rows.append(tuple(row))
        self.entries = tuple(rows)
        self.ngen = ngen

    @classmethod
    def identity(cls, ngen: int) -> "SuperMatrix":
        return cls([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ngen, check=False)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        return smul(self, other)

    def body(self) -> np.ndarray:
        return np.array([[x.body() for x in row] for row in self.entries])

    def soul(self) -> "SuperMatrix":
        return SuperMatrix([[x.soul() for x in row] for row in self.entries], self.ngen, check=False)

    def close(self, other: "SuperMatrix", tol: float = 1e-9) -> bool:
        return all(self[i, j].close(other[i, j], tol) for i in range(3) for j in range(3))

    def max_diff(self, other: "SuperMatrix") -> float:
        return max((self[i, j] - other[i, j]).max_abs() for i in range(3) for j in range(3))

    def __repr__(self):
        rows = ["[" + ", ".join(to_text(x) for x in row) + "]" for row in self.entries]
        return "SuperMatrix(" + "; ".join(rows) + ")"


def smul(M: SuperMatrix, N: SuperMatrix) -> SuperMatrix:
    if M.ngen != N.ngen:
        raise SuperMatrixError("pool sizes differ")
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = GrassmannNumber({}, M.ngen)
            for k in range(3):
                term = M[i, k] * N[k, j]
                if _odd_slot(i, k) and _odd_slot(k, j):
                    acc = acc - term
                else:
                    acc = acc + term
            row.append(acc)
        out.append(row)
    return SuperMatrix(out, M.ngen, check=False)


def _scale(M: SuperMatrix, s: float) -> SuperMatrix:
    return SuperMatrix([[x * s for x in row] for row in M.entries], M.ngen, check=False)


def _add(M: SuperMatrix, N: SuperMatrix) -> SuperMatrix:
    return SuperMatrix([[M[i, j] + N[i, j] for j in range(3)] for i in range(3)], M.ngen, check=False)


def sinv(M: SuperMatrix) -> SuperMatrix:
    """Inverse for the signed product, by a finite Neumann series around the body."""
    B = M.body()
    if abs(np.linalg.det(B)) < 1e-14:
        raise SuperMatrixError("body of the supermatrix is singular")
    Binv = SuperMatrix(np.linalg.inv(B).tolist(), M.ngen, check=False)
    # M = B (1 + B^-1 N), so M^-1 = sum (-B^-1 N)^k B^-1
    X = _scale(smul(Binv, M.soul()), -1.0)
    out = SuperMatrix.identity(M.ngen)
    power = SuperMatrix.identity(M.ngen)
    for _ in range(M.ngen + 1):
        power = smul(power, X)
        if all(x.is_zero(0.0) for row in power.entries for x in row):
            break
        out = _add(out, power)
    return smul(out, Binv)


def sdet(M: SuperMatrix) -> GrassmannNumber:
    """Berezinian with the odd block being the single middle entry f."""
    f = M[1, 1]
    if abs(f.body()) <= 1e-14:
        raise SuperMatrixError("middle entry has zero body")
    finv = inv(f)
    # Schur complement on the even indices {0, 2}.  With the signed product
    # the odd*odd term enters with a plus sign on the raw coefficients; this
    # is the choice that makes sdet multiplicative.
    idx = (0, 2)
    S = [[M[i, j] + M[i, 1] * finv * M[1, j] for j in idx] for i in idx]
    det = S[0][0] * S[1][1] - S[0][1] * S[1][0]
    return det * finv


def str_(M: SuperMatrix) -> GrassmannNumber:
    return M[0, 0] + M[2, 2] - M[1, 1]


# named generators -----------------------------------------------------------

def _g(x, ngen):
    if isinstance(x, GrassmannNumber):
        return x
    return GrassmannNumber.const(x, ngen)


def _mat_D(a, c, n):
    a, c = _g(a, n), _g(c, n)
    return SuperMatrix([[a, 0, 0], [0, a * c, 0], [0, 0, c]], n)


def _mat_J(n):
    return SuperMatrix([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], n)


def _mat_Jinv(n):
    return SuperMatrix([[0, 0, -1], [0, 1, 0], [1, 0, 0]], n)


def _unit(n, i, j, x):
    e = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    e[i][j] = _g(x, n)
    return SuperMatrix(e, n)


def _mat_Ucal(t1, t2, n):
    return SuperMatrix([[1, 0, 0], [t2, 1, 0], [1 + t1 * t2 * 0.5, -t1, 1]], n)


def _mat_Ucalinv(t1, t2, n):
    return SuperMatrix([[1, 0, 0], [-t2, 1, 0], [t1 * t2 * 0.5 - 1, t1, 1]], n)


def _mat_P(t1, t2, n):
    return SuperMatrix([[t1 * t2 * 0.5 - 1, t1, 1], [-t2, 1, 0], [-1, 0, 0]], n)


def _mat_Pinv(t1, t2, n):
    # P'^-1 = Ucal o J^-1
    return smul(_mat_Ucal(t1, t2, n), _mat_Jinv(n))


# kind -> (number of params, parities, matrix builder)
_KINDS = {
    "D": (("even", "even"), lambda p, n: _mat_D(p[0], p[1], n)),
    "Da": (("even",), lambda p, n: _mat_D(p[0], inv(p[0]), n)),
    "Z": (("even",), lambda p, n: _mat_D(p[0], p[0], n)),
    "J": ((), lambda p, n: _mat_J(n)),
    "Jinv": ((), lambda p, n: _mat_Jinv(n)),
    "U": (("odd",), lambda p, n: _unit(n, 0, 1, p[0])),
    "V": (("odd",), lambda p, n: _unit(n, 1, 2, p[0])),
    "W": (("even",), lambda p, n: _unit(n, 0, 2, p[0])),
    "Ucal": (("odd", "odd"), lambda p, n: _mat_Ucal(p[0], p[1], n)),
    "Ucalinv": (("odd", "odd"), lambda p, n: _mat_Ucalinv(p[0], p[1], n)),
    "P": (("odd", "odd"), lambda p, n: _mat_P(p[0], p[1], n)),
    "Pinv": (("odd", "odd"), lambda p, n: _mat_Pinv(p[0], p[1], n)),
    "Psi": ((), None),
}

# Kinds whose parameters must have a positive body.
_POSITIVE = {"D", "Da"}
# Z_a only needs an invertible a (Z_{-1} is used for sign changes).
_NONZERO = {"Z"}

Token = Tuple[str, Tuple[GrassmannNumber, ...]]


def _psi_conj(tok: Token) -> Token:
    """Psi o tok o Psi, as a token."""
    kind, p = tok
    if kind == "D":
        return ("D", (inv(p[1]), inv(p[0])))
    if kind == "Da":
        return tok
    if kind == "Z":
        return ("Z", (inv(p[0]),))
    if kind in ("J", "Jinv", "W"):
        return tok
    if kind == "U":
        return ("V", p)
    if kind == "V":
        return ("U", p)
    if kind in ("Ucal", "Ucalinv", "P", "Pinv"):
        return (kind, (p[1], p[0]))
    raise SuperMatrixError(f"no Psi-conjugation rule for {kind}")


def _inverse_tokens(tok: Token) -> List[Token]:
    kind, p = tok
    if kind == "D":
        return [("D", (inv(p[0]), inv(p[1])))]
    if kind in ("Da", "Z"):
        return [(kind, (inv(p[0]),))]
    if kind in ("U", "V", "W"):
        return [(kind, (-p[0],))]
    swap = {"J": "Jinv", "Jinv": "J", "Ucal": "Ucalinv", "Ucalinv": "Ucal", "P": "Pinv", "Pinv": "P"}
    if kind in swap:
        return [(swap[kind], p)]
    if kind == "Psi":
        return [tok]
    raise SuperMatrixError(f"unknown kind {kind}")


def token_matrix(tok: Token, ngen: int) -> SuperMatrix:
    kind, p = tok
    return _KINDS[kind][1](p, ngen)


class GroupElement:
    """Element ``mat o Psi**psi`` of Psi x| SL(1|2)_0 with its generator word."""

    __slots__ = ("psi", "mat", "word", "ngen", "_inv")

    def __init__(self, psi: int, mat: SuperMatrix, word: Tuple[Token, ...], ngen: int):
        self.psi = psi & 1
        self.mat = mat
        self.word = tuple(word)
        self.ngen = ngen
        self._inv = None

    @property
    def mat_inv(self) -> SuperMatrix:
        if self._inv is None:
            self._inv = sinv(self.mat)
        return self._inv

    @classmethod
    def identity(cls, ngen: int) -> "GroupElement":
        return cls(0, SuperMatrix.identity(ngen), (), ngen)

    @classmethod
    def from_word(cls, word: Sequence[Token], ngen: int) -> "GroupElement":
        # Move each Psi to the right end: tok o Psi = Psi o (Psi tok Psi),
        # so a token is conjugated once per Psi standing to its left.
        mat = SuperMatrix.identity(ngen)
        flips = 0
        for tok in word:
            if tok[0] == "Psi":
                flips ^= 1
                continue
            t = _psi_conj(tok) if flips else tok
            mat = smul(mat, token_matrix(t, ngen))
        return cls(flips, mat, tuple(word), ngen)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        word: List[Token] = []
        for tok in reversed(self.word):
            word.extend(_inverse_tokens(tok))
        return GroupElement.from_word(word, self.ngen)

    def word_text(self) -> str:
        return word_to_text(self.word)

    def __repr__(self):
        return f"GroupElement({self.word_text()})"


def make_generator(kind: str, *params, ngen: int) -> GroupElement:
    if kind not in _KINDS:
        raise SuperMatrixError(f"unknown generator kind {kind!r}")
    parities = _KINDS[kind][0]
    if len(params) != len(parities):
        raise SuperMatrixError(f"{kind} takes {len(parities)} parameters, got {len(params)}")
    ps = []
    for x, want in zip(params, parities):
        x = _g(x, ngen)
        if x.ngen != ngen:
            raise SuperMatrixError("parameter pool differs")
        if not x.is_zero() and x.parity() != want:
            raise ParityError(f"{kind} parameter should be {want}, got {x.parity()}")
        if kind in _POSITIVE and x.body() <= 0:
            raise SuperMatrixError(f"{kind} parameter needs a positive body")
        if kind in _NONZERO and abs(x.body()) <= 1e-14:
            raise SuperMatrixError(f"{kind} parameter must be invertible")
        ps.append(x)
    return GroupElement.from_word([(kind, tuple(ps))], ngen)


def _supertranspose(M: SuperMatrix) -> SuperMatrix:
    e = M.entries
    return SuperMatrix([[-e[j][i] if (j == 1 and i != 1) else e[j][i] for j in range(3)] for i in range(3)],
                       M.ngen, check=False)


def psi_conjugate(M: SuperMatrix) -> SuperMatrix:
    """Psi o M o Psi for a folded matrix: J (M^-1)^st J^-1."""
    n = M.ngen
    return smul(smul(_mat_J(n), _supertranspose(sinv(M))), _mat_Jinv(n))


def compose(*gs: GroupElement) -> GroupElement:
    if not gs:
        raise SuperMatrixError("compose needs at least one element")
    ngen = gs[0].ngen
    word: List[Token] = []
    mat = SuperMatrix.identity(ngen)
    flips = 0
    for g in gs:
        if g.ngen != ngen:
            raise SuperMatrixError("pool sizes differ")
        word.extend(g.word)
        mat = smul(mat, psi_conjugate(g.mat) if flips else g.mat)
        flips ^= g.psi
    return GroupElement(flips, mat, tuple(word), ngen)


def project_sl2(g: GroupElement) -> np.ndarray:
    """Body projection to SL(2,R): Psi goes to the identity."""
    B = g.mat.body()
    f = B[1, 1]
    if f <= 0:
        raise ComponentError("middle entry body must be positive")
    return np.array([[B[0, 0], B[0, 2]], [B[2, 0], B[2, 2]]]) / math.sqrt(f)


# text form ------------------------------------------------------------------

def word_to_text(word: Sequence[Token]) -> str:
    if not word:
        return "id"
    return "∘".join(f"{k}({','.join(to_text(x) for x in p)})" for k, p in word)


def word_from_text(s: str, ngen: int) -> List[Token]:
    s = s.strip()
    if s == "id":
        return []
    out = []
    for part in s.split("∘"):
        part = part.strip()
        if not part.endswith(")") or "(" not in part:
            raise SuperMatrixError(f"bad token {part!r}")
        kind, args = part[:-1].split("(", 1)
        if kind not in _KINDS:
            raise SuperMatrixError(f"unknown generator kind {kind!r}")
        params = tuple(from_text(a, ngen) for a in args.split(",")) if args else ()
        out.append((kind, params))
    return out
