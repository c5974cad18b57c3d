"""Half-integral matrices: discriminant, level, Gram transforms and gluing.

A matrix ``M`` in Lambda_n has integral diagonal and half-integral
off-diagonal entries; ``2M`` is then the even Gram matrix of a lattice.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import lcm
from typing import Sequence

from . import linalg
from .arith import is_odd_squarefree
from .errors import DimensionMismatch, NotHalfIntegral, NotPositiveDefinite

POSITIVE_DEFINITE = "positive-definite"
POSITIVE_SEMIDEFINITE = "positive-semidefinite"
INDEFINITE = "indefinite"


def _classify(entries) -> str:
    minors = linalg.leading_minors(entries)
    if all(m > 0 for m in minors):
        return POSITIVE_DEFINITE
    if all(m >= 0 for m in linalg.principal_minors(entries)):
        return POSITIVE_SEMIDEFINITE
    return INDEFINITE


@dataclass(frozen=True)
class HalfIntMatrix:
    """Symmetric half-integral matrix, immutable."""

    entries: tuple
    definiteness: str = field(compare=False)

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(linalg.as_fraction(x) for x in row) for row in entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch("a half-integral matrix must be square and non-empty")
        for i in range(n):
            if rows[i][i].denominator != 1:
                raise NotHalfIntegral(f"diagonal entry ({i},{i}) = {rows[i][i]} is not integral")
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise NotHalfIntegral("matrix is not symmetric")
                if (2 * rows[i][j]).denominator != 1:
                    raise NotHalfIntegral(f"entry ({i},{j}) = {rows[i][j]} is not half-integral")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "definiteness", _classify(rows))

    @classmethod
    def from_even(cls, gram: Sequence[Sequence[int]]) -> "HalfIntMatrix":
        """Build M from the even Gram matrix 2M."""
        return cls([[Fraction(x, 2) for x in row] for row in gram])

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_positive_definite(self) -> bool:
        return self.definiteness == POSITIVE_DEFINITE

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]

    def two_m(self) -> list[list[int]]:
        """The even integral Gram matrix 2M."""
        return [[int(2 * x) for x in row] for row in self.entries]

    def det(self) -> Fraction:
        return linalg.det(self.tolist())

    @cached_property
    def _inverse(self) -> tuple:
        return tuple(tuple(r) for r in linalg.inverse(self.tolist()))

    def inverse(self) -> list[list[Fraction]]:
        return [list(r) for r in self._inverse]

    def value(self, v: Sequence) -> Fraction:
        """M[v] = v^t M v."""
        if len(v) != self.n:
            raise DimensionMismatch("vector length does not match matrix size")
        return linalg.quad(self.tolist(), v)

    def inverse_value(self, v: Sequence) -> Fraction:
        """M^{-1}[v]."""
        if len(v) != self.n:
            raise DimensionMismatch("vector length does not match matrix size")
        return linalg.quad(self._inverse, v)

    def transform(self, B: Sequence[Sequence[int]]) -> "HalfIntMatrix":
        """M[B] = B^t M B for an integral B."""
        return HalfIntMatrix(gram_transform(self, B))

    def to_json(self) -> dict:
        return {"n": self.n,
                "entries": [[linalg.fraction_str(x) for x in row] for row in self.entries]}

    @classmethod
    def from_json(cls, obj) -> "HalfIntMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if isinstance(obj, list):
            return cls(obj)
        m = cls(obj["entries"])
        if "n" in obj and obj["n"] != m.n:
            raise DimensionMismatch(f"declared n={obj['n']} but entries have size {m.n}")
        return m

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(linalg.fraction_str(x) for x in r) + "]"
                         for r in self.entries)
        return f"HalfIntMatrix([{body}])"


@dataclass(frozen=True)
class DiscriminantData:
    d: int
    parity_rule: str
    is_odd_squarefree: bool

    def to_json(self) -> dict:
        return {"d": self.d, "parity": self.parity_rule, "odd_squarefree": self.is_odd_squarefree}


def _as_halfint(M) -> HalfIntMatrix:
    return M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)


def _require_pd(M: HalfIntMatrix) -> None:
    if not M.is_positive_definite:
        raise NotPositiveDefinite(f"matrix is {M.definiteness}: {M!r}")


def disc_abs(M) -> DiscriminantData:
    """Absolute discriminant d_M: det(2M) for even n, det(2M)/2 for odd n."""
    M = _as_halfint(M)
    _require_pd(M)
    D = linalg.det(M.two_m())
    if M.n % 2 == 0:
        d, rule = D, "n-even"
    else:
        if D % 2:
            raise NotHalfIntegral("det(2M) is odd for odd n; not an even lattice")
        d, rule = D // 2, "n-odd"
    return DiscriminantData(d=d, parity_rule=rule, is_odd_squarefree=is_odd_squarefree(d))


def level(M) -> int:
    """Smallest l >= 1 with l * (2M)^{-1} even integral."""
    M = _as_halfint(M)
    _require_pd(M)
    N = linalg.inverse(M.two_m())
    out = 1
    for i, row in enumerate(N):
        for j, x in enumerate(row):
            # diagonal must become even: l * x / 2 integral
            out = lcm(out, (x / 2 if i == j else x).denominator)
    return out


def gram_transform(A, B: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """B^t A B, exactly; A may be a HalfIntMatrix or any rational matrix."""
    A = A.tolist() if isinstance(A, HalfIntMatrix) else [[linalg.as_fraction(x) for x in r] for r in A]
    ra, ca = linalg.shape(A)
    rb, _ = linalg.shape(B)
    if ra != ca or ca != rb:
        raise DimensionMismatch(f"cannot form B^t A B with A {ra}x{ca} and B {rb} rows")
    return linalg.mat_mul(linalg.transpose(B), linalg.mat_mul(A, B))


def glue(T, mu: Sequence[int], ell: int) -> HalfIntMatrix:
    """The matrix [[ell, mu/2], [mu^t/2, T]] of size n = size(T) + 1."""
    T = _as_halfint(T)
    _require_pd(T)
    if len(mu) != T.n:
        raise DimensionMismatch("mu must have the size of T")
    if ell - T.inverse_value(mu) / 4 <= 0:
        raise NotPositiveDefinite(
            f"ell={ell} is too small: ell - T^-1[mu]/4 = {ell - T.inverse_value(mu) / 4} <= 0")
    n = T.n + 1
    rows = [[Fraction(0)] * n for _ in range(n)]
    rows[0][0] = Fraction(ell)
    for i, m in enumerate(mu):
        rows[0][i + 1] = rows[i + 1][0] = Fraction(m, 2)
        for j in range(T.n):
            rows[i + 1][j + 1] = T.entries[i][j]
    return HalfIntMatrix(rows)


def glued_discriminant(T, mu: Sequence[int], ell: int) -> Fraction:
    """d of glue(T, mu, ell) from the determinant identity, without forming the matrix.

    Glued size even: (4 ell - T^-1[mu]) d_T.  Glued size odd: (ell - T^-1[mu]/4) d_T.
    """
    T = _as_halfint(T)
    dT = disc_abs(T).d
    x = T.inverse_value(mu)
    if (T.n + 1) % 2 == 0:
        return (4 * ell - x) * dT
    return (ell - x / 4) * dT


def random_lattice(n: int, rng: random.Random, max_d: int = 500,
                   odd_squarefree: bool = True, max_tries: int = 100000) -> HalfIntMatrix:
    """Rejection-sample M in Lambda_n^+ with small entries and d_M <= max_d.

    With ``odd_squarefree`` the discriminant is additionally odd and square-free.
    """
    for _ in range(max_tries):
        gram = [[0] * n for _ in range(n)]
        for i in range(n):
            gram[i][i] = 2 * rng.randint(1, 3)
            for j in range(i):
                gram[i][j] = gram[j][i] = rng.choice((-2, -1, -1, 0, 0, 1, 1, 2))
        if not all(m > 0 for m in linalg.leading_minors(gram)):
            continue
        D = linalg.det(gram)
        d = D if n % 2 == 0 else D // 2
        if d > max_d:
            continue
        if odd_squarefree and not is_odd_squarefree(d):
            continue
        return HalfIntMatrix.from_even(gram)
    raise RuntimeError("random_lattice: no sample found")
