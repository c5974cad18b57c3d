"""Exact arithmetic in Q(zeta_m) and matrix rank over it.

Elements are coefficient vectors in the power basis 1, z, ..., z^(phi-1),
reduced modulo the m-th cyclotomic polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from sympy import QQ, Poly, cyclotomic_poly, isprime, primitive_root, symbols

from .errors import MixedConductors

_x = symbols("x")


@lru_cache(maxsize=None)
def _context(m: int):
    """(phi, reduction table) where table[k] is x^k mod Phi_m as a coefficient tuple."""
    phi_poly = [int(c) for c in reversed(Poly(cyclotomic_poly(m, _x), _x).all_coeffs())]
    phi = len(phi_poly) - 1
    size = max(m, 2 * phi)
    table = []
    cur = [0] * phi
    cur[0] = 1
    for _ in range(size):
        table.append(tuple(cur))
        # multiply by x and reduce the x^phi term
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi_poly)]
    return phi, tuple(table)


class Cyclotomic:
    """An element of the m-th cyclotomic field."""

    __slots__ = ("m", "coeffs", "power")

    def __init__(self, m: int, coeffs: Sequence, power: int | None = None):
        phi, table = _context(m)
        vals = [Fraction(c) for c in coeffs]
        if len(vals) > phi:
            out = [Fraction(0)] * phi
            for k, c in enumerate(vals):
                if c:
                    for i, t in enumerate(_power_row(m, k)):
                        if t:
                            out[i] += c * t
            vals = out
        else:
            vals += [Fraction(0)] * (phi - len(vals))
        self.m = m
        self.coeffs = tuple(vals)
        self.power = power  # set when the element is known to be zeta^power

    @classmethod
    def zeta_power(cls, m: int, a: int) -> "Cyclotomic":
        return _zeta_power(m, a % m)

    @classmethod
    def from_rational(cls, m: int, x) -> "Cyclotomic":
        return cls(m, [x], power=0 if x == 1 else None)

    @classmethod
    def zero(cls, m: int) -> "Cyclotomic":
        return cls(m, [])

    @property
    def phi(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _coerce(self, other) -> "Cyclotomic":
        if isinstance(other, Cyclotomic):
            if other.m != self.m:
                raise MixedConductors(f"conductors {self.m} and {other.m} differ")
            return other
        return Cyclotomic.from_rational(self.m, other)

    def __add__(self, other):
        other = self._coerce(other)
        return Cyclotomic(self.m, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.m, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.power is not None and other.power is not None:
            return _zeta_power(self.m, (self.power + other.power) % self.m)
        phi = self.phi
        prod = [Fraction(0)] * (2 * phi - 1 if phi else 0)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[i + j] += a * b
        return Cyclotomic(self.m, prod)

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.power is not None:
            return _zeta_power(self.m, (-self.power) % self.m)
        f = Poly(list(reversed(self.coeffs)), _x, domain=QQ)
        g = Poly(cyclotomic_poly(self.m, _x), _x, domain=QQ)
        inv = f.invert(g)
        coeffs = [Fraction(int(c.numerator), int(c.denominator)) for c in reversed(inv.all_coeffs())]
        return Cyclotomic(self.m, coeffs)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.m == other.m and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == Cyclotomic.from_rational(self.m, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def reduce_mod(self, p: int, g: int) -> int:
        """Image under z -> g in F_p (g of multiplicative order m)."""
        if self.power is not None:
            return pow(g, self.power, p)
        acc = 0
        gk = 1
        for c in self.coeffs:
            if c:
                acc += c.numerator * pow(c.denominator, -1, p) * gk
            gk = gk * g % p
        return acc % p

    def __repr__(self):
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"Cyclotomic({self.m}: {' + '.join(terms) or '0'})"


@lru_cache(maxsize=None)
def _power_row(m: int, k: int) -> tuple:
    phi, table = _context(m)
    if k < len(table):
        return table[k]
    return table[k % m]


@lru_cache(maxsize=65536)
def _zeta_power(m: int, a: int) -> Cyclotomic:
    return Cyclotomic(m, _power_row(m, a), power=a)


def _conductor(A) -> int | None:
    ms = {x.m for row in A for x in row if isinstance(x, Cyclotomic)}
    if len(ms) > 1:
        raise MixedConductors(f"entries have conductors {sorted(ms)}")
    return ms.pop() if ms else None


@lru_cache(maxsize=None)
def _certificate_primes(m: int, count: int = 3) -> tuple:
    """Deterministic primes p = 1 mod m below 2^31 with an element of order m."""
    out = []
    k = (2 ** 31 - 2) // m
    while len(out) < count and k > 0:
        p = k * m + 1
        if isprime(p):
            g = pow(primitive_root(p), (p - 1) // m, p)
            out.append((p, g))
        k -= 1
    return tuple(out)


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    rows = [r[:] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        prow = [x * inv % p for x in rows[rank]]
        rows[rank] = prow
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], prow)]
        rank += 1
    return rank


def _rank_field(A: list[list[Cyclotomic]]) -> int:
    """Gaussian elimination over Q(zeta_m); pivot = first non-zero in column order."""
    rows = [list(r) for r in A]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][c].inverse()
        prow = [x * inv for x in rows[rank]]
        rows[rank] = prow
        for i in range(rank + 1, len(rows)):
            if not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        rank += 1
    return rank


def rank_exact(A: Sequence[Sequence], use_certificate: bool = True) -> int:
    """Rank of a matrix of Cyclotomic (or rational) entries over Q(zeta_m).

    A rank computed after reducing modulo a prime ideal is a lower bound; when
    it already equals min(rows, cols) it is the exact rank.  Otherwise the
    matrix is eliminated over the field itself.
    """
    if not A or not A[0]:
        return 0
    m = _conductor(A) or 1
    M = [[x if isinstance(x, Cyclotomic) else Cyclotomic.from_rational(m, x) for x in row]
         for row in A]
    full = min(len(M), len(M[0]))
    if use_certificate:
        for p, g in _certificate_primes(m):
            if any(x.power is None and any(c.denominator % p == 0 for c in x.coeffs)
                   for row in M for x in row):
                continue
            r = _rank_mod_p([[x.reduce_mod(p, g) for x in row] for row in M], p)
            if r == full:
                return r
    return _rank_field(M)


def kron(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    """Kronecker product A (x) B."""
    return [[a * b for a in ra for b in rb] for ra in A for rb in B]
