"""Truncated q-series with exponents in (1/D)Z and exact rational coefficients.

Products use Kronecker substitution: the (integer-scaled) coefficient arrays
are packed into single Python integers, multiplied once, and unpacked.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

from sympy import bernoulli

from .arith import primes_upto, squarefree_flags
from .errors import BadWeight, FractionalExponents, PrecisionTooLow


def default_trunc() -> int:
    """Series truncation from SF_TRUNC_DEFAULT (default 256)."""
    return int(os.environ.get("SF_TRUNC_DEFAULT", "256"))


class FracQSeries:
    """sum_e c_e q^(e/D), known for exponents below ``trunc``."""

    __slots__ = ("D", "coeffs", "trunc", "weight2", "label")

    def __init__(self, coeffs: Mapping[int, object], D: int = 1, trunc=1,
                 weight2: int | None = None, label: str = ""):
        if D < 1:
            raise ValueError("exponent denominator must be positive")
        trunc = Fraction(trunc)
        cut = _max_numerator(trunc, D)
        clean = {}
        for e, c in coeffs.items():
            c = Fraction(c)
            if not c:
                continue
            if e < 0:
                raise ValueError(f"negative exponent {e}/{D}")
            if e <= cut:
                clean[int(e)] = c
        self.D = D
        self.coeffs = clean
        self.trunc = trunc
        self.weight2 = weight2
        self.label = label

    # ---- constructors ----
    @classmethod
    def from_list(cls, values: Iterable, D: int = 1, trunc=None, **kw) -> "FracQSeries":
        values = list(values)
        if trunc is None:
            trunc = Fraction(len(values), D)
        return cls(dict(enumerate(values)), D, trunc, **kw)

    @classmethod
    def zero(cls, trunc=1, D: int = 1) -> "FracQSeries":
        return cls({}, D, trunc)

    @classmethod
    def one(cls, trunc=1) -> "FracQSeries":
        return cls({0: 1}, 1, trunc)

    # ---- inspection ----
    def max_numerator(self) -> int:
        return _max_numerator(self.trunc, self.D)

    def coefficient(self, x) -> Fraction:
        """Coefficient of q^x for a rational exponent x < trunc."""
        x = Fraction(x)
        if x >= self.trunc:
            raise PrecisionTooLow(f"exponent {x} is beyond the truncation {self.trunc}")
        e = x * self.D
        if e.denominator != 1:
            return Fraction(0)
        return self.coeffs.get(int(e), Fraction(0))

    def items(self) -> list[tuple[Fraction, Fraction]]:
        """(exponent, coefficient) pairs in increasing exponent order."""
        return [(Fraction(e, self.D), c) for e, c in sorted(self.coeffs.items())]

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> tuple[Fraction, Fraction] | None:
        if not self.coeffs:
            return None
        e = min(self.coeffs)
        return Fraction(e, self.D), self.coeffs[e]

    def integer_coeffs(self, upto: int | None = None) -> list[Fraction]:
        """[a(0), ..., a(upto)] for a series with integer exponents."""
        self._require_integral()
        top = self.max_numerator() if upto is None else upto
        if top > self.max_numerator():
            raise PrecisionTooLow(f"a({top}) is beyond the truncation {self.trunc}")
        return [self.coeffs.get(n, Fraction(0)) for n in range(top + 1)]

    def _require_integral(self) -> None:
        if self.D != 1:
            raise FractionalExponents(f"series has exponent denominator {self.D}")

    # ---- arithmetic ----
    def with_denominator(self, D: int) -> "FracQSeries":
        if D % self.D:
            raise ValueError(f"{D} is not a multiple of {self.D}")
        k = D // self.D
        return FracQSeries({e * k: c for e, c in self.coeffs.items()}, D, self.trunc,
                           self.weight2, self.label)

    def truncate(self, trunc) -> "FracQSeries":
        return FracQSeries(self.coeffs, self.D, min(Fraction(trunc), self.trunc),
                           self.weight2, self.label)

    def _align(self, other: "FracQSeries"):
        D = lcm(self.D, other.D)
        return self.with_denominator(D), other.with_denominator(D), D

    def __add__(self, other: "FracQSeries") -> "FracQSeries":
        a, b, D = self._align(other)
        out = dict(a.coeffs)
        for e, c in b.coeffs.items():
            out[e] = out.get(e, 0) + c
        return FracQSeries(out, D, min(a.trunc, b.trunc))

    def __neg__(self) -> "FracQSeries":
        return FracQSeries({e: -c for e, c in self.coeffs.items()}, self.D, self.trunc,
                           self.weight2, self.label)

    def __sub__(self, other: "FracQSeries") -> "FracQSeries":
        return self + (-other)

    def scale(self, k) -> "FracQSeries":
        k = Fraction(k)
        return FracQSeries({e: c * k for e, c in self.coeffs.items()}, self.D, self.trunc,
                           self.weight2, self.label)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        a, b, D = self._align(other)
        trunc = min(a.trunc, b.trunc)
        cut = _max_numerator(trunc, D)
        coeffs = _convolve(a.coeffs, b.coeffs, cut)
        w = a.weight2 + b.weight2 if a.weight2 is not None and b.weight2 is not None else None
        return FracQSeries(coeffs, D, trunc, w)

    __rmul__ = __mul__

    def mul_naive(self, other: "FracQSeries") -> "FracQSeries":
        """Schoolbook product; reference implementation for testing."""
        a, b, D = self._align(other)
        trunc = min(a.trunc, b.trunc)
        cut = _max_numerator(trunc, D)
        out: dict[int, Fraction] = {}
        for e1, c1 in a.coeffs.items():
            for e2, c2 in b.coeffs.items():
                if e1 + e2 <= cut:
                    out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return FracQSeries(out, D, trunc)

    def __pow__(self, k: int) -> "FracQSeries":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = FracQSeries({0: 1}, self.D, self.trunc)
        base = self
        weight2 = None if self.weight2 is None else self.weight2 * k
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        result.weight2 = weight2
        return result

    def shift(self, x) -> "FracQSeries":
        """Multiply by q^x (x >= 0); the truncation moves with the series."""
        x = Fraction(x)
        D = lcm(self.D, x.denominator)
        a = self.with_denominator(D)
        s = int(x * D)
        return FracQSeries({e + s: c for e, c in a.coeffs.items()}, D, a.trunc + x,
                           self.weight2, self.label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracQSeries):
            return NotImplemented
        return self.trunc == other.trunc and self.items() == other.items()

    def agrees_with(self, other: "FracQSeries") -> bool:
        """Equal on the common range of known exponents."""
        t = min(self.trunc, other.trunc)
        return self.truncate(t).items() == other.truncate(t).items()

    def __repr__(self) -> str:
        head = ", ".join(f"{x}:{c}" for x, c in self.items()[:6])
        return f"FracQSeries(D={self.D}, trunc={self.trunc}, {{{head}{', ...' if len(self.coeffs) > 6 else ''}}})"

    # ---- file format ----
    def dumps(self) -> str:
        lines = [f"# D: {self.D}", f"# trunc: {self.trunc}"]
        if self.weight2 is not None:
            lines.append(f"# weight2: {self.weight2}")
        if self.label:
            lines.append(f"# label: {self.label}")
        for e, c in sorted(self.coeffs.items()):
            lines.append(f"{e}/{self.D}\t{c.numerator}/{c.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FracQSeries":
        meta: dict[str, str] = {}
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
                continue
            ex, coeff = line.split("\t")
            rows.append((Fraction(ex), Fraction(coeff)))
        D = int(meta.get("D", 0)) or lcm(1, *(x.denominator for x, _ in rows))
        coeffs = {}
        for x, c in rows:
            e = x * D
            if e.denominator != 1:
                raise FractionalExponents(f"exponent {x} is not in (1/{D})Z")
            coeffs[int(e)] = coeffs.get(int(e), 0) + c
        if "trunc" in meta:
            trunc = Fraction(meta["trunc"])
        else:
            trunc = (max(x for x, _ in rows) + Fraction(1, D)) if rows else Fraction(1)
        w = int(meta["weight2"]) if "weight2" in meta else None
        return cls(coeffs, D, trunc, w, meta.get("label", ""))


def _max_numerator(trunc: Fraction, D: int) -> int:
    """Largest e with e/D < trunc."""
    x = Fraction(trunc) * D
    return math.ceil(x) - 1


# ---- convolution ----

def _dense_integer(coeffs: Mapping[int, Fraction], cut: int) -> tuple[list[int], int]:
    """Integer array a[0..cut] and L with coeffs = a / L."""
    L = lcm(1, *(c.denominator for e, c in coeffs.items() if e <= cut))
    arr = [0] * (cut + 1)
    for e, c in coeffs.items():
        if e <= cut:
            arr[e] = c.numerator * (L // c.denominator)
    return arr, L


def _pack(arr: list[int], nbytes: int) -> int:
    pos = b"".join((x if x > 0 else 0).to_bytes(nbytes, "little") for x in arr)
    neg = b"".join((-x if x < 0 else 0).to_bytes(nbytes, "little") for x in arr)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _convolve(a: Mapping[int, Fraction], b: Mapping[int, Fraction], cut: int) -> dict[int, Fraction]:
    if not a or not b or cut < 0:
        return {}
    lo_a, lo_b = min(a), min(b)
    if lo_a + lo_b > cut:
        return {}
    # shift both to start at zero to keep the packed integers short
    A, La = _dense_integer({e - lo_a: c for e, c in a.items()}, cut - lo_a - lo_b)
    B, Lb = _dense_integer({e - lo_b: c for e, c in b.items()}, cut - lo_a - lo_b)
    n = len(A)
    bound = n * max(map(abs, A)) * max(map(abs, B))
    if bound == 0:
        return {}
    nbytes = (bound.bit_length() + 2 + 7) // 8
    nbits = 8 * nbytes
    P = _pack(A, nbytes) * _pack(B, nbytes)
    half = 1 << (nbits - 1)
    bias = int.from_bytes(half.to_bytes(nbytes, "little") * (2 * n - 1), "little")
    raw = (P + bias).to_bytes(nbytes * (2 * n - 1), "little")
    L = La * Lb
    out = {}
    for k in range(n):
        v = int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little") - half
        if v:
            out[k + lo_a + lo_b] = Fraction(v, L)
    return out


# ---- classical builders ----

def eta(trunc=None) -> FracQSeries:
    """q^(1/24) prod (1 - q^n) via Euler's pentagonal series; D = 24."""
    trunc = Fraction(default_trunc() if trunc is None else trunc)
    if trunc < 1:
        raise ValueError("trunc must be at least 1")
    cut = _max_numerator(trunc, 24)
    coeffs = {}
    k = 0
    while True:
        done = True
        for kk in ((k, -k) if k else (0,)):
            e = 1 + 12 * kk * (3 * kk - 1)
            if e <= cut:
                coeffs[e] = (-1) ** (kk % 2)
                done = False
        if done and k:
            break
        k += 1
    return FracQSeries(coeffs, 24, trunc, weight2=1, label="eta")


def _euler_cube(cut: int) -> dict[int, int]:
    """prod (1 - q^n)^3 = sum (-1)^k (2k+1) q^(k(k+1)/2)."""
    out = {}
    k = 0
    while k * (k + 1) // 2 <= cut:
        out[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return out


def delta(trunc=None) -> FracQSeries:
    """Delta = q prod (1 - q^n)^24."""
    trunc = int(default_trunc() if trunc is None else trunc)
    if trunc < 1:
        raise ValueError("trunc must be at least 1")
    P = FracQSeries(_euler_cube(trunc - 2), 1, trunc - 1) if trunc > 1 else FracQSeries({}, 1, 0)
    for _ in range(3):
        P = P * P
    out = P.shift(1)
    out.weight2 = 24
    out.label = "Delta"
    return out


def divisor_sigma_table(k: int, N: int) -> list[int]:
    """sigma_k(n) for 0 <= n <= N (sigma_k(0) = 0)."""
    s = [0] * (N + 1)
    for d in range(1, N + 1):
        dk = d ** k
        for m in range(d, N + 1, d):
            s[m] += dk
    return s


def eisenstein_E(k: int, trunc=None) -> FracQSeries:
    """E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n, for even k >= 4."""
    if k < 4 or k % 2:
        raise BadWeight(f"weight {k} must be even and at least 4")
    trunc = int(default_trunc() if trunc is None else trunc)
    B = bernoulli(k)
    c = -Fraction(2 * k) / Fraction(int(B.p), int(B.q))
    sig = divisor_sigma_table(k - 1, trunc - 1)
    coeffs = {0: Fraction(1)}
    for n in range(1, trunc):
        coeffs[n] = c * sig[n]
    return FracQSeries(coeffs, 1, trunc, weight2=2 * k, label=f"E{k}")


def rescale_V(f: FracQSeries, ell: int) -> FracQSeries:
    """f(ell * tau)."""
    if ell < 1:
        raise ValueError("rescaling factor must be positive")
    g = gcd(ell, f.D)
    D = f.D // g
    k = ell // g
    return FracQSeries({e * k: c for e, c in f.coeffs.items()}, D, f.trunc * ell,
                       f.weight2, f.label)


def sieve_coprime(f: FracQSeries, modulus: int) -> FracQSeries:
    """Drop a(n) for gcd(n, modulus) > 1."""
    f._require_integral()
    return FracQSeries({n: c for n, c in f.coeffs.items() if gcd(n, modulus) == 1},
                       1, f.trunc, f.weight2, f.label)


# ---- Rankin-type sums ----

def square_sum(f: FracQSeries, X: int) -> Fraction:
    """sum_{1 <= n <= X} a(n)^2."""
    a = f.integer_coeffs(X)
    return sum((a[n] * a[n] for n in range(1, X + 1)), Fraction(0))


def rankin_partial(f: FracQSeries, kappa2: int, X: int) -> Fraction:
    """sum_{n <= X} a(n)^2 / n^(kappa - 1), kappa = kappa2 / 2, exactly.

    Only integral kappa is supported; half-integral weight would need
    square roots of n.
    """
    if kappa2 % 2:
        raise BadWeight("half-integral kappa needs irrational normalisation")
    kappa = kappa2 // 2
    if kappa <= 1:
        raise BadWeight("kappa must exceed 1")
    a = f.integer_coeffs(X)
    e = kappa - 1
    L = lcm(*range(1, X + 1)) ** e if X >= 1 else 1
    num = 0
    den_all = lcm(1, *(a[n].denominator for n in range(1, X + 1)))
    for n in range(1, X + 1):
        if a[n]:
            x = a[n] * den_all
            num += int(x) ** 2 * (L // n ** e)
    return Fraction(num, L * den_all * den_all)


# ---- censuses ----

@dataclass(frozen=True)
class Census:
    X: int
    count: int
    candidates: int
    first: tuple
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"X": self.X, "count": self.count, "candidates": self.candidates,
               "first": list(self.first)}
        out.update(self.extra)
        return out


def census_squarefree(f: FracQSeries, X: int, odd_only: bool = False,
                      coprime_to: int = 1) -> Census:
    """Square-free n <= X (odd if asked, coprime to ``coprime_to``) with a(n) != 0."""
    a = f.integer_coeffs(X)
    sf = squarefree_flags(X)
    hits = []
    cand = 0
    for n in range(1, X + 1):
        if not sf[n] or (odd_only and n % 2 == 0) or gcd(n, coprime_to) != 1:
            continue
        cand += 1
        if a[n]:
            hits.append(n)
    return Census(X, len(hits), cand, tuple(hits[:50]))


def census_prime(f: FracQSeries, X: int, level: int = 1) -> Census:
    """Primes p <= X, coprime to ``level``, with a(p) != 0."""
    a = f.integer_coeffs(X)
    primes = [p for p in primes_upto(X) if gcd(p, level) == 1]
    hits = [p for p in primes if a[p]]
    pi = len(primes_upto(X))
    extra = {"pi_X": pi}
    if X >= 3:
        extra["ratio_to_X_over_logX"] = round(len(hits) / (X / math.log(X)), 6)
    return Census(X, len(hits), len(primes), tuple(hits[:50]), extra)


CENSUS_HEADER = ["n", "a", "squarefree", "odd", "prime"]


def census_rows(f: FracQSeries, X: int) -> list[list]:
    a = f.integer_coeffs(X)
    sf = squarefree_flags(X)
    pr = set(primes_upto(X))
    out = []
    for n in range(1, X + 1):
        c = a[n]
        out.append([n, f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator),
                    int(sf[n]), n % 2, int(n in pr)])
    return out
