"""Elementary arithmetic helpers (square-freeness, sieves, CRT)."""

from __future__ import annotations

from math import gcd, isqrt
from typing import Iterable

from sympy import factorint


def trial_factor(n: int) -> dict[int, int]:
    """Factor ``n >= 1`` by trial division (values here stay below ~1e7)."""
    if n < 1:
        raise ValueError("trial_factor needs a positive integer")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(e == 1 for e in trial_factor(n).values())


def is_odd_squarefree(n: int) -> bool:
    return n % 2 == 1 and is_squarefree(n)


def prime_factors(n: int) -> list[int]:
    return sorted(factorint(abs(n)))


def odd_prime_factors(n: int) -> list[int]:
    return [p for p in prime_factors(n) if p != 2]


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def squarefree_flags(n: int) -> bytearray:
    """flags[k] == 1 iff k is square-free, for 0 <= k <= n (flags[0] == 0)."""
    flags = bytearray([1]) * (n + 1)
    flags[0] = 0
    for p in primes_upto(isqrt(n)):
        q = p * p
        flags[q::q] = bytearray(len(range(q, n + 1, q)))
    return flags


def crt(residues: Iterable[int], moduli: Iterable[int]) -> tuple[int, int]:
    """Combine x = r_i mod m_i for pairwise coprime moduli; returns (x, prod m_i)."""
    x, M = 0, 1
    for r, m in zip(residues, moduli):
        if gcd(M, m) != 1:
            raise ValueError("moduli are not pairwise coprime")
        t = ((r - x) * pow(M, -1, m)) % m
        x += M * t
        M *= m
    return x % M if M > 1 else 0, M


def valuation_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
