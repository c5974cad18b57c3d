"""Exact denominators of M^{-1}[mu]/4, primitive vectors and local brute-force checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Sequence

from . import linalg
from .arith import crt, prime_factors
from .errors import BadDiscriminant, DimensionMismatch, SearchTooLarge
from .lattice import HalfIntMatrix, disc_abs
from .padic import jordan_decompose

# residue enumerations larger than this are refused
BRUTE_FORCE_BUDGET = 2_000_000


@dataclass(frozen=True)
class PrimitivityReport:
    mu: tuple
    value: Fraction
    denominator: int
    target: int
    is_primitive: bool

    def to_json(self) -> dict:
        return {"mu": list(self.mu), "value": linalg.fraction_str(self.value),
                "denominator": self.denominator, "target": self.target,
                "is_primitive": self.is_primitive}


def _odd_squarefree(M) -> tuple[HalfIntMatrix, int]:
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    dd = disc_abs(M)
    if not dd.is_odd_squarefree:
        raise BadDiscriminant(f"d_M = {dd.d} is not odd and square-free")
    return M, dd.d


def target_denominator(M) -> int:
    """d_M for even n, 4 d_M for odd n."""
    M, d = _odd_squarefree(M)
    return d if M.n % 2 == 0 else 4 * d


def exact_denominator(M, mu: Sequence[int]) -> PrimitivityReport:
    M, d = _odd_squarefree(M)
    if len(mu) != M.n:
        raise DimensionMismatch(f"mu has length {len(mu)}, expected {M.n}")
    value = M.inverse_value(mu) / 4
    target = d if M.n % 2 == 0 else 4 * d
    den = value.denominator
    return PrimitivityReport(tuple(mu), value, den, target, den == target)


def _local_choice(M: HalfIntMatrix, p: int) -> tuple[list[int], int]:
    """A residue class mu mod p (mod 4 at p = 2) with mu not in 2M Z_p^n.

    The scaled Jordan block is last, so mu = U^{-t} e_n hits it.
    """
    jf = jordan_decompose(M, p, 2)
    U = [list(r) for r in jf.U]
    mod = 4 if p == 2 else p
    adj = linalg.adjugate(U)  # det U = 1 mod p^2, so adj(U) = U^{-1} there
    row = adj[-1]
    return [x % mod for x in row], mod


def find_primitive(M) -> list[int]:
    """An integral mu whose exact denominator is d_M (n even) or 4 d_M (n odd)."""
    M, d = _odd_squarefree(M)
    primes = prime_factors(d)
    if M.n % 2 == 1:
        primes = [2] + primes
    if not primes:
        # d = 1 and n even: every mu has denominator 1
        return [0] * M.n
    choices = [_local_choice(M, p) for p in primes]
    moduli = [m for _, m in choices]
    mu = [crt([c[i] for c, _ in choices], moduli)[0] for i in range(M.n)]
    if exact_denominator(M, mu).is_primitive:
        return mu
    bound = lcm(*moduli)
    for cand in product(range(bound), repeat=M.n):
        if exact_denominator(M, cand).is_primitive:
            return list(cand)
    raise AssertionError("no primitive vector found; the lattice is not maximal")


def _adj_form(gram, p: int):
    """(terms, v, mod): (2M)^{-1}[mu] = q(mu) / det with v = v_p(det), and q is
    evaluated modulo mod = p^(v+1), enough to decide v_p(q) against v and v+1."""
    D = linalg.det(gram)
    v = 0
    while D % p == 0:
        D //= p
        v += 1
    mod = p ** (v + 1)
    adj = linalg.adjugate(gram)
    n = len(gram)
    terms = [(i, j, (adj[i][j] * (1 if i == j else 2)) % mod)
             for i in range(n) for j in range(i, n)]
    return [t for t in terms if t[2]], v, mod


def _form_mod(terms, mu, mod: int) -> int:
    return sum(c * mu[i] * mu[j] for i, j, c in terms) % mod


def _form_sweep(terms, n: int, N: int, mod: int):
    """For each prefix mu_1..mu_{n-1} mod N, yield (prefix, [q(prefix, t) mod mod for t < N]).

    q is split as base + t (lin + sq t) in the last coordinate t.
    """
    last = n - 1
    inner = [(i, j, c) for i, j, c in terms if j < last]
    lin_terms = [(i, c) for i, j, c in terms if j == last and i < last]
    sq = sum(c for i, j, c in terms if i == j == last)
    ts = range(N)
    for prefix in product(range(N), repeat=n - 1):
        base = sum(c * prefix[i] * prefix[j] for i, j, c in inner)
        lin = sum(c * prefix[i] for i, c in lin_terms)
        yield prefix, [(base + t * (lin + sq * t)) % mod for t in ts]


def _solvability_rows(snf, p: int, f: int) -> list[tuple[list[int], int]]:
    """mu = 2M x is solvable mod p^f iff (P mu)_i = 0 mod gcd(diag_i, p^f) for all i,
    where P (2M) Q = diag.  Only rows with a non-trivial gcd are kept."""
    diag, P, _ = snf
    mod = p ** f
    out = []
    for i, row in enumerate(P):
        g = diag[i] % mod if i < len(diag) else 0
        g = gcd(mod if g == 0 else g, mod)
        if g > 1:
            out.append(([x % g for x in row], g))
    return out


def _solvable_mod(rows, mu: Sequence[int]) -> bool:
    return all(sum(a * b for a, b in zip(row, mu)) % g == 0 for row, g in rows)


def claim1_verify(M, p: int, f: int, method: str = "auto") -> bool:
    """Check (2M)^{-1}[mu] in 2Z_p  <=>  mu in 2M Z_p^n for every mu.

    ``residues`` enumerates all mu mod p^f; ``cosets`` enumerates Z^n / 2M Z^n,
    which suffices because both sides are invariant under mu -> mu + 2M x.
    ``auto`` picks residues when p^(f n) is within BRUTE_FORCE_BUDGET.
    """
    M, _ = _odd_squarefree(M)
    gram = M.two_m()
    terms, v, mod = _adj_form(gram, p)
    # in 2Z_p: v_p(q) >= v for odd p, >= v + 1 at p = 2
    need = p ** (v + 1) if p == 2 else p ** v
    rows = _solvability_rows(linalg.smith_normal_form(gram), p, f)
    if method == "auto":
        method = "residues" if p ** (f * M.n) <= BRUTE_FORCE_BUDGET else "cosets"
    if method == "residues":
        if p ** (f * M.n) > BRUTE_FORCE_BUDGET:
            raise SearchTooLarge(f"{p}^({f}*{M.n}) residues exceed the budget")
        N = p ** f
        ts = range(N)
        for prefix, qs in _form_sweep(terms, M.n, N, mod):
            rhs = [True] * N
            for row, g in rows:
                rb = sum(a * b for a, b in zip(row, prefix))
                rl = row[-1]
                rhs = [ok and (rb + rl * t) % g == 0 for ok, t in zip(rhs, ts)]
            if [q % need == 0 for q in qs] != rhs:
                return False
        return True
    if method != "cosets":
        raise ValueError(f"unknown method {method!r}")
    from .theta_chars import coset_reps
    for mu in coset_reps(M).reps:
        lhs = _form_mod(terms, mu, mod) % need == 0
        rhs = _solvable_mod(rows, mu)
        if lhs != rhs:
            return False
    return True


def claim2_dyadic_verify(M, f: int = 3) -> bool:
    """For odd n: no mu mod 2^f has (2M)^{-1}[mu] in Z_2 but not in 2Z_2."""
    M, _ = _odd_squarefree(M)
    if M.n % 2 == 0:
        raise DimensionMismatch("the dyadic parity statement concerns odd n")
    if 2 ** (f * M.n) > BRUTE_FORCE_BUDGET:
        raise SearchTooLarge(f"2^({f}*{M.n}) residues exceed the budget")
    terms, v, mod = _adj_form(M.two_m(), 2)
    unit = 2 ** v  # x = q/det is a 2-adic unit exactly when q = 2^v mod 2^(v+1)
    return not any(unit in qs for _, qs in _form_sweep(terms, M.n, 2 ** f, mod))
