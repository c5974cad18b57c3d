"""Cosets of Z^n / 2M Z^n, theta-character matrices and their ranks."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Iterable, Sequence

from sympy import isprime

from . import linalg
from .arith import is_odd_squarefree, odd_prime_factors
from .cyclotomic import Cyclotomic, rank_exact
from .errors import BadFactorization, BadModulus, NotPositiveDefinite
from .lattice import HalfIntMatrix, disc_abs, level
from .padic import reduced_form
from .primitivity import exact_denominator


def _frac(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class CosetSystem:
    M: HalfIntMatrix
    reps: tuple
    equiv_partition: tuple  # tuple of (fractional part, tuple of rep indices)
    primitive_mask: tuple
    _snf: tuple
    _lookup: dict

    def class_of(self, v: Sequence[int]) -> int:
        """Index of the representative congruent to v modulo 2M Z^n."""
        diag, P = self._snf
        y = linalg.mat_vec(P, v)
        key = tuple(yi % di for yi, di in zip(y, diag) if di != 1)
        return self._lookup[key]

    def frac_value(self, i: int) -> Fraction:
        """Fractional part of M^{-1}[nu]/4 for rep i."""
        return _frac(self.M.inverse_value(self.reps[i]) / 4)

    def imprimitive_classes(self) -> list[tuple[Fraction, tuple]]:
        out = []
        for fr, idx in self.equiv_partition:
            bad = tuple(i for i in idx if not self.primitive_mask[i])
            if bad:
                out.append((fr, bad))
        return out


def coset_reps(M) -> CosetSystem:
    """Representatives of Z^n / 2M Z^n through the Smith form of 2M.

    When e_n generates the quotient (as for reduced shapes) the reps are
    (0, ..., 0, k) for 0 <= k < det(2M).
    """
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    if not M.is_positive_definite:
        raise NotPositiveDefinite(f"matrix is {M.definiteness}")
    gram = M.two_m()
    diag, P, _ = linalg.smith_normal_form(gram)
    N = 1
    for x in diag:
        N *= x

    def key(v):
        y = linalg.mat_vec(P, v)
        return tuple(yi % di for yi, di in zip(y, diag) if di != 1)

    n = M.n
    e_n = [0] * (n - 1) + [1]
    ke = key(e_n)
    order = lcm(1, *(di // gcd(di, yi) for yi, di in zip(ke, [d for d in diag if d != 1])))
    if order == N:
        reps = [tuple([0] * (n - 1) + [k]) for k in range(N)]
    else:
        Pinv = linalg.inverse(P)
        reps = []
        for y in product(*(range(d) for d in diag)):
            v = [int(x) for x in linalg.mat_vec(Pinv, y)]
            reps.append(tuple(v))
    lookup = {key(v): i for i, v in enumerate(reps)}
    assert len(lookup) == N

    groups: dict[Fraction, list[int]] = {}
    for i, v in enumerate(reps):
        groups.setdefault(_frac(M.inverse_value(v) / 4), []).append(i)
    partition = tuple((fr, tuple(idx)) for fr, idx in sorted(groups.items()))

    dd = disc_abs(M)
    if dd.is_odd_squarefree:
        mask = tuple(exact_denominator(M, v).is_primitive for v in reps)
    else:
        target = dd.d if n % 2 == 0 else 4 * dd.d
        mask = tuple((M.inverse_value(v) / 4).denominator == target for v in reps)
    return CosetSystem(M, tuple(reps), partition, mask, (tuple(diag), P), lookup)


# ---- scalar character matrices ----

def _check_modulus(dprime: int) -> None:
    if dprime <= 1:
        raise BadModulus(f"modulus {dprime} must exceed 1")
    odd = dprime // 2 if dprime % 2 == 0 else dprime
    if odd != 1 and not is_odd_squarefree(odd):
        raise BadModulus(f"{dprime} is not d or 2d with d odd square-free")
    if dprime % 4 == 0:
        raise BadModulus(f"{dprime} is divisible by 4")


def char_columns(dprime: int, nu0: int) -> list[int]:
    """nu mod d' with nu^2 = nu0^2 mod d'."""
    t = nu0 * nu0 % dprime
    return [nu for nu in range(dprime) if nu * nu % dprime == t]


def char_rows(dprime: int) -> list[int]:
    return [mu for mu in range(dprime) if gcd(mu, dprime) == 1]


def char_matrix(dprime: int, nu0: int) -> list[list[Cyclotomic]]:
    """(e(mu nu / d')) with mu coprime to d' and nu^2 = nu0^2 mod d'."""
    _check_modulus(dprime)
    cols = char_columns(dprime, nu0)
    return [[Cyclotomic.zeta_power(dprime, mu * nu) for nu in cols] for mu in char_rows(dprime)]


def t_prime(dprime: int, nu0: int) -> int:
    """Number of odd primes dividing d' but not nu0."""
    return sum(1 for p in odd_prime_factors(dprime) if nu0 % p)


@dataclass(frozen=True)
class Claim2Row:
    dprime: int
    nu0: int
    t_prime: int
    rank: int
    expected: int

    @property
    def ok(self) -> bool:
        return self.rank == self.expected

    def csv_row(self) -> list:
        return [self.dprime, self.nu0, self.t_prime, self.rank, self.expected,
                "true" if self.ok else "false"]


CLAIM2_HEADER = ["dprime", "nu0", "t_prime", "rank", "expected", "pass"]


def claim2_row(dprime: int, nu0: int) -> Claim2Row:
    tp = t_prime(dprime, nu0)
    if dprime == 1:
        return Claim2Row(1, nu0, 0, 1, 1)
    r = rank_exact(char_matrix(dprime, nu0))
    return Claim2Row(dprime, nu0 % dprime, tp, r, 2 ** tp)


def claim2_verify(dprime: int, nu0: int) -> bool:
    """rank of char_matrix(d', nu0) equals 2^{t'}; d' = 1 is true by convention."""
    if dprime == 1:
        return True
    _check_modulus(dprime)
    return claim2_row(dprime, nu0).ok


def claim2_moduli(max_d: int, doubles: bool = True) -> list[int]:
    """All d (odd square-free, 1 < d <= max_d) and, with ``doubles``, 2d (including 2)."""
    ds = [d for d in range(1, max_d + 1) if is_odd_squarefree(d)]
    out = {d for d in ds if d > 1}
    if doubles:
        out |= {2 * d for d in ds}
    return sorted(out)


def _sweep_modulus(dprime: int) -> list[Claim2Row]:
    rows = []
    cache: dict[tuple, int] = {}
    for nu0 in range(dprime):
        cols = tuple(char_columns(dprime, nu0))
        if cols not in cache:
            cache[cols] = rank_exact(char_matrix(dprime, nu0))
        tp = t_prime(dprime, nu0)
        rows.append(Claim2Row(dprime, nu0, tp, cache[cols], 2 ** tp))
    return rows


def claim2_sweep(moduli: Iterable[int], jobs: int = 1) -> list[Claim2Row]:
    """Every nu0 mod d' for every d' given; rows ordered by (d', nu0)."""
    moduli = list(moduli)
    for m in moduli:
        _check_modulus(m)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_modulus, moduli))
    else:
        chunks = [_sweep_modulus(m) for m in moduli]
    return [r for chunk in chunks for r in chunk]


@dataclass(frozen=True)
class KroneckerSplit:
    """char_matrix(d', nu0) = A (x) B after reindexing.

    rows[i] = (a, b) means row i of the full matrix is row a of A times row b
    of B; likewise for cols.
    """

    A: list
    B: list
    rows: tuple
    cols: tuple

    def assemble(self) -> list[list[Cyclotomic]]:
        """The full matrix rebuilt from the factors, in char_matrix order."""
        return [[self.A[ra][ca] * self.B[rb][cb] for (ca, cb) in self.cols]
                for (ra, rb) in self.rows]


def _embedded_char_matrix(k: int, nu0: int, m: int) -> list[list[Cyclotomic]]:
    """char_matrix(k, nu0) with entries written in Q(zeta_m), k | m."""
    step = m // k
    return [[Cyclotomic.zeta_power(m, step * mu * nu) for nu in char_columns(k, nu0)]
            for mu in char_rows(k)]


def kronecker_split(dprime: int, nu0: int, q: int) -> KroneckerSplit:
    """Factor char_matrix(d', nu0) along an odd prime q | d'.

    With r = d'/q, e(mu nu / d') = e(mu r^-1 nu / q) e(mu q^-1 nu / r), so the
    factors are char_matrix(q, nu0 mod q) and char_matrix(r, nu0 mod r) (entries
    embedded in Q(zeta_{d'})), with rows reindexed by mu -> mu r^-1, mu q^-1.
    """
    _check_modulus(dprime)
    if q < 3 or dprime % q or not isprime(q):
        raise BadFactorization(f"{q} is not an odd prime dividing {dprime}")
    r = dprime // q
    full_rows = char_rows(dprime)
    full_cols = char_columns(dprime, nu0)
    if r == 1:
        A = char_matrix(dprime, nu0)
        B = [[Cyclotomic.from_rational(dprime, 1)]]
        return KroneckerSplit(A, B, tuple((i, 0) for i in range(len(full_rows))),
                              tuple((j, 0) for j in range(len(full_cols))))
    A = _embedded_char_matrix(q, nu0 % q, dprime)
    B = _embedded_char_matrix(r, nu0 % r, dprime)
    rows_q, rows_r = char_rows(q), char_rows(r)
    cols_q, cols_r = char_columns(q, nu0 % q), char_columns(r, nu0 % r)
    r_inv, q_inv = pow(r, -1, q), pow(q, -1, r)
    row_map = tuple((rows_q.index(mu * r_inv % q), rows_r.index(mu * q_inv % r))
                    for mu in full_rows)
    col_map = tuple((cols_q.index(nu % q), cols_r.index(nu % r)) for nu in full_cols)
    return KroneckerSplit(A, B, row_map, col_map)


# ---- nonvanishing certificate for lattices ----

@dataclass(frozen=True)
class PrimhClass:
    frac: Fraction
    columns: tuple  # imprimitive reps nu in the class
    n_rows: int  # primitive reps mu
    rank: int

    @property
    def ok(self) -> bool:
        return self.rank == len(self.columns)

    def to_json(self) -> dict:
        return {"frac": linalg.fraction_str(self.frac), "columns": [list(c) for c in self.columns],
                "rows": self.n_rows, "rank": self.rank, "pass": self.ok}


def _require_odd_squarefree(M: HalfIntMatrix) -> int:
    dd = disc_abs(M)
    if not dd.is_odd_squarefree:
        from .errors import BadDiscriminant
        raise BadDiscriminant(f"d_M = {dd.d} is not odd and square-free")
    return dd.d


def primh_report(M) -> list[PrimhClass]:
    """Rank of (e(nu^t (2M)^{-1} mu)) per imprimitive class, mu over primitive reps."""
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    _require_odd_squarefree(M)
    cs = coset_reps(M)
    ell = level(M)
    gram = M.two_m()
    adj = linalg.adjugate(gram)
    det = linalg.det(gram)
    prim = [cs.reps[i] for i, ok in enumerate(cs.primitive_mask) if ok]
    adj_mu = [linalg.mat_vec(adj, mu) for mu in prim]
    out = []
    for fr, idx in cs.imprimitive_classes():
        cols = [cs.reps[i] for i in idx]
        mat = []
        for w in adj_mu:
            row = []
            for nu in cols:
                num = ell * sum(a * b for a, b in zip(nu, w))
                assert num % det == 0
                row.append(Cyclotomic.zeta_power(ell, num // det))
            mat.append(row)
        rank = rank_exact(mat) if mat else 0
        out.append(PrimhClass(fr, tuple(cols), len(prim), rank))
    return out


def primh_certificate(M) -> bool:
    """True when every imprimitive class has full column rank against primitive rows.

    Then vanishing of all primitive theta components forces the rest to vanish.
    """
    return all(c.ok for c in primh_report(M))


@dataclass(frozen=True)
class ReducedShape:
    U: list
    Mtilde: list  # (2M)[U]
    m_nn: int  # last diagonal entry of adj(Mtilde)
    modulus: int  # 2d for odd n, d for even n
    coprime: bool


def reduced_shape(M, f: int = 2) -> ReducedShape:
    """Local-global reduced Gram matrix and the unit test on adj(Mtilde)[n][n]."""
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    d = _require_odd_squarefree(M)
    U, Mt = reduced_form(M, f)
    m_nn = linalg.adjugate(Mt)[-1][-1]
    modulus = 2 * d if M.n % 2 else d
    return ReducedShape(U, Mt, m_nn, modulus, gcd(m_nn, modulus) == 1)


def scalar_pairing_check(M, f: int = 2) -> bool:
    """On the reduced form, (0,..,0,k) represent all classes, nu^t Mt^{-1} mu equals
    nu_n m_nn mu_n / det(Mt), and nu is primitive exactly when (nu_n, d') = 1."""
    rs = reduced_shape(M, f)
    Mt = rs.Mtilde
    n = len(Mt)
    det_t = linalg.det(Mt)
    cs = coset_reps(HalfIntMatrix.from_even(Mt))
    if len(cs.reps) != det_t or cs.reps[1] != tuple([0] * (n - 1) + [1]):
        return False
    if linalg.inverse(Mt)[-1][-1] != Fraction(rs.m_nn, det_t):
        return False
    for nu, prim in zip(cs.reps, cs.primitive_mask):
        if prim != (gcd(nu[-1], rs.modulus) == 1):
            return False
    return rs.coprime
