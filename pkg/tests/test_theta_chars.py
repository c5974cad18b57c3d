import random
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fundisc.cyclotomic import Cyclotomic, kron, rank_exact
from fundisc.errors import BadDiscriminant, BadFactorization, BadModulus
from fundisc.lattice import HalfIntMatrix, random_lattice
from fundisc.primitivity import exact_denominator
from fundisc.theta_chars import (CLAIM2_HEADER, char_columns, char_matrix, char_rows, claim2_moduli,
                                 claim2_row, claim2_sweep, claim2_verify, coset_reps,
                                 kronecker_split, primh_certificate, primh_report,
                                 scalar_pairing_check, t_prime)
from conftest import F_HALF


def frac_part(x):
    return x - (x.numerator // x.denominator)


def test_coset_examples():
    assert coset_reps([[1]]).reps == ((0,), (1,))
    assert coset_reps([[3]]).reps == tuple((k,) for k in range(6))
    cs = coset_reps(F_HALF)
    assert len(cs.reps) == 3
    fracs = sorted(frac_part(F_HALF.inverse_value(r) / 4) for r in cs.reps)
    assert fracs == [0, Fraction(1, 3), Fraction(1, 3)]


def test_coset_system_on_samples(lattices):
    for M in lattices:
        cs = coset_reps(M)
        S = sympy.Matrix(M.two_m())
        assert len(cs.reps) == S.det()
        # reps are pairwise inequivalent: differences are not in 2M Z^n
        inv = S.inv()
        for i in range(min(len(cs.reps), 12)):
            for j in range(i):
                diff = sympy.Matrix([a - b for a, b in zip(cs.reps[i], cs.reps[j])])
                assert any(x.q != 1 for x in inv * diff)
        for fr, idx in cs.equiv_partition:
            assert all(frac_part(M.inverse_value(cs.reps[i]) / 4) == fr for i in idx)
        for rep, prim in zip(cs.reps, cs.primitive_mask):
            assert prim == exact_denominator(M, rep).is_primitive
        # class_of is invariant under shifts by 2M
        rng = random.Random(len(cs.reps))
        for i, rep in enumerate(cs.reps[:5]):
            x = [rng.randint(-3, 3) for _ in range(M.n)]
            shifted = [a + b for a, b in zip(rep, S * sympy.Matrix(x))]
            assert cs.class_of([int(v) for v in shifted]) == i


def test_char_matrix_examples():
    A = char_matrix(2, 1)
    assert len(A) == len(A[0]) == 1 and not A[0][0].is_zero()
    A = char_matrix(3, 0)
    assert len(A) == 2 and len(A[0]) == 1 and all(r[0] == 1 for r in A)
    assert rank_exact(A) == 1
    z = lambda k: Cyclotomic.zeta_power(3, k)
    assert char_matrix(3, 1) == [[z(1), z(2)], [z(2), z(4)]]
    assert rank_exact(char_matrix(3, 1)) == 2


def test_char_matrix_errors():
    for bad in (1, 4, 9, 12, 18, 0):
        with pytest.raises(BadModulus):
            char_matrix(bad, 0)


def test_claim2_examples():
    assert claim2_verify(2, 1) and claim2_row(2, 1).rank == 1
    assert claim2_verify(15, 1) and claim2_row(15, 1).rank == 4
    row = claim2_row(105, 35)
    assert row.ok and row.rank == 2 and row.t_prime == 1


def test_claim2_sweep_small_parallel_matches_serial():
    moduli = claim2_moduli(15)
    serial = claim2_sweep(moduli)
    assert serial == claim2_sweep(moduli, jobs=2)
    assert all(r.ok for r in serial)
    assert len(CLAIM2_HEADER) == len(serial[0].csv_row())
    assert sum(r.dprime == 30 for r in serial) == 30


def test_t_prime_definition():
    assert t_prime(105, 35) == 1
    assert t_prime(30, 0) == 0
    assert t_prime(30, 1) == 2


def test_kronecker_examples():
    ks = kronecker_split(6, 1, 3)
    shapes = sorted([(len(ks.A), len(ks.A[0])), (len(ks.B), len(ks.B[0]))])
    assert shapes == [(1, 1), (2, 2)]
    assert ks.assemble() == char_matrix(6, 1)
    assert rank_exact(kron(ks.A, ks.B)) == 2
    ks = kronecker_split(15, 0, 3)
    assert len(ks.A[0]) == len(ks.B[0]) == 1
    assert rank_exact(kron(ks.A, ks.B)) == 1
    ks = kronecker_split(3, 1, 3)  # nothing left to split off
    assert ks.A == char_matrix(3, 1) and ks.assemble() == char_matrix(3, 1)


def test_kronecker_errors():
    for q in (2, 7, 9):
        with pytest.raises(BadFactorization):
            kronecker_split(15, 1, q)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([15, 21, 30, 35, 42, 105]), st.integers(0, 209), st.data())
def test_kronecker_reassembly_property(dprime, nu0, data):
    qs = [p for p in sympy.primefactors(dprime) if p > 2]
    q = data.draw(st.sampled_from(qs))
    ks = kronecker_split(dprime, nu0 % dprime, q)
    assert ks.assemble() == char_matrix(dprime, nu0 % dprime)
    assert rank_exact(ks.assemble()) == rank_exact(ks.A) * rank_exact(ks.B)


def test_char_rows_and_columns():
    assert char_rows(6) == [1, 5]
    assert char_columns(15, 1) == [nu for nu in range(15) if (nu * nu - 1) % 15 == 0]


def test_primh_examples():
    assert primh_certificate([[1]])
    assert primh_certificate([[3]])
    assert primh_certificate(F_HALF)
    with pytest.raises(BadDiscriminant):
        primh_certificate([[2]])


def test_primh_and_pairing_on_samples(lattices):
    for M in lattices[:30]:
        assert all(c.ok for c in primh_report(M))
        assert scalar_pairing_check(M)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_primh_random(seed, n):
    M = random_lattice(n, random.Random(seed), max_d=120)
    assert primh_certificate(M)


def test_pairing_in_reduced_shape_uses_last_coordinate():
    M = HalfIntMatrix([[1, Fraction(1, 2)], [Fraction(1, 2), 3]])  # d = 11
    assert scalar_pairing_check(M)
    # (0, k) is primitive exactly when 11 does not divide k
    for k in range(22):
        assert exact_denominator(M, [0, k]).is_primitive == (gcd(k, 11) == 1)
