import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fundisc.arith import prime_factors
from fundisc.errors import (BadDiscriminant, LocalDetNotOne, ModuliNotCoprime, PrecisionTooLow,
                            ZeroInput)
from fundisc.lattice import disc_abs, random_lattice
from fundisc.padic import JordanForm, crt_lift_sl, jordan_decompose, reduced_form, valuation
from conftest import F_HALF


def congruent_mod(A, B, N):
    return all((a - b) % N == 0 for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def gram_of(M, U):
    S = sympy.Matrix(M.two_m())
    V = sympy.Matrix(U)
    return (V.T * S * V).tolist()


def test_valuation_examples():
    assert valuation(12, 2) == 2
    assert valuation(Fraction(3, 4), 2) == -2
    assert valuation(Fraction(5, 3), 3) == -1
    with pytest.raises(ZeroInput):
        valuation(0, 5)


def test_jordan_F_at_3():
    jf = jordan_decompose(F_HALF, 3, 2)
    kinds = [b.kind for b in jf.blocks]
    assert kinds == ["unit", "scaled"]
    # complete the square: F ~ diag(2, 3/2) over Z_3, and 1/2 = 5 mod 9
    assert jf.blocks[0].u % 3 == 2
    assert jf.blocks[1].u % 3 == 5 % 3
    assert congruent_mod(gram_of(F_HALF, jf.U), jf.assembled(), 9)


def test_jordan_F_at_2_is_fblock():
    jf = jordan_decompose(F_HALF, 2, 2)
    assert [b.kind for b in jf.blocks] == ["fblock"]


def test_jordan_one_at_2():
    jf = jordan_decompose([[1]], 2, 2)
    assert [b.kind for b in jf.blocks] == ["scaled"]
    assert jf.assembled() == [[2]]


def test_jordan_errors():
    with pytest.raises(PrecisionTooLow):
        jordan_decompose(F_HALF, 3, 1)
    with pytest.raises(BadDiscriminant):
        jordan_decompose([[1, 0], [0, 1]], 3, 2)  # d = 4
    with pytest.raises(BadDiscriminant):
        jordan_decompose([[9]], 3, 2)  # d = 9


def test_jordan_json_roundtrip():
    jf = jordan_decompose(F_HALF, 3, 3)
    assert JordanForm.from_json(jf.to_json()) == jf
    assert jordan_decompose(F_HALF, 2, 2).to_json()["blocks"] == [{"kind": "fblock"}]


def test_crt_examples():
    assert crt_lift_sl([(3, 9, [[1, 0], [0, 1]])]) == [[1, 0], [0, 1]]
    assert crt_lift_sl([], n=3) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    U = crt_lift_sl([(3, 3, [[1, 0], [0, 1]]), (2, 4, [[0, -1], [1, 0]])])
    assert sympy.Matrix(U).det() == 1
    assert congruent_mod(U, [[1, 0], [0, 1]], 3)
    assert congruent_mod(U, [[0, -1], [1, 0]], 4)


def test_crt_errors():
    with pytest.raises(ModuliNotCoprime):
        crt_lift_sl([(3, 3, [[1]]), (3, 9, [[1]])])
    with pytest.raises(LocalDetNotOne):
        crt_lift_sl([(5, 25, [[2, 0], [0, 1]])])


@pytest.mark.parametrize("f", [2, 3, 4])
def test_jordan_congruence_on_samples(lattices, f):
    for M in lattices:
        d = disc_abs(M).d
        for p in sorted(set(prime_factors(2 * d))):
            jf = jordan_decompose(M, p, f)
            N = p ** f
            assert congruent_mod(gram_of(M, jf.U), jf.assembled(), N)
            assert sympy.Matrix(jf.U).det() % N == 1
            # det-normalised U preserves det(2M) modulo p^f
            assert (sympy.Matrix(jf.assembled()).det() - sympy.Matrix(M.two_m()).det()) % N == 0
            scaled = sum(b.kind == "scaled" for b in jf.blocks)
            if p % 2:
                assert scaled == (1 if d % p == 0 else 0)
            elif M.n % 2:
                kinds = [b.kind for b in jf.blocks]
                assert kinds == ["hyp"] * (M.n // 2) + ["scaled"]


def test_dyadic_shape_odd_n_even_twisted_units(lattices):
    for M in lattices:
        if M.n % 2 == 0:
            for b in jordan_decompose(M, 2, 3).blocks:
                assert b.kind in ("hyp", "fblock")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_reduced_form_is_global_sl(seed, n):
    M = random_lattice(n, random.Random(seed), max_d=400)
    U, Mt = reduced_form(M)
    assert sympy.Matrix(U).det() == 1
    assert Mt == gram_of(M, U)


@st.composite
def local_constraints(draw):
    n = draw(st.integers(1, 3))
    primes = draw(st.lists(st.sampled_from([2, 3, 5, 7, 11]), min_size=0, max_size=3, unique=True))
    out = []
    for q in primes:
        f = draw(st.integers(1, 3))
        N = q ** f
        A = sympy.Matrix(n, n, draw(st.lists(st.integers(0, N - 1), min_size=n * n, max_size=n * n)))
        d = int(A.det()) % N
        if d % q == 0:
            A = sympy.eye(n)
            d = 1
        # scale the first column so det = 1 mod N
        inv = pow(d, -1, N)
        A[:, 0] = A[:, 0] * inv
        out.append((q, N, [[int(x) % N for x in row] for row in A.tolist()]))
    return n, out


@settings(max_examples=150, deadline=None)
@given(local_constraints())
def test_crt_lift_property(data):
    n, local = data
    U = crt_lift_sl(local, n=n)
    assert sympy.Matrix(U).det() == 1
    for _, N, Uq in local:
        assert congruent_mod(U, Uq, N)
