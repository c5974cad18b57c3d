import random
from fractions import Fraction
from itertools import product

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from fundisc.errors import BadDiscriminant, DimensionMismatch
from fundisc.lattice import random_lattice
from fundisc.primitivity import (claim1_verify, claim2_dyadic_verify, exact_denominator,
                                 find_primitive, target_denominator)
from conftest import F_HALF


def test_exact_denominator_examples():
    r = exact_denominator([[3]], [1])
    assert (r.value, r.denominator, r.target, r.is_primitive) == (Fraction(1, 12), 12, 12, True)
    r = exact_denominator(F_HALF, [1, 0])
    assert (r.value, r.denominator, r.target, r.is_primitive) == (Fraction(1, 3), 3, 3, True)
    r = exact_denominator([[3]], [3])
    assert (r.value, r.denominator, r.is_primitive) == (Fraction(3, 4), 4, False)


def test_exact_denominator_errors():
    with pytest.raises(BadDiscriminant):
        exact_denominator([[2]], [1])  # d = 2
    with pytest.raises(DimensionMismatch):
        exact_denominator(F_HALF, [1])


def test_find_primitive_examples():
    assert exact_denominator([[1]], find_primitive([[1]])).denominator == 4
    assert exact_denominator([[3]], find_primitive([[3]])).is_primitive
    assert exact_denominator(F_HALF, find_primitive(F_HALF)).denominator == 3
    with pytest.raises(BadDiscriminant):
        find_primitive([[1, 0], [0, 1]])


def test_claim1_examples():
    assert claim1_verify([[3]], 3, 2)
    assert claim1_verify(F_HALF, 3, 2)
    assert claim1_verify([[1]], 5, 1)


def test_claim1_methods_agree(lattices):
    for M in lattices[:15]:
        for p in (2, 3):
            if p ** (2 * M.n) <= 10 ** 4:
                assert claim1_verify(M, p, 2, "residues") == claim1_verify(M, p, 2, "cosets") is True


def test_find_primitive_on_samples(lattices):
    for M in lattices:
        mu = find_primitive(M)
        rep = exact_denominator(M, mu)
        assert rep.is_primitive
        # independent oracle: (1/4) mu^t M^-1 mu via sympy
        val = (sympy.Matrix([mu]) * sympy.Matrix(M.tolist()).inv() * sympy.Matrix(mu))[0] / 4
        assert sympy.Rational(val).q == target_denominator(M)


def test_claim2_dyadic_on_odd_samples(lattices):
    for M in lattices:
        if M.n % 2 == 1:
            assert claim2_dyadic_verify(M, 3)


def brute_claim2(M, f):
    """No mu mod 2^f with (2M)^-1[mu] a 2-adic unit (odd numerator, odd denominator)."""
    inv = sympy.Matrix(M.two_m()).inv()
    for mu in product(range(2 ** f), repeat=M.n):
        v = (sympy.Matrix([mu]) * inv * sympy.Matrix(mu))[0]
        if v.q % 2 == 1 and v.p % 2 == 1:
            return False
    return True


def test_claim2_dyadic_matches_brute_force():
    rng = random.Random(5)
    for n in (1, 3):
        M = random_lattice(n, rng, max_d=100)
        assert claim2_dyadic_verify(M, 2) == brute_claim2(M, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4),
       st.lists(st.integers(-6, 6), min_size=4, max_size=4), st.integers(2, 5))
def test_denominator_divides_target_and_scaling(seed, n, mu, k):
    M = random_lattice(n, random.Random(seed), max_d=300)
    mu = mu[:n]
    rep = exact_denominator(M, mu)
    assert rep.target % rep.denominator == 0
    assert rep.is_primitive == (rep.denominator == rep.target)
    assert rep.denominator % exact_denominator(M, [k * x for x in mu]).denominator == 0


def test_verifiers_detect_counterexamples(monkeypatch):
    """With the discriminant guard lifted, non-maximal lattices fail the checks."""
    import fundisc.primitivity as prim
    from fundisc.lattice import HalfIntMatrix
    monkeypatch.setattr(prim, "_odd_squarefree", lambda M: (HalfIntMatrix(M), 0))
    # 2M = (18): mu = 3 has (2M)^-1[mu] = 1/2 in Z_3 but 3 is not in 18 Z_3
    assert not claim1_verify([[9]], 3, 2, "residues")
    assert not claim1_verify([[9]], 3, 2, "cosets")
    # 2M = 2 I_3: mu = (1, 1, 0) gives (2M)^-1[mu] = 1, a 2-adic unit
    assert not claim2_dyadic_verify([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3)
