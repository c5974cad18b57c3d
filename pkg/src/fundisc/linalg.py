"""Small exact linear algebra over Z and Q.

Matrices are plain lists of row lists.  Sizes in this package stay below
~10, so everything is dense and written for clarity over speed.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import DimensionMismatch

Matrix = list  # list[list[int | Fraction]]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a matrix entry")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floating point entries are not accepted; use 'p/q' strings")
    return Fraction(x)


def fraction_str(x: Fraction) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def shape(A: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if any(len(r) != cols for r in A):
        raise DimensionMismatch("ragged matrix")
    return rows, cols


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*A)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    ra, ca = shape(A)
    rb, cb = shape(B)
    if ca != rb:
        raise DimensionMismatch(f"cannot multiply {ra}x{ca} by {rb}x{cb}")
    Bt = transpose(B) if rb else [[] for _ in range(cb)]
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(A: Sequence[Sequence], v: Sequence) -> list:
    if A and len(A[0]) != len(v):
        raise DimensionMismatch("matrix/vector size mismatch")
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def quad(A: Sequence[Sequence], v: Sequence):
    """A[v] = v^t A v."""
    return sum(x * y for x, y in zip(v, mat_vec(A, v)))


def bilinear(A: Sequence[Sequence], u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, mat_vec(A, v)))


def det(A: Sequence[Sequence]):
    """Exact determinant; integer input gives an int (Bareiss elimination)."""
    n, m = shape(A)
    if n != m:
        raise DimensionMismatch("determinant of a non-square matrix")
    if n == 0:
        return 1
    if all(isinstance(x, int) for row in A for x in row):
        return _bareiss(A)
    M = [[as_fraction(x) for x in row] for row in A]
    sign = 1
    result = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        p = M[k][k]
        result *= p
        for i in range(k + 1, n):
            if M[i][k]:
                f = M[i][k] / p
                M[i] = [a - f * b for a, b in zip(M[i], M[k])]
    return sign * result


def _bareiss(A) -> int:
    n = len(A)
    M = [list(r) for r in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def inverse(A: Sequence[Sequence]) -> Matrix:
    """Exact inverse over Q (Gauss-Jordan)."""
    n, m = shape(A)
    if n != m:
        raise DimensionMismatch("inverse of a non-square matrix")
    M = [[as_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[k], M[piv] = M[piv], M[k]
        p = M[k][k]
        M[k] = [x / p for x in M[k]]
        for i in range(n):
            if i != k and M[i][k]:
                f = M[i][k]
                M[i] = [a - f * b for a, b in zip(M[i], M[k])]
    return [row[n:] for row in M]


def adjugate(A: Sequence[Sequence[int]]) -> Matrix:
    """Integer adjugate adj(A), so that A * adj(A) = det(A) * I."""
    n = len(A)
    d = det(A)
    if d == 0:
        # cofactor expansion; only tiny singular matrices reach this
        return [[(-1) ** (i + j) * det(_minor(A, j, i)) for j in range(n)] for i in range(n)]
    inv = inverse(A)
    out = [[x * d for x in row] for row in inv]
    return [[int(x) for x in row] for row in out]


def _minor(A, i, j):
    return [[x for c, x in enumerate(row) if c != j] for r, row in enumerate(A) if r != i]


def leading_minors(A: Sequence[Sequence]) -> list:
    return [det([row[:k] for row in A[:k]]) for k in range(1, len(A) + 1)]


def principal_minors(A: Sequence[Sequence]):
    n = len(A)
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            yield det([[A[i][j] for j in idx] for i in idx])


def smith_normal_form(A: Sequence[Sequence[int]]):
    """Return (diag, P, Q) with P*A*Q = diag(diag) for unimodular integer P, Q.

    Entries of ``diag`` are non-negative and each divides the next.
    """
    n, m = shape(A)
    S = [list(map(int, r)) for r in A]
    P = identity(n)
    Q = identity(m)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for M in (S, Q):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        S[dst] = [a + k * b for a, b in zip(S[dst], S[src])]
        P[dst] = [a + k * b for a, b in zip(P[dst], P[src])]

    def add_col(dst, src, k):
        for M in (S, Q):
            for row in M:
                row[dst] += k * row[src]

    for t in range(min(n, m)):
        while True:
            nz = [(abs(S[i][j]), i, j) for i in range(t, n) for j in range(t, m) if S[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = S[t][t]
            done = True
            for i in range(t + 1, n):
                q = S[i][t] // p
                if q:
                    add_row(i, t, -q)
                if S[i][t]:
                    done = False
            for j in range(t + 1, m):
                q = S[t][j] // p
                if q:
                    add_col(j, t, -q)
                if S[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, m)
                        if S[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < n and t < m and S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            P[t] = [-x for x in P[t]]
    diag = [S[i][i] for i in range(min(n, m))]
    return diag, P, Q
