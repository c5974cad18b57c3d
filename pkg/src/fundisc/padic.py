"""p-adic canonical forms of even lattices with odd square-free discriminant.

``jordan_decompose`` splits 2M over Z/p^f into unit scalars, a single scaled
scalar, hyperbolic planes H = [[0,1],[1,0]] and the anisotropic plane
F = [[2,1],[1,2]].  ``crt_lift_sl`` glues local transforms into one matrix in
SL_n(Z).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd
from typing import Sequence

from sympy import isprime

from . import linalg
from .arith import prime_factors
from .errors import (BadDiscriminant, BadModulus, DimensionMismatch, LocalDetNotOne,
                     ModuliNotCoprime, PrecisionTooLow, ZeroInput)
from .lattice import HalfIntMatrix, disc_abs


def valuation(x, p: int) -> int:
    """nu_p(x) for a non-zero rational x."""
    x = linalg.as_fraction(x)
    if x == 0:
        raise ZeroInput("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class Block:
    """One Jordan constituent.

    kind is "unit" (entry u), "scaled" (entry p*u), "hyp" ([[0,u],[u,0]]) or
    "fblock" ([[2,u],[u,2u^2]]).  For hyp/fblock u is 1 except when the
    determinant normalisation had to rescale the final basis vector.
    """

    kind: str
    u: int = 1

    @property
    def size(self) -> int:
        return 2 if self.kind in ("hyp", "fblock") else 1

    def gram(self, p: int) -> list[list[int]]:
        u = self.u
        if self.kind == "unit":
            return [[u]]
        if self.kind == "scaled":
            return [[p * u]]
        if self.kind == "hyp":
            return [[0, u], [u, 0]]
        return [[2, u], [u, 2 * u * u]]

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in ("unit", "scaled") or self.u != 1:
            out["u"] = self.u
        return out


@dataclass(frozen=True)
class JordanForm:
    p: int
    f: int
    blocks: tuple
    U: tuple

    @property
    def modulus(self) -> int:
        return self.p ** self.f

    def assembled(self) -> list[list[int]]:
        """Block-diagonal matrix C with (2M)[U] = C mod p^f."""
        n = sum(b.size for b in self.blocks)
        C = [[0] * n for _ in range(n)]
        at = 0
        for b in self.blocks:
            g = b.gram(self.p)
            for i, row in enumerate(g):
                for j, x in enumerate(row):
                    C[at + i][at + j] = x % self.modulus
            at += b.size
        return C

    def shape(self) -> str:
        names = {"unit": "u", "scaled": str(self.p), "hyp": "H", "fblock": "F"}
        return "+".join(names[b.kind] for b in self.blocks)

    def to_json(self) -> dict:
        return {"p": self.p, "f": self.f,
                "blocks": [b.to_json() for b in self.blocks],
                "U": [list(r) for r in self.U]}

    @classmethod
    def from_json(cls, obj: dict) -> "JordanForm":
        blocks = tuple(Block(b["kind"], b.get("u", 1)) for b in obj["blocks"])
        return cls(obj["p"], obj["f"], blocks, tuple(tuple(r) for r in obj["U"]))


def _check_local_input(M: HalfIntMatrix, p: int, f: int) -> None:
    if p < 2 or not isprime(p):
        raise BadModulus(f"{p} is not a prime")
    if f < 2:
        raise PrecisionTooLow(f"precision f={f} < 2")
    dd = disc_abs(M)
    if not dd.is_odd_squarefree:
        raise BadDiscriminant(f"d_M = {dd.d} is not odd and square-free")


def _mat_inv_mod(G: list[list[int]], mod: int) -> list[list[int]]:
    d = linalg.det(G) % mod
    inv_d = pow(d, -1, mod)
    adj = linalg.adjugate(G)
    return [[(x * inv_d) % mod for x in row] for row in adj]


class _Splitter:
    """Orthogonal splitting of the lattice (Z^n, 2M) modulo p^K."""

    def __init__(self, gram: list[list[int]], p: int, K: int):
        self.gram = gram
        self.p = p
        self.mod = p ** K
        self.K = K
        n = len(gram)
        self.rest = [[int(i == j) for i in range(n)] for j in range(n)]
        self.done: list[tuple[Block, list[list[int]]]] = []

    def b(self, x, y) -> int:
        return linalg.bilinear(self.gram, x, y)

    def comb(self, coeffs, vecs) -> list[int]:
        n = len(self.gram)
        return [sum(c * v[k] for c, v in zip(coeffs, vecs)) % self.mod for k in range(n)]

    def split_off(self, block: Block, W: list[list[int]], others: list[list[int]]) -> None:
        """Record block spanned by W and project ``others`` onto its orthogonal complement."""
        GW = [[self.b(x, y) for y in W] for x in W]
        inv = _mat_inv_mod(GW, self.mod)
        projected = []
        for x in others:
            bx = [self.b(w, x) for w in W]
            coeffs = [sum(inv[i][j] * bx[j] for j in range(len(W))) for i in range(len(W))]
            sub = self.comb(coeffs, W)
            projected.append([(a - s) % self.mod for a, s in zip(x, sub)])
        self.done.append((block, W))
        self.rest = projected

    def sub_gram(self) -> list[list[int]]:
        return [[self.b(x, y) for y in self.rest] for x in self.rest]

    # ---- odd p ----
    def step_odd(self) -> None:
        p, R = self.p, self.rest
        G = self.sub_gram()
        k = len(R)
        piv = next((i for i in range(k) if G[i][i] % p), None)
        if piv is None:
            pair = next(((i, j) for i in range(k) for j in range(i + 1, k) if G[i][j] % p), None)
            if pair is not None:
                i, j = pair
                R[i] = [(a + b) % self.mod for a, b in zip(R[i], R[j])]
                piv = i
                G = self.sub_gram()
        if piv is None:
            if k == 1 and G[0][0] % self.mod and G[0][0] % (p * p) != 0:
                u = (G[0][0] // p) % (p ** (self.K - 1))
                self.done.append((Block("scaled", u), [R[0]]))
                self.rest = []
                return
            raise BadDiscriminant(f"local form at p={p} is not of square-free type")
        a = G[piv][piv] % self.mod
        others = [v for i, v in enumerate(R) if i != piv]
        self.split_off(Block("unit", a), [R[piv]], others)

    # ---- p = 2 ----
    def _lift_coordinate(self, coeffs: list[int], j: int, target: int) -> list[int]:
        """Adjust coordinate j until Q(v) = target mod 2^K (needs (Gv)_j odd)."""
        G = self.sub_gram()
        v = list(coeffs)
        for k in range(1, self.K + 1):
            q = linalg.quad(G, v) // 2 - target
            if q % (1 << k):
                v[j] += 1 << (k - 1)
        assert (linalg.quad(G, v) // 2 - target) % self.mod == 0
        return v

    def step_dyadic(self) -> None:
        R = self.rest
        G = self.sub_gram()
        k = len(R)
        mod = self.mod
        # 1. hyperbolic plane through an isotropic vector
        for bits in product((0, 1), repeat=k):
            if not any(bits):
                continue
            v = list(bits)
            if (linalg.quad(G, v) // 2) % 2:
                continue
            Gv = linalg.mat_vec(G, v)
            j = next((t for t in range(k) if Gv[t] % 2), None)
            if j is None:
                continue
            v = self._lift_coordinate(v, j, 0)
            Gv = linalg.mat_vec(G, v)
            s = Gv[j] % mod
            s_inv = pow(s, -1, mod)
            a = G[j][j] // 2
            t = (a * s_inv) % mod
            v2 = [(-s_inv * t * x) % mod for x in v]
            v2[j] = (v2[j] + s_inv) % mod
            i = next(t for t in range(k) if t != j and v[t] % 2)
            V1 = self.comb(v, R)
            V2 = self.comb(v2, R)
            others = [R[t] for t in range(k) if t not in (i, j)]
            self.split_off(Block("hyp"), [V1, V2], others)
            return
        # 2. anisotropic plane F
        pair = next(((i, j) for i in range(k) for j in range(i + 1, k) if G[i][j] % 2), None)
        if pair is not None:
            i, j = pair
            e_i = [int(t == i) for t in range(k)]
            v1 = self._lift_coordinate(e_i, j, 1)
            w = next(e for e in ([int(t == i) for t in range(k)], [int(t == j) for t in range(k)])
                     if linalg.bilinear(G, v1, e) % 2)
            s_inv = pow(linalg.bilinear(G, v1, w) % mod, -1, mod)
            w = [(s_inv * x) % mod for x in w]
            a1 = linalg.quad(G, w) // 2
            if a1 % 2 == 0:
                raise BadDiscriminant("dyadic plane is isotropic; expected F")
            c = 4 * a1 - 1
            gamma = 0
            for bit in range(1, self.K + 1):
                h = c * (gamma * gamma - gamma) + (a1 - 1)
                if h % (1 << bit):
                    gamma += 1 << (bit - 1)
            beta = 1 - 2 * gamma
            v2 = [(beta * x + gamma * y) % mod for x, y in zip(w, v1)]
            V1 = self.comb(v1, R)
            V2 = self.comb(v2, R)
            others = [R[t] for t in range(k) if t not in (i, j)]
            self.split_off(Block("fblock"), [V1, V2], others)
            return
        # 3. scaled scalar <2u>; all off-diagonal entries are even here
        piv = next((i for i in range(k) if G[i][i] % 4 == 2), None)
        if piv is None:
            raise BadDiscriminant("local form at p=2 is not of square-free type")
        half = G[piv][piv] // 2
        u_inv = pow(half % mod, -1, mod)
        projected = []
        for t in range(k):
            if t == piv:
                continue
            coef = (G[piv][t] // 2) * u_inv
            projected.append([(x - coef * y) % mod for x, y in zip(R[t], R[piv])])
        self.done.append((Block("scaled", half % (1 << (self.K - 1))), [R[piv]]))
        self.rest = projected


def jordan_decompose(M, p: int, f: int = 2) -> JordanForm:
    """Canonical local form of 2M at the prime p, modulo p^f.

    Returns U (integral, det U = 1 mod p^f) and blocks with (2M)[U] = C mod p^f.
    """
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    _check_local_input(M, p, f)
    gram = M.two_m()
    K = f + 2
    sp = _Splitter(gram, p, K)
    while sp.rest:
        if p == 2:
            sp.step_dyadic()
        else:
            sp.step_odd()
    blocks = [b for b, _ in sp.done]
    cols = [v for _, W in sp.done for v in W]
    mod_f = p ** f
    U = [list(r) for r in zip(*cols)]  # columns are the new basis vectors
    blocks = [_reduce_block(b, p, f) for b in blocks]
    U, blocks = _normalise_det(U, blocks, p, f)
    U = [[x % mod_f for x in row] for row in U]
    jf = JordanForm(p, f, tuple(blocks), tuple(tuple(r) for r in U))
    _assert_congruent(gram, jf)
    return jf


def _reduce_block(b: Block, p: int, f: int) -> Block:
    if b.kind == "unit":
        return Block("unit", b.u % p ** f)
    if b.kind == "scaled":
        return Block("scaled", b.u % p ** (f - 1))
    return Block(b.kind, b.u % p ** f)


def _normalise_det(U, blocks, p, f):
    mod = p ** f
    c = linalg.det(U) % mod
    if c == 1:
        return U, blocks
    n = len(U)
    last = blocks[-1]
    if last.size == 2 and (c + 1) % mod == 0:
        for row in U:
            row[n - 2], row[n - 1] = row[n - 1], row[n - 2]
        return U, blocks
    c_inv = pow(c, -1, mod)
    for row in U:
        row[n - 1] = (row[n - 1] * c_inv) % mod
    sq = (c_inv * c_inv)
    if last.kind == "unit":
        new = Block("unit", (last.u * sq) % mod)
    elif last.kind == "scaled":
        new = Block("scaled", (last.u * sq) % p ** (f - 1))
    else:
        new = Block(last.kind, c_inv % mod)
    return U, blocks[:-1] + [new]


def _assert_congruent(gram, jf: JordanForm) -> None:
    mod = jf.modulus
    lhs = linalg.mat_mul(linalg.transpose(jf.U), linalg.mat_mul(gram, jf.U))
    C = jf.assembled()
    if any((a - b) % mod for ra, rb in zip(lhs, C) for a, b in zip(ra, rb)):
        raise AssertionError(f"Jordan splitting failed congruence check at p={jf.p}")
    if linalg.det([list(r) for r in jf.U]) % mod != 1 % mod:
        raise AssertionError("Jordan transform is not in SL_n mod p^f")


def crt_lift_sl(local: Sequence[tuple[int, int, Sequence[Sequence[int]]]],
                n: int | None = None) -> list[list[int]]:
    """U in SL_n(Z) with U = U_q mod q^f for every (q, q^f, U_q) given."""
    if not local:
        if n is None:
            raise DimensionMismatch("empty constraint list needs an explicit n")
        return linalg.identity(n)
    sizes = {len(U) for _, _, U in local}
    if len(sizes) != 1 or (n is not None and sizes != {n}):
        raise DimensionMismatch("local transforms have different sizes")
    n = sizes.pop()
    moduli = [m for _, m, _ in local]
    for a in range(len(moduli)):
        for b in range(a + 1, len(moduli)):
            if gcd(moduli[a], moduli[b]) != 1:
                raise ModuliNotCoprime(f"moduli {moduli[a]} and {moduli[b]} share a factor")
    for q, m, Uq in local:
        if linalg.det([list(r) for r in Uq]) % m != 1 % m:
            raise LocalDetNotOne(f"det(U_{q}) is not 1 mod {m}")
    N = 1
    for m in moduli:
        N *= m
    # entrywise CRT
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            x, acc = 0, 1
            for _, m, Uq in local:
                t = ((Uq[i][j] - x) * pow(acc, -1, m)) % m if m > 1 else 0
                x += acc * t
                acc *= m
            A[i][j] = x % N
    U = _lift_sl(A, N)
    for q, m, Uq in local:
        assert all((U[i][j] - Uq[i][j]) % m == 0 for i in range(n) for j in range(n))
    assert linalg.det(U) == 1
    return U


def _lift_sl(A: list[list[int]], N: int) -> list[list[int]]:
    """Lift A in SL_n(Z/N) to SL_n(Z) through elementary row operations."""
    n = len(A)
    if N == 1:
        return linalg.identity(n)
    A = [[x % N for x in row] for row in A]
    ops: list[tuple[int, int, int]] = []

    def sym(k: int) -> int:
        k %= N
        return k - N if k > N // 2 else k

    def add(i: int, j: int, k: int) -> None:  # row_i += k * row_j (mod N)
        k = sym(k)
        if k == 0:
            return
        A[i] = [(a + k * b) % N for a, b in zip(A[i], A[j])]
        ops.append((i, j, k))

    for c in range(n - 1):
        # Euclid on column c among rows c..n-1 until one entry is left
        while True:
            live = [i for i in range(c, n) if A[i][c]]
            if len(live) <= 1:
                break
            piv = min(live, key=lambda i: A[i][c])
            for i in live:
                if i != piv:
                    add(i, piv, -(A[i][c] // A[piv][c]))
        g_row = next(i for i in range(c, n) if A[i][c])
        g = A[g_row][c]
        g_inv = pow(g, -1, N)
        if g_row != c:
            add(c, g_row, (1 - A[c][c]) * g_inv)
        else:
            r = c + 1
            add(r, c, (1 - A[r][c]) * g_inv)
            add(c, r, 1 - g)
        for i in range(n):
            if i != c and A[i][c]:
                add(i, c, -A[i][c])
    for i in range(n - 1):
        if A[i][n - 1]:
            add(i, n - 1, -A[i][n - 1])
    assert all(A[i][j] == (1 if i == j else 0) % N for i in range(n) for j in range(n))
    U = linalg.identity(n)
    for i, j, k in ops:
        for row in U:
            row[j] -= k * row[i]
    return U


def reduced_form(M, f: int = 2):
    """U in SL_n(Z) such that (2M)[U] has the reduced local shapes at all q | 2d_M.

    Returns (U, Mtilde).  At odd q | d the form is diag(units, q*unit) mod q^f; for
    odd n it is H + ... + H + <2u> mod 2^f.  The last basis vector carries the
    scaled part everywhere.
    """
    M = M if isinstance(M, HalfIntMatrix) else HalfIntMatrix(M)
    _check_local_input(M, 2, f)
    d = disc_abs(M).d
    primes = prime_factors(d)
    if M.n % 2 == 1:
        primes = [2] + primes
    local = []
    for q in primes:
        jf = jordan_decompose(M, q, f)
        local.append((q, q ** f, [list(r) for r in jf.U]))
    U = crt_lift_sl(local, n=M.n)
    Mt = linalg.mat_mul(linalg.transpose(U), linalg.mat_mul(M.two_m(), U))
    return U, Mt
