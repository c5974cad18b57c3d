"""Jacobi forms as two-variable series: theta blocks, coefficient tables,
theta decomposition and the gluing pipeline towards odd square-free
discriminants."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import isqrt, lcm
from typing import Mapping, Sequence

from . import linalg
from .arith import is_odd_squarefree, trial_factor
from .errors import (BadDiscriminant, FractionalResult, IndexMismatch, NoPrimitiveComponent,
                     NonIntegralExponents, PrecisionTooLow, SymmetryViolation)
from .lattice import HalfIntMatrix, disc_abs, glue, level
from .qexp import FracQSeries, _convolve, _max_numerator, default_trunc, rescale_V
from .theta_chars import coset_reps


class TwoVarSeries:
    """sum c(a, b) q^(a/D) zeta^(b/E), known for q-exponents below ``qtrunc``."""

    __slots__ = ("D", "E", "coeffs", "qtrunc", "index", "weight2", "label")

    def __init__(self, coeffs: Mapping[tuple, object], D: int = 1, E: int = 1, qtrunc=1,
                 index=None, weight2: int | None = None, label: str = ""):
        qtrunc = Fraction(qtrunc)
        cut = _max_numerator(qtrunc, D)
        clean = {}
        for (a, b), c in coeffs.items():
            c = Fraction(c)
            if c and a <= cut:
                if a < 0:
                    raise ValueError("negative q-exponent")
                clean[(int(a), int(b))] = c
        self.D, self.E = D, E
        self.coeffs = clean
        self.qtrunc = qtrunc
        self.index = None if index is None else Fraction(index)
        self.weight2 = weight2
        self.label = label

    @classmethod
    def from_q_series(cls, f: FracQSeries) -> "TwoVarSeries":
        return cls({(e, 0): c for e, c in f.coeffs.items()}, f.D, 1, f.trunc, 0, f.weight2, f.label)

    def with_denominators(self, D: int, E: int) -> "TwoVarSeries":
        kd, ke = D // self.D, E // self.E
        assert kd * self.D == D and ke * self.E == E
        return TwoVarSeries({(a * kd, b * ke): c for (a, b), c in self.coeffs.items()},
                            D, E, self.qtrunc, self.index, self.weight2, self.label)

    def _align(self, other):
        D, E = lcm(self.D, other.D), lcm(self.E, other.E)
        return self.with_denominators(D, E), other.with_denominators(D, E), D, E

    def __add__(self, other: "TwoVarSeries") -> "TwoVarSeries":
        a, b, D, E = self._align(other)
        out = dict(a.coeffs)
        for k, c in b.coeffs.items():
            out[k] = out.get(k, 0) + c
        idx = self.index if self.index == other.index else None
        return TwoVarSeries(out, D, E, min(a.qtrunc, b.qtrunc), idx)

    def __mul__(self, other: "TwoVarSeries") -> "TwoVarSeries":
        a, b, D, E = self._align(other)
        qtrunc = min(a.qtrunc, b.qtrunc)
        idx = None if a.index is None or b.index is None else a.index + b.index
        w = None if a.weight2 is None or b.weight2 is None else a.weight2 + b.weight2
        if not a.coeffs or not b.coeffs:
            return TwoVarSeries({}, D, E, qtrunc, idx, w)
        za = [z for _, z in a.coeffs]
        zb = [z for _, z in b.coeffs]
        lo_a, lo_b = min(za), min(zb)
        W = max(za) - lo_a + max(zb) - lo_b + 1
        cut_q = _max_numerator(qtrunc, D)
        pa = {q * W + z - lo_a: c for (q, z), c in a.coeffs.items()}
        pb = {q * W + z - lo_b: c for (q, z), c in b.coeffs.items()}
        prod = _convolve(pa, pb, (cut_q + 1) * W - 1)
        out = {(k // W, k % W + lo_a + lo_b): c for k, c in prod.items()}
        return TwoVarSeries(out, D, E, qtrunc, idx, w)

    def __pow__(self, k: int) -> "TwoVarSeries":
        result = TwoVarSeries({(0, 0): 1}, self.D, self.E, self.qtrunc, 0, 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, qx, zx=0) -> "TwoVarSeries":
        """Multiply by q^qx zeta^zx; the truncation moves with the q-shift."""
        qx, zx = Fraction(qx), Fraction(zx)
        D, E = lcm(self.D, qx.denominator), lcm(self.E, zx.denominator)
        a = self.with_denominators(D, E)
        sq, sz = int(qx * D), int(zx * E)
        return TwoVarSeries({(p + sq, z + sz): c for (p, z), c in a.coeffs.items()},
                            D, E, a.qtrunc + qx, self.index, self.weight2, self.label)

    def items(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return [(Fraction(a, self.D), Fraction(b, self.E), c) for (a, b), c in sorted(self.coeffs.items())]

    def coefficient(self, qx, zx) -> Fraction:
        a, b = Fraction(qx) * self.D, Fraction(zx) * self.E
        if a.denominator != 1 or b.denominator != 1:
            return Fraction(0)
        return self.coeffs.get((int(a), int(b)), Fraction(0))

    def at_zeta_one(self) -> FracQSeries:
        """Specialise zeta = 1."""
        out: dict[int, Fraction] = {}
        for (a, _), c in self.coeffs.items():
            out[a] = out.get(a, 0) + c
        return FracQSeries(out, self.D, self.qtrunc)

    def integral(self) -> "TwoVarSeries":
        """Same series with D = E = 1; raises if some exponent is fractional."""
        if any(a % self.D for a, _ in self.coeffs) or any(b % self.E for _, b in self.coeffs):
            raise NonIntegralExponents("series has fractional exponents")
        return TwoVarSeries({(a // self.D, b // self.E): c for (a, b), c in self.coeffs.items()},
                            1, 1, self.qtrunc, self.index, self.weight2, self.label)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwoVarSeries):
            return NotImplemented
        return self.qtrunc == other.qtrunc and self.items() == other.items()

    def __repr__(self) -> str:
        return (f"TwoVarSeries(D={self.D}, E={self.E}, qtrunc={self.qtrunc}, "
                f"index={self.index}, terms={len(self.coeffs)})")


# ---- builders ----

def _theta_core(a: int, trunc) -> TwoVarSeries:
    """theta(tau, a z) * q^(-1/8) zeta^(a/2) = sum_m (-1)^m q^(m(m+1)/2) zeta^(a(m+1))."""
    trunc = Fraction(trunc)
    cut = _max_numerator(trunc, 1)
    out = {}
    n = 0
    while n * (n + 1) // 2 <= cut:
        for m in {n, -n - 1}:
            out[(m * (m + 1) // 2, a * (m + 1))] = (-1) ** (m % 2)
        n += 1
    return TwoVarSeries(out, 1, 1, trunc)


def theta_twovar(trunc=None, a: int = 1) -> TwoVarSeries:
    """theta(tau, a z) = sum (-1)^n q^((2n+1)^2/8) zeta^(a(2n+1)/2); D = 8, E = 2."""
    trunc = Fraction(default_trunc() if trunc is None else trunc)
    core = _theta_core(a, trunc - Fraction(1, 8))
    out = core.shift(Fraction(1, 8), Fraction(-a, 2))
    out.index = Fraction(a * a, 2)
    out.weight2 = 1
    out.label = "theta" if a == 1 else f"theta({a}z)"
    return out


def _eta_core_power(e: int, trunc) -> TwoVarSeries:
    """prod (1 - q^n)^e with integer exponents."""
    trunc = Fraction(trunc)
    cut = _max_numerator(trunc, 1)
    pent = {}
    k = 0
    while True:
        placed = False
        for kk in ((k, -k) if k else (0,)):
            ex = kk * (3 * kk - 1) // 2
            if ex <= cut:
                pent[ex] = (-1) ** (kk % 2)
                placed = True
        if not placed:
            break
        k += 1
    f = FracQSeries(pent, 1, trunc) ** e if e else FracQSeries({0: 1}, 1, trunc)
    return TwoVarSeries.from_q_series(f)


@dataclass(frozen=True)
class BlockSpec:
    eta_power: int
    thetas: tuple

    @property
    def index(self) -> Fraction:
        return Fraction(sum(a * a for a in self.thetas), 2)

    @property
    def weight2(self) -> int:
        return self.eta_power + len(self.thetas)

    @property
    def q_offset(self) -> Fraction:
        return Fraction(self.eta_power, 24) + Fraction(len(self.thetas), 8)

    def __str__(self) -> str:
        return f"{self.eta_power}:" + ",".join(map(str, self.thetas))


def parse_block(spec: str) -> BlockSpec:
    """'18:1,1' is eta^18 theta(z) theta(z); '24:' is eta^24."""
    head, _, tail = spec.partition(":")
    e = int(head)
    thetas = tuple(int(x) for x in tail.split(",") if x.strip())
    if e < 0 or any(a <= 0 for a in thetas):
        raise ValueError(f"bad block spec {spec!r}")
    return BlockSpec(e, thetas)


def build_theta_block(eta_power: int, thetas: Sequence[int], trunc=None) -> TwoVarSeries:
    """eta^e prod theta(tau, a_j z), returned with integer exponents.

    Index m = sum a_j^2 / 2 and weight (e + #thetas)/2 are recorded.
    """
    spec = BlockSpec(eta_power, tuple(thetas))
    trunc = Fraction(default_trunc() if trunc is None else trunc)
    off = spec.q_offset
    if off.denominator != 1:
        raise NonIntegralExponents(f"q-offset {off} of block {spec} is not integral")
    if sum(spec.thetas) % 2:
        raise NonIntegralExponents(f"zeta-exponents of block {spec} are half-integral")
    core_trunc = trunc - off
    if core_trunc <= 0:
        raise PrecisionTooLow(f"truncation {trunc} is below the leading exponent {off}")
    series = _eta_core_power(eta_power, core_trunc)
    for a in spec.thetas:
        series = series * _theta_core(a, core_trunc)
    zshift = -Fraction(sum(spec.thetas), 2)
    out = series.shift(off, zshift).integral()
    out.index = spec.index
    out.weight2 = spec.weight2
    out.label = f"eta^{eta_power}" + "".join(f"*theta({a}z)" for a in spec.thetas)
    return out


def is_holomorphic(phi: TwoVarSeries) -> bool:
    """Support satisfies 4nm - r^2 >= 0."""
    m = phi.index
    return all(4 * n * m - r * r >= 0 for n, r, _ in phi.items())


# ---- coefficient tables ----

@dataclass
class JacobiCoeffTable:
    """c(ell, mu) for index T; ``qtrunc`` bounds the ells that are known."""

    index: HalfIntMatrix
    weight: int | None
    entries: dict  # (ell, mu tuple) -> Fraction
    qtrunc: int | None = None

    @property
    def scalar_index(self) -> int | None:
        T = self.index
        return int(T.entries[0][0]) if T.n == 1 else None

    def get(self, ell: int, mu: Sequence[int]) -> Fraction:
        return self.entries.get((ell, tuple(mu)), Fraction(0))

    def is_zero(self) -> bool:
        return not any(self.entries.values())

    def to_json(self) -> dict:
        m = self.scalar_index
        out = {"index": m if m is not None else [[linalg.fraction_str(x) for x in r]
                                                  for r in self.index.entries],
               "weight": self.weight,
               "entries": [{"ell": ell, "mu": list(mu), "a": linalg.fraction_str(c)}
                           for (ell, mu), c in sorted(self.entries.items()) if c]}
        if self.qtrunc is not None:
            out["qtrunc"] = self.qtrunc
        return out

    @classmethod
    def from_json(cls, obj) -> "JacobiCoeffTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        idx = obj["index"]
        T = HalfIntMatrix([[idx]]) if isinstance(idx, int) else HalfIntMatrix(idx)
        entries = {}
        for e in obj["entries"]:
            mu = tuple(e["mu"])
            if len(mu) != T.n:
                raise IndexMismatch(f"entry mu={list(mu)} does not match index size {T.n}")
            entries[(int(e["ell"]), mu)] = entries.get((int(e["ell"]), mu), 0) + Fraction(e["a"])
        return cls(T, obj.get("weight"), entries, obj.get("qtrunc"))


def _check_symmetry(table: JacobiCoeffTable) -> None:
    m = table.scalar_index
    if m is None or table.qtrunc is None:
        return
    nonzero = {k: v for k, v in table.entries.items() if v}
    for (n, (r,)), c in nonzero.items():
        disc = 4 * n * m - r * r
        # partners r' = r + 2mk with n' = (disc + r'^2)/4m < qtrunc
        rmax = isqrt(max(0, 4 * m * table.qtrunc - disc))
        k_lo = -((rmax + r) // (2 * m)) - 1
        k_hi = (rmax - r) // (2 * m) + 1
        for k in range(k_lo, k_hi + 1):
            r2 = r + 2 * m * k
            num = disc + r2 * r2
            n2 = num // (4 * m)
            if num % (4 * m) or n2 < 0 or n2 >= table.qtrunc:
                continue
            if nonzero.get((n2, (r2,)), Fraction(0)) != c:
                raise SymmetryViolation(
                    f"c({n},{r}) = {c} but c({n2},{r2}) = {nonzero.get((n2, (r2,)), 0)}")
        if table.weight is not None:
            sign = -1 if table.weight % 2 else 1
            if n < table.qtrunc and nonzero.get((n, (-r,)), Fraction(0)) != sign * c:
                raise SymmetryViolation(f"c({n},{-r}) is not {'-' if sign < 0 else ''}c({n},{r})")


def to_table(phi: TwoVarSeries, weight: int | None = None) -> JacobiCoeffTable:
    """Tabulate c(n, r) of a scalar-index form and verify the index symmetries."""
    if phi.index is None or phi.index.denominator != 1 or phi.index < 1:
        raise IndexMismatch(f"series has index {phi.index}; need a positive integer")
    phi = phi.integral()
    m = int(phi.index)
    if weight is None and phi.weight2 is not None and phi.weight2 % 2 == 0:
        weight = phi.weight2 // 2
    qtrunc = _max_numerator(phi.qtrunc, 1) + 1
    entries = {(n, (r,)): c for (n, r), c in phi.coeffs.items()}
    table = JacobiCoeffTable(HalfIntMatrix([[m]]), weight, entries, qtrunc)
    _check_symmetry(table)
    return table


def validate_table(table: JacobiCoeffTable) -> JacobiCoeffTable:
    """Raise SymmetryViolation if a scalar-index table breaks the class invariance."""
    _check_symmetry(table)
    return table


# ---- theta decomposition ----

def _class_data(T: HalfIntMatrix):
    cs = coset_reps(T)
    # a short vector in each class gives the best truncation bound
    best = list(cs.reps)
    best_val = [T.inverse_value(r) / 4 for r in best]
    gram = T.two_m()
    for shift in product((-1, 0, 1), repeat=T.n):
        step = linalg.mat_vec(gram, shift)
        for i, r in enumerate(cs.reps):
            cand = tuple(a + b for a, b in zip(r, step))
            v = T.inverse_value(cand) / 4
            if v < best_val[i]:
                best[i], best_val[i] = cand, v
    return cs, best, best_val


def theta_decompose(table: JacobiCoeffTable) -> dict[tuple, FracQSeries]:
    """h_mu(tau) = sum_ell c(ell, mu) q^(ell - T^{-1}[mu]/4), keyed by coset representative.

    For scalar index m the keys are (0,), ..., (2m-1,) and D = 4m.
    """
    T = table.index
    cs, best, best_val = _class_data(T)
    D = level(T) if T.is_positive_definite else 1
    if table.qtrunc is None:
        top = max((ell for ell, _ in table.entries), default=0) + 1
    else:
        top = table.qtrunc
    coeffs: list[dict[int, Fraction]] = [dict() for _ in cs.reps]
    for (ell, mu), c in table.entries.items():
        if not c or ell >= top:
            continue
        i = cs.class_of(mu)
        x = ell - T.inverse_value(mu) / 4
        e = x * D
        assert e.denominator == 1
        e = int(e)
        if e in coeffs[i] and coeffs[i][e] != c:
            raise SymmetryViolation(f"class {cs.reps[i]} has two values at exponent {x}")
        coeffs[i][e] = c
    out = {}
    for i, rep in enumerate(cs.reps):
        trunc = top - best_val[i]
        out[rep] = FracQSeries(coeffs[i], D, trunc, None if table.weight is None
                               else 2 * table.weight - T.n)
    return out


def recompose(hs: Mapping[tuple, FracQSeries], m: int, trunc=None,
              weight: int | None = None) -> JacobiCoeffTable:
    """phi = sum_mu h_mu Theta_{m,mu} with Theta_{m,mu} = sum_{r = mu mod 2m} q^(r^2/4m) zeta^r."""
    keys = {tuple(k) if isinstance(k, (tuple, list)) else (k,) for k in hs}
    if keys != {(mu,) for mu in range(2 * m)}:
        raise IndexMismatch(f"components must be indexed by mu mod {2 * m}")
    items = {(tuple(k) if isinstance(k, (tuple, list)) else (k,)): v for k, v in hs.items()}
    if trunc is None:
        trunc = min(h.trunc + Fraction(min(mu, 2 * m - mu) ** 2, 4 * m)
                    for (mu,), h in items.items())
    trunc = Fraction(trunc)
    total = TwoVarSeries({}, 1, 1, trunc, m)
    for (mu,), h in sorted(items.items()):
        hv = TwoVarSeries.from_q_series(h)
        r_lo = -isqrt(int(4 * m * trunc)) - 2 * m
        r_hi = -r_lo
        for r in range(r_lo, r_hi + 1):
            if (r - mu) % (2 * m):
                continue
            sq = Fraction(r * r, 4 * m)
            if sq >= trunc:
                continue
            term = hv.shift(sq, r)
            total = total + term
    total.qtrunc = min(total.qtrunc, trunc)
    total.index = Fraction(m)
    total = TwoVarSeries(total.coeffs, total.D, total.E, total.qtrunc, m)
    table = to_table(total, weight)
    return table


def H_mu(h: FracQSeries, d: int, n_parity: str) -> FracQSeries:
    """h(d tau) when the glued size is odd, h(4d tau) when it is even."""
    if n_parity not in ("odd", "even"):
        raise ValueError("n_parity must be 'odd' or 'even'")
    scale = d if n_parity == "odd" else 4 * d
    H = rescale_V(h, scale)
    if H.D != 1 and not H.is_zero():
        raise FractionalResult(f"h({scale} tau) still has exponent denominator {H.D}")
    if H.D != 1:
        H = FracQSeries({}, 1, H.trunc)
    return H


# ---- gluing pipeline ----

@dataclass(frozen=True)
class PipelineEntry:
    ell: int
    mu: tuple
    d_T: int
    d_glued: int
    coeff: Fraction
    squarefree_certified: bool
    glued: HalfIntMatrix

    def csv_row(self) -> list:
        return [self.ell, " ".join(map(str, self.mu)), self.d_T, self.d_glued,
                linalg.fraction_str(self.coeff), "true" if self.squarefree_certified else "false"]


PIPELINE_HEADER = ["ell", "mu", "d_T", "d_glued", "coeff", "squarefree_certified"]


def select_primitive(table: JacobiCoeffTable, hs=None):
    """First primitive coset representative mu (in rep order) with h_mu != 0."""
    hs = theta_decompose(table) if hs is None else hs
    cs = coset_reps(table.index)
    for rep, prim in zip(cs.reps, cs.primitive_mask):
        if prim and not hs[rep].is_zero():
            return rep, hs[rep]
    return None, None


def fundamental_pipeline(table: JacobiCoeffTable, X: int) -> list[PipelineEntry]:
    """Glued matrices with odd square-free discriminant d <= X and non-zero coefficient."""
    T = table.index
    dd = disc_abs(T)
    if not dd.is_odd_squarefree:
        raise BadDiscriminant(f"d_T = {dd.d} is not odd and square-free")
    if table.is_zero():
        return []
    hs = theta_decompose(table)
    mu, h = select_primitive(table, hs)
    if mu is None:
        raise NoPrimitiveComponent("every primitive theta component vanishes")
    glued_n = T.n + 1
    parity = "even" if glued_n % 2 == 0 else "odd"
    H = H_mu(h, dd.d, parity)
    if X >= H.trunc:
        raise PrecisionTooLow(f"H_mu is known below {H.trunc}; X = {X} needs a larger truncation")
    scale = dd.d if parity == "odd" else 4 * dd.d
    shift = T.inverse_value(mu) / 4
    out = []
    for N in range(1, X + 1):
        c = H.coeffs.get(N)
        if not c or not is_odd_squarefree(N):
            continue
        ell = Fraction(N, scale) + shift
        assert ell.denominator == 1
        ell = int(ell)
        G = glue(T, mu, ell)
        dG = disc_abs(G).d
        certified = dG == N and all(e == 1 for e in trial_factor(N).values()) and N % 2 == 1
        out.append(PipelineEntry(ell, tuple(mu), dd.d, dG, c, certified, G))
    return out


def block_table(spec: BlockSpec | str, trunc=None) -> JacobiCoeffTable:
    """Coefficient table of a theta block, checked for the index symmetries."""
    if isinstance(spec, str):
        spec = parse_block(spec)
    phi = build_theta_block(spec.eta_power, spec.thetas, trunc)
    return to_table(phi)
