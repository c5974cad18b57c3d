"""Command-line front end.  JSON or CSV on stdout (or --out); exit code 1 on
domain errors with the error class name on stderr, 2 on usage errors."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import linalg
from .arith import prime_factors
from .errors import FundiscError
from .jacobi import (PIPELINE_HEADER, H_mu, JacobiCoeffTable, block_table, fundamental_pipeline,
                     parse_block, recompose, select_primitive, theta_decompose)
from .lattice import HalfIntMatrix, disc_abs, glue, gram_transform, level
from .padic import crt_lift_sl, jordan_decompose, valuation
from .primitivity import claim1_verify, claim2_dyadic_verify, exact_denominator, find_primitive
from .qexp import (CENSUS_HEADER, FracQSeries, census_prime, census_rows, census_squarefree,
                   default_trunc, delta, eisenstein_E, eta, rankin_partial, rescale_V,
                   sieve_coprime, square_sum)
from .theta_chars import (CLAIM2_HEADER, _check_modulus, char_matrix, claim2_row, claim2_sweep,
                          coset_reps, kronecker_split, primh_report, reduced_shape)
from .cyclotomic import rank_exact


class UsageError(Exception):
    pass


# ---- output helpers ----

def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(args, obj) -> None:
    if args.human:
        lines = [f"{k:<20} {json.dumps(v)}" for k, v in obj.items()] if isinstance(obj, dict) \
            else [json.dumps(obj)]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, json.dumps(obj, indent=2) + "\n")


def _csv(args, header, rows) -> None:
    rows = [[str(x) for x in r] for r in rows]
    if args.human:
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(header)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(x.rjust(w) for x, w in zip(r, widths)) for r in rows]
        _emit(args, "\n".join(lines) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _emit(args, buf.getvalue())


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _matrix(path: str) -> HalfIntMatrix:
    return HalfIntMatrix.from_json(_read_json(path))


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


# ---- lattice ----

def cmd_lattice_analyze(args):
    M = _matrix(args.matrix)
    dd = disc_abs(M)
    _json(args, {"n": M.n, "d": dd.d, "parity": dd.parity_rule, "level": level(M),
                 "odd_squarefree": dd.is_odd_squarefree, "definiteness": M.definiteness})


def cmd_lattice_primitive(args):
    M = _matrix(args.matrix)
    mu = _int_list(args.mu) if args.mu else find_primitive(M)
    _json(args, exact_denominator(M, mu).to_json())


def cmd_lattice_glue(args):
    T = _matrix(args.matrix)
    G = glue(T, _int_list(args.mu), args.ell)
    out = G.to_json()
    out["d"] = disc_abs(G).d
    out["det"] = linalg.fraction_str(G.det())
    _json(args, out)


def cmd_lattice_transform(args):
    M = _matrix(args.matrix)
    B = _read_json(args.B)
    out = [[linalg.fraction_str(x) for x in row] for row in gram_transform(M, B)]
    _json(args, {"rows": len(out), "cols": len(out[0]) if out else 0, "entries": out})


def cmd_lattice_claim1(args):
    M = _matrix(args.matrix)
    dd = disc_abs(M)
    primes = [args.p] if args.p else sorted(set(prime_factors(2 * dd.d)))
    result = {"checks": []}
    for p in primes:
        ok = claim1_verify(M, p, args.f, args.method)
        result["checks"].append({"kind": "local", "p": p, "f": args.f, "holds": ok})
    if M.n % 2 == 1 and not args.p:
        ok = claim2_dyadic_verify(M, max(args.f, 2))
        result["checks"].append({"kind": "dyadic-parity", "p": 2, "f": max(args.f, 2), "holds": ok})
    result["holds"] = all(c["holds"] for c in result["checks"])
    _json(args, result)


# ---- padic ----

def cmd_padic_valuation(args):
    try:
        x = Fraction(args.x)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {args.x!r}") from exc
    _json(args, {"x": linalg.fraction_str(x), "p": args.p, "valuation": valuation(x, args.p)})


def cmd_padic_jordan(args):
    M = _matrix(args.matrix)
    jf = jordan_decompose(M, args.p, args.f)
    out = jf.to_json()
    out["shape"] = jf.shape()
    _json(args, out)


def cmd_padic_crt_lift(args):
    data = _read_json(args.constraints)
    n = data.get("n") if isinstance(data, dict) else None
    items = data["constraints"] if isinstance(data, dict) else data
    local = [(c["q"], c["modulus"], c["U"]) for c in items]
    U = crt_lift_sl(local, n=n)
    _json(args, {"U": U, "det": linalg.det(U)})


def cmd_padic_reduce(args):
    rs = reduced_shape(_matrix(args.matrix), args.f)
    _json(args, {"U": rs.U, "Mtilde": rs.Mtilde, "m_nn": rs.m_nn, "modulus": rs.modulus,
                 "coprime": rs.coprime})


# ---- claim2 ----

def cmd_claim2_sweep(args):
    moduli = []
    for m in range(2, args.max_dprime + 1):
        try:
            _check_modulus(m)
        except FundiscError:
            continue
        moduli.append(m)
    rows = claim2_sweep(moduli, jobs=args.jobs)
    _csv(args, CLAIM2_HEADER, [r.csv_row() for r in rows])


def cmd_claim2_matrix(args):
    A = char_matrix(args.dprime, args.nu0)
    row = claim2_row(args.dprime, args.nu0)
    _json(args, {"dprime": args.dprime, "nu0": args.nu0, "rows": len(A), "cols": len(A[0]),
                 "t_prime": row.t_prime, "rank": row.rank, "expected": row.expected,
                 "pass": row.ok})


def cmd_claim2_split(args):
    ks = kronecker_split(args.dprime, args.nu0, args.q)
    full = char_matrix(args.dprime, args.nu0)
    ra, rb = rank_exact(ks.A), rank_exact(ks.B)
    _json(args, {"dprime": args.dprime, "nu0": args.nu0, "q": args.q,
                 "A_shape": [len(ks.A), len(ks.A[0])], "B_shape": [len(ks.B), len(ks.B[0])],
                 "rank_A": ra, "rank_B": rb, "rank_full": rank_exact(full),
                 "reassembles": ks.assemble() == full})


# ---- primh ----

def cmd_primh_certify(args):
    report = primh_report(_matrix(args.matrix))
    _json(args, {"certified": all(c.ok for c in report),
                 "classes": [c.to_json() for c in report]})


def cmd_primh_cosets(args):
    cs = coset_reps(_matrix(args.matrix))
    _json(args, {"count": len(cs.reps), "reps": [list(r) for r in cs.reps],
                 "primitive": list(cs.primitive_mask),
                 "classes": [{"frac": linalg.fraction_str(fr), "members": list(idx)}
                             for fr, idx in cs.equiv_partition]})


# ---- qexp ----

def _form(args, trunc: int) -> FracQSeries:
    if args.form == "delta":
        return delta(trunc)
    if args.form == "eta":
        return eta(trunc)
    if args.form in ("E4", "E6"):
        return eisenstein_E(int(args.form[1:]), trunc)
    if not args.series:
        raise UsageError("--form file needs --series PATH")
    try:
        return FracQSeries.loads(Path(args.series).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.series}: {exc}") from exc


def cmd_qexp_series(args):
    trunc = args.trunc or default_trunc()
    f = _form(args, trunc)
    if args.rescale:
        f = rescale_V(f, args.rescale)
    if args.sieve:
        f = sieve_coprime(f, args.sieve)
    _emit(args, f.dumps())


def cmd_qexp_census(args):
    f = _form(args, args.X + 1)
    if args.rows:
        _csv(args, CENSUS_HEADER, census_rows(f, args.X))
        return
    c = census_squarefree(f, args.X, args.odd, args.coprime_to)
    out = c.to_json()
    out.update({"form": args.form, "odd": args.odd, "coprime_to": args.coprime_to})
    _json(args, out)


def cmd_qexp_prime_census(args):
    f = _form(args, args.X + 1)
    out = census_prime(f, args.X, args.level).to_json()
    out["form"] = args.form
    _json(args, out)


def cmd_qexp_rankin(args):
    f = _form(args, args.X + 1)
    if args.raw:
        s = square_sum(f, args.X)
    else:
        kappa2 = args.kappa2 or f.weight2
        if kappa2 is None:
            raise UsageError("--kappa2 is required for series without a weight tag")
        s = rankin_partial(f, kappa2, args.X)
    out = {"form": args.form, "X": args.X, "raw": args.raw, "value": float(s),
           "per_X": float(s) / args.X}
    if args.exact:
        out["exact"] = linalg.fraction_str(s)
    _json(args, out)


# ---- jacobi ----

def _table(args, X: int | None = None) -> JacobiCoeffTable:
    if args.table:
        return JacobiCoeffTable.from_json(_read_json(args.table))
    if not args.block:
        raise UsageError("give --block SPEC or --table FILE")
    try:
        spec = parse_block(args.block)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trunc = args.trunc
    if trunc is None:
        trunc = default_trunc()
        if X is not None:
            m = spec.index
            trunc = max(int(X / (4 * m)) + 3, 8) if m else trunc
    return block_table(spec, trunc)


def _series_json(h: FracQSeries, terms: int) -> dict:
    return {"D": h.D, "trunc": linalg.fraction_str(h.trunc),
            "terms": [[linalg.fraction_str(x), linalg.fraction_str(c)] for x, c in h.items()[:terms]]}


def cmd_jacobi_decompose(args):
    table = _table(args)
    hs = theta_decompose(table)
    cs = coset_reps(table.index)
    comps = []
    for rep, prim in zip(cs.reps, cs.primitive_mask):
        h = hs[rep]
        item = {"mu": list(rep), "primitive": prim, "zero": h.is_zero()}
        item.update(_series_json(h, args.terms))
        comps.append(item)
    mu, _ = select_primitive(table, hs)
    _json(args, {"index": table.to_json()["index"], "weight": table.weight,
                 "qtrunc": table.qtrunc, "selected_mu": list(mu) if mu else None,
                 "components": comps})


def cmd_jacobi_table(args):
    _json(args, _table(args).to_json())


def cmd_jacobi_recompose(args):
    table = _table(args)
    m = table.scalar_index
    if m is None:
        raise UsageError("recompose needs a scalar index")
    back = recompose(theta_decompose(table), m, table.qtrunc, table.weight)
    out = back.to_json()
    out["roundtrip"] = all(back.get(*k) == c for k, c in table.entries.items()) and \
        all(table.get(*k) == c for k, c in back.entries.items())
    _json(args, out)


def cmd_jacobi_pipeline(args):
    table = _table(args, args.X)
    entries = fundamental_pipeline(table, args.X)
    _csv(args, PIPELINE_HEADER, [e.csv_row() for e in entries])


def cmd_jacobi_hmu(args):
    table = _table(args, args.X)
    hs = theta_decompose(table)
    key = tuple(_int_list(args.mu))
    if key not in hs:
        raise UsageError(f"mu={list(key)} is not a coset representative")
    T = table.index
    d = disc_abs(T).d
    parity = "even" if (T.n + 1) % 2 == 0 else "odd"
    _emit(args, H_mu(hs[key], d, parity).dumps())


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--human", action="store_true", help="aligned text instead of CSV/JSON")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    p = argparse.ArgumentParser(prog="fundisc", description=__doc__)
    top = p.add_subparsers(dest="group", required=True)

    def leaf(group, name, func, help_):
        sp = group.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    lat = top.add_parser("lattice", help="half-integral matrices").add_subparsers(dest="cmd", required=True)
    s = leaf(lat, "analyze", cmd_lattice_analyze, "discriminant, level and parity")
    s.add_argument("matrix")
    s = leaf(lat, "primitive", cmd_lattice_primitive, "find and certify a primitive vector")
    s.add_argument("matrix")
    s.add_argument("--mu", help="report on this vector instead of searching")
    s = leaf(lat, "glue", cmd_lattice_glue, "glue [[ell, mu/2], [mu/2, T]]")
    s.add_argument("matrix")
    s.add_argument("--mu", required=True)
    s.add_argument("--ell", type=int, required=True)
    s = leaf(lat, "transform", cmd_lattice_transform, "B^t M B")
    s.add_argument("matrix")
    s.add_argument("--B", required=True, help="JSON file with an integer matrix")
    s = leaf(lat, "claim1", cmd_lattice_claim1, "local integrality checks")
    s.add_argument("matrix")
    s.add_argument("--p", type=int)
    s.add_argument("--f", type=int, default=2)
    s.add_argument("--method", choices=["auto", "residues", "cosets"], default="auto")

    pad = top.add_parser("padic", help="local forms").add_subparsers(dest="cmd", required=True)
    s = leaf(pad, "jordan", cmd_padic_jordan, "Jordan splitting at p modulo p^f")
    s.add_argument("matrix")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--f", type=int, default=2)
    s = leaf(pad, "valuation", cmd_padic_valuation, "p-adic valuation of a rational")
    s.add_argument("x")
    s.add_argument("--p", type=int, required=True)
    s = leaf(pad, "crt-lift", cmd_padic_crt_lift, "lift local SL_n constraints")
    s.add_argument("constraints")
    s = leaf(pad, "reduce", cmd_padic_reduce, "reduced global shape")
    s.add_argument("matrix")
    s.add_argument("--f", type=int, default=2)

    c2 = top.add_parser("claim2", help="character matrix ranks").add_subparsers(dest="cmd", required=True)
    s = leaf(c2, "sweep", cmd_claim2_sweep, "all valid d' up to a bound and all nu0")
    s.add_argument("--max-dprime", type=int, required=True)
    s = leaf(c2, "matrix", cmd_claim2_matrix, "rank of one character matrix")
    s.add_argument("--dprime", type=int, required=True)
    s.add_argument("--nu0", type=int, required=True)
    s = leaf(c2, "split", cmd_claim2_split, "Kronecker factorisation along q")
    s.add_argument("--dprime", type=int, required=True)
    s.add_argument("--nu0", type=int, required=True)
    s.add_argument("--q", type=int, required=True)

    ph = top.add_parser("primh", help="theta-component certificates").add_subparsers(dest="cmd", required=True)
    s = leaf(ph, "certify", cmd_primh_certify, "rank certificate for every imprimitive class")
    s.add_argument("matrix")
    s = leaf(ph, "cosets", cmd_primh_cosets, "coset representatives and classes")
    s.add_argument("matrix")

    qx = top.add_parser("qexp", help="q-expansions and censuses").add_subparsers(dest="cmd", required=True)

    def form_args(sp):
        sp.add_argument("--form", choices=["delta", "E4", "E6", "eta", "file"], required=True)
        sp.add_argument("--series", help="series file for --form file")

    s = leaf(qx, "series", cmd_qexp_series, "print a series file")
    form_args(s)
    s.add_argument("--trunc", type=int)
    s.add_argument("--rescale", type=int, help="replace q by q^L")
    s.add_argument("--sieve", type=int, help="drop a(n) with gcd(n, M) > 1")
    s = leaf(qx, "census", cmd_qexp_census, "square-free census")
    form_args(s)
    s.add_argument("--X", type=int, required=True)
    s.add_argument("--odd", action="store_true")
    s.add_argument("--coprime-to", type=int, default=1)
    s.add_argument("--rows", action="store_true", help="per-n CSV instead of a summary")
    s = leaf(qx, "prime-census", cmd_qexp_prime_census, "prime census")
    form_args(s)
    s.add_argument("--X", type=int, required=True)
    s.add_argument("--level", type=int, default=1)
    s = leaf(qx, "rankin", cmd_qexp_rankin, "normalised square sums")
    form_args(s)
    s.add_argument("--X", type=int, required=True)
    s.add_argument("--kappa2", type=int)
    s.add_argument("--raw", action="store_true", help="sum a(n)^2 without normalisation")
    s.add_argument("--exact", action="store_true", help="also print the exact rational")

    jc = top.add_parser("jacobi", help="Jacobi forms").add_subparsers(dest="cmd", required=True)

    def table_args(sp):
        sp.add_argument("--block", help="theta block, e.g. 6:1,1,1,1,1,1 for eta^6 theta^6")
        sp.add_argument("--table", help="coefficient table JSON")
        sp.add_argument("--trunc", type=int)

    s = leaf(jc, "decompose", cmd_jacobi_decompose, "theta decomposition")
    table_args(s)
    s.add_argument("--terms", type=int, default=8)
    s = leaf(jc, "table", cmd_jacobi_table, "coefficient table JSON of a block")
    table_args(s)
    s = leaf(jc, "recompose", cmd_jacobi_recompose, "rebuild the table from its theta components")
    table_args(s)
    s = leaf(jc, "pipeline", cmd_jacobi_pipeline, "glued discriminants up to X")
    table_args(s)
    s.add_argument("--X", type=int, required=True)
    s = leaf(jc, "hmu", cmd_jacobi_hmu, "rescaled component H_mu")
    table_args(s)
    s.add_argument("--mu", required=True)
    s.add_argument("--X", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FundiscError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
