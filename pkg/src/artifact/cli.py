"""Command-line front end.

Exit codes:
    0  success
    1  a verification reported failures
    2  bad input: parse error, empty generator list, missing file, reserved variable
    3  completion exceeded its pair budget
    4  degree cap below the largest base degree
    5  unsupported n
"""
from __future__ import annotations

import argparse
import json
import random
import re
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from . import ss_engine as sse
from . import symcomb
from .groebner import (
    NonTermination,
    ReservedVariable,
    groebner,
    ideal_intersect,
    normal_form,
)
from .poly import MonomialOrder, ParseError, Polynomial, VarContext
from .su4 import load_closed_form, verify_su4

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_NONTERMINATION = 3
EXIT_CAP = 4
EXIT_UNSUPPORTED = 5

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _read_lines(path: str) -> List[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def _names_in(lines: Sequence[str]) -> List[str]:
    seen: List[str] = []
    for line in lines:
        for name in _IDENT.findall(line):
            if name not in seen:
                seen.append(name)
    return seen


def _context(lines: Sequence[str], vars_opt: Optional[str], order_opt: Optional[str]) -> VarContext:
    if vars_opt:
        names = _split(vars_opt)
    elif order_opt:
        names = _split(order_opt)
        names += [n for n in _names_in(lines) if n not in names]
    else:
        names = _names_in(lines)
    if not names:
        names = ["x"]
    try:
        return VarContext(names)
    except ValueError as exc:
        raise InputError(f"bad variable list: {exc}") from exc


def _split(text: str) -> List[str]:
    return [t for t in re.split(r"[,\s]+", text.strip()) if t]


def _order(ctx: VarContext, order_opt: Optional[str]) -> MonomialOrder:
    if not order_opt:
        return MonomialOrder.lex(ctx)
    try:
        return MonomialOrder.lex(ctx, _split(order_opt))
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad --order: {exc}") from exc


def _parse_all(lines: Sequence[str], ctx: VarContext) -> List[Polynomial]:
    return [p for p in (ctx.parse(line) for line in lines) if not p.is_zero()]


def _emit_basis(G, args) -> None:
    text = G.to_json() + "\n" if args.json else "".join(s + "\n" for s in G.strings())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_gb(args) -> int:
    lines = _read_lines(args.input)
    ctx = _context(lines, args.vars, args.order)
    order = _order(ctx, args.order)
    F = _parse_all(lines, ctx)
    if not F:
        raise InputError("empty generator list")
    _emit_basis(groebner(F, order, max_pairs=args.max_pairs), args)
    return EXIT_OK


def cmd_intersect(args) -> int:
    la_, lb = _read_lines(args.a), _read_lines(args.b)
    ctx = _context(la_ + lb, args.vars, args.order)
    order = _order(ctx, args.order)
    A, B = _parse_all(la_, ctx), _parse_all(lb, ctx)
    if not A or not B:
        raise InputError("empty generator list")
    _emit_basis(ideal_intersect(A, B, order), args)
    return EXIT_OK


def cmd_nf(args) -> int:
    lines = _read_lines(args.basis)
    ctx = _context(lines + list(args.poly), args.vars, args.order)
    order = _order(ctx, args.order)
    F = _parse_all(lines, ctx)
    if not F:
        raise InputError("empty generator list")
    G = groebner(F, order, max_pairs=args.max_pairs)
    results = [normal_form(ctx.parse(p), G, order).to_str(order) for p in args.poly]
    if args.json:
        print(json.dumps({"variables": list(ctx.names), "order": order.describe(),
                          "normal_forms": results}, indent=2))
    else:
        for r in results:
            print(r)
    return EXIT_OK


def _torsion_table(summary: sse.TorsionSummary) -> str:
    if not summary.orders:
        return "torsion: none\n"
    lines = ["torsion order | total degree: count"]
    for d, rows in summary.orders.items():
        cells = ", ".join(f"{deg}: {cnt}" for deg, cnt in rows)
        lines.append(f"{d:>13} | {cells}")
    return "\n".join(lines) + "\n"


def cmd_flagloop(args) -> int:
    cap = args.cap if args.cap is not None else sse.default_cap(args.n)
    t0 = time.perf_counter()
    state = sse.assemble_final_page(args.n, cap, args.workers)
    elapsed = time.perf_counter() - t0
    result = sse.state_to_json(state)
    out = Path(args.out or f"flagloop_n{args.n}.json")
    out.write_text(sse.dumps(result))
    manifest = {
        "schema": sse.SCHEMA,
        "n": args.n,
        "cap": cap,
        "orders": {"base": result["base"]["order"],
                   "loop": MonomialOrder.lex(state.engine.loop_ctx).describe()},
        "result": str(out),
        "timings": dict(state.timings, total=round(elapsed, 3)),
        "workers": sse._workers(args.workers),
    }
    mpath = Path(args.manifest) if args.manifest else out.with_name(out.stem + ".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if args.json:
        print(json.dumps({"result": str(out), "manifest": str(mpath),
                          "torsion": result["torsion"]}, indent=2, sort_keys=True))
    else:
        ranks = sum(c["rank"] for c in result["components"])
        print(f"n={args.n} cap={cap} final page E{state.page}: total free rank {ranks}")
        sys.stdout.write(_torsion_table(sse.torsion_summary(state)))
        print(f"wrote {out} and {mpath}")
    return EXIT_OK


def cmd_verify_su4(args) -> int:
    try:
        data = json.loads(Path(args.result).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {args.result}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.result} is not JSON: {exc}") from exc
    try:
        state = sse.state_from_json(data)
        recorded = {(tuple(c["x"]), c["k"], c["p"]): list(c["torsion"]) for c in data["components"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed result file: {exc}") from exc
    closed = load_closed_form(args.closed_form) if args.closed_form else None
    report = verify_su4(state, recorded, closed)
    if args.json:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.to_text(args.details))
    return EXIT_OK if report.passed else EXIT_FAILED


def _random_poly(rng: random.Random, ctx: VarContext) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(0, 5)):
        e = tuple(rng.randint(0, 3) for _ in ctx.names)
        terms[e] = terms.get(e, 0) + rng.randint(-50, 50)
    return Polynomial(ctx, {e: c for e, c in terms.items() if c})


def cmd_identities(args) -> int:
    rows = []
    multiset_sums = all(symcomb.verify_alternating_multiset_sum(n, m) for n in range(1, 13) for m in range(1, 13))
    rows.append(("alternating binomial-multiset sums, 1 <= n, m <= 12", multiset_sums))
    stirling = all(symcomb.verify_stirling_alternating(n) for n in range(1, 16))
    rows.append(("alternating Stirling sums, 1 <= n <= 15", stirling))
    sigma_h = all(symcomb.check_sigma_h_relation(n, m) for n in range(1, 7) for m in range(1, n + 1))
    rows.append(("sigma/h alternating relation, m <= n <= 6", sigma_h))
    rng = random.Random(args.seed)
    ctx = VarContext(["x", "y", "z"])
    trips = all(ctx.parse(f.to_str()) == f for f in (_random_poly(rng, ctx) for _ in range(200)))
    rows.append((f"parse/print round trip on 200 random polynomials, seed {args.seed}", trips))
    if args.json:
        print(json.dumps({"seed": args.seed, "checks": [{"name": n, "passed": ok} for n, ok in rows]},
                         indent=2))
    else:
        for name, ok in rows:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in rows) else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.split("\n")[0],
                                epilog=__doc__.split("\n", 1)[1],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def poly_opts(sp):
        sp.add_argument("--vars", help="variables in context order, comma separated")
        sp.add_argument("--order", help="lex ranking from the largest variable down, comma separated")
        sp.add_argument("--json", action="store_true", help="JSON output")
        sp.add_argument("--max-pairs", type=int, default=2_000_000,
                        help="critical-pair budget before giving up (exit 3)")

    sp = sub.add_parser("gb", help="reduced Gröbner basis over Z of a file of polynomials")
    sp.add_argument("input")
    sp.add_argument("-o", "--out")
    poly_opts(sp)
    sp.set_defaults(func=cmd_gb)

    sp = sub.add_parser("intersect", help="reduced basis of the intersection of two ideals")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("-o", "--out")
    poly_opts(sp)
    sp.set_defaults(func=cmd_intersect)

    sp = sub.add_parser("nf", help="normal forms modulo the ideal generated by a file")
    sp.add_argument("basis")
    sp.add_argument("poly", nargs="+")
    poly_opts(sp)
    sp.set_defaults(func=cmd_nf)

    sp = sub.add_parser("flagloop", help="run the spectral sequence for the free loop space of a flag manifold")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cap", type=int, help="total degree cap (default 8, 16, 24 for n = 1, 2, 3)")
    sp.add_argument("-o", "--out", help="result file (default flagloop_n<N>.json)")
    sp.add_argument("--manifest", help="manifest file (default <result>.manifest.json)")
    sp.add_argument("--workers", type=int, help=f"worker processes (default ${sse.THREADS_ENV} or 1)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_flagloop)

    sp = sub.add_parser("verify-su4", help="compare an n=3 result file with the closed-form answer")
    sp.add_argument("result")
    sp.add_argument("--closed-form", help="alternative generator/relation data file")
    sp.add_argument("--details", type=int, default=8, help="detail lines per check")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_verify_su4)

    sp = sub.add_parser("identities", help="run the binomial, Stirling and symmetric-function identity grids")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_identities)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError, ReservedVariable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonTermination as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONTERMINATION
    except sse.CapTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except sse.Unsupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
