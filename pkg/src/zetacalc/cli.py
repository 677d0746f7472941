"""Command-line driver.

Exit codes: 0 success, 1 type error / DISTINCT / unsound rule, 2 parse error
or mismatched equivalence query, 3 wire budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .diagram import max_width, to_dot
from .evaluator import (
    BOTH_ZERO,
    WireBudgetError,
    denote,
    format_complex,
    matrix_to_json,
    max_deviation,
    equal_up_to_scalar,
    render_matrix,
)
from .semantics import eval_as_map, translate
from .syntax import Basis, ParseError, parse, print_term
from .theory import commutes_with_sharing, run_suite
from .types import (
    ZetaTypeError,
    derivation_summary,
    infer,
    parse_context,
    print_type,
    size,
)

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3


def wire_budget() -> int:
    raw = os.environ.get("ZETA_WIRE_BUDGET", "14")
    try:
        return int(raw)
    except ValueError:
        return 14


def _read_term(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def _fail(code: int, msg: str) -> int:
    print(msg, file=sys.stderr)
    return code


def _typed(args, path: str):
    """Parse + infer under --ctx; raises ParseError / ZetaTypeError."""
    term = _read_term(path)
    ctx = parse_context(args.ctx)
    ty, deriv = infer(ctx, term)
    return term, ctx, ty, deriv


def cmd_check(args) -> int:
    term, ctx, ty, deriv = _typed(args, args.file)
    summary = derivation_summary(deriv)
    if args.json:
        print(json.dumps({
            "term": print_term(term),
            "type": print_type(ty),
            "summary": summary,
        }))
        return EXIT_OK
    print(print_type(ty))
    for var, info in summary["c_nodes"].items():
        print(f"C-node: {var} shared {info['arity']} ways in basis {info['basis']}")
    if summary["w_count"]:
        print(f"W-nodes: {summary['w_count']}")
    if summary["x_count"]:
        print(f"X-nodes: {summary['x_count']}")
    return EXIT_OK


def cmd_diagram(args) -> int:
    _, _, _, deriv = _typed(args, args.file)
    jd = translate(deriv)
    if args.format == "dot":
        print(to_dot(jd.diagram))
    else:
        print(jd.to_json())
    return EXIT_OK


def cmd_eval(args) -> int:
    _, _, _, deriv = _typed(args, args.file)
    jd = translate(deriv)
    if args.as_map:
        jd = eval_as_map(jd)
    budget = wire_budget()
    if max_width(jd.diagram) > budget:
        return _fail(EXIT_BUDGET, f"diagram exceeds the {budget}-wire budget")
    m = denote(jd.diagram)
    if args.json:
        print(matrix_to_json(m))
    else:
        print(f"{print_type(jd.type)}  [{m.shape[0]}x{m.shape[1]}]")
        print(render_matrix(m))
    return EXIT_OK


def cmd_equiv(args) -> int:
    term1 = _read_term(args.file1)
    term2 = _read_term(args.file2)
    ctx = parse_context(args.ctx)
    ty1, d1 = infer(ctx, term1)
    ty2, d2 = infer(ctx, term2)
    if size(ty1) != size(ty2):
        return _fail(
            EXIT_PARSE,
            f"types {print_type(ty1)} and {print_type(ty2)} have different wire counts",
        )
    budget = wire_budget()
    jd1, jd2 = translate(d1), translate(d2)
    if max(max_width(jd1.diagram), max_width(jd2.diagram)) > budget:
        return _fail(EXIT_BUDGET, f"diagram exceeds the {budget}-wire budget")
    m1, m2 = denote(jd1.diagram), denote(jd2.diagram)
    witness = equal_up_to_scalar(m1, m2, args.tol)
    if witness is None:
        verdict = {"verdict": "DISTINCT", "deviation": max_deviation(m1, m2)}
        code = EXIT_TYPE
    else:
        scalar = None if witness is BOTH_ZERO else witness
        verdict = {
            "verdict": "EQUIVALENT",
            "scalar": None if scalar is None else [scalar.real, scalar.imag],
        }
        code = EXIT_OK
    if args.json:
        print(json.dumps(verdict))
    elif code == EXIT_OK:
        s = verdict["scalar"]
        shown = "0 (both sides zero)" if s is None else format_complex(complex(*s))
        print(f"EQUIVALENT  scalar = {shown}")
    else:
        print(f"DISTINCT  max deviation = {verdict['deviation']:.3e}")
    return code


def cmd_rules(args) -> int:
    verdicts = run_suite(args.tol)
    any_unsound = any(v.status == "unsound" for v in verdicts)
    if args.json:
        print(json.dumps([v.to_json_obj() for v in verdicts]))
    else:
        for v in verdicts:
            scalar = "" if v.scalar is None else f"  scalar={format_complex(v.scalar)}"
            dev = "" if v.deviation is None else f"  dev={v.deviation:.2e}"
            print(f"{v.rule_id:14s} {v.status:20s}{scalar}{dev}  [{v.bindings}]")
        counts = {}
        for v in verdicts:
            counts[v.status] = counts.get(v.status, 0) + 1
        print("totals: " + ", ".join(f"{k}={n}" for k, n in sorted(counts.items())))
    return EXIT_TYPE if any_unsound else EXIT_OK


def _parse_copies(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    n = int(text)
    return range(n, n + 1)


def cmd_share_check(args) -> int:
    term = _read_term(args.file)
    ctx = parse_context(args.ctx)
    basis = Basis(args.basis)
    results = {}
    for n in _parse_copies(args.copies):
        results[n] = commutes_with_sharing(ctx, term, basis, n, args.tol)
    if args.json:
        print(json.dumps({str(n): ok for n, ok in results.items()}))
    else:
        for n, ok in results.items():
            print(f"n={n}: commutes: {'yes' if ok else 'no'}")
    return EXIT_OK if all(results.values()) else EXIT_TYPE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeta", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--ctx", default="", help="context, e.g. 'x:Z:1, f:X:1->1*1'")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--tol", type=float, default=1e-9)

    sp = sub.add_parser("check", help="typecheck a term file")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("diagram", help="translate to a string diagram")
    sp.add_argument("file")
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    common(sp)
    sp.set_defaults(fn=cmd_diagram)

    sp = sub.add_parser("eval", help="evaluate the denotation matrix")
    sp.add_argument("file")
    sp.add_argument("--as-map", dest="as_map", action="store_true",
                    help="uncurry a function type once before evaluating")
    common(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("equiv", help="decide denotational equivalence of two files")
    sp.add_argument("file1")
    sp.add_argument("file2")
    common(sp)
    sp.set_defaults(fn=cmd_equiv)

    sp = sub.add_parser("rules", help="run the equational-theory soundness suite")
    common(sp)
    sp.set_defaults(fn=cmd_rules)

    sp = sub.add_parser("share-check", help="check commutation with sharing")
    sp.add_argument("file")
    sp.add_argument("--basis", choices=["Z", "X"], default="Z")
    sp.add_argument("--copies", default="2..3", help="copy counts, e.g. 2..3 or 2")
    common(sp)
    sp.set_defaults(fn=cmd_share_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        return _fail(EXIT_PARSE, f"parse error: {exc}")
    except WireBudgetError as exc:
        return _fail(EXIT_BUDGET, str(exc))
    except ZetaTypeError as exc:
        return _fail(EXIT_TYPE, f"type error: {exc}")
    except OSError as exc:
        return _fail(EXIT_PARSE, str(exc))


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
