"""Command-line front end (``magnus ...``).

Exit codes: 0 success, 1 a verification check failed, 2 usage or parse
error, 3 internal error. Query commands (``cyclic``, ``crystal ... conj``,
...) always exit 0 once they have computed an answer; their verdict is in
the report. Only ``counterexample`` and ``verify-all`` assert anything.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from typing import Any

from . import checks
from . import crystal as cr
from . import finite as fg
from . import words
from .intlattice import INFINITE
from .product import DirectProduct, verify_prop8

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _jsonable(x):
    if x is INFINITE:
        return "infinite"
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


class Report:
    def __init__(self, command: list[str], group: str | None = None):
        self.command = command
        self.group = group
        self.results: list[dict] = []
        self.start = time.perf_counter()

    def add(self, name: str, status: str, **data: Any) -> None:
        self.results.append({"name": name, "status": status, "data": _jsonable(data)})

    @property
    def failed(self) -> bool:
        return any(r["status"] == "fail" for r in self.results)

    @property
    def errored(self) -> bool:
        return any(r["status"] == "error" for r in self.results)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "group": self.group,
            "results": self.results,
            "timing": {"seconds": round(time.perf_counter() - self.start, 3)},
        }

    def text(self) -> str:
        lines = []
        if self.group:
            lines.append(f"group: {self.group}")
        for r in self.results:
            data = ", ".join(f"{k}={_fmt(v)}" for k, v in r["data"].items())
            lines.append(f"[{r['status'].upper()}] {r['name']}" + (f": {data}" if data else ""))
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# -- finite catalog ---------------------------------------------------------

_CYCLIC = re.compile(r"^C(\d+)$")
_CYCLIC2 = re.compile(r"^C(\d+)xC(\d+)$")
_QUOT = re.compile(r"^quotient:(hw|g3):(\d+)$")


def finite_from_name(name: str, cap: int = fg.DEFAULT_CAP) -> fg.FiniteGroup:
    """``C<n>``, ``C<m>xC<n>``, ``heis3`` or ``quotient:{hw,g3}:<m>``."""
    if m := _CYCLIC.match(name):
        return fg.from_cyclic_factors([int(m[1])], cap=cap)
    if m := _CYCLIC2.match(name):
        return fg.direct_product(fg.from_cyclic_factors([int(m[1])], cap=cap),
                                 fg.from_cyclic_factors([int(m[2])], cap=cap), cap=cap)
    if name == "heis3":
        return fg.heisenberg(3)
    if m := _QUOT.match(name):
        return cr.finite_quotient(cr.group_from_name(m[1]), int(m[2]), cap=cap).group
    raise UsageError(f"unknown finite group {name!r}")


# -- commands -----------------------------------------------------------------


def cmd_cyclic(args, report: Report) -> None:
    n = args.n
    if n < 1:
        raise UsageError("n must be positive")
    ok, witness = fg.has_magnus(fg.from_cyclic_factors([n], cap=args.cap))
    report.group = f"C{n}"
    report.add("magnus", "info", holds=ok, witness=witness)


def cmd_product_cyclic(args, report: Report) -> None:
    m, n = args.m, args.n
    if m < 1 or n < 1:
        raise UsageError("orders must be positive")
    A, B = fg.from_cyclic_factors([m], cap=args.cap), fg.from_cyclic_factors([n], cap=args.cap)
    P = DirectProduct(A, B, cap=args.cap)
    x, y = 1 % m, 1 % n
    equal = P.closure_equal((x, y), (x, int(B.inv[y])))
    ok, witness = fg.has_magnus(P.table)
    report.group = f"C{m} x C{n}"
    report.add("closure(xy) == closure(xy^-1)", "info", equal=equal)
    report.add("magnus", "info", holds=ok,
               witness=None if witness is None else [list(divmod(w, n)) for w in witness])


def cmd_finite(args, report: Report) -> None:
    G = finite_from_name(args.name, cap=args.cap)
    report.group = args.name
    ok, witness = fg.has_magnus(G)
    report.add("order", "info", order=G.order, abelian=G.is_abelian())
    report.add("abelianization", "info", invariants=list(fg.abelian_invariants(G).torsion))
    report.add("magnus", "info", holds=ok, witness=witness)


def _words_from(args) -> list[str]:
    items = list(args.words or [])
    if args.file:
        items += words.read_corpus(args.file)
    return items


def _describe(g: cr.CrystalElement) -> dict:
    return {"holonomy": list(g.hol), "trans": list(g.trans), "text": str(g)}


def cmd_crystal(args, report: Report) -> None:
    try:
        G = cr.group_from_name(args.group)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report.group = G.name
    action = args.action
    if action == "eval":
        items = _words_from(args)
        if not items:
            raise UsageError("eval needs at least one word")
        for w in items:
            report.add(w, "info", **_describe(G.evaluate(w)))
    elif action == "closure":
        (w,) = _expect_words(args, 1)
        N = cr.normal_closure(G.evaluate(w))
        report.add(w, "info", d=N.image_order, L=[list(r) for r in N.L.basis],
                   NA=[list(r) for r in N.NA.basis],
                   cyclic_quotient_order=N.index_of(N.L))
    elif action == "conj":
        a, b = _expect_words(args, 2)
        g, h = G.evaluate(a), G.evaluate(b)
        w = cr.find_conjugator(g, h)
        if w is None:
            report.add(f"{a} ~ {b}", "info", conjugate=False,
                       refutation="no holonomy representative q gives trans(h) - trans(g^q) in K")
        else:
            report.add(f"{a} ~ {b}", "info", conjugate=True, conjugator=_describe(w))
    elif action == "scan":
        if args.bound < 1:
            raise UsageError("--bound must be >= 1")
        cosets, support = cr.default_scan_region(G)
        try:
            s = cr.magnus_scan(G, args.bound, cosets, support)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report.add("scan", "info", bound=args.bound, elements=s.elements, buckets=s.buckets,
                   region={"cosets": s.cosets, "support": s.support},
                   violations=[[str(a), str(b)] for a, b in s.violations])


def _expect_words(args, k: int) -> list[str]:
    items = _words_from(args)
    if len(items) != k:
        raise UsageError(f"{args.action} needs exactly {k} word(s)")
    return items


def cmd_counterexample(args, report: Report) -> None:
    r = verify_prop8()
    report.group = "hw x g3"
    status = lambda ok: "pass" if ok else "fail"  # noqa: E731
    report.add("index of [G,G] in <x>^G", status(r.left_index == 4), index=r.left_index)
    report.add("index of [e_inf,H] in <e_inf>^H", status(r.right_index == 3), index=r.right_index)
    report.add("x not conjugate to x^-1", status(not r.left_conjugate_to_inverse),
               coset_misses=[[list(q), list(v)] for q, v in r.left_misses])
    report.add("e_inf not conjugate to e_inf^-1", status(not r.right_conjugate_to_inverse),
               coset_misses=[[list(q), list(v)] for q, v in r.right_misses])
    report.add("closure(x,e_inf) == closure(x,e_inf^-1)", status(r.closures_equal))
    report.add("closure is <x>^G x <e_inf>^H", status(r.closure_is_product))
    report.add("subdirect in C4 x C3", status(r.subdirect), image_order=r.image_order_mod_MN)
    report.add("verdict", status(r.passed), verdict=r.verdict)


def cmd_verify_all(args, report: Report) -> None:
    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError:
            raise UsageError("--only takes a comma-separated list of criterion numbers") from None
        unknown = only - {n for n, _, _ in checks.CHECKS}
        if unknown:
            raise UsageError(f"unknown criteria {sorted(unknown)}")
    for num, _, _ in checks.CHECKS:
        if only is None or num in only:
            r = checks.run_check(num)
            report.add(f"{num}. {r.name}", r.status, message=r.message, seconds=round(r.seconds, 3))


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magnus", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--cap", type=int, default=fg.DEFAULT_CAP, help="largest Cayley table")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cyclic", parents=[common], help="Magnus property of C_n")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_cyclic)

    p = sub.add_parser("product-cyclic", parents=[common], help="C_m x C_n")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_product_cyclic)

    p = sub.add_parser("finite", parents=[common], help="a catalog group")
    p.add_argument("name", help="C<n>, C<m>xC<n>, heis3, quotient:hw:<m>, quotient:g3:<m>")
    p.set_defaults(func=cmd_finite)

    p = sub.add_parser("crystal", parents=[common], help="work in hw, g3, gp:5 or gp:7")
    p.add_argument("group")
    p.add_argument("action", choices=["eval", "closure", "conj", "scan"])
    p.add_argument("words", nargs="*")
    p.add_argument("--file", help="corpus file, one word per line")
    p.add_argument("--bound", type=int, default=1)
    p.set_defaults(func=cmd_crystal)

    p = sub.add_parser("counterexample", parents=[common], help="G x H fails Magnus")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    report = Report(argv)
    try:
        args.func(args, report)
    except words.WordSyntaxError as exc:
        print(f"magnus: parse error: {exc}\n  {exc.text}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, words.UnboundGeneratorError, fg.OrderCapExceeded) as exc:
        print(f"magnus: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"magnus: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(json.dumps(report.as_dict(), indent=2) if args.json else report.text())
    if report.errored:
        return EXIT_INTERNAL
    return EXIT_FAIL if report.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
