"""Command line front end: ``boson-sculpting <command> ...``.

Exit codes: 0 success, 1 domain failure, 2 usage error.  With ``--json`` exactly
one JSON document is written to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import checks
from .bigraph import (
    SculptingBigraph,
    enumerate_perfect_matchings,
    export_dot,
    is_epm,
    pm_sum_state,
    to_sculpting_operator,
)
from .engine import maximally_symmetric_state
from .entanglement import LogicalState, classify, fidelity_up_to_phase
from .errors import SculptingError
from .fock import _fmt_complex
from .optics import run_bell_circuit
from .schemes import SCHEMES, build_scheme, run_scheme
from .search import DEFAULT_STARTS, MAX_RETRIES, SOLVE_TOL, TargetSpec, search

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return v


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def _parse_doc(path: str, loader):
    data = _load_json(path)
    try:
        return loader(data)
    except SculptingError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{path} does not match the expected schema: {e}") from None


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit_json(doc) -> None:
    sys.stdout.write(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")


def _g(x: float) -> str:
    return f"{x:.6g}"


# -- commands -----------------------------------------------------------------------

def cmd_schemes_list(args) -> int:
    names = sorted(SCHEMES)
    if args.json:
        _emit_json({"schemes": names})
    else:
        print("\n".join(names))
    return EXIT_OK


def cmd_schemes_run(args) -> int:
    try:
        desc = build_scheme(args.name, N=args.N, d=args.d, alpha=args.alpha, beta=args.beta)
    except TypeError as e:
        raise UsageError(f"scheme {args.name!r}: {e}") from None
    rep = run_scheme(desc)
    if args.json:
        _emit_json(rep.to_json())
        return EXIT_OK
    print(f"scheme      {rep.name} {' '.join(f'{k}={v}' for k, v in sorted(rep.params.items()))}")
    print(f"success     {_g(rep.success)}" + ("" if rep.expected_success is None
                                              else f" (closed form {_g(rep.expected_success)})"))
    print(f"fidelity    {_g(rep.fidelity)}")
    print(f"class       {rep.classification.kind.value}")
    print(f"basis       {rep.basis_label}")
    print(f"logical     {rep.logical.to_braket()}")
    print(f"fock        {rep.final.to_braket()}")
    return EXIT_OK


def _load_graph(path: str) -> SculptingBigraph:
    return _parse_doc(path, SculptingBigraph.from_json)


def cmd_graph_check_epm(args) -> int:
    g = _load_graph(args.file)
    rep = is_epm(g)
    n = len(enumerate_perfect_matchings(g))
    if args.json:
        _emit_json({"epm": rep.epm, "pm_count": n})
    else:
        print(f"epm: {'yes' if rep.epm else 'no'}, perfect matchings: {n}")
        for c, why in sorted(rep.offending.items()):
            print(f"  circle {c}: {why}")
    return EXIT_OK


def cmd_graph_pm(args) -> int:
    g = _load_graph(args.file)
    pms = enumerate_perfect_matchings(g)
    state = pm_sum_state(g, maximally_symmetric_state(g.N, g.d, [0] * g.K))
    if args.json:
        _emit_json({
            "pm_count": len(pms),
            "pms": [{"choice": list(pm.choice), "circles": [e.circle for e in pm.edges],
                     "colors": [e.color.to_json(g.d) for e in pm.edges],
                     "coefficient": pm.coefficient()} for pm in pms],
            "pm_sum_state": state.to_json(),
        })
    else:
        print(f"{len(pms)} perfect matchings")
        for pm in pms:
            route = ", ".join(f"dot{i}->c{e.circle}:{e.color.name()}" for i, e in enumerate(pm.edges))
            c = pm.coefficient()
            print(f"  [{route}] coefficient {_g(c.real)}{c.imag:+.6g}j")
        print(f"pm sum state: {state.to_braket()}")
    return EXIT_OK


def cmd_graph_to_op(args) -> int:
    op = to_sculpting_operator(_load_graph(args.file))
    if args.json:
        _emit_json(op.to_json())
    else:
        for i, f in enumerate(op.factors):
            terms = " + ".join(f"({_fmt_complex(t.amplitude, 6)}) a[{t.spatial}; "
                               f"{', '.join(_fmt_complex(c, 6) for c in t.internal)}]" for t in f.terms)
            print(f"factor {i}: {terms}")
    return EXIT_OK


def cmd_graph_dot(args) -> int:
    text = export_dot(_load_graph(args.file), directed=args.directed)
    if args.json:
        _emit_json({"dot": text})
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def _load_logical(path: str) -> LogicalState:
    return _parse_doc(path, LogicalState.from_json)


def cmd_state_classify(args) -> int:
    s = _load_logical(args.file)
    cls = classify(s, tol=args.tol) if args.tol is not None else classify(s)
    if args.json:
        _emit_json(cls.to_json())
    else:
        print(f"class: {cls.kind.value}")
        for (left, right), r in cls.ranks.items():
            mark = "  (product)" if r == 1 else ""
            print(f"  {list(left)} | {list(right)}: Schmidt rank {r}{mark}")
    return EXIT_OK


def cmd_state_fidelity(args) -> int:
    a, b = _load_logical(args.a), _load_logical(args.b)
    if (a.N, a.d) != (b.N, b.d):
        raise UsageError(f"states live in different spaces: N={a.N},d={a.d} vs N={b.N},d={b.d}")
    f = fidelity_up_to_phase(a, b)
    if args.json:
        _emit_json({"fidelity": f})
    else:
        print(f"fidelity: {_g(f)}")
    return EXIT_OK


def cmd_optics_bell(args) -> int:
    rep = run_bell_circuit()
    if args.json:
        _emit_json(rep.to_json())
        return EXIT_OK
    for step, s in sorted(rep.snapshots.items()):
        print(f"step {step}: {s.to_braket()}")
    for b in rep.branches:
        clicks = " ".join(f"{p}{pol}" for p, (n, pol) in sorted(b.pattern.items()) if n)
        sign = "+" if b.target_sign > 0 else "-"
        print(f"herald {clicks}: p={_g(b.probability)} fidelity={_g(b.fidelity)} with (|HH>{sign}|VV>)/sqrt2")
    print(f"total heralded probability {_g(rep.total_probability)}")
    return EXIT_OK


def cmd_search(args) -> int:
    spec = _parse_doc(args.target, TargetSpec.from_json)
    if args.ancillas is not None:
        spec = TargetSpec(spec.target, args.ancillas, spec.colors, spec.basis)
    budget = None if args.time_budget <= 0 else args.time_budget
    res = search(spec, starts=args.starts, seed=args.seed, max_candidates=args.max_candidates,
                 max_retries=args.retries, time_budget=budget, color_search=args.color_search,
                 tol=args.tol if args.tol is not None else SOLVE_TOL)
    if args.json:
        _emit_json(res.to_json())
    else:
        print(f"status    {res.status}")
        print(f"residual  {_g(res.residual)}")
        print(f"fidelity  {_g(res.fidelity)}")
        print(f"success   {_g(res.success)}")
        if res.graph is not None:
            print(export_dot(res.graph).rstrip())
    return EXIT_OK if res.status == "SOLVED" else EXIT_FAIL


def cmd_selftest(args) -> int:
    opts = {"seed": args.seed}
    if args.tol is not None:
        opts["tol"] = args.tol
    if args.ghz_weight is not None:
        opts["ghz_weight"] = args.ghz_weight
    items = checks.run_checks(args.criteria or None, **opts)
    summary = checks.summarize(items)
    ok = all(summary.values())
    if args.json:
        _emit_json({"passed": ok, "criteria": {str(k): v for k, v in sorted(summary.items())},
                    "items": [it.to_json() for it in items]})
    else:
        for it in items:
            print(f"[{'PASS' if it.passed else 'FAIL'}] {it.criterion:>2} {it.name}: {it.detail}")
        print(f"{sum(summary.values())}/{len(summary)} criteria passed")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # shared flags are accepted both before and after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="emit one JSON document on stdout")
    common.add_argument("--seed", type=_seed, default=argparse.SUPPRESS, help="RNG seed (default 0)")
    common.add_argument("--tol", type=_positive_float, default=argparse.SUPPRESS,
                        help="tolerance override")

    p = _Parser(prog="boson-sculpting", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sch = sub.add_parser("schemes", help="built-in sculpting schemes").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    s = sch.add_parser("list", parents=[common])
    s.set_defaults(func=cmd_schemes_list)
    s = sch.add_parser("run", parents=[common])
    s.add_argument("name", choices=sorted(SCHEMES))
    s.add_argument("--N", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--alpha", type=_complex)
    s.add_argument("--beta", type=_complex)
    s.set_defaults(func=cmd_schemes_run)

    gr = sub.add_parser("graph", help="bigraph utilities").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, fn in (("check-epm", cmd_graph_check_epm), ("pm", cmd_graph_pm), ("to-op", cmd_graph_to_op),
                     ("dot", cmd_graph_dot)):
        s = gr.add_parser(name, parents=[common])
        s.add_argument("file")
        if name == "dot":
            s.add_argument("--directed", action="store_true")
        s.set_defaults(func=fn)

    st = sub.add_parser("state", help="logical state analysis").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    s = st.add_parser("classify", parents=[common])
    s.add_argument("file")
    s.set_defaults(func=cmd_state_classify)
    s = st.add_parser("fidelity", parents=[common])
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_state_fidelity)

    op = sub.add_parser("optics", help="optical circuits").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    s = op.add_parser("bell", parents=[common])
    s.set_defaults(func=cmd_optics_bell)

    s = sub.add_parser("search", parents=[common], help="find a sculpting operator for a target")
    s.add_argument("--target", required=True, help="target JSON file")
    s.add_argument("--ancillas", type=int, help="number of ancilla modes K")
    s.add_argument("--starts", type=int, default=DEFAULT_STARTS)
    s.add_argument("--max-candidates", type=int, default=4)
    s.add_argument("--retries", type=int, default=MAX_RETRIES)
    s.add_argument("--time-budget", type=float, default=30.0, help="seconds; <= 0 disables the budget")
    s.add_argument("--color-search", action="store_true")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("selftest", parents=[common], help="run every acceptance check")
    s.add_argument("--ghz-weight", type=float, help="replace the GHZ ring weight 1/sqrt2")
    s.add_argument("--criteria", type=int, nargs="*", choices=sorted(checks.CRITERIA))
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.json = getattr(args, "json", False)
        args.seed = getattr(args, "seed", 0)
        args.tol = getattr(args, "tol", None)
        if getattr(args, "starts", 1) < 1 or (getattr(args, "ancillas", None) or 0) < 0:
            raise UsageError("--starts must be >= 1 and --ancillas >= 0")
        return args.func(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SculptingError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
