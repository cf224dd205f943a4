"""Command-line front end.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage error,
3 analysis error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import automata, graphs, pdl
from .analysis import is_productive, leftmost_cycles, solve_all
from .core import ZipSpec, parse_spec, print_spec, validate
from .errors import ZipStreamError
from .fractran import build_gadget, gadget_equiv_probe, parse_fractran, run_output, to_zip_pi_spec
from .semantics import DEFAULT_BUDGET, RewriteBudget, eval_prefix, project_prefix
from .transform import flatten, zip_guard

OK, NEGATIVE, USAGE, FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from e


def _spec(path: str) -> ZipSpec:
    return parse_spec(_read(path))


def _join(symbols: Sequence[str]) -> str:
    if all(len(s) == 1 for s in symbols):
        return "".join(symbols)
    return " ".join(symbols)


def _budget(args) -> RewriteBudget:
    return RewriteBudget(args.budget)


def _graph_input(path: str, args) -> graphs.ObsGraph:
    """A graph JSON file, or a specification whose observation graph is built."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        return graphs.from_json(text)
    return graphs.graph_of_spec(parse_spec(text), _budget(args))


def _emit_graph(g: graphs.ObsGraph, fmt: str) -> str:
    return graphs.to_dot(g) if fmt == "dot" else graphs.to_json(g)


# ---------------------------------------------------------------- spec commands


def cmd_check(args, out) -> int:
    s = _spec(args.file)
    for line in validate(s).lines():
        print(f"warning: {line}", file=sys.stderr)
    if s.dialect.kind == "zip-pi":
        ok = is_productive(s, budget=args.budget)
        print(f"dialect {s.dialect}: bounded evaluation {'succeeded' if ok else 'failed'}", file=out)
        print("productive" if ok else "not productive", file=out)
        return OK if ok else NEGATIVE
    report = leftmost_cycles(s)
    for c in report.unguarded:
        print("unguarded leftmost cycle: " + " -> ".join(c.variables), file=out)
    ok = not report.unguarded
    print("productive" if ok else "not productive", file=out)
    return OK if ok else NEGATIVE


def cmd_solve(args, out) -> int:
    s = _spec(args.file)
    sols = solve_all(s)
    for i, sol in enumerate(sols, 1):
        if i > 1:
            print(file=out)
        print(f"# solution {i} of {len(sols)}", file=out)
        out.write(print_spec(sol))
    return OK


def cmd_eval(args, out) -> int:
    s = _spec(args.file)
    if args.proj:
        i, k = args.proj
        if k < 1 or not 0 <= i:
            raise UsageError("--proj needs 0 <= i and k >= 1")
        syms = project_prefix(s, i, k, args.n, _budget(args))
    else:
        syms = eval_prefix(s, args.n, _budget(args))
    print(_join(syms), file=out)
    return OK


def cmd_flatten(args, out) -> int:
    out.write(print_spec(flatten(_spec(args.file))))
    return OK


def cmd_graph(args, out) -> int:
    s = _spec(args.file)
    g = graphs.build_ngraph(zip_guard(s), _budget(args))
    if args.cobasis == "mix" and g.cobasis != "Mix":
        g = graphs.ObsGraph(g.nodes, g.root, g.out, g.succ, "Mix", None)
    if args.cobasis == "n" and g.cobasis != "N":
        raise UsageError("the specification mixes zip arities; use --cobasis mix")
    if args.cobasis == "o":
        if g.cobasis != "N":
            raise UsageError("O-graphs need a uniform arity")
        g = graphs.ngraph_to_ograph(graphs.minimize(g) if args.minimize else g)
    if args.minimize:
        g = graphs.minimize(g)
    out.write(_emit_graph(g, args.format))
    return OK


def cmd_equiv(args, out) -> int:
    s1, s2 = _spec(args.file1), _spec(args.file2)
    if args.prefix is not None:
        cmp = graphs.prefix_compare(s1, s2, args.prefix, _budget(args))
        if cmp:
            print(f"equal up to {args.prefix}", file=out)
            return OK
        i = cmp.index
        print(f"differ at index {i}: {cmp.left[i]} vs {cmp.right[i]}", file=out)
        return NEGATIVE
    report = graphs.equivalent(s1, s2)
    if report:
        print("equivalent", file=out)
        return OK
    print("not equivalent", file=out)
    n1, n2 = report.solutions
    print(f"solutions: {n1} vs {n2}", file=out)
    for w in report.witnesses:
        if w.index is not None:
            print(f"witness: index {w.index}: {w.symbols[0]} vs {w.symbols[1]}", file=out)
        elif w.reason:
            print(f"witness: {w.reason}", file=out)
    return NEGATIVE


# ---------------------------------------------------------------- automata


def cmd_dfao(args, out) -> int:
    text = _read(args.file)
    if args.action == "from-graph":
        out.write(automata.to_json(automata.graph_to_dfao(graphs.from_json(text))))
    elif args.action == "to-graph":
        out.write(graphs.to_json(automata.dfao_to_graph(automata.from_json(text))))
    else:
        out.write(automata.to_json(automata.make_zero_invariant(automata.from_json(text))))
    return OK


def cmd_mix(args, out) -> int:
    if args.action == "repr":
        if args.determiner is None:
            raise UsageError("mix repr needs --determiner FILE")
        if args.value is None or args.value < 0:
            raise UsageError("mix repr needs a natural number N")
        P = automata.from_json(_read(args.determiner))
        print(automata.format_digits(automata.repr_mix(args.value, P)), file=out)
        return OK
    if args.file is None or args.n is None:
        raise UsageError("mix gen needs FILE and -n N")
    A = automata.from_json(_read(args.file))
    print(_join([str(x) for x in automata.generate_prefix(A, args.n)]), file=out)
    return OK


# ---------------------------------------------------------------- pdl


def cmd_pdl(args, out) -> int:
    g = _graph_input(args.graph, args)
    model = pdl.model_of_graph(g)
    root = pdl.root_state(g)
    if args.action == "eval":
        if args.formula is None:
            raise UsageError("pdl eval needs -f FORMULA")
        sat = pdl.evaluate(model, pdl.parse_formula(args.formula))
        for st in model.states:
            if st in sat:
                print(st, file=out)
        holds = root in sat
        print(f"root {root}: {'true' if holds else 'false'}", file=out)
        return OK if holds else NEGATIVE
    state = args.state if args.state is not None else root
    if state not in model.states:
        raise UsageError(f"unknown state {state!r}; states are {', '.join(model.states)}")
    print(pdl.characterize(model, state), file=out)
    return OK


# ---------------------------------------------------------------- fractran


def cmd_fractran(args, out) -> int:
    F = parse_fractran(_read(args.file))
    if args.action == "run":
        if args.n is None or args.n < 1:
            raise UsageError("fractran run needs -n N with N >= 1")
        print(run_output(F, args.n, args.max_steps), file=out)
    elif args.action == "gadget":
        g = build_gadget(F)
        print(f"primes {' '.join(map(str, g.primes))}", file=out)
        print(f"c {g.c}", file=out)
        print(f"z2 {g.z2}", file=out)
        print(f"z1 {g.z1}", file=out)
        print("# F0", file=out)
        out.write(str(g.f0))
        print("# F1", file=out)
        out.write(str(g.f1))
    elif args.action == "to-spec":
        out.write(print_spec(to_zip_pi_spec(F)))
    else:
        if args.n is None:
            raise UsageError("fractran probe needs -n N")
        r = gadget_equiv_probe(F, args.n, _budget(args))
        if r.agree:
            print(f"agree up to {args.n}", file=out)
            return OK
        i = r.index
        left, right = r.comparison.left[i], r.comparison.right[i]
        print(f"differ at index {i}: {left} vs {right} (the program halts on 2)", file=out)
        return NEGATIVE
    return OK


# ---------------------------------------------------------------- parser


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the flags without defaults so they do not reset a value
    # given before the subcommand name
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--budget", type=int,
                       default=argparse.SUPPRESS if suppress else DEFAULT_BUDGET,
                       help=f"rewrite step budget (default {DEFAULT_BUDGET})")
    flags.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else None,
                       help="seed for randomised helpers (reproducibility)")
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="zipstream", parents=[_global_flags(suppress=False)],
                                description="Streams defined by zip equations.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=fn)
        return sp

    sp = add("check", cmd_check, "productivity and leftmost cycles")
    sp.add_argument("file")
    sp = add("solve", cmd_solve, "enumerate the solutions of a specification")
    sp.add_argument("file")
    sp = add("eval", cmd_eval, "print a prefix of the root stream")
    sp.add_argument("file")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--proj", type=int, nargs=2, metavar=("I", "K"))
    sp = add("flatten", cmd_flatten, "equivalent flat specification")
    sp.add_argument("file")
    sp = add("graph", cmd_graph, "observation graph")
    sp.add_argument("file")
    sp.add_argument("--cobasis", choices=["n", "o", "mix"], default=None)
    sp.add_argument("--minimize", action="store_true")
    sp.add_argument("--format", choices=["dot", "json"], default="json")
    sp = add("equiv", cmd_equiv, "decide equivalence of two zip-k specifications")
    sp.add_argument("file1")
    sp.add_argument("file2")
    sp.add_argument("--prefix", type=int, default=None,
                    help="only compare the first N elements")
    sp = add("dfao", cmd_dfao, "automaton conversions")
    sp.add_argument("action", choices=["from-graph", "to-graph", "zero-invariant"])
    sp.add_argument("file")
    sp = add("mix", cmd_mix, "state-dependent numeration")
    sp.add_argument("action", choices=["repr", "gen"])
    sp.add_argument("arg", help="N for repr, FILE for gen")
    sp.add_argument("--determiner", default=None)
    sp.add_argument("-n", type=int, default=None)
    sp = add("pdl", cmd_pdl, "dynamic logic over observation graphs")
    sp.add_argument("action", choices=["eval", "characterize"])
    sp.add_argument("graph", help="graph JSON or specification file")
    sp.add_argument("-f", "--formula", default=None)
    sp.add_argument("-s", "--state", default=None)
    sp = add("fractran", cmd_fractran, "Fractran programs and the halting gadget")
    sp.add_argument("action", choices=["run", "gadget", "to-spec", "probe"])
    sp.add_argument("file")
    sp.add_argument("-n", type=int, default=None)
    sp.add_argument("--max-steps", type=int, default=1_000_000)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.seed is not None:
        random.seed(args.seed)
    if args.command == "mix":
        if args.action == "repr":
            try:
                args.value = int(args.arg)
            except ValueError:
                print("error: mix repr needs an integer N", file=sys.stderr)
                return USAGE
        else:
            args.value = None
            args.file = args.arg
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except ZipStreamError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return FAILURE
    except (ValueError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
