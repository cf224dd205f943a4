"""Acceptance criteria 1 to 13, one test each, printing a PASS/FAIL line per criterion."""

import io
import itertools
import random
import re
from contextlib import contextmanager

import numpy as np
import pytest

from zipstream.analysis import is_productive, leftmost_cycles, solve_all, solve_vector
from zipstream.automata import (
    base_determiner,
    dfao_to_graph,
    example_mix_dfao,
    format_digits,
    generate,
    generate_mix,
    generate_prefix,
    graph_to_dfao,
    make_zero_invariant,
    repr_mix,
)
from zipstream.cli import main
from zipstream.core import parse_term, split_prefix
from zipstream.fractran import build_gadget, gadget_equiv_probe, program, run_output, to_zip_pi_spec
from zipstream.graphs import (
    ObsGraph,
    bisimilar,
    build_ngraph,
    equivalent,
    graph_of_spec,
    interpret_ngraph,
    interpret_ograph,
    kernel,
    label,
    minimize,
    ngraph_to_ograph,
    ngraph_to_spec,
)
from zipstream.pdl import characterize, evaluate, model_of_graph, root_state
from zipstream.semantics import eval_prefix
from zipstream.transform import flatten

from helpers import (
    ROOT,
    as_tuples,
    random_decreasing_program,
    random_dfao,
    random_flat_spec,
    rename_spec,
    spec,
)
from oracles import (
    MIX_LISTING,
    brute_kernel,
    dfao_value,
    fractran_output,
    fractran_steps_on_2,
    satisfies,
    solution_prefixes,
    thue_morse,
)


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(n: int):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}")
    return run


def _canonical(g: ObsGraph):
    """Nodes renumbered in breadth-first order from the root, successors in order."""
    order = {g.root: 0}
    queue = [g.root]
    for n in queue:
        for m in g.succ[n]:
            if m not in order:
                order[m] = len(order)
                queue.append(m)
    return sorted((order[n], g.out[n], tuple(order[m] for m in g.succ[n])) for n in order)


def _alpha_equal(a: dict, b: dict) -> bool:
    """Equation systems equal up to a bijective renaming of variables."""
    if len(a) != len(b):
        return False
    names = list(a)
    for perm in itertools.permutations(b):
        mapping = dict(zip(names, perm))
        renamed = {mapping[v]: parse_term(_rename_text(str(t), mapping)) for v, t in a.items()}
        if renamed == b:
            return True
    return False


def _rename_text(text: str, mapping: dict) -> str:
    # placeholders first so that swapped names do not collide
    tmp = {v: f"@{i}@" for i, v in enumerate(mapping)}
    text = re.sub(r"[A-Za-z_][A-Za-z0-9_']*", lambda m: tmp.get(m.group(0), m.group(0)), text)
    for v, t in tmp.items():
        text = text.replace(t, mapping[v])
    return text


def test_criterion_1_thue_morse_prefix(criterion, monkeypatch):
    with criterion(1):
        monkeypatch.chdir(ROOT)
        buf = io.StringIO()
        assert main(["eval", "fixtures/morse.zs", "-n", "16"], out=buf) == 0
        assert buf.getvalue() == "0110100110010110\n"
        assert buf.getvalue().strip() == "".join(thue_morse(n) for n in range(16))


def test_criterion_2_observation_graph(criterion):
    with criterion(2):
        g = build_ngraph(flatten(spec("morse.zs")))
        assert len(g.nodes) == 3
        # root (0) feeds the two loop states: 1 shows 0 and keeps its order, 2 shows 1 and swaps
        assert _canonical(g) == [(0, "0", (1, 2)), (1, "0", (1, 2)), (2, "1", (2, 1))]
        assert len(minimize(g).nodes) == 2


def test_criterion_3_equivalence(criterion):
    with criterion(3):
        report = equivalent(spec("morse.zs"), spec("morse2.zs"))
        assert report.equivalent
        (_, _, w), = report.matches
        rel = {(label(a), label(b)) for a, b in w.relation}
        dashed = {("M", "N"), ("0:X", "N"), ("0:X", "0:1:U"), ("1:Y", "1:W"), ("1:Y", "1:V")}
        assert dashed <= rel


def test_criterion_4_unproductive_solving(criterion):
    with criterion(4):
        s = spec("unprod.zs")
        assert not is_productive(s)
        sols = solve_all(s)
        assert len(sols) == 2
        displayed = [
            {"X": "zip(1:X, 0:Y)", "Y": "zip(X, Z)", "Z": "zip(0:0:Z, Y)"},
            {"X": "zip(1:X, 1:Y)", "Y": "zip(X, Z)", "Z": "zip(0:1:Z, Y)"},
        ]
        for sol, shown in zip(sols, displayed):
            assert _alpha_equal(sol.equations, {v: parse_term(t) for v, t in shown.items()})
            assert is_productive(sol)
        reps = leftmost_cycles(s).representatives
        for vector in itertools.product(s.alphabet, repeat=len(reps)):
            streams = {v: eval_prefix(solve_vector(s.replace(s.equations, root=v), reps, vector), 100)
                       for v in s.equations}
            assert satisfies(s, streams, 100)
        # the two solutions are exactly the solution set
        assert {tuple(eval_prefix(t, 14)) for t in sols} == solution_prefixes(s, 14)


def test_criterion_5_size_bound(criterion):
    with criterion(5):
        for name in ["morse.zs", "morse2.zs", "alt.zs", "const.zs"]:
            s = flatten(spec(name))
            assert s.dialect.k == 2
            g = build_ngraph(s)
            m = max(len(split_prefix(t)[0]) for t in s.equations.values())
            n = len(s.equations)
            assert len(g.nodes) <= 2 * (len(s.alphabet) + 1) * m * n + 4 * m, name


def test_criterion_6_mix_numeration(criterion):
    with criterion(6):
        A = example_mix_dfao()
        P = base_determiner(A)
        assert format_digits(repr_mix(5, P)) == "21"
        assert format_digits(repr_mix(23, P)) == "1021"
        assert generate_prefix(A, 28) == MIX_LISTING
        assert [generate_mix(A, A.initial, n) for n in range(28)] == MIX_LISTING
        assert eval_prefix(spec("mix.zs"), 28) == MIX_LISTING


def test_criterion_7_automaton_round_trips(criterion):
    with criterion(7):
        rng = random.Random(7)
        for _ in range(25):
            A = random_dfao(rng, zero_invariant=True, max_states=8, max_k=4)
            B = graph_to_dfao(build_ngraph(ngraph_to_spec(dfao_to_graph(A))))
            for n in range(256):
                assert generate(B, B.initial, n) == dfao_value(A.delta, A.out, A.initial, A.k, n)


def test_criterion_8_n_to_o(criterion):
    with criterion(8):
        rng = random.Random(7)
        for _ in range(25):
            g = dfao_to_graph(random_dfao(rng, zero_invariant=True, max_states=8, max_k=4))
            o = ngraph_to_ograph(g)
            assert [interpret_ograph(o, n) for n in range(256)] == [interpret_ngraph(g, n) for n in range(256)]


def test_criterion_9_make_zero_invariant(criterion):
    with criterion(9):
        rng = random.Random(9)
        seen = 0
        while seen < 25:
            A = random_dfao(rng, zero_invariant=False, max_states=8, max_k=4)
            if all(A.out[q] == A.out[A.delta[(q, 0)]] for q in A.reachable()):
                continue
            seen += 1
            B = make_zero_invariant(A)
            for q in B.reachable():
                assert B.out[q] == B.out[B.delta[(q, 0)]]
            for n in range(256):
                assert generate(B, B.initial, n) == dfao_value(A.delta, A.out, A.initial, A.k, n)


def test_criterion_10_kernel(criterion):
    with criterion(10):
        assert len(kernel(build_ngraph(spec("morse.zs")))) == 2 == brute_kernel(thue_morse, 2)
        assert len(kernel(build_ngraph(spec("const.zs")))) == 1 == brute_kernel(lambda n: "0", 2)


def test_criterion_11_pdl(criterion):
    phi = "0 & ~1 & <even>0 & [even]0 & <odd>1 & [odd]1"
    psi = "~0 & 1 & <even>1 & [even]1 & <odd>0 & [odd]0"
    phi_m = f"({phi}) & [(even + odd)*](({phi}) | ({psi}))"
    with criterion(11):
        fig = build_ngraph(spec("morse.zs"))
        m = model_of_graph(fig)
        assert root_state(fig) in evaluate(m, phi_m)
        char = characterize(m, "M")
        four = build_ngraph(spec("morse2.zs"))
        assert len(four.nodes) == 4
        assert root_state(four) in evaluate(model_of_graph(four), char)
        altg = graph_of_spec(spec("alt.zs"))
        assert root_state(altg) not in evaluate(model_of_graph(altg, alphabet=["0", "1"]), char)
        fixtures = {n: graph_of_spec(spec(n)) for n in ["morse.zs", "morse2.zs", "alt.zs", "const.zs"]}
        for a, g in fixtures.items():
            f = characterize(model_of_graph(g, alphabet=["0", "1"]), root_state(g))
            for b, h in fixtures.items():
                holds = root_state(h) in evaluate(model_of_graph(h, alphabet=["0", "1"]), f)
                assert holds == bool(bisimilar(g, h)), (a, b)


def test_criterion_12_fractran(criterion):
    with criterion(12):
        half = program([(1, 2)])
        g = build_gadget(half)
        assert (g.c, g.z2, g.z1) == (3, 5, 7)
        # standalone check of the index: (1/2) halts on 2 after one step
        verdict, steps = fractran_steps_on_2([(1, 2, None)])
        assert (verdict, steps) == ("halts", 1)
        index = g.z1 * g.z2 ** (steps + 1) - 1
        assert index == 174
        assert run_output(g.f0, index + 1) != run_output(g.f1, index + 1)
        r = gadget_equiv_probe(half, 200)
        assert not r.agree and r.index == 174
        assert gadget_equiv_probe(program([(1, 1)]), 200).agree
        rng = random.Random(12)
        for _ in range(20):
            F = random_decreasing_program(rng)
            got = eval_prefix(to_zip_pi_spec(F), 64)
            assert got == [run_output(F, n + 1) for n in range(64)]
            assert got == [fractran_output(as_tuples(F), n + 1) for n in range(64)]


def test_criterion_13_quadratic_work(criterion):
    with criterion(13):
        sizes = [10, 20, 40, 80]
        work = []
        for n in sizes:
            total = 0
            for seed in range(5):
                rng = random.Random(1000 * n + seed)
                s = random_flat_spec(rng, n)
                report = equivalent(s, rename_spec(s, rng))
                assert report.equivalent
                total += report.work
            work.append(total)
        slope = np.polyfit(np.log(sizes), np.log(work), 1)[0]
        print(f"work {dict(zip(sizes, work))}, log-log slope {slope:.2f}")
        assert slope <= 2.3
