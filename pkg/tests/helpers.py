"""Random generators and fixture loaders shared by the tests."""

from __future__ import annotations

import random
from pathlib import Path

from zipstream.automata import Dfao
from zipstream.core import Cons, Var, Zip, make_spec, parse_spec
from zipstream.fractran import Frac, FractranProgram

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


def fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


def spec(name: str):
    return parse_spec(fixture(name))


def random_dfao(rng: random.Random, zero_invariant: bool, max_states: int = 8,
                max_k: int = 4, alphabet: str = "01") -> Dfao:
    n = rng.randint(1, max_states)
    k = rng.randint(2, max_k)
    states = tuple(f"s{i}" for i in range(n))
    out = {q: rng.choice(alphabet) for q in states}
    delta = {}
    for q in states:
        for d in range(k):
            if d == 0 and zero_invariant:
                same = [r for r in states if out[r] == out[q]]
                delta[(q, d)] = rng.choice(same)
            else:
                delta[(q, d)] = rng.choice(states)
    if not zero_invariant:
        # force at least one violation on the initial state when possible
        other = [r for r in states if out[r] != out[states[0]]]
        if other:
            delta[(states[0], 0)] = rng.choice(other)
    return Dfao(states, k, delta, states[0], out)


def random_flat_spec(rng: random.Random, n: int, k: int = 2, max_prefix: int = 2,
                     alphabet: str = "01"):
    """Flat zip-k spec where every equation carries at least one guard, so it is productive."""
    names = [f"V{i}" for i in range(n)]
    eqs = {}
    for name in names:
        prefix = [rng.choice(alphabet) for _ in range(rng.randint(1, max_prefix))]
        t = Zip(Var(rng.choice(names)) for _ in range(k))
        for a in reversed(prefix):
            t = Cons(a, t)
        eqs[name] = t
    # make every variable reachable from the root by threading a chain
    for i in range(n - 1):
        prefix, zipped = _split(eqs[names[i]])
        args = list(zipped.args)
        args[rng.randrange(k)] = Var(names[i + 1])
        t = Zip(args)
        for a in reversed(prefix):
            t = Cons(a, t)
        eqs[names[i]] = t
    return make_spec(eqs, root=names[0], alphabet=list(alphabet))


def _split(t):
    prefix = []
    while isinstance(t, Cons):
        prefix.append(t.head)
        t = t.tail
    return prefix, t


def rename_spec(s, rng: random.Random):
    """Same spec with shuffled, renamed variables."""
    names = list(s.equations)
    fresh = [f"W{i}" for i in range(len(names))]
    rng.shuffle(fresh)
    mapping = dict(zip(names, fresh))
    from zipstream.core import rename

    eqs = {mapping[v]: rename(t, mapping) for v, t in s.equations.items()}
    order = sorted(eqs, key=lambda v: int(v[1:]))
    return make_spec({v: eqs[v] for v in order}, root=mapping[s.root], alphabet=s.alphabet)


def random_decreasing_program(rng: random.Random, max_fracs: int = 4) -> FractranProgram:
    """Decreasing program with outputs; always ends with an output fraction 1/1 half the time."""
    fracs = []
    for _ in range(rng.randint(1, max_fracs)):
        q = rng.randint(2, 12)
        if rng.random() < 0.4:
            fracs.append(Frac(rng.randint(1, 12), q, rng.choice("abc")))
        else:
            fracs.append(Frac(rng.randint(1, q - 1), q))
    if rng.random() < 0.5:
        fracs.append(Frac(1, 1, rng.choice("abc")))
    return FractranProgram(tuple(fracs))


def as_tuples(F: FractranProgram) -> list[tuple]:
    return [(f.p, f.q, f.out) for f in F.fractions]


def random_mix_dfao(rng: random.Random, max_states: int = 6, max_base: int = 4,
                    alphabet: str = "ab"):
    from zipstream.automata import MixDfao

    n = rng.randint(1, max_states)
    states = tuple(f"m{i}" for i in range(n))
    beta = {q: rng.randint(2, max_base) for q in states}
    delta = {(q, d): rng.choice(states) for q in states for d in range(beta[q])}
    out = {q: rng.choice(alphabet) for q in states}
    return MixDfao(states, beta, delta, states[0], out)
