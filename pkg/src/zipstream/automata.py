"""Deterministic automata with output, k-ary and state-dependent numeration."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CobasisMismatch, NotZeroInvariant
from .graphs import ObsGraph, label

State = str


@dataclass(frozen=True)
class MixDfao:
    """Automaton whose state q reads digits 0 .. beta[q]-1.

    delta maps (state, digit) to a state; out maps states to output symbols.
    A base determiner is a MixDfao whose output is its own beta.
    """

    states: tuple[State, ...]
    beta: Mapping[State, int]
    delta: Mapping[tuple[State, int], State]
    initial: State
    out: Mapping[State, object]

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} is not a state")
        for q in self.states:
            b = self.beta[q]
            if b < 2:
                raise ValueError(f"state {q} has base {b} < 2")
            for d in range(b):
                if self.delta.get((q, d)) not in self.states:
                    raise ValueError(f"missing or bad transition from {q} on {d}")
        if len(self.delta) != sum(self.beta[q] for q in self.states):
            raise ValueError("transitions defined outside the state's digit range")

    def base(self, q: State) -> int:
        return self.beta[q]

    def run(self, q: State, digits: Sequence[int]) -> State:
        """Read an MSB-first digit word starting with its least significant digit."""
        for d in reversed(digits):
            q = self.delta[(q, d)]
        return q

    def reachable(self) -> list[State]:
        order = [self.initial]
        for q in order:
            for d in range(self.base(q)):
                r = self.delta[(q, d)]
                if r not in order:
                    order.append(r)
        return order


@dataclass(frozen=True)
class Dfao:
    """k-DFAO: every state reads digits 0 .. k-1."""

    states: tuple[State, ...]
    k: int
    delta: Mapping[tuple[State, int], State]
    initial: State
    out: Mapping[State, object]

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} is not a state")
        for q in self.states:
            for d in range(self.k):
                if self.delta.get((q, d)) not in self.states:
                    raise ValueError(f"missing or bad transition from {q} on {d}")

    @property
    def beta(self) -> dict[State, int]:
        return {q: self.k for q in self.states}

    def base(self, q: State) -> int:
        return self.k

    run = MixDfao.run
    reachable = MixDfao.reachable


Automaton = Dfao | MixDfao


# ---------------------------------------------------------------- numeration


def digits_base_k(n: int, k: int) -> tuple[int, ...]:
    """Base-k digits, most significant first, without leading zeros; 0 gives ()."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < 0:
        raise ValueError("n must be a natural number")
    out = []
    while n:
        n, d = divmod(n, k)
        out.append(d)
    return tuple(reversed(out))


def repr_mix(n: int, P: Automaton, q: State | None = None) -> tuple[int, ...]:
    """Digits of n in the numeration fixed by P, most significant first."""
    if n < 0:
        raise ValueError("n must be a natural number")
    q = P.initial if q is None else q
    out = []
    while n:
        n, d = divmod(n, P.base(q))
        out.append(d)
        q = P.delta[(q, d)]
    return tuple(reversed(out))


def value_mix(digits: Sequence[int], P: Automaton, q: State | None = None) -> int:
    """Inverse of repr_mix."""
    q = P.initial if q is None else q
    value, weight = 0, 1
    for d in reversed(digits):
        b = P.base(q)
        if not 0 <= d < b:
            raise ValueError(f"digit {d} out of range for base {b}")
        value += d * weight
        weight *= b
        q = P.delta[(q, d)]
    return value


def base_determiner(A: Automaton) -> MixDfao:
    beta = A.beta
    return MixDfao(A.states, beta, A.delta, A.initial, dict(beta))


def format_digits(digits: Sequence[int]) -> str:
    if any(d > 9 for d in digits):
        return " ".join(map(str, digits))
    return "".join(map(str, digits))


# ---------------------------------------------------------------- generation


def generate(A: Dfao, q: State, n: int):
    return A.out[A.run(q, digits_base_k(n, A.k))]


def generate_mix(A: Automaton, q: State, n: int):
    return A.out[A.run(q, repr_mix(n, A, q))]


def generate_prefix(A: Automaton, n: int) -> list:
    gen = generate if isinstance(A, Dfao) else generate_mix
    return [gen(A, A.initial, i) for i in range(n)]


# ---------------------------------------------------------------- leading zeros


def zero_violations(A: Automaton) -> list[State]:
    return [q for q in A.reachable() if A.out[A.delta[(q, 0)]] != A.out[q]]


def is_zero_invariant(A: Automaton) -> bool:
    return not zero_violations(A)


def make_zero_invariant(A: Automaton) -> Automaton:
    """Equivalent automaton whose 0-edges preserve the output.

    State (q, c) remembers that the digits read so far may be leading zeros
    of a number whose value is decided at an earlier state with output c.
    An override equal to the plain output of q is the plain state itself.
    """

    def name(q: State, c) -> State:
        return q if c is None else f"{q}~{c}"

    def make(q: State, c) -> tuple[State, object]:
        return (q, None) if c is None or c == A.out[q] else (q, c)

    start = (A.initial, None)
    order = [start]
    delta: dict[tuple[State, int], State] = {}
    out: dict[State, object] = {}
    beta: dict[State, int] = {}
    for q, c in order:
        me = name(q, c)
        shown = A.out[q] if c is None else c
        out[me] = shown
        beta[me] = A.base(q)
        for d in range(A.base(q)):
            nxt = make(A.delta[(q, d)], shown if d == 0 else None)
            if nxt not in order:
                order.append(nxt)
            delta[(me, d)] = name(*nxt)
    states = tuple(name(q, c) for q, c in order)
    if isinstance(A, Dfao):
        return Dfao(states, A.k, delta, name(*start), out)
    return MixDfao(states, beta, delta, name(*start), out)


# ---------------------------------------------------------------- graphs


def dfao_to_graph(A: Automaton) -> ObsGraph:
    bad = zero_violations(A)
    if bad:
        q = bad[0]
        raise NotZeroInvariant(q, f"state {q} outputs {A.out[q]} but its 0-successor "
                               f"outputs {A.out[A.delta[(q, 0)]]}")
    nodes = A.reachable()
    out = {q: str(A.out[q]) for q in nodes}
    succ = {q: tuple(A.delta[(q, d)] for d in range(A.base(q))) for q in nodes}
    if isinstance(A, Dfao):
        return ObsGraph(tuple(nodes), A.initial, out, succ, "N", A.k)
    return ObsGraph(tuple(nodes), A.initial, out, succ, "Mix", None)


def graph_to_dfao(g: ObsGraph) -> Automaton:
    if g.cobasis == "O":
        raise CobasisMismatch("only N_k and mixed graphs read as automata")
    names = {n: label(n) for n in g.nodes}
    states = tuple(names[n] for n in g.nodes)
    delta = {(names[n], d): names[m] for n in g.nodes for d, m in enumerate(g.succ[n])}
    out = {names[n]: g.out[n] for n in g.nodes}
    if g.cobasis == "N":
        return Dfao(states, g.k, delta, names[g.root], out)
    beta = {names[n]: g.arity(n) for n in g.nodes}
    return MixDfao(states, beta, delta, names[g.root], out)


def zip_for_mix_demo(A: Dfao, B: Dfao) -> MixDfao:
    """Mix automaton for the interleaving of the streams of A and B."""
    states = ("s0",) + tuple(f"A.{q}" for q in A.states) + tuple(f"B.{q}" for q in B.states)
    beta = {"s0": 2, **{f"A.{q}": A.k for q in A.states}, **{f"B.{q}": B.k for q in B.states}}
    delta = {("s0", 0): f"A.{A.initial}", ("s0", 1): f"B.{B.initial}"}
    delta.update({(f"A.{q}", d): f"A.{r}" for (q, d), r in A.delta.items()})
    delta.update({(f"B.{q}", d): f"B.{r}" for (q, d), r in B.delta.items()})
    out = {"s0": A.out[A.initial], **{f"A.{q}": A.out[q] for q in A.states},
           **{f"B.{q}": B.out[q] for q in B.states}}
    return MixDfao(states, beta, delta, "s0", out)


# ---------------------------------------------------------------- fixtures


def thue_morse_dfao() -> Dfao:
    delta = {("q0", 0): "q0", ("q0", 1): "q1", ("q1", 0): "q1", ("q1", 1): "q0"}
    return Dfao(("q0", "q1"), 2, delta, "q0", {"q0": "0", "q1": "1"})


def alt_dfao(k: int = 3) -> Dfao:
    """0101... read in an odd base k: the parity of n is the parity of its digit sum."""
    if k % 2 == 0:
        raise ValueError("the digit-sum construction needs an odd base")
    delta = {}
    for q, other in (("e", "o"), ("o", "e")):
        for d in range(k):
            delta[(q, d)] = q if d % 2 == 0 else other
    return Dfao(("e", "o"), k, delta, "e", {"e": "0", "o": "1"})


def constant_dfao(symbol: str = "0", k: int = 2) -> Dfao:
    return Dfao(("c",), k, {("c", d): "c" for d in range(k)}, "c", {"c": symbol})


def example_mix_dfao() -> MixDfao:
    """Three states with bases 2, 3, 2 and outputs a, b, b."""
    delta = {("q0", 0): "q0", ("q0", 1): "q1",
             ("q1", 0): "q2", ("q1", 1): "q0", ("q1", 2): "q1",
             ("q2", 0): "q1", ("q2", 1): "q0"}
    return MixDfao(("q0", "q1", "q2"), {"q0": 2, "q1": 3, "q2": 2}, delta, "q0",
                   {"q0": "a", "q1": "b", "q2": "b"})


# ---------------------------------------------------------------- JSON


def to_json(A: Automaton) -> str:
    states = []
    for q in A.states:
        entry = {"id": q, "out": A.out[q]}
        if isinstance(A, MixDfao):
            entry["beta"] = A.base(q)
        entry["edges"] = [A.delta[(q, d)] for d in range(A.base(q))]
        states.append(entry)
    data: dict = {"kind": "dfao" if isinstance(A, Dfao) else "mixdfao"}
    if isinstance(A, Dfao):
        data["k"] = A.k
    data["states"] = states
    data["initial"] = A.initial
    return json.dumps(data, indent=2) + "\n"


def from_json(text: str) -> Automaton:
    data = json.loads(text)
    states = tuple(str(s["id"]) for s in data["states"])
    out = {str(s["id"]): s["out"] for s in data["states"]}
    delta = {(str(s["id"]), d): str(r) for s in data["states"] for d, r in enumerate(s["edges"])}
    if data["kind"] == "dfao":
        k = data.get("k") or len(data["states"][0]["edges"])
        return Dfao(states, k, delta, str(data["initial"]), out)
    if data["kind"] == "mixdfao":
        beta = {str(s["id"]): s.get("beta", len(s["edges"])) for s in data["states"]}
        return MixDfao(states, beta, delta, str(data["initial"]), out)
    raise ValueError(f"unknown automaton kind {data['kind']!r}")
