"""Leftmost cycles, productivity, evolving and solution enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import Cons, Proj, Term, Var, Zip, ZipSpec, fresh_name, make_spec, substitute
from .errors import (
    BudgetExhausted,
    InternalNonTermination,
    NoRedex,
    PiDialectUnsupported,
    RootHoistForbidden,
)
from .semantics import DEFAULT_BUDGET, eval_prefix


@dataclass(frozen=True)
class StepEdge:
    source: Term
    target: Term
    kind: str  # "equation", "guard" or "zip-arg(i)"


@dataclass
class Cycle:
    variables: list[str]
    terms: list[Term]
    edges: list[StepEdge]
    guarded: bool


@dataclass
class CycleReport:
    cycles: list[Cycle] = field(default_factory=list)
    representatives: list[str] = field(default_factory=list)

    @property
    def unguarded(self) -> list[Cycle]:
        return [c for c in self.cycles if not c.guarded]


def left_path(s: ZipSpec, name: str) -> tuple[list[Term], list[StepEdge], str]:
    """Follow left-steps from a variable to the next variable occurrence."""
    terms: list[Term] = [Var(name)]
    edges: list[StepEdge] = []
    t = s.equations[name]
    edges.append(StepEdge(Var(name), t, "equation"))
    while True:
        terms.append(t)
        if isinstance(t, Var):
            return terms, edges, t.name
        if isinstance(t, Cons):
            edges.append(StepEdge(t, t.tail, "guard"))
            t = t.tail
        elif isinstance(t, Zip):
            edges.append(StepEdge(t, t.args[0], "zip-arg(0)"))
            t = t.args[0]
        else:
            raise PiDialectUnsupported("left-steps are undefined for proj terms")


def leftmost_cycles(s: ZipSpec) -> CycleReport:
    """Every variable has exactly one left-successor variable, so the left-step
    relation on variables is a functional graph and each of its components
    carries exactly one cycle."""
    if s.dialect.kind == "zip-pi":
        raise PiDialectUnsupported("guardedness analysis does not cover proj terms")
    succ: dict[str, tuple[str, list[Term], list[StepEdge]]] = {}
    for name in s.equations:
        terms, edges, nxt = left_path(s, name)
        succ[name] = (nxt, terms, edges)
    report = CycleReport()
    done: set[str] = set()
    for start in s.equations:
        path: list[str] = []
        pos: dict[str, int] = {}
        v = start
        while v not in done and v not in pos:
            pos[v] = len(path)
            path.append(v)
            v = succ[v][0]
        if v in pos:
            cyc_vars = path[pos[v]:]
            terms: list[Term] = []
            edges: list[StepEdge] = []
            for u in cyc_vars:
                _, ts, es = succ[u]
                terms.extend(ts[:-1])
                edges.extend(es)
            terms.append(Var(cyc_vars[0]))
            guarded = any(e.kind == "guard" for e in edges)
            report.cycles.append(Cycle(cyc_vars + [cyc_vars[0]], terms, edges, guarded))
            if not guarded:
                order = list(s.equations)
                report.representatives.append(min(cyc_vars, key=order.index))
        done.update(path)
    return report


def is_productive(s: ZipSpec, witness_length: int = 64,
                  budget: int = DEFAULT_BUDGET) -> bool:
    """Guardedness of every leftmost cycle.  For zip-pi specifications this is
    only a semi-decision: a bounded evaluation of the root."""
    if s.dialect.kind == "zip-pi":
        try:
            eval_prefix(s, witness_length, budget)
            return True
        except BudgetExhausted:
            return False
    return all(c.guarded for c in leftmost_cycles(s).cycles)


# ---------------------------------------------------------------- evolving


def hoist(s: ZipSpec, name: str) -> ZipSpec:
    """X = a:t becomes X = t, and every right-hand side occurrence of X becomes a:X."""
    if name == s.root:
        raise RootHoistForbidden("the root cannot be hoisted")
    rhs = s.equations[name]
    if not isinstance(rhs, Cons):
        raise NoRedex(f"{name} is not of the form a:t")
    guarded = Cons(rhs.head, Var(name))
    eqs = {}
    for v, t in s.equations.items():
        body = rhs.tail if v == name else t
        eqs[v] = substitute(body, {name: guarded})
    return make_spec(eqs, root=s.root, alphabet=s.alphabet)


def _zip_contract(t: Term) -> Term | None:
    """Contract the first zip redex in pre-order, or None."""
    if isinstance(t, Zip):
        if isinstance(t.args[0], Cons):
            first = t.args[0]
            return Cons(first.head, Zip(t.args[1:] + (first.tail,)))
        for idx, a in enumerate(t.args):
            r = _zip_contract(a)
            if r is not None:
                return Zip(t.args[:idx] + (r,) + t.args[idx + 1:])
        return None
    if isinstance(t, Cons):
        r = _zip_contract(t.tail)
        return None if r is None else Cons(t.head, r)
    if isinstance(t, Proj):
        r = _zip_contract(t.arg)
        return None if r is None else Proj(t.i, t.k, r)
    return None


def zip_rewrite(s: ZipSpec, name: str) -> ZipSpec:
    r = _zip_contract(s.equations[name])
    if r is None:
        raise NoRedex(f"no zip redex in the equation of {name}")
    eqs = dict(s.equations)
    eqs[name] = r
    return make_spec(eqs, root=s.root, alphabet=s.alphabet)


def evolve_step(s: ZipSpec, choice: tuple[str, str]) -> ZipSpec:
    """choice is ("hoist", X) or ("zip_rewrite", X)."""
    kind, name = choice
    if kind == "hoist":
        return hoist(s, name)
    if kind in ("zip_rewrite", "zip-rewrite"):
        return zip_rewrite(s, name)
    raise ValueError(f"unknown evolve step {kind!r}")


# ---------------------------------------------------------------- solving

class _Node:
    """Mutable term node used while eliminating tl by evolving.

    Rewrites mutate nodes in place, so references held further up the
    recursion stay valid when other equations are hoisted.
    """

    __slots__ = ("kind", "sym", "name", "kids")

    def __init__(self, kind: str, sym: str | None = None, name: str | None = None,
                 kids: list["_Node"] | None = None):
        self.kind = kind  # var, cons, zip, tl
        self.sym = sym
        self.name = name
        self.kids = kids or []

    @staticmethod
    def of(t: Term) -> "_Node":
        if isinstance(t, Var):
            return _Node("var", name=t.name)
        if isinstance(t, Cons):
            return _Node("cons", sym=t.head, kids=[_Node.of(t.tail)])
        if isinstance(t, Zip):
            return _Node("zip", kids=[_Node.of(a) for a in t.args])
        raise PiDialectUnsupported("proj terms cannot be solved")

    def term(self) -> Term:
        if self.kind == "var":
            return Var(self.name)
        if self.kind == "cons":
            return Cons(self.sym, self.kids[0].term())
        if self.kind == "zip":
            return Zip(k.term() for k in self.kids)
        raise InternalNonTermination("tl left over after elimination")

    def become(self, other: "_Node") -> None:
        self.kind, self.sym, self.name, self.kids = other.kind, other.sym, other.name, other.kids

    def walk(self):
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.kids))


class _TlEliminator:
    def __init__(self, s: ZipSpec, max_steps: int):
        self.root = s.root
        self.eqs: dict[str, _Node] = {v: _Node.of(t) for v, t in s.equations.items()}
        self.exposing: set[str] = set()
        self.steps = 0
        self.max_steps = max_steps

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise InternalNonTermination("tl elimination exceeded its step bound")

    def root_in_rhs(self) -> bool:
        return any(n.kind == "var" and n.name == self.root
                   for t in self.eqs.values() for n in t.walk())

    def free_root(self) -> None:
        new = fresh_name(self.root + "'", self.eqs)
        self.eqs = {new: _Node("var", name=self.root), **self.eqs}
        self.root = new

    def hoist(self, name: str) -> None:
        if name == self.root:
            if not self.root_in_rhs():
                raise RootHoistForbidden("the root cannot be hoisted")
            self.free_root()
        rhs = self.eqs[name]
        assert rhs.kind == "cons"
        self.eqs[name] = rhs.kids[0]
        for t in self.eqs.values():
            for n in list(t.walk()):
                if n.kind == "var" and n.name == name:
                    n.become(_Node("cons", sym=rhs.sym, kids=[_Node("var", name=name)]))

    def expose(self, node: _Node) -> None:
        """Evolve until node has the form a : t."""
        while node.kind != "cons":
            self._tick()
            if node.kind == "zip":
                first = node.kids[0]
                self.expose(first)
                first = node.kids[0]
                node.become(_Node("cons", sym=first.sym,
                                  kids=[_Node("zip", kids=node.kids[1:] + [first.kids[0]])]))
            elif node.kind == "tl":
                self.expose(node.kids[0])
                node.become(node.kids[0].kids[0])
            else:
                name = node.name
                if name in self.exposing:
                    raise InternalNonTermination(f"{name} demands its own head")
                self.exposing.add(name)
                try:
                    self.expose(self.eqs[name])
                finally:
                    self.exposing.discard(name)
                self.hoist(name)
                # the hoist rewrote this very occurrence into a : X

    def run(self) -> None:
        while True:
            pending = next((n for t in self.eqs.values() for n in t.walk() if n.kind == "tl"), None)
            if pending is None:
                return
            self._tick()
            self.expose(pending.kids[0])
            pending.become(pending.kids[0].kids[0])


def solve_vector(s: ZipSpec, reps: list[str], vector: tuple[str, ...],
                 max_steps: int = 100_000) -> ZipSpec:
    """The specification obtained by inserting a : tl(...) at each representative."""
    elim = _TlEliminator(s, max_steps)
    for name, a in zip(reps, vector):
        elim.eqs[name] = _Node("cons", sym=a, kids=[_Node("tl", kids=[elim.eqs[name]])])
    elim.run()
    eqs = {v: n.term() for v, n in elim.eqs.items()}
    return make_spec(eqs, root=elim.root, alphabet=s.alphabet)


def solve_all(s: ZipSpec) -> list[ZipSpec]:
    """One productive specification per choice of head for every unguarded leftmost cycle."""
    report = leftmost_cycles(s)
    reps = report.representatives
    if not reps:
        return [s]
    if len(s.alphabet) < 2:
        raise ValueError("enumerating solutions needs an alphabet of at least two symbols")
    out = []
    for vector in itertools.product(s.alphabet, repeat=len(reps)):
        sol = solve_vector(s, reps, vector)
        if not is_productive(sol):
            raise InternalNonTermination(f"solution for {vector} is not productive")
        out.append(sol)
    return out
