"""Propositional dynamic logic over observation graphs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import PdlSyntaxError, UnknownAtom, UnknownLabel
from .graphs import ObsGraph, label

# ---------------------------------------------------------------- syntax
#
# Formulas and programs are hash-consed: building the same structure twice
# returns the same object, so equality and hashing are by identity.  And/Or
# keep a deduplicated operand set, flattened and with units removed.

_TABLE: dict[tuple, "Node"] = {}


class Node:
    __slots__ = ("_key", "__weakref__")

    def __init__(self, *args):
        pass  # construction happens in _make

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"

    def __reduce__(self):
        return (_unparse, (str(self), isinstance(self, Program)))


def _unparse(text: str, program: bool):
    return parse_program(text) if program else parse_formula(text)


def _make(cls, *key):
    full = (cls,) + key
    node = _TABLE.get(full)
    if node is None:
        node = object.__new__(cls)
        node._key = key
        _TABLE[full] = node
    return node


class Program(Node):
    __slots__ = ()


class Label(Program):
    __slots__ = ()

    def __new__(cls, name: str):
        return _make(cls, name)

    @property
    def name(self) -> str:
        return self._key[0]

    def __str__(self) -> str:
        return self.name


class Seq(Program):
    __slots__ = ()

    def __new__(cls, first: Program, second: Program):
        return _make(cls, first, second)

    def __str__(self) -> str:
        a, b = self._key
        return f"{_pwrap(a, Union)};{_pwrap(b, (Union, Seq))}"


class Union(Program):
    __slots__ = ()

    def __new__(cls, first: Program, second: Program):
        return _make(cls, first, second)

    def __str__(self) -> str:
        a, b = self._key
        return f"{a}+{_pwrap(b, Union)}"


class Star(Program):
    __slots__ = ()

    def __new__(cls, inner: Program):
        return _make(cls, inner)

    def __str__(self) -> str:
        return f"{_pwrap(self._key[0], (Union, Seq))}*"


def _pwrap(p: Program, kinds) -> str:
    return f"({p})" if isinstance(p, kinds) else str(p)


def union_of(labels: Iterable[str]) -> Program:
    progs = [Label(x) for x in labels]
    if not progs:
        raise ValueError("need at least one label")
    out = progs[-1]
    for p in reversed(progs[:-1]):
        out = Union(p, out)
    return out


class Formula(Node):
    __slots__ = ()


class Atom(Formula):
    __slots__ = ()

    def __new__(cls, symbol: str):
        return _make(cls, symbol)

    @property
    def symbol(self) -> str:
        return self._key[0]

    def __str__(self) -> str:
        return self.symbol


class Const(Formula):
    __slots__ = ()

    def __new__(cls, value: bool):
        return _make(cls, bool(value))

    @property
    def value(self) -> bool:
        return self._key[0]

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


class Not(Formula):
    __slots__ = ()

    def __new__(cls, inner: Formula):
        if isinstance(inner, Const):
            return Const(not inner.value)
        if isinstance(inner, Not):
            return inner.inner
        return _make(cls, inner)

    @property
    def inner(self) -> Formula:
        return self._key[0]

    def __str__(self) -> str:
        return "~" + _fwrap(self.inner)


class _Junction(Formula):
    __slots__ = ()
    unit: bool
    sep: str

    def __new__(cls, operands: Iterable[Formula]):
        ops: set[Formula] = set()
        for f in operands:
            if isinstance(f, cls):
                ops.update(f.operands)
            elif isinstance(f, Const):
                if f.value != cls.unit:
                    return f
            else:
                ops.add(f)
        if not ops:
            return Const(cls.unit)
        if len(ops) == 1:
            return next(iter(ops))
        return _make(cls, frozenset(ops))

    @property
    def operands(self) -> frozenset:
        return self._key[0]

    def __str__(self) -> str:
        return self.sep.join(sorted(_fwrap(f) for f in self.operands))


class And(_Junction):
    __slots__ = ()
    unit = True
    sep = " & "


class Or(_Junction):
    __slots__ = ()
    unit = False
    sep = " | "


class Box(Formula):
    __slots__ = ()

    def __new__(cls, program: Program, inner: Formula):
        return _make(cls, program, inner)

    @property
    def program(self) -> Program:
        return self._key[0]

    @property
    def inner(self) -> Formula:
        return self._key[1]

    def __str__(self) -> str:
        return f"[{self.program}]{_fwrap(self.inner)}"


class Diamond(Box):
    __slots__ = ()

    def __str__(self) -> str:
        return f"<{self.program}>{_fwrap(self.inner)}"


def _fwrap(f: Formula) -> str:
    return f"({f})" if isinstance(f, _Junction) else str(f)


def implies(a: Formula, b: Formula) -> Formula:
    return Or([Not(a), b])


def iff(a: Formula, b: Formula) -> Formula:
    return And([implies(a, b), implies(b, a)])


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(<->|->|[~&|\[\]<>();+*]|[A-Za-z0-9_]+)")


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise PdlSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r} at {pos}")
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            where = self.toks[self.i][1] if tok is not None else "end"
            raise PdlSyntaxError(f"expected {expected or 'a token'} at {where}, got {tok!r}")
        self.i += 1
        return tok

    def done(self) -> None:
        if self.peek() is not None:
            raise PdlSyntaxError(f"trailing input at {self.toks[self.i][1]}: {self.peek()!r}")

    # formulas
    def iff(self) -> Formula:
        f = self.imp()
        while self.peek() == "<->":
            self.take()
            f = iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek() == "->":
            self.take()
            return implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        ops = [self.conj()]
        while self.peek() == "|":
            self.take()
            ops.append(self.conj())
        return ops[0] if len(ops) == 1 else Or(ops)

    def conj(self) -> Formula:
        ops = [self.unary()]
        while self.peek() == "&":
            self.take()
            ops.append(self.unary())
        return ops[0] if len(ops) == 1 else And(ops)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "[":
            self.take()
            p = self.union()
            self.take("]")
            return Box(p, self.unary())
        if tok == "<":
            self.take()
            p = self.union()
            self.take(">")
            return Diamond(p, self.unary())
        if tok == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        if tok is not None and re.fullmatch(r"[A-Za-z0-9_]+", tok):
            self.take()
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            return Atom(tok)
        return self.take("a formula")  # raises

    # programs
    def union(self) -> Program:
        p = self.seq()
        if self.peek() == "+":
            self.take()
            return Union(p, self.union())
        return p

    def seq(self) -> Program:
        p = self.star()
        while self.peek() == ";":
            self.take()
            p = Seq(p, self.star())
        return p

    def star(self) -> Program:
        tok = self.peek()
        if tok == "(":
            self.take()
            p = self.union()
            self.take(")")
        elif tok is not None and re.fullmatch(r"[A-Za-z0-9_]+", tok):
            p = Label(self.take())
        else:
            raise PdlSyntaxError(f"expected a program, got {tok!r}")
        while self.peek() == "*":
            self.take()
            p = Star(p)
        return p


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.iff()
    p.done()
    return f


def parse_program(text: str) -> Program:
    p = _Parser(text)
    prog = p.union()
    p.done()
    return prog


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class PdlModel:
    states: tuple
    atoms: Mapping[str, frozenset]
    rels: Mapping[str, frozenset]
    _succ: dict = field(default_factory=dict, compare=False, repr=False)

    def successors(self, name: str, s) -> tuple:
        table = self._succ.get(name)
        if table is None:
            if name not in self.rels:
                raise UnknownLabel(f"no relation named {name!r}")
            table = {x: [] for x in self.states}
            for a, b in sorted(self.rels[name], key=lambda p: (self.states.index(p[0]),
                                                              self.states.index(p[1]))):
                table[a].append(b)
            table = {x: tuple(v) for x, v in table.items()}
            self._succ[name] = table
        return table[s]


def edge_labels(g: ObsGraph) -> list[str]:
    width = max((g.arity(n) for n in g.nodes), default=0)
    if g.cobasis == "N" and g.k == 2:
        return ["even", "odd"]
    if g.cobasis == "O":
        return [f"p{i + 1}" for i in range(width)]
    return [f"p{i}" for i in range(width)]


def model_of_graph(g: ObsGraph, alphabet: Iterable[str] | None = None) -> PdlModel:
    """States are node labels; atom a holds where the output is a."""
    names = {n: label(n) for n in g.nodes}
    states = tuple(names[n] for n in g.nodes)
    symbols = sorted(set(alphabet) if alphabet is not None else set(g.out.values()))
    atoms = {a: frozenset(names[n] for n in g.nodes if g.out[n] == a) for a in symbols}
    labels = edge_labels(g)
    rels = {x: set() for x in labels}
    for n in g.nodes:
        for i, m in enumerate(g.succ[n]):
            rels[labels[i]].add((names[n], names[m]))
    return PdlModel(states, atoms, {x: frozenset(r) for x, r in rels.items()})


def root_state(g: ObsGraph) -> str:
    return label(g.root)


# ---------------------------------------------------------------- semantics


class _Eval:
    def __init__(self, m: PdlModel):
        self.m = m
        self.all = frozenset(m.states)
        self.memo: dict[Formula, frozenset] = {}
        self.pmemo: dict[Program, dict] = {}

    def rel(self, p: Program) -> dict:
        """Program relation as a successor map."""
        hit = self.pmemo.get(p)
        if hit is not None:
            return hit
        m = self.m
        if isinstance(p, Label):
            out = {s: frozenset(m.successors(p.name, s)) for s in m.states}
        elif isinstance(p, Seq):
            r1, r2 = self.rel(p._key[0]), self.rel(p._key[1])
            out = {s: frozenset(z for y in r1[s] for z in r2[y]) for s in m.states}
        elif isinstance(p, Union):
            r1, r2 = self.rel(p._key[0]), self.rel(p._key[1])
            out = {s: r1[s] | r2[s] for s in m.states}
        elif isinstance(p, Star):
            r = self.rel(p._key[0])
            out = {}
            for s in m.states:
                seen = {s}
                todo = [s]
                while todo:
                    for y in r[todo.pop()]:
                        if y not in seen:
                            seen.add(y)
                            todo.append(y)
                out[s] = frozenset(seen)
        else:
            raise TypeError(p)
        self.pmemo[p] = out
        return out

    def sat(self, f: Formula) -> frozenset:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            if f.symbol not in self.m.atoms:
                raise UnknownAtom(f"no atomic proposition {f.symbol!r}")
            out = frozenset(self.m.atoms[f.symbol])
        elif isinstance(f, Const):
            out = self.all if f.value else frozenset()
        elif isinstance(f, Not):
            out = self.all - self.sat(f.inner)
        elif isinstance(f, And):
            out = self.all
            for g in f.operands:
                out &= self.sat(g)
        elif isinstance(f, Or):
            out = frozenset()
            for g in f.operands:
                out |= self.sat(g)
        elif isinstance(f, Diamond):
            r, inner = self.rel(f.program), self.sat(f.inner)
            out = frozenset(s for s in self.m.states if r[s] & inner)
        elif isinstance(f, Box):
            r, inner = self.rel(f.program), self.sat(f.inner)
            out = frozenset(s for s in self.m.states if r[s] <= inner)
        else:
            raise TypeError(f)
        self.memo[f] = out
        return out


def evaluate(m: PdlModel, f: Formula | str) -> frozenset:
    """The set of states satisfying f."""
    if isinstance(f, str):
        f = parse_formula(f)
    return _Eval(m).sat(f)


# ---------------------------------------------------------------- characterizing sentences


def _atom_description(m: PdlModel, s) -> Formula:
    return And(Atom(a) if s in m.atoms[a] else Not(Atom(a)) for a in m.atoms)


def _step(m: PdlModel, s, prev: Mapping) -> list[Formula]:
    parts: list[Formula] = []
    for name in sorted(m.rels):
        succ = m.successors(name, s)
        prog = Label(name)
        parts.extend(Diamond(prog, prev[b]) for b in succ)
        parts.append(Box(prog, Or(prev[b] for b in succ)))
    return parts


def canonical_table(m: PdlModel, h: int) -> dict:
    """Canonical sentences of height h for every state."""
    zero = {s: _atom_description(m, s) for s in m.states}
    table = dict(zero)
    for _ in range(h):
        table = {s: And(_step(m, s, table) + [zero[s]]) for s in m.states}
    return table


def canonical_phi(m: PdlModel, a, h: int) -> Formula:
    return canonical_table(m, h)[a]


def _classes(table: Mapping) -> frozenset:
    groups: dict = {}
    for s, f in table.items():
        groups.setdefault(f, set()).add(s)
    return frozenset(frozenset(g) for g in groups.values())


def stable_height(m: PdlModel) -> int:
    """Least h at which canonical sentences of heights h and h+1 induce the same partition."""
    zero = {s: _atom_description(m, s) for s in m.states}
    table = dict(zero)
    h = 0
    while True:
        nxt = {s: And(_step(m, s, table) + [zero[s]]) for s in m.states}
        if _classes(nxt) == _classes(table):
            assert h <= len(m.states)
            return h
        table = nxt
        h += 1


def characterize(m: PdlModel, x) -> Formula:
    """A sentence true exactly at the states bisimilar to x."""
    if x not in m.states:
        raise ValueError(f"unknown state {x!r}")
    h = stable_height(m)
    table = canonical_table(m, h)
    invariants = [implies(table[a], And(_step(m, a, table))) for a in m.states]
    everywhere = Star(union_of(sorted(m.rels))) if m.rels else None
    body = And(invariants)
    if everywhere is None:
        return And([table[x], body])
    return And([table[x], Box(everywhere, body)])
