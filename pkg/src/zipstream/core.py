"""Abstract syntax, text format, parsing, printing and validation of zip specifications.

Terms are hash-consed: building the same term twice returns the same object,
so structural equality is identity and hashing is O(1).
"""

from __future__ import annotations

import re
import threading
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import (
    ArityZero,
    DuplicateEquation,
    ProjInNonPiDialect,
    SpecSyntaxError,
    UndefinedVariable,
)

_table: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Term:
    """Immutable, interned zip term."""

    __slots__ = ("__weakref__",)

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {print_term(self)}>"

    def __str__(self) -> str:
        return print_term(self)

    def __reduce__(self):
        return (_rebuild, (print_term(self),))


def _rebuild(text: str) -> "Term":
    return parse_term(text)


def _intern(cls: type, key: tuple, fields: dict) -> Term:
    full = (cls, key)
    obj = _table.get(full)
    if obj is not None:
        return obj
    with _lock:
        obj = _table.get(full)
        if obj is None:
            obj = object.__new__(cls)
            for name, value in fields.items():
                object.__setattr__(obj, name, value)
            _table[full] = obj
    return obj


class Var(Term):
    __slots__ = ("name",)
    name: str

    def __new__(cls, name: str) -> "Var":
        return _intern(cls, (name,), {"name": name})  # type: ignore[return-value]


class Cons(Term):
    __slots__ = ("head", "tail")
    head: str
    tail: Term

    def __new__(cls, head: str, tail: Term) -> "Cons":
        return _intern(cls, (head, tail), {"head": head, "tail": tail})  # type: ignore[return-value]


class Zip(Term):
    __slots__ = ("args",)
    args: tuple[Term, ...]

    def __new__(cls, args: Iterable[Term]) -> "Zip":
        args = tuple(args)
        if not args:
            raise ArityZero("zip needs at least one argument")
        return _intern(cls, args, {"args": args})  # type: ignore[return-value]

    @property
    def k(self) -> int:
        return len(self.args)


class Proj(Term):
    """proj(i, k, t): the stream t(k*n + i)."""

    __slots__ = ("i", "k", "arg")
    i: int
    k: int
    arg: Term

    def __new__(cls, i: int, k: int, arg: Term) -> "Proj":
        if k < 1:
            raise ArityZero("projection modulus must be at least 1")
        if i < 0:
            raise ValueError("projection index must be non-negative")
        return _intern(cls, (i, k, arg), {"i": i, "k": k, "arg": arg})  # type: ignore[return-value]


class Head(Term):
    """Observation of the first element; only appears during normalization."""

    __slots__ = ("arg",)
    arg: Term

    def __new__(cls, arg: Term) -> "Head":
        return _intern(cls, (arg,), {"arg": arg})  # type: ignore[return-value]


def cons_all(prefix: Iterable[str], tail: Term) -> Term:
    for sym in reversed(list(prefix)):
        tail = Cons(sym, tail)
    return tail


def split_prefix(t: Term) -> tuple[list[str], Term]:
    """Peel the cons prefix off a term."""
    prefix = []
    while isinstance(t, Cons):
        prefix.append(t.head)
        t = t.tail
    return prefix, t


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, Cons):
            stack.append(u.tail)
        elif isinstance(u, Zip):
            stack.extend(reversed(u.args))
        elif isinstance(u, (Proj, Head)):
            stack.append(u.arg)


def variables_of(t: Term) -> list[str]:
    seen: dict[str, None] = {}
    for u in subterms(t):
        if isinstance(u, Var):
            seen.setdefault(u.name)
    return list(seen)


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Cons):
        return Cons(t.head, substitute(t.tail, mapping))
    if isinstance(t, Zip):
        return Zip(substitute(a, mapping) for a in t.args)
    if isinstance(t, Proj):
        return Proj(t.i, t.k, substitute(t.arg, mapping))
    if isinstance(t, Head):
        return Head(substitute(t.arg, mapping))
    raise TypeError(t)


def rename(t: Term, names: Mapping[str, str]) -> Term:
    return substitute(t, {old: Var(new) for old, new in names.items()})


def print_term(t: Term) -> str:
    parts: list[str] = []
    while isinstance(t, Cons):
        parts.append(f"{t.head}:")
        t = t.tail
    if isinstance(t, Var):
        parts.append(t.name)
    elif isinstance(t, Zip):
        parts.append("zip(" + ",".join(print_term(a) for a in t.args) + ")")
    elif isinstance(t, Proj):
        parts.append(f"proj({t.i},{t.k},{print_term(t.arg)})")
    elif isinstance(t, Head):
        parts.append(f"hd({print_term(t.arg)})")
    else:
        raise TypeError(t)
    return "".join(parts)


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class Dialect:
    kind: str  # "zip-k", "zip-mix" or "zip-pi"
    k: int | None = None

    def __str__(self) -> str:
        return f"zip-k({self.k})" if self.kind == "zip-k" else self.kind

    @staticmethod
    def parse(text: str) -> "Dialect":
        m = re.fullmatch(r"zip-k\((\d+)\)", text)
        if m:
            return Dialect("zip-k", int(m.group(1)))
        if text in ("zip-mix", "zip-pi"):
            return Dialect(text)
        raise ValueError(f"unknown dialect {text!r}")


def zip_arities(terms: Iterable[Term]) -> set[int]:
    return {u.k for t in terms for u in subterms(t) if isinstance(u, Zip)}


def has_proj(terms: Iterable[Term]) -> bool:
    return any(isinstance(u, Proj) for t in terms for u in subterms(t))


def infer_dialect(terms: Iterable[Term]) -> Dialect:
    terms = list(terms)
    if has_proj(terms):
        return Dialect("zip-pi")
    arities = zip_arities(terms)
    if len(arities) > 1:
        return Dialect("zip-mix")
    return Dialect("zip-k", arities.pop() if arities else 2)


def infer_alphabet(terms: Iterable[Term]) -> tuple[str, ...]:
    heads = {u.head for t in terms for u in subterms(t) if isinstance(u, Cons)}
    return tuple(sorted(heads))


@dataclass(frozen=True)
class ZipSpec:
    """A recursion system over cons/zip/proj with a distinguished root."""

    equations: Mapping[str, Term]
    root: str
    alphabet: tuple[str, ...]
    dialect: Dialect = field(default_factory=lambda: Dialect("zip-k", 2))

    def __post_init__(self) -> None:
        if self.root not in self.equations:
            raise UndefinedVariable(self.root)
        for rhs in self.equations.values():
            for name in variables_of(rhs):
                if name not in self.equations:
                    raise UndefinedVariable(name)
        if self.dialect.kind != "zip-pi" and has_proj(self.equations.values()):
            raise ProjInNonPiDialect("proj occurs outside the zip-pi dialect")

    def __getitem__(self, name: str) -> Term:
        return self.equations[name]

    @property
    def variables(self) -> list[str]:
        return list(self.equations)

    def replace(self, equations: Mapping[str, Term], root: str | None = None,
                alphabet: tuple[str, ...] | None = None) -> "ZipSpec":
        return make_spec(equations, root=root or self.root,
                         alphabet=alphabet or self.alphabet)

    def structure(self) -> tuple:
        """Hashable structural fingerprint (terms are interned)."""
        return (tuple(self.equations.items()), self.root, self.alphabet, self.dialect)


def make_spec(equations: Mapping[str, Term] | Iterable[tuple[str, Term]],
              root: str | None = None,
              alphabet: Iterable[str] | None = None,
              dialect: Dialect | None = None) -> ZipSpec:
    eqs = dict(equations.items() if isinstance(equations, Mapping) else equations)
    if not eqs:
        raise SpecSyntaxError("specification has no equations", 1, 1)
    inferred = infer_alphabet(eqs.values())
    if alphabet is None:
        alpha = inferred
    else:
        alpha = tuple(dict.fromkeys(alphabet))
        alpha += tuple(a for a in inferred if a not in alpha)
    return ZipSpec(eqs, root if root is not None else next(iter(eqs)), alpha,
                   dialect or infer_dialect(eqs.values()))


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(?P<word>[A-Za-z0-9_']+)|(?P<punct>[():,=]))")


class _Lexer:
    def __init__(self, text: str, line: int, col0: int):
        self.text = text
        self.line = line
        self.col0 = col0
        self.pos = 0

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        if not m or m.end() == m.start():
            return None
        return m.group("word") or m.group("punct")

    def col(self) -> int:
        m = re.compile(r"\s*").match(self.text, self.pos)
        return self.col0 + (m.end() if m else self.pos) + 1

    def next(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            if self.text[self.pos:].strip():
                self.error(f"unexpected character {self.text[self.pos:].strip()[0]!r}")
            self.error("unexpected end of input")
        self.pos = m.end()
        return m.group("word") or m.group("punct")

    def expect(self, tok: str) -> None:
        col = self.col()
        got = self.next()
        if got != tok:
            raise SpecSyntaxError(f"expected {tok!r}, found {got!r}", self.line, col)

    def at_end(self) -> bool:
        return not self.text[self.pos:].strip()

    def error(self, message: str):
        raise SpecSyntaxError(message, self.line, self.col())


def _nat(lex: _Lexer) -> int:
    col = lex.col()
    tok = lex.next()
    if not tok.isdigit():
        raise SpecSyntaxError(f"expected a natural number, found {tok!r}", lex.line, col)
    return int(tok)


def _term(lex: _Lexer) -> Term:
    col = lex.col()
    tok = lex.next()
    if tok in "():,=":
        raise SpecSyntaxError(f"unexpected {tok!r}", lex.line, col)
    nxt = lex.peek()
    if nxt == ":":
        if "'" in tok:
            raise SpecSyntaxError(f"invalid symbol {tok!r}", lex.line, col)
        lex.next()
        return Cons(tok, _term(lex))
    if tok == "zip" and nxt == "(":
        lex.next()
        if lex.peek() == ")":
            raise ArityZero(f"line {lex.line}, col {col}: zip with no arguments")
        args = [_term(lex)]
        while lex.peek() == ",":
            lex.next()
            args.append(_term(lex))
        lex.expect(")")
        return Zip(args)
    if tok == "proj" and nxt == "(":
        lex.next()
        i = _nat(lex)
        lex.expect(",")
        kcol = lex.col()
        k = _nat(lex)
        if k == 0:
            raise ArityZero(f"line {lex.line}, col {kcol}: projection modulus 0")
        lex.expect(",")
        arg = _term(lex)
        lex.expect(")")
        return Proj(i, k, arg)
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*|[A-Za-z0-9_']+", tok):
        raise SpecSyntaxError(f"invalid identifier {tok!r}", lex.line, col)
    return Var(tok)


def parse_term(text: str, line: int = 1) -> Term:
    lex = _Lexer(text, line, 0)
    t = _term(lex)
    if not lex.at_end():
        lex.error("trailing input")
    return t


def _statements(text: str) -> Iterator[tuple[str, int, int]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        start = 0
        for chunk in line.split(";"):
            yield chunk, lineno, start
            start += len(chunk) + 1


def parse_spec(text: str, dialect: Dialect | str | None = None) -> ZipSpec:
    """Parse the line-oriented text format into a ZipSpec."""
    if isinstance(dialect, str):
        dialect = Dialect.parse(dialect)
    equations: dict[str, Term] = {}
    root: str | None = None
    alphabet: list[str] | None = None
    for chunk, lineno, start in _statements(text):
        if not chunk.strip():
            continue
        lex = _Lexer(chunk, lineno, start)
        col = lex.col()
        first = lex.next()
        if first == "alphabet" and lex.peek() not in ("=",):
            alphabet = alphabet or []
            while not lex.at_end():
                sym = lex.next()
                if not re.fullmatch(r"[A-Za-z0-9_]+", sym):
                    lex.error(f"invalid symbol {sym!r}")
                alphabet.append(sym)
            continue
        if first == "root" and lex.peek() not in ("=",):
            root = lex.next()
            if not lex.at_end():
                lex.error("trailing input after root declaration")
            continue
        if first in "():,=" or "'" in first[:1]:
            raise SpecSyntaxError(f"expected a variable, found {first!r}", lineno, col)
        lex.expect("=")
        rhs = _term(lex)
        if not lex.at_end():
            lex.error("trailing input")
        if first in equations:
            raise DuplicateEquation(first)
        equations[first] = rhs
    if not equations:
        raise SpecSyntaxError("specification has no equations", 1, 1)
    if dialect is not None and dialect.kind != "zip-pi" and has_proj(equations.values()):
        raise ProjInNonPiDialect(f"proj occurs in a {dialect} specification")
    return make_spec(equations, root=root, alphabet=alphabet, dialect=dialect)


def print_spec(s: ZipSpec) -> str:
    lines = []
    if s.alphabet != infer_alphabet(s.equations.values()):
        lines.append("alphabet " + " ".join(s.alphabet))
    if s.root != next(iter(s.equations)):
        lines.append(f"root {s.root}")
    for name, rhs in s.equations.items():
        lines.append(f"{name} = {print_term(rhs)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- validation


@dataclass
class Report:
    unreachable: list[str] = field(default_factory=list)
    dialect_violations: list[str] = field(default_factory=list)
    alphabet_issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.unreachable or self.dialect_violations or self.alphabet_issues)

    def lines(self) -> list[str]:
        out = [f"unreachable variable: {v}" for v in self.unreachable]
        out += [f"dialect violation: {m}" for m in self.dialect_violations]
        out += [f"alphabet: {m}" for m in self.alphabet_issues]
        return out


def reachable(s: ZipSpec, start: str | None = None) -> list[str]:
    order = [start or s.root]
    seen = set(order)
    for name in order:
        for v in variables_of(s.equations[name]):
            if v not in seen:
                seen.add(v)
                order.append(v)
    return order


def validate(s: ZipSpec) -> Report:
    report = Report()
    seen = set(reachable(s))
    report.unreachable = [v for v in s.equations if v not in seen]
    d = s.dialect
    for name, rhs in s.equations.items():
        for u in subterms(rhs):
            if isinstance(u, Proj) and d.kind != "zip-pi":
                report.dialect_violations.append(f"{name}: proj in {d} specification")
            if isinstance(u, Zip) and d.kind == "zip-k" and u.k != d.k:
                report.dialect_violations.append(
                    f"{name}: zip of arity {u.k} in {d} specification")
    if not s.alphabet:
        report.alphabet_issues.append("empty alphabet")
    for a in infer_alphabet(s.equations.values()):
        if a not in s.alphabet:
            report.alphabet_issues.append(f"symbol {a} not declared")
    return report


def fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    n = 1
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"
