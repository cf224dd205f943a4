"""Operational semantics: head expansion, prefix evaluation and observation normal forms."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Sequence

from .core import Cons, Head, Proj, Term, Var, Zip, ZipSpec
from .errors import BudgetExhausted

DEFAULT_BUDGET = 1_000_000


@dataclass
class RewriteBudget:
    max_steps: int = DEFAULT_BUDGET
    used: int = 0

    def __post_init__(self) -> None:
        if self.max_steps <= 0:
            raise ValueError("budget must be positive")

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.max_steps:
            raise BudgetExhausted(f"rewrite budget of {self.max_steps} steps exhausted")


def _budget(budget: RewriteBudget | int | None) -> RewriteBudget:
    if budget is None:
        return RewriteBudget()
    if isinstance(budget, int):
        return RewriteBudget(budget)
    return budget


class _deep_recursion:
    def __enter__(self):
        self.old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(self.old, 100_000))

    def __exit__(self, *exc):
        sys.setrecursionlimit(self.old)


class Evaluator:
    """Head expansion with memoisation of weak head normal forms.

    Interned terms make the memo table exact: a term is expanded at most once.
    A term that demands its own head is reported as non-productive at once.
    """

    def __init__(self, spec: ZipSpec, budget: RewriteBudget | int | None = None):
        self.spec = spec
        self.budget = _budget(budget)
        self._memo: dict[Term, Cons] = {}
        self._active: set[Term] = set()

    def whnf(self, t: Term) -> Cons:
        with _deep_recursion():
            return self._whnf(t)

    def _whnf(self, t: Term) -> Cons:
        if isinstance(t, Cons):
            return t
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        if t in self._active:
            raise BudgetExhausted(f"{t} demands its own head (non-productive)")
        self._active.add(t)
        try:
            self.budget.tick()
            if isinstance(t, Var):
                result = self._whnf(self.spec.equations[t.name])
            elif isinstance(t, Zip):
                first = self._whnf(t.args[0])
                result = Cons(first.head, Zip(t.args[1:] + (first.tail,)))
            elif isinstance(t, Proj):
                i, rest = t.i, t.arg
                while True:
                    h = self._whnf(rest)
                    if i == 0:
                        result = Cons(h.head, Proj(t.k - 1, t.k, h.tail))
                        break
                    i -= 1
                    rest = h.tail
                    self.budget.tick()
            else:
                raise TypeError(f"cannot expand {t!r}")
        finally:
            self._active.discard(t)
        self._memo[t] = result
        return result

    def prefix(self, t: Term, n: int) -> list[str]:
        out = []
        for _ in range(n):
            c = self.whnf(t)
            out.append(c.head)
            t = c.tail
        return out


def expand_head(t: Term, s: ZipSpec, budget: RewriteBudget | int | None = None) -> tuple[str, Term]:
    """Rewrite t to the form a : t' and return (a, t')."""
    c = Evaluator(s, budget).whnf(t)
    return c.head, c.tail


def eval_prefix(s: ZipSpec, n: int, budget: RewriteBudget | int | None = None) -> list[str]:
    """First n symbols of the root stream."""
    return Evaluator(s, budget).prefix(Var(s.root), n)


def project_prefix(s: ZipSpec, i: int, k: int, n: int,
                   budget: RewriteBudget | int | None = None) -> list[str]:
    """sigma(i), sigma(k+i), ..., sigma((n-1)k+i) for the root stream sigma."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return Evaluator(s, budget).prefix(Proj(i, k, Var(s.root)), n)


def project_through_zip(i: int, n: int, k: int, args: Sequence[Term]) -> Zip:
    """proj(i, n, zip_k(args)) rewritten as a zip of projections of the arguments.

    Position z of the result reads the zipped stream at i + z*n, which lives in
    argument (i + z*n) mod k at offset (i + z*n) div k.
    """
    if len(args) != k:
        raise ValueError("argument count must equal k")
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    out = []
    for z in range(k):
        pos = i + z * n
        out.append(Proj(pos // k, n, args[pos % k]))
    return Zip(out)


# ---------------------------------------------------------------- normal forms


class Normalizer:
    """Leftmost-innermost normalisation for hd / proj observations of spec terms.

    Variables are constants; they unfold only directly under hd or proj.
    hd normal forms are returned as plain symbols (str).
    """

    def __init__(self, spec: ZipSpec, k: int | None = None,
                 budget: RewriteBudget | int | None = None):
        self.spec = spec
        self.k = k
        self.budget = _budget(budget)
        self._memo: dict[Term, Term | str] = {}

    def normalize(self, t: Term) -> Term | str:
        with _deep_recursion():
            return self._norm(t)

    def _norm(self, t: Term) -> Term | str:
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        if isinstance(t, Var):
            result: Term | str = t
        elif isinstance(t, Cons):
            tail = self._norm(t.tail)
            result = Cons(t.head, tail) if isinstance(tail, Term) else t
        elif isinstance(t, Zip):
            result = Zip(self._as_term(self._norm(a)) for a in t.args)
        elif isinstance(t, Proj):
            result = self._proj(t.i, t.k, self._as_term(self._norm(t.arg)))
        elif isinstance(t, Head):
            result = self._head(self._as_term(self._norm(t.arg)))
        else:
            raise TypeError(t)
        self._memo[t] = result
        return result

    @staticmethod
    def _as_term(x: Term | str) -> Term:
        if isinstance(x, str):
            raise TypeError("a symbol cannot occur as a stream argument")
        return x

    def _proj(self, i: int, k: int, u: Term) -> Term:
        """Contract proj_{i,k} at the root of an argument already in normal form."""
        prefix: list[str] = []
        while True:
            self.budget.tick()
            if isinstance(u, Cons):
                if i == 0:
                    prefix.append(u.head)
                    i = k - 1
                else:
                    i -= 1
                u = u.tail
            elif isinstance(u, Var):
                u = self._as_term(self._norm(self.spec.equations[u.name]))
            elif isinstance(u, Zip) and u.k == k and i < k:
                result = u.args[i]
                break
            else:
                result = Proj(i, k, u)
                break
        for sym in reversed(prefix):
            result = Cons(sym, result)
        return result

    def _head(self, u: Term) -> Term | str:
        seen = set()
        while True:
            self.budget.tick()
            if isinstance(u, Cons):
                return u.head
            if isinstance(u, Zip):
                u = u.args[0]
            elif isinstance(u, Var):
                if u in seen:
                    raise BudgetExhausted(f"head of {u} is not productive")
                seen.add(u)
                u = self._as_term(self._norm(self.spec.equations[u.name]))
            else:
                return Head(u)


def normalize(t: Term, s: ZipSpec, k: int | None = None,
              budget: RewriteBudget | int | None = None) -> Term | str:
    """Normal form of an observation term hd(...)/proj(...) over s."""
    return Normalizer(s, k, budget).normalize(t)
