"""Fractran programs with output, the halting gadget, and their zip-pi encoding."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Protocol

from .core import Cons, Proj, Var, Zip, ZipSpec, make_spec
from .errors import NotDecreasing, Timeout
from .graphs import PrefixComparison, prefix_compare
from .semantics import RewriteBudget

BOT = "bot"  # termination without output


@dataclass(frozen=True)
class Frac:
    p: int
    q: int
    out: str | None = None

    def __post_init__(self) -> None:
        if self.p <= 0 or self.q <= 0:
            raise ValueError("numerator and denominator must be positive")

    def applies(self, n: int) -> bool:
        return (n * self.p) % self.q == 0

    def __str__(self) -> str:
        return f"{self.p}/{self.q}" + (f" -> {self.out}" if self.out is not None else "")


@dataclass(frozen=True)
class FractranProgram:
    fractions: tuple[Frac, ...]

    @property
    def decreasing(self) -> bool:
        return all(f.p < f.q for f in self.fractions if f.out is None)

    def __len__(self) -> int:
        return len(self.fractions)

    def __str__(self) -> str:
        return "\n".join(map(str, self.fractions)) + "\n"


@dataclass(frozen=True)
class Terminated:
    """Halted state: `output` is a symbol, or None for termination without output."""

    output: str | None

    @property
    def symbol(self) -> str:
        return BOT if self.output is None else self.output


def program(fractions: Iterable[Frac | tuple]) -> FractranProgram:
    return FractranProgram(tuple(f if isinstance(f, Frac) else Frac(*f) for f in fractions))


_LINE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*(?:->\s*([A-Za-z0-9_]+))?\s*$")


def parse_fractran(text: str) -> FractranProgram:
    fracs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected p/q [-> symbol], got {raw.strip()!r}")
        fracs.append(Frac(int(m.group(1)), int(m.group(2)), m.group(3)))
    return FractranProgram(tuple(fracs))


# ---------------------------------------------------------------- execution


def select(F: FractranProgram, n: int) -> int | None:
    """Index of the first applicable fraction."""
    for i, f in enumerate(F.fractions):
        if f.applies(n):
            return i
    return None


def step(F: FractranProgram, n: int) -> int | Terminated:
    if n < 1:
        raise ValueError("Fractran values are positive")
    i = select(F, n)
    if i is None:
        return Terminated(None)
    f = F.fractions[i]
    if f.out is not None:
        return Terminated(f.out)
    return n * f.p // f.q


class Cancel(Protocol):
    def is_set(self) -> bool: ...


def run_output(F: FractranProgram, n: int, max_steps: int = 1_000_000,
               cancel: Cancel | None = None) -> str:
    """Output symbol of F on n (BOT when it halts without output)."""
    for _ in range(max_steps):
        if cancel is not None and cancel.is_set():
            raise Timeout("cancelled")
        r = step(F, n)
        if isinstance(r, Terminated):
            return r.symbol
        n = r
    raise Timeout(f"no termination within {max_steps} steps")


def trace(F: FractranProgram, n: int, max_steps: int = 1000) -> list[int | str]:
    out: list[int | str] = [n]
    for _ in range(max_steps):
        r = step(F, n)
        if isinstance(r, Terminated):
            out.append(r.symbol)
            return out
        n = r
        out.append(n)
    raise Timeout(f"no termination within {max_steps} steps")


# ---------------------------------------------------------------- gadget


@dataclass(frozen=True)
class Gadget:
    f0: FractranProgram
    f1: FractranProgram
    c: int
    z2: int
    z1: int
    primes: tuple[int, ...]


def build_gadget(F: FractranProgram) -> Gadget:
    """Two decreasing programs that differ on some input iff F halts on 2.

    The least primes meeting the constraints are chosen, c first, then z2, then z1.
    """
    from sympy import nextprime, primefactors

    if not F.fractions:
        raise ValueError("the program needs at least one fraction")
    if any(f.out is not None for f in F.fractions):
        raise ValueError("the gadget takes a program without outputs")
    primes = sorted({p for f in F.fractions for x in (f.p, f.q) for p in primefactors(x)})
    bound = math.prod(f.p * f.q for f in F.fractions)
    c = int(nextprime(bound))
    z2 = int(nextprime(c))
    z1 = int(nextprime(max(z2, 2 * c)))
    simulate = [Frac(f.p, f.q * z2) for f in F.fractions]
    cleanup = [Frac(1, a) for a in primes]
    halted = [Frac(1, c * z2, "a"), Frac(1, c)]
    init = [Frac(z2, z1 * z1), Frac(2 * c, z1)]
    fallback = [Frac(1, 1, "b")]
    f0 = FractranProgram(tuple(simulate + cleanup + halted + init + fallback))
    f1 = FractranProgram(tuple(simulate + cleanup + halted + fallback))
    assert f0.decreasing and f1.decreasing
    return Gadget(f0, f1, c, z2, z1, tuple(primes))


# ---------------------------------------------------------------- zip-pi encoding


def to_zip_pi_spec(F: FractranProgram) -> ZipSpec:
    """Root X0 = zip_d(X1..Xd) whose n-th element is the output of F on n+1."""
    if not F.decreasing:
        raise NotDecreasing("only decreasing programs have a productive encoding")
    d = math.lcm(*(f.q for f in F.fractions)) if F.fractions else 1
    root = Var("X0")
    eqs = {"X0": Zip(Var(f"X{n}") for n in range(1, d + 1))}
    for n in range(1, d + 1):
        name = f"X{n}"
        i = select(F, n)
        if i is None:
            eqs[name] = Cons(BOT, Var(name))
            continue
        f = F.fractions[i]
        if f.out is not None:
            eqs[name] = Cons(f.out, Var(name))
        else:
            eqs[name] = Proj(n * f.p // f.q - 1, d * f.p // f.q, root)
    return make_spec(eqs, root="X0")


@dataclass
class ProbeResult:
    agree: bool
    index: int | None
    comparison: PrefixComparison
    gadget: Gadget

    @property
    def halts(self) -> bool:
        """A difference certifies that the program halts on 2; agreement proves nothing."""
        return not self.agree


def gadget_equiv_probe(F: FractranProgram, N: int,
                       budget: RewriteBudget | int | None = None) -> ProbeResult:
    g = build_gadget(F)
    cmp = prefix_compare(to_zip_pi_spec(g.f0), to_zip_pi_spec(g.f1), N, budget)
    return ProbeResult(cmp.equal, cmp.index, cmp, g)
