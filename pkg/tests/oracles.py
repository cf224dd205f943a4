"""Independent reference implementations used to seed and cross-check expectations.

None of these go through the rewriting engine, graph construction or the
automata module; they read definitions directly off positions.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from functools import lru_cache

from zipstream.core import Cons, Dialect, Proj, Var, Zip, ZipSpec

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def stream_at(s: ZipSpec, n: int):
    """Element n of the root stream, by position arithmetic on the equations.

    zip_k(t_0..t_{k-1}) at n is t_{n mod k} at n div k; proj(i,k,t) at n is t at i+kn.
    """

    @lru_cache(maxsize=None)
    def at(t, n: int, depth: int = 0):
        if depth > 5000:
            raise RecursionError("no value: the definition is not productive")
        if isinstance(t, Var):
            return at(s.equations[t.name], n, depth + 1)
        if isinstance(t, Cons):
            return t.head if n == 0 else at(t.tail, n - 1, depth + 1)
        if isinstance(t, Zip):
            return at(t.args[n % t.k], n // t.k, depth + 1)
        if isinstance(t, Proj):
            return at(t.arg, t.i + t.k * n, depth + 1)
        raise TypeError(t)

    return at(Var(s.root), n)


def stream_prefix(s: ZipSpec, n: int) -> list:
    return [stream_at(s, i) for i in range(n)]


def term_at(s: ZipSpec, t, n: int):
    root = "__probe__"
    eqs = dict(s.equations)
    eqs[root] = t
    probe = ZipSpec(eqs, root, s.alphabet, Dialect("zip-pi"))
    return stream_at(probe, n)


def thue_morse(n: int) -> str:
    return str(bin(n).count("1") % 2)


def alt(n: int) -> str:
    return str(n % 2)


def periodic(word: str, n: int) -> str:
    return word[n % len(word)]


# the published listing shows 28 symbols before trailing off
MIX_LISTING = "a b b a b b a a b b b a a a a b b b b b b a a a a b a b".split()


def fractran_output(fracs: list[tuple], n: int, max_steps: int = 100_000):
    """Reference run with exact rationals: fracs are (p, q, out-or-None)."""
    value = Fraction(n)
    for _ in range(max_steps):
        for p, q, out in fracs:
            nxt = value * Fraction(p, q)
            if nxt.denominator == 1:
                if out is not None:
                    return out
                value = nxt
                break
        else:
            return "bot"
    raise TimeoutError


def fractran_halts_on_2(fracs: list[tuple], max_steps: int) -> bool | None:
    """True / False when decided within max_steps, None otherwise."""
    value = Fraction(2)
    for _ in range(max_steps):
        for p, q, _ in fracs:
            nxt = value * Fraction(p, q)
            if nxt.denominator == 1:
                value = nxt
                break
        else:
            return True
    return None


def digits_lsb(n: int, k: int) -> list[int]:
    out = []
    while n:
        out.append(n % k)
        n //= k
    return out


def dfao_value(delta: dict, out: dict, q0, k: int, n: int):
    """Reference generation: read n's base-k digits least significant first."""
    q = q0
    for d in digits_lsb(n, k):
        q = delta[(q, d)]
    return out[q]


def brute_kernel(stream, k: int, length: int = 64, depth: int = 6) -> int:
    """Number of distinct k-kernel members, compared on prefixes of `length`.

    stream is a function from positions to symbols.
    """
    seen = set()
    frontier = [(0, 1)]  # (offset i, modulus k^p) describing n -> stream(i + k^p n)
    while frontier:
        i, m = frontier.pop()
        key = tuple(stream(i + m * n) for n in range(length))
        if key in seen:
            continue
        seen.add(key)
        if m < k ** depth:
            frontier.extend((i + m * j, m * k) for j in range(k))
    return len(seen)


def bisim_classes_by_prefix(stream_of_node: dict, length: int = 128) -> set[frozenset]:
    """Group nodes whose streams agree on a long prefix."""
    groups: dict = {}
    for node, f in stream_of_node.items():
        groups.setdefault(tuple(f(n) for n in range(length)), set()).add(node)
    return {frozenset(g) for g in groups.values()}


def term_under(t, streams: dict, n: int):
    """Element n of term t when each variable v denotes the list streams[v]."""
    while True:
        if isinstance(t, Var):
            return streams[t.name][n]
        if isinstance(t, Cons):
            if n == 0:
                return t.head
            t, n = t.tail, n - 1
        elif isinstance(t, Zip):
            t, n = t.args[n % t.k], n // t.k
        elif isinstance(t, Proj):
            t, n = t.arg, t.i + t.k * n
        else:
            raise TypeError(t)


def satisfies(s: ZipSpec, streams: dict, length: int) -> bool:
    """Do the given variable prefixes satisfy every equation of s up to length?"""
    return all(term_under(rhs, streams, p) == streams[v][p]
               for v, rhs in s.equations.items() for p in range(length))


def solution_prefixes(s: ZipSpec, length: int, max_free: int = 12) -> set[tuple]:
    """All root prefixes of the given length over solutions of a proj-free spec.

    Every cell (variable, position) is tied by its equation to a constant or to
    an earlier-or-equal cell; union-find groups the cells, and the classes not
    pinned to a constant are free choices over the alphabet.
    """
    parent: dict = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    def cell(t, n):
        while True:
            if isinstance(t, Var):
                return (t.name, n)
            if isinstance(t, Cons):
                if n == 0:
                    return ("=", t.head)
                t, n = t.tail, n - 1
            elif isinstance(t, Zip):
                t, n = t.args[n % t.k], n // t.k
            else:
                raise TypeError(t)

    conflict = False
    for v, rhs in s.equations.items():
        for p in range(length):
            a, b = find((v, p)), find(cell(rhs, p))
            if a == b:
                continue
            if a[0] == "=" and b[0] == "=":
                conflict = True
                continue
            if a[0] == "=":
                a, b = b, a
            parent[a] = b
    if conflict:
        return set()
    roots = [find((s.root, p)) for p in range(length)]
    free = sorted({r for r in roots if r[0] != "="})
    if len(free) > max_free:
        raise ValueError("too many free cells for enumeration")
    import itertools

    out = set()
    for choice in itertools.product(s.alphabet, repeat=len(free)):
        val = dict(zip(free, choice))
        out.add(tuple(r[1] if r[0] == "=" else val[r] for r in roots))
    return out


def mix_value(beta: dict, delta: dict, out: dict, q0, n: int):
    """Reference mixed-base generation: peel the lowest digit in the base of the current state."""
    q = q0
    while n:
        n, d = divmod(n, beta[q])
        q = delta[(q, d)]
    return out[q]


def fractran_steps_on_2(fracs: list[tuple], max_steps: int = 10_000):
    """Computation steps of an output-free program on 2 before it halts.

    Returns ("halts", t), ("loops", None) when a value repeats, or ("unknown", None).
    """
    value = 2
    seen = {value}
    for t in range(max_steps):
        for p, q, _ in fracs:
            if (value * p) % q == 0:
                value = value * p // q
                break
        else:
            return "halts", t
        if value in seen:
            return "loops", None
        seen.add(value)
    return "unknown", None
