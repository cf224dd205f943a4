"""Shape-preserving transformations: free root, zip-guarding, flattening."""

from __future__ import annotations

from typing import Sequence

from .analysis import is_productive
from .core import (
    Cons,
    Term,
    Var,
    Zip,
    ZipSpec,
    cons_all,
    fresh_name,
    make_spec,
    rename,
    reachable,
    split_prefix,
    subterms,
)
from .errors import NotFlat, NotProductive


def ensure_free_root(s: ZipSpec) -> ZipSpec:
    """Add X0' = X0 as new root when the root occurs on some right-hand side."""
    used = any(isinstance(u, Var) and u.name == s.root
               for t in s.equations.values() for u in subterms(t))
    if not used:
        return s
    new = fresh_name(s.root + "'", s.equations)
    eqs = {new: Var(s.root), **s.equations}
    return make_spec(eqs, root=new, alphabet=s.alphabet)


def _primitive(word: tuple[str, ...]) -> tuple[str, ...]:
    p = len(word)
    for d in range(1, p + 1):
        if p % d == 0 and word[:d] * (p // d) == word:
            return word[:d]
    return word


def periodic_graph(u: Sequence[str], k: int):
    """Canonical N_k observation graph of the periodic stream uuu..."""
    from .graphs import ObsGraph

    root = _primitive(tuple(u))
    order = [root]
    succ: dict[tuple, tuple] = {}
    for w in order:
        p = len(w)
        kids = []
        for i in range(k):
            child = _primitive(tuple(w[(k * n + i) % p] for n in range(p)))
            kids.append(child)
            if child not in succ and child not in order:
                order.append(child)
        succ[w] = tuple(kids)
    return ObsGraph(tuple(order), root, {w: w[0] for w in order}, succ, "N", k)


def periodic_to_zipk(u: Sequence[str], k: int, prefix: str = "P") -> ZipSpec:
    """A zip-k specification of the periodic stream uuu..."""
    from .graphs import ngraph_to_spec

    if not u:
        raise ValueError("the period must be non-empty")
    if k < 2:
        raise ValueError("k must be at least 2")
    return ngraph_to_spec(periodic_graph(u, k), prefix=prefix)


def remove_zip1(t: Term) -> Term:
    if isinstance(t, Cons):
        return Cons(t.head, remove_zip1(t.tail))
    if isinstance(t, Zip):
        args = [remove_zip1(a) for a in t.args]
        return args[0] if len(args) == 1 else Zip(args)
    return t


def zip_free_cycles(s: ZipSpec) -> dict[str, list[str]]:
    """Variables on cycles that never pass a zip, mapped to the cycle starting there."""
    nxt = {}
    for v, t in s.equations.items():
        _, tail = split_prefix(t)
        if isinstance(tail, Var):
            nxt[v] = tail.name
    cycles: dict[str, list[str]] = {}
    for start in nxt:
        seen = []
        v = start
        while v in nxt and v not in seen:
            seen.append(v)
            v = nxt[v]
        if v == start:
            cycles[start] = seen
    return cycles


def is_zip_guarded(s: ZipSpec) -> bool:
    return not zip_free_cycles(s) and not any(
        isinstance(u, Zip) and u.k == 1 for t in s.equations.values() for u in subterms(t))


def _default_arity(s: ZipSpec) -> int:
    arities = sorted(u.k for t in s.equations.values() for u in subterms(t)
                     if isinstance(u, Zip) and u.k >= 2)
    return arities[0] if arities else (s.dialect.k if s.dialect.k and s.dialect.k >= 2 else 2)


def zip_guard(s: ZipSpec) -> ZipSpec:
    """Remove zip_1 and replace zip-free cycles by periodic zip-k definitions."""
    k = _default_arity(s)
    eqs = {v: remove_zip1(t) for v, t in s.equations.items()}
    cur = make_spec(eqs, root=s.root, alphabet=s.alphabet)
    cycles = zip_free_cycles(cur)
    if not cycles:
        return cur
    out: dict[str, Term] = {}
    for v, t in cur.equations.items():
        if v not in cycles:
            out[v] = t
            continue
        word: list[str] = []
        for u in cycles[v]:
            word += split_prefix(cur.equations[u])[0]
        per = periodic_to_zipk(word, k, prefix="P")
        names = {}
        taken = set(cur.equations) | set(out)
        for name in per.equations:
            if name == per.root:
                names[name] = v
            else:
                names[name] = fresh_name(f"{v}_{name.lower()}", taken)
                taken.add(names[name])
        for name, rhs in per.equations.items():
            out[names[name]] = rename(rhs, names)
    return make_spec(out, root=s.root, alphabet=s.alphabet)


def max_prefix(s: ZipSpec) -> int:
    return max((len(split_prefix(t)[0]) for t in s.equations.values()), default=0)


def is_flat(s: ZipSpec) -> bool:
    for t in s.equations.values():
        _, tail = split_prefix(t)
        if not (isinstance(tail, Zip) and tail.k >= 2
                and all(isinstance(a, Var) for a in tail.args)):
            return False
    return True


def flatten(s: ZipSpec) -> ZipSpec:
    """Equivalent flat specification: X = c1:...:cm:zip_k(Y1,...,Yk), k >= 2."""
    if s.dialect.kind == "zip-pi":
        raise NotFlat("proj terms cannot be flattened")
    if not is_productive(s):
        raise NotProductive("only productive specifications can be flattened")
    g = zip_guard(s)
    order = list(g.equations)
    eqs = dict(g.equations)
    taken = set(eqs)

    # extract non-variable zip arguments into fresh equations
    work = list(order)
    while work:
        v = work.pop(0)
        prefix, tail = split_prefix(eqs[v])
        if not isinstance(tail, Zip):
            continue
        args = list(tail.args)
        new_vars = []
        for idx, a in enumerate(args):
            if isinstance(a, Var):
                continue
            name = fresh_name(f"{v}_{idx}", taken)
            taken.add(name)
            eqs[name] = a
            args[idx] = Var(name)
            new_vars.append(name)
        if new_vars:
            eqs[v] = cons_all(prefix, Zip(args))
            pos = order.index(v) + 1
            order[pos:pos] = new_vars
            work = new_vars + work

    # unfold variable tails X = c1:...:cm:Y
    limit = len(eqs) * (max(len(split_prefix(t)[0]) for t in eqs.values()) + 2) + 1
    for _ in range(limit):
        changed = False
        for v in order:
            prefix, tail = split_prefix(eqs[v])
            if isinstance(tail, Var):
                eqs[v] = cons_all(prefix, eqs[tail.name])
                changed = True
        if not changed:
            break
    else:
        raise NotFlat("variable-tail unfolding did not terminate (internal error)")

    out = make_spec({v: eqs[v] for v in order}, root=g.root, alphabet=g.alphabet)
    keep = set(reachable(out))
    out = make_spec({v: t for v, t in out.equations.items() if v in keep},
                    root=out.root, alphabet=out.alphabet)
    assert is_flat(out)
    return out
