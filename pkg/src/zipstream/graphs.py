"""Observation graphs for the N_k, O_k and mixed cobases."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .analysis import is_productive, solve_all
from .core import Cons, Head, Proj, Term, Var, Zip, ZipSpec, make_spec, print_term, reachable
from .errors import (
    AlphabetMismatch,
    BudgetExhausted,
    CobasisMismatch,
    DifferentK,
    NotFlat,
    NotProductive,
    NotZeroInvariant,
)
from .semantics import Normalizer, RewriteBudget, eval_prefix
from .transform import is_zip_guarded, zip_guard

Node = Hashable


@dataclass(frozen=True)
class TlNode:
    """The tail of the stream defined by `inner`."""

    inner: Node


def label(node: Node) -> str:
    if isinstance(node, Term):
        return print_term(node)
    if isinstance(node, TlNode):
        return f"tl({label(node.inner)})"
    if isinstance(node, tuple):
        return "(" + ",".join(label(x) for x in node) + ")"
    return str(node)


@dataclass(frozen=True)
class ObsGraph:
    """Rooted deterministic graph; node s has output out[s] and ordered successors succ[s].

    cobasis is "N" or "O" (uniform arity k) or "Mix" (per-node arity, k is None).
    """

    nodes: tuple
    root: Node
    out: Mapping[Node, str]
    succ: Mapping[Node, tuple]
    cobasis: str = "N"
    k: int | None = 2
    work: int = field(default=0, compare=False)

    def arity(self, node: Node) -> int:
        return len(self.succ[node])

    @property
    def tag(self) -> str:
        return "Mix" if self.cobasis == "Mix" else f"{self.cobasis}({self.k})"

    def reachable(self) -> list:
        order = [self.root]
        seen = {self.root}
        for n in order:
            for m in self.succ[n]:
                if m not in seen:
                    seen.add(m)
                    order.append(m)
        return order

    def edge_name(self, node: Node, i: int) -> str:
        if self.cobasis == "N" and self.k == 2:
            return ("even", "odd")[i]
        if self.cobasis == "O":
            return str(i + 1)
        return str(i)


def _graph(nodes: Sequence, root, out, succ, arities: set[int], force_mix: bool = False,
           cobasis: str = "N", work: int = 0) -> ObsGraph:
    if force_mix or len(arities) != 1:
        return ObsGraph(tuple(nodes), root, dict(out), dict(succ), "Mix", None, work)
    return ObsGraph(tuple(nodes), root, dict(out), dict(succ), cobasis, arities.pop(), work)


# ---------------------------------------------------------------- construction


def first_zip_arity(t: Term, s: ZipSpec) -> int:
    seen = set()
    while True:
        if isinstance(t, Cons):
            t = t.tail
        elif isinstance(t, Var):
            if t.name in seen:
                raise NotFlat(f"{t.name} lies on a zip-free cycle")
            seen.add(t.name)
            t = s.equations[t.name]
        elif isinstance(t, Zip):
            return t.k
        else:
            raise NotFlat(f"unexpected term {t}")


def build_ngraph(s: ZipSpec, budget: RewriteBudget | int | None = None,
                 max_nodes: int = 1_000_000) -> ObsGraph:
    """Observation graph whose nodes are normal forms of iterated projections of the root.

    Accepts every productive, zip-guarded, proj-free specification; flat ones
    are the special case where every node is a cons prefix over a variable.
    """
    if s.dialect.kind == "zip-pi":
        raise NotFlat("proj terms are not supported")
    if not is_zip_guarded(s):
        raise NotFlat("specification has zip_1 or zip-free cycles; apply zip_guard or flatten")
    if not is_productive(s):
        raise NotProductive("observation graphs need a productive specification")
    norm = Normalizer(s, budget=budget)
    root = Var(s.root)
    order: list[Term] = [root]
    index = {root: 0}
    out: dict[Term, str] = {}
    succ: dict[Term, tuple] = {}
    arities = set()
    for t in order:
        k = first_zip_arity(t, s)
        arities.add(k)
        head = norm.normalize(Head(t))
        if not isinstance(head, str):
            raise NotProductive(f"head of {t} has no normal form")
        out[t] = head
        kids = []
        for i in range(k):
            child = norm.normalize(Proj(i, k, t))
            kids.append(child)
            if child not in index:
                index[child] = len(order)
                order.append(child)
                if len(order) > max_nodes:
                    raise BudgetExhausted("observation graph exceeds the node limit")
        succ[t] = tuple(kids)
    mix = s.dialect.kind == "zip-mix"
    return _graph(order, root, out, succ, arities, force_mix=mix, work=norm.budget.used)


def graph_of_spec(s: ZipSpec, budget: RewriteBudget | int | None = None) -> ObsGraph:
    """zip_guard followed by build_ngraph."""
    return build_ngraph(zip_guard(s), budget)


# ---------------------------------------------------------------- interpretation


def interpret_ngraph(g: ObsGraph, n: int) -> str:
    node = g.root
    while n > 0:
        k = g.arity(node)
        node = g.succ[node][n % k]
        n //= k
    return g.out[node]


def interpret_ograph(g: ObsGraph, n: int) -> str:
    node = g.root
    while n > 0:
        k = g.arity(node)
        i = (n - 1) % k + 1
        node = g.succ[node][i - 1]
        n = (n - i) // k
    return g.out[node]


def interpret(g: ObsGraph, n: int) -> str:
    return interpret_ograph(g, n) if g.cobasis == "O" else interpret_ngraph(g, n)


def graph_prefix(g: ObsGraph, n: int) -> list[str]:
    return [interpret(g, i) for i in range(n)]


# ---------------------------------------------------------------- minimization


def partition(g: ObsGraph) -> dict[Node, int]:
    """Coarsest bisimulation as a block number per node (Moore refinement)."""
    keys = {n: (g.out[n], g.arity(n)) for n in g.nodes}
    block = _number(g.nodes, keys)
    while True:
        keys = {n: (block[n], tuple(block[m] for m in g.succ[n])) for n in g.nodes}
        new = _number(g.nodes, keys)
        if len(set(new.values())) == len(set(block.values())):
            return new
        block = new


def _number(nodes: Iterable, keys: Mapping) -> dict:
    ids: dict = {}
    return {n: ids.setdefault(keys[n], len(ids)) for n in nodes}


def minimize(g: ObsGraph) -> ObsGraph:
    block = partition(g)
    rep: dict[int, Node] = {}
    for n in g.nodes:
        rep.setdefault(block[n], n)
    nodes = list(rep.values())
    succ = {n: tuple(rep[block[m]] for m in g.succ[n]) for n in nodes}
    out = {n: g.out[n] for n in nodes}
    return ObsGraph(tuple(nodes), rep[block[g.root]], out, succ, g.cobasis, g.k)


# ---------------------------------------------------------------- bisimulation


@dataclass
class BisimWitness:
    bisimilar: bool
    relation: frozenset | None = None
    index: int | None = None
    symbols: tuple[str, str] | None = None
    path: tuple[int, ...] | None = None
    reason: str = ""
    work: int = 0

    def __bool__(self) -> bool:
        return self.bisimilar


def _family(g: ObsGraph) -> tuple:
    return ("O", g.k) if g.cobasis == "O" else ("N",)


def _check_family(g1: ObsGraph, g2: ObsGraph) -> None:
    if _family(g1) != _family(g2):
        raise CobasisMismatch(f"cannot compare {g1.tag} with {g2.tag}")
    if g1.cobasis == "N" and g2.cobasis == "N" and g1.k != g2.k:
        raise CobasisMismatch(f"cannot compare {g1.tag} with {g2.tag}")


def path_index(g: ObsGraph, path: Sequence[int]) -> int:
    """Stream position observed at the node reached by following `path` from the root."""
    one_based = g.cobasis == "O"
    node = g.root
    index, weight = 0, 1
    for d in path:
        k = g.arity(node)
        index += (d + 1 if one_based else d) * weight
        weight *= k
        node = g.succ[node][d]
    return index


def bisimilar(g1: ObsGraph, g2: ObsGraph) -> BisimWitness:
    """Hopcroft-Karp: union-find over the product reachable from the root pair."""
    _check_family(g1, g2)
    parent: dict = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            parent[x], x = root, parent.get(x, x)
        return root

    start = ((1, g1.root), (2, g2.root))
    queue = deque([(start, ())])
    work = 0
    while queue:
        ((_, a), (_, b)), path = queue.popleft()
        pa, pb = find((1, a)), find((2, b))
        if pa == pb:
            continue
        work += 1
        if g1.out[a] != g2.out[b]:
            idx = path_index(g1, path)
            return BisimWitness(False, index=idx, symbols=(g1.out[a], g2.out[b]), path=path,
                                reason=f"outputs differ at position {idx}", work=work)
        if g1.arity(a) != g2.arity(b):
            return BisimWitness(False, path=path, work=work,
                                reason=f"arities {g1.arity(a)} and {g2.arity(b)} differ")
        parent[pa] = pb
        for i, (x, y) in enumerate(zip(g1.succ[a], g2.succ[b])):
            queue.append((((1, x), (2, y)), path + (i,)))
    relation = set()
    todo = [(g1.root, g2.root)]
    while todo:
        pair = todo.pop()
        if pair in relation:
            continue
        relation.add(pair)
        todo.extend(zip(g1.succ[pair[0]], g2.succ[pair[1]]))
    return BisimWitness(True, relation=frozenset(relation), work=work)


# ---------------------------------------------------------------- equivalence


@dataclass
class EquivalenceReport:
    equivalent: bool
    solutions: tuple[int, int]
    matches: list[tuple[int, int, BisimWitness]] = field(default_factory=list)
    unmatched_left: list[int] = field(default_factory=list)
    unmatched_right: list[int] = field(default_factory=list)
    witnesses: list[BisimWitness] = field(default_factory=list)
    work: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


def equivalent(s1: ZipSpec, s2: ZipSpec) -> EquivalenceReport:
    """Equality of the solution sets of the two roots, by bisimilarity of observation graphs."""
    for s in (s1, s2):
        if s.dialect.kind != "zip-k":
            raise DifferentK(f"equivalence is decided for zip-k specifications, not {s.dialect}")
    if s1.dialect.k != s2.dialect.k:
        raise DifferentK(f"{s1.dialect} versus {s2.dialect}")
    if set(s1.alphabet) != set(s2.alphabet):
        raise AlphabetMismatch(f"{s1.alphabet} versus {s2.alphabet}")
    left = [graph_of_spec(x) for x in solve_all(s1)]
    right = [graph_of_spec(x) for x in solve_all(s2)]
    report = EquivalenceReport(False, (len(left), len(right)))
    report.work = sum(g.work for g in left + right)
    matched_right = set()
    for i, g in enumerate(left):
        found = False
        for j, h in enumerate(right):
            w = bisimilar(g, h)
            report.work += w.work
            if w:
                report.matches.append((i, j, w))
                matched_right.add(j)
                found = True
                break
            report.witnesses.append(w)
        if not found:
            report.unmatched_left.append(i)
    for j, h in enumerate(right):
        if j in matched_right:
            continue
        if not any(bisimilar(g, h) for g in left):
            report.unmatched_right.append(j)
    report.equivalent = not report.unmatched_left and not report.unmatched_right
    if report.equivalent:
        report.witnesses = [w for _, _, w in report.matches]
    return report


# ---------------------------------------------------------------- cobasis conversion


def ngraph_to_ograph(g: ObsGraph) -> ObsGraph:
    """Add a tail state for every node so that edges read proj_1 .. proj_k."""
    if g.cobasis != "N" or not g.k or g.k < 2:
        raise CobasisMismatch("expected an N_k observation graph with k >= 2")
    k = g.k
    out: dict = {}
    succ: dict = {}
    for s in g.nodes:
        n = g.succ[s]
        out[s] = g.out[s]
        succ[s] = tuple(n[1:]) + (TlNode(n[0]),)
        t = TlNode(s)
        out[t] = g.out[n[1]]
        succ[t] = tuple(n[2:]) + (TlNode(n[0]), TlNode(n[1]))
    nodes = tuple(g.nodes) + tuple(TlNode(s) for s in g.nodes)
    return ObsGraph(nodes, g.root, out, succ, "O", k)


def _names(g: ObsGraph, prefix: str) -> dict:
    order = [g.root] + [n for n in g.nodes if n != g.root]
    return {n: f"{prefix}{i}" for i, n in enumerate(order)}


def _prune(eqs: dict, root: str, alphabet: Iterable[str]) -> ZipSpec:
    spec = make_spec(eqs, root=root, alphabet=sorted(set(alphabet)))
    keep = set(reachable(spec))
    return make_spec({v: t for v, t in eqs.items() if v in keep}, root=root,
                     alphabet=spec.alphabet)


def ograph_to_spec(g: ObsGraph, prefix: str = "X") -> ZipSpec:
    """X_i = a_i : zip_k(X_{i,1}, ..., X_{i,k}) per node."""
    names = _names(g, prefix)
    eqs = {}
    for n in names:
        eqs[names[n]] = Cons(g.out[n], Zip(Var(names[m]) for m in g.succ[n]))
    return _prune(eqs, names[g.root], g.out.values())


def check_zero_invariant(g: ObsGraph) -> None:
    for n in g.nodes:
        if g.out[g.succ[n][0]] != g.out[n]:
            raise NotZeroInvariant(label(n), f"node {label(n)} outputs {g.out[n]} but its "
                                   f"0-successor outputs {g.out[g.succ[n][0]]}")


def ngraph_to_spec(g: ObsGraph, prefix: str = "X") -> ZipSpec:
    """Pairs X_i = a_i : X_i' and X_i' = zip(X_f(i,1), ..., X_f(i,k-1), X_f(i,0)')."""
    if g.cobasis == "O":
        raise CobasisMismatch("expected an N_k or mixed observation graph")
    check_zero_invariant(g)
    names = _names(g, prefix)
    eqs = {}
    for n in names:
        x = names[n]
        kids = g.succ[n]
        eqs[x] = Cons(g.out[n], Var(x + "'"))
        eqs[x + "'"] = Zip([Var(names[m]) for m in kids[1:]] + [Var(names[kids[0]] + "'")])
    # kept whole, even when some X_i is only ever reached through X_i'
    return make_spec(eqs, root=names[g.root], alphabet=sorted(set(g.out.values())))


def kernel(g: ObsGraph) -> list:
    """Derivative closure of the root in the minimized graph (the k-kernel as streams)."""
    return minimize(g).reachable()


# ---------------------------------------------------------------- prefix comparison


@dataclass
class PrefixComparison:
    equal: bool
    index: int | None
    left: list[str]
    right: list[str]

    def __bool__(self) -> bool:
        return self.equal


def _prefix_of(x: ZipSpec | ObsGraph, n: int, budget) -> list[str]:
    if isinstance(x, ObsGraph):
        return graph_prefix(x, n)
    return eval_prefix(x, n, budget)


def prefix_compare(a: ZipSpec | ObsGraph, b: ZipSpec | ObsGraph, n: int,
                   budget: RewriteBudget | int | None = None) -> PrefixComparison:
    left, right = _prefix_of(a, n, budget), _prefix_of(b, n, budget)
    for i, (x, y) in enumerate(zip(left, right)):
        if x != y:
            return PrefixComparison(False, i, left, right)
    return PrefixComparison(True, None, left, right)


# ---------------------------------------------------------------- export


def to_dot(g: ObsGraph) -> str:
    ids = {n: f"n{i}" for i, n in enumerate(g.nodes)}
    lines = ["digraph G {", "  rankdir=LR;", f'  start [shape=point]; start -> {ids[g.root]};']
    for n in g.nodes:
        text = f"{label(n)}\\nout={g.out[n]}".replace('"', '\\"')
        lines.append(f'  {ids[n]} [label="{text}"];')
    for n in g.nodes:
        for i, m in enumerate(g.succ[n]):
            lines.append(f'  {ids[n]} -> {ids[m]} [label="{g.edge_name(n, i)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: ObsGraph) -> str:
    data = {
        "cobasis": g.tag,
        "root": label(g.root),
        "nodes": [{"id": label(n), "out": g.out[n], "succ": [label(m) for m in g.succ[n]],
                   "arity": g.arity(n)} for n in g.nodes],
    }
    return json.dumps(data, indent=2) + "\n"


def from_json(text: str) -> ObsGraph:
    data = json.loads(text)
    tag = data["cobasis"]
    nodes = [n["id"] for n in data["nodes"]]
    out = {n["id"]: str(n["out"]) for n in data["nodes"]}
    succ = {n["id"]: tuple(n["succ"]) for n in data["nodes"]}
    for n in data["nodes"]:
        if "arity" in n and n["arity"] != len(n["succ"]):
            raise ValueError(f"node {n['id']}: arity does not match successor count")
    root = data["root"]
    if root in nodes:
        nodes.remove(root)
    nodes.insert(0, root)
    if tag == "Mix":
        return ObsGraph(tuple(nodes), root, out, succ, "Mix", None)
    cobasis, k = tag[0], int(tag[2:-1])
    return ObsGraph(tuple(nodes), root, out, succ, cobasis, k)
