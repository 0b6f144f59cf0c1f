"""Claim dependency DAGs: parsing, traversal, validation, and quality metrics.

A claim graph is a DAG over claim indices ``0..n_claims-1`` whose edges point
from supporting claims (parents) to the claims they substantiate (children).
All values are immutable after construction and every operation here is a
pure function, so they are safe to call from concurrent workers.
"""

from __future__ import annotations

import heapq
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    CyclicError,
    IndexOutOfRangeError,
    NonSquareError,
    SelfEdgeError,
    SizeMismatchError,
    TooLargeError,
)

# An ordering oracle judges whether a sequence of claim indices is a coherent
# argument: each claim must be deducible from the claims before it (plus the
# question and the reference body of knowledge, which are implicit).
OrderingOracle = Callable[[tuple[int, ...]], bool]


@dataclass(frozen=True)
class ClaimGraph:
    """Immutable DAG over claim indices.

    Parameters
    ----------
    n_claims : int
        Number of claims; vertices are ``0..n_claims-1``.
    edges : frozenset of (parent, child) pairs
        ``(u, v)`` means claim ``v`` relies on claim ``u``.
    """

    n_claims: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        for u, v in self.edges:
            if u == v:
                raise SelfEdgeError(u)
            for w in (u, v):
                if not 0 <= w < self.n_claims:
                    raise IndexOutOfRangeError(w, self.n_claims)
        cycle = _find_cycle(self.n_claims, self.edges)
        if cycle is not None:
            raise CyclicError(cycle)

    @cached_property
    def parents(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.n_claims)]
        for u, v in self.edges:
            out[v].add(u)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def children(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.n_claims)]
        for u, v in self.edges:
            out[u].add(v)
        return tuple(frozenset(s) for s in out)

    def check_index(self, v: int) -> None:
        if not 0 <= v < self.n_claims:
            raise IndexOutOfRangeError(v, self.n_claims)


def _find_cycle(n: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    """Return one directed cycle as a vertex list, or None if acyclic."""
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    for u, v in edges:
        children[u].append(v)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * n
    stack: list[int] = []

    def visit(u: int) -> list[int] | None:
        color[u] = GRAY
        stack.append(u)
        for v in children[u]:
            if color[v] == GRAY:
                return stack[stack.index(v):] + [v]
            if color[v] == WHITE:
                found = visit(v)
                if found is not None:
                    return found
        stack.pop()
        color[u] = BLACK
        return None

    for u in range(n):
        if color[u] == WHITE:
            found = visit(u)
            if found is not None:
                return found
    return None


def parse_adjacency(matrix: Sequence[Sequence[int]]) -> ClaimGraph:
    """Build a claim graph from a nested adjacency matrix.

    Row ``j`` lists the direct ancestors of claim ``j``: edge ``(i, j)`` is
    present iff ``matrix[j][i] == 1``. Rejects non-square input, self-edges,
    and cycles.
    """
    n = len(matrix)
    edges = set()
    for j, row in enumerate(matrix):
        if len(row) != n:
            raise NonSquareError(j, len(row), n)
        for i, cell in enumerate(row):
            if cell not in (0, 1):
                raise ValueError(f"entry ({j},{i}) is {cell!r}, expected 0 or 1")
            if cell:
                edges.add((i, j))
    return ClaimGraph(n, frozenset(edges))


def emit_adjacency(g: ClaimGraph) -> list[list[int]]:
    """Inverse of :func:`parse_adjacency` (bit-exact round trip)."""
    out = [[0] * g.n_claims for _ in range(g.n_claims)]
    for u, v in g.edges:
        out[v][u] = 1
    return out


def ancestors(g: ClaimGraph, v: int) -> frozenset[int]:
    """All claims with a directed path to ``v``, excluding ``v`` itself."""
    g.check_index(v)
    return _reach(g.parents, v)


def descendants(g: ClaimGraph, v: int) -> frozenset[int]:
    """All claims reachable from ``v``, excluding ``v`` itself."""
    g.check_index(v)
    return _reach(g.children, v)


def _reach(adj: tuple[frozenset[int], ...], start: int) -> frozenset[int]:
    seen: set[int] = set()
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return frozenset(seen)


def is_ancestor_connected(g: ClaimGraph, members: frozenset[int]) -> bool:
    """True iff ``members`` contains every ancestor of each of its claims."""
    for v in members:
        g.check_index(v)
        if not g.parents[v] <= members:
            return False
    return True


def topological_order(g: ClaimGraph, members: Iterable[int]) -> tuple[int, ...]:
    """Deterministic topological order of the induced subgraph on ``members``.

    Among all valid topological orders this returns the lexicographically
    smallest by original claim index, so reruns are byte-stable and claim
    numbering is preserved wherever the edges allow.
    """
    members = frozenset(members)
    for v in members:
        g.check_index(v)
    indegree = {v: len(g.parents[v] & members) for v in members}
    ready = [v for v in members if indegree[v] == 0]
    heapq.heapify(ready)
    out: list[int] = []
    while ready:
        u = heapq.heappop(ready)
        out.append(u)
        for w in g.children[u]:
            if w in members:
                indegree[w] -= 1
                if indegree[w] == 0:
                    heapq.heappush(ready, w)
    return tuple(out)


def linear_graph(n: int) -> ClaimGraph:
    """Chain ``0 -> 1 -> ... -> n-1``, the trivial fallback structure."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return ClaimGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


def edit_distance(a: ClaimGraph, b: ClaimGraph) -> int:
    """Size of the symmetric difference of the two edge sets."""
    if a.n_claims != b.n_claims:
        raise SizeMismatchError(
            f"cannot compare graphs with {a.n_claims} and {b.n_claims} claims"
        )
    return len(a.edges ^ b.edges)


# ---------------------------------------------------------------------------
# Oracle-guided reference graph assembly
# ---------------------------------------------------------------------------

# A deducibility predicate answers whether ``candidate`` follows from the
# given supporting ordering of claims (the reference knowledge is implicit,
# so the empty ordering means "a priori").
DeducibilityOracle = Callable[[int, tuple[int, ...]], bool]


@dataclass(frozen=True)
class RootedGraph:
    """A claim graph extended with a synthetic knowledge-root vertex."""

    graph: ClaimGraph
    root: int

    def without_root(self) -> ClaimGraph:
        """Drop the root vertex, keeping claim indices unchanged."""
        return ClaimGraph(
            self.root,
            frozenset(e for e in self.graph.edges if self.root not in e),
        )


def assemble_reference_graph(n_claims: int, oracle: DeducibilityOracle) -> RootedGraph:
    """Layered oracle-driven construction of a reference deducibility graph.

    Starting from a synthetic root standing in for the question and the
    reference body of knowledge, repeatedly admit every claim deducible from
    some coherent ordering of already-admitted claims. Each admitted claim
    picks the supporting set that minimizes overlap with the previous layer
    (ties broken toward smaller sets, then lowest indices) and receives edges
    only from that overlap. Claims the oracle never admits stay disconnected
    from the root. Requires the oracle to be monotone: adding coherent
    support must never make a deducible claim underivable.

    The root is always an implicit member of every supporting set, so claims
    admitted in the first layer are attached directly to it.
    """
    root = n_claims
    admitted: list[int] = []  # claims only, in admission order
    first_layer = True
    prev_claims: frozenset[int] = frozenset()
    remaining = set(range(n_claims))
    edges: set[tuple[int, int]] = set()

    # Memoized coherent ordering per claim set (None if the set has none).
    # Under monotonicity, one witness ordering per set suffices: a claim
    # deducible from some coherent ordering of a set is deducible from any.
    witnesses: dict[frozenset[int], tuple[int, ...] | None] = {frozenset(): ()}

    def witness(s: frozenset[int]) -> tuple[int, ...] | None:
        if s not in witnesses:
            witnesses[s] = None
            for v in sorted(s):
                w = witness(s - {v})
                if w is not None and oracle(v, w):
                    witnesses[s] = w + (v,)
                    break
        return witnesses[s]

    def deducible_from(candidate: int, support: frozenset[int]) -> bool:
        w = witness(support)
        return w is not None and oracle(candidate, w)

    while True:
        layer: list[int] = []
        layer_support: dict[int, frozenset[int]] = {}
        for v in sorted(remaining):
            best: frozenset[int] | None = None
            # Candidate supports, ordered by (previous-layer overlap, size,
            # indices) so the first admissible one is the canonical choice.
            candidates = sorted(
                _subsets(admitted),
                key=lambda s: (len(s & prev_claims), len(s), sorted(s)),
            )
            for sub in candidates:
                if deducible_from(v, sub):
                    best = sub
                    break
            if best is not None:
                layer.append(v)
                layer_support[v] = best
        if not layer:
            break
        for v in layer:
            remaining.discard(v)
            if first_layer:
                edges.add((root, v))
            for u in layer_support[v] & prev_claims:
                edges.add((u, v))
        admitted.extend(layer)
        prev_claims = frozenset(layer)
        first_layer = False
    return RootedGraph(ClaimGraph(n_claims + 1, frozenset(edges)), root)


def _subsets(items: Sequence[int]) -> Iterator[frozenset[int]]:
    n = len(items)
    for mask in range(1 << n):
        yield frozenset(items[i] for i in range(n) if mask >> i & 1)


# ---------------------------------------------------------------------------
# Structural validation against a coherence oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_deducibility_graph`."""

    ok: bool
    witness: frozenset[int] | None = None
    reason: str | None = None


def validate_deducibility_graph(
    g: ClaimGraph,
    oracle: OrderingOracle,
    max_claims: int = 12,
) -> ValidationReport:
    """Exhaustively check that ``g`` is a faithful dependency structure.

    Two clauses are verified over every ancestor-connected vertex set:
    (1) if the set admits a coherent ordering, every topological ordering of
    the induced subgraph must be coherent, and (2) once a set admits no
    coherent ordering, no ancestor-connected superset may admit one. On
    failure, returns the violating vertex set.

    The oracle is assumed prefix-monotone (prefixes of a coherent ordering
    are coherent, and an incoherent prefix cannot be repaired by appending),
    which holds for any oracle derived from claim-by-claim deducibility.
    """
    if g.n_claims > max_claims:
        raise TooLargeError(
            f"{g.n_claims} claims exceeds the exhaustive bound of {max_claims}"
        )
    subsets = [
        s for s in _subsets(tuple(range(g.n_claims))) if is_ancestor_connected(g, s)
    ]
    has_coherent = {s: _has_coherent_ordering(s, oracle) for s in subsets}
    for s in subsets:
        if has_coherent[s]:
            bad_order = _find_incoherent_topological_order(g, s, oracle)
            if bad_order is not None:
                return ValidationReport(
                    ok=False,
                    witness=s,
                    reason=(
                        f"set has a coherent ordering but topological order "
                        f"{bad_order} is incoherent"
                    ),
                )
    # Consistency is monotone along single-vertex removals, which chain to
    # arbitrary ancestor-connected subset pairs.
    for s in subsets:
        if not has_coherent[s]:
            continue
        for v in s:
            smaller = s - {v}
            if is_ancestor_connected(g, smaller) and not has_coherent[smaller]:
                return ValidationReport(
                    ok=False,
                    witness=smaller,
                    reason=(
                        f"set admits no coherent ordering but superset "
                        f"{sorted(s)} does"
                    ),
                )
    return ValidationReport(ok=True)


def _has_coherent_ordering(members: frozenset[int], oracle: OrderingOracle) -> bool:
    """Whether some ordering of ``members`` passes the oracle at every prefix."""
    dead: set[frozenset[int]] = set()

    def grow(prefix: tuple[int, ...], placed: frozenset[int]) -> bool:
        if placed == members:
            return True
        if placed in dead:
            return False
        for v in sorted(members - placed):
            step = prefix + (v,)
            if oracle(step) and grow(step, placed | {v}):
                return True
        dead.add(placed)
        return False

    return grow((), frozenset())


def _find_incoherent_topological_order(
    g: ClaimGraph, members: frozenset[int], oracle: OrderingOracle
) -> tuple[int, ...] | None:
    """Search topological orderings of ``members`` for an incoherent one.

    Returns a full topological ordering with an incoherent prefix, or None
    if every topological ordering is coherent. Visited prefix sets are
    memoized, which is exact for oracles whose prefix verdict depends only
    on the set of preceding claims (true for deducibility-style oracles
    under the superstring assumption).
    """
    seen: set[frozenset[int]] = set()

    def complete(prefix: tuple[int, ...], placed: frozenset[int]) -> tuple[int, ...]:
        rest = topological_order(g, members - placed)
        return prefix + rest

    def walk(prefix: tuple[int, ...], placed: frozenset[int]) -> tuple[int, ...] | None:
        if placed == members:
            return None
        if placed in seen:
            return None
        seen.add(placed)
        for v in sorted(members - placed):
            if not (g.parents[v] & members) <= placed:
                continue
            step = prefix + (v,)
            if not oracle(step):
                return complete(step, placed | {v})
            found = walk(step, placed | {v})
            if found is not None:
                return found
        return None

    return walk((), frozenset())
