"""Immutable undirected simple graphs and the primitive queries built on them.

Node ids are dense integers ``0..n-1``. Edges are unordered pairs stored
canonically as ``(i, j)`` with ``i < j``. Graphs are values: every operation
returns a new graph and never mutates its input, so graphs can be shared
freely between threads and search branches.

The public constructor validates; operations that already know their edge
set is well-formed (edge flips, induced subgraphs) go through a fast path.
Adjacency sets and the sorted edge view are memoized on first use, which
keeps short-lived search candidates cheap.
"""
from __future__ import annotations

import json
from collections import deque
from itertools import permutations
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Raised for invalid graph construction or queries."""


class Graph:
    """Undirected simple graph on ``n`` labeled nodes."""

    __slots__ = ("n", "edge_set", "_adj", "_edges_cache", "_hash")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()) -> None:
        if n < 0:
            raise GraphError(f"node count must be non-negative, got {n}")
        seen: set[tuple[int, int]] = set()
        for pair in edges:
            i, j = pair
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge endpoint out of range [0, {n}): {(i, j)!r}")
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise GraphError(f"duplicate edge {(i, j)!r}")
            seen.add((i, j))
        self.n = n
        self.edge_set = frozenset(seen)
        self._adj = None
        self._edges_cache = None
        self._hash = hash((n, self.edge_set))

    @classmethod
    def _from_edge_set(cls, n: int, edge_set: frozenset[tuple[int, int]]) -> "Graph":
        """Internal fast path for edge sets already known to be canonical."""
        g = object.__new__(cls)
        g.n = n
        g.edge_set = edge_set
        g._adj = None
        g._edges_cache = None
        g._hash = hash((n, edge_set))
        return g

    @property
    def adj(self) -> tuple[frozenset[int], ...]:
        """Per-node neighbor sets (memoized)."""
        if self._adj is None:
            adj = [set() for _ in range(self.n)]
            for i, j in self.edge_set:
                adj[i].add(j)
                adj[j].add(i)
            self._adj = tuple(frozenset(s) for s in adj)
        return self._adj

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(i, j)`` pairs with ``i < j``, lexicographically sorted."""
        if self._edges_cache is None:
            self._edges_cache = tuple(sorted(self.edge_set))
        return self._edges_cache

    @property
    def num_edges(self) -> int:
        return len(self.edge_set)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def degrees(self) -> tuple[int, ...]:
        if self._adj is not None:
            return tuple(len(s) for s in self._adj)
        deg = [0] * self.n
        for i, j in self.edge_set:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Neighbors of ``i`` in ascending order."""
        return tuple(sorted(self.adj[i]))

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self.edge_set

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edge_set == other.edge_set

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"

    # --- canonical JSON text format ------------------------------------
    # {"edges": [[i, j], ...], "n": int} with i < j, edges sorted
    # lexicographically and keys sorted: a bit-exact canonical form.

    def to_json_obj(self) -> dict:
        return {"n": self.n, "edges": [[i, j] for i, j in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Graph":
        try:
            n = obj["n"]
            edges = [tuple(e) for e in obj["edges"]]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph object: {obj!r}") from exc
        return cls(n, edges)

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        return cls.from_json_obj(json.loads(text))


def new_graph(n: int, edges: Iterable[Sequence[int]] = ()) -> Graph:
    """Construct a validated, canonicalized graph (alias for the constructor)."""
    return Graph(n, edges)


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distance from ``source`` to every node, -1 where unreachable."""
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    adj = g.adj
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(v)
    return dist


def ball_nodes(adj: Sequence[frozenset[int]], root: int, radius: int) -> set[int]:
    """Nodes within ``radius`` hops of ``root`` on a raw adjacency structure."""
    seen = {root}
    frontier = [root]
    for _ in range(radius):
        if not frontier:
            break
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def egonet(g: Graph, root: int, radius: int) -> tuple[Graph, tuple[int, ...]]:
    """Induced subgraph on all nodes within ``radius`` hops of ``root``.

    Returns the relabeled subgraph together with the node map: entry ``k`` of
    the map is the original id of local node ``k``. The root is always
    included (radius 0 gives the single-node graph).
    """
    if not (0 <= root < g.n):
        raise GraphError(f"root {root} out of range [0, {g.n})")
    nodes = sorted(ball_nodes(g.adj, root, radius))
    return induced_subgraph(g, nodes), tuple(nodes)


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """Graph on the given node set, relabeled 0..k-1 in ascending id order.

    Keeps exactly the edges of ``g`` with both endpoints in the set. The
    implicit node map is ``sorted(set(nodes))``.
    """
    sub = sorted(set(nodes))
    for v in sub:
        if not (0 <= v < g.n):
            raise GraphError(f"node {v} out of range [0, {g.n})")
    local = {v: k for k, v in enumerate(sub)}
    # ascending relabeling keeps i < j, so the pairs stay canonical
    edge_set = frozenset(
        (local[i], local[j])
        for (i, j) in g.edge_set
        if i in local and j in local
    )
    return Graph._from_edge_set(len(sub), edge_set)


def edge_flip(g: Graph, i: int, j: int) -> Graph:
    """Return ``g`` with the pair ``{i, j}`` toggled (added iff absent)."""
    if i == j:
        raise GraphError(f"cannot flip self-loop at node {i}")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise GraphError(f"edge endpoint out of range [0, {g.n}): {(i, j)!r}")
    if i > j:
        i, j = j, i
    return Graph._from_edge_set(g.n, g.edge_set ^ {(i, j)})


def diameter(g: Graph) -> int:
    """Largest shortest-path length; requires a connected, non-empty graph."""
    if g.n == 0:
        raise GraphError("diameter of the empty graph is undefined")
    best = 0
    for source in range(g.n):
        dist = bfs_distances(g, source)
        far = max(dist)
        if min(dist) < 0:
            raise GraphError("graph is disconnected")
        best = max(best, far)
    return best


def is_isomorphic_small(g1: Graph, g2: Graph) -> bool:
    """Exact isomorphism by permutation enumeration, for graphs of <= 4 nodes."""
    if g1.n > 4 or g2.n > 4:
        raise GraphError("is_isomorphic_small only supports graphs with <= 4 nodes")
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    if sorted(g1.degrees()) != sorted(g2.degrees()):
        return False
    target = g2.edge_set
    for perm in permutations(range(g1.n)):
        ok = True
        for (i, j) in g1.edges:
            a, b = perm[i], perm[j]
            mapped = (a, b) if a < b else (b, a)
            if mapped not in target:
                ok = False
                break
        if ok:
            return True
    return False


def all_pairs(n: int) -> Iterator[tuple[int, int]]:
    """All unordered node pairs in lexicographic order."""
    for i in range(n):
        for j in range(i + 1, n):
            yield (i, j)
