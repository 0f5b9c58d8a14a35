"""Exact induced-subgraph counting and enumeration for the eight patterns.

The fast path anchors on edges: for every edge ``{v1, v2}`` it classifies each
third node ``v3`` adjacent to the edge (common neighbor / one side only) and
then every candidate fourth node ``v4`` by its adjacency bitmask to the
triplet. Each occurrence of a pattern is discovered once per (anchor edge,
third node) choice inside it, i.e. ``2 * p + 3 * t`` times where ``p`` and
``t`` are the induced 2-paths and triangles of the pattern, so dividing the
raw accumulators by that constant yields the exact count.

``count_bruteforce`` / ``enumerate_bruteforce`` are the independent oracle:
plain subset enumeration with permutation-based isomorphism tests.
"""
from __future__ import annotations

from itertools import combinations, permutations
from typing import Dict, FrozenSet, Tuple

from .graph import Graph, is_isomorphic_small
from .patterns import ALL_PATTERNS, PATTERN_INDEX, PATTERNS_3, PATTERNS_4, Pattern

CountVector = Dict[Pattern, int]
OccurrenceSet = FrozenSet[Tuple[int, ...]]


class CountingError(RuntimeError):
    """Internal consistency failure in the counting engine."""


# --- classification tables ---------------------------------------------
# A subset {x1..xk} is classified by the bitmask of its induced edges:
#   size 3: bit0=e12, bit1=e13, bit2=e23
#   size 4: bit0=e12, bit1=e13, bit2=e14, bit3=e23, bit4=e24, bit5=e34
# Entries are indices into ALL_PATTERNS (-1: not a connected pattern).
# Derived at import time from the canonical pattern graphs, not hand-coded.

_PAIRS_3 = ((0, 1), (0, 2), (1, 2))
_PAIRS_4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _build_table(size: int, pairs: tuple[tuple[int, int], ...],
                 patterns: tuple[Pattern, ...]) -> tuple[int, ...]:
    table = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        g = Graph(size, edges)
        idx = -1
        for p in patterns:
            if is_isomorphic_small(g, p.graph()):
                idx = PATTERN_INDEX[p]
                break
        table.append(idx)
    return tuple(table)


TABLE3: tuple[int, ...] = _build_table(3, _PAIRS_3, PATTERNS_3)
TABLE4: tuple[int, ...] = _build_table(4, _PAIRS_4, PATTERNS_4)

# v3 group bases for the scan, with e12 always set:
# common neighbor (e13, e23), only-v1 (e13), only-v2 (e23).
_BASE_COMMON = 1 | 1 << 1 | 1 << 3
_BASE_SIDE1 = 1 | 1 << 1
_BASE_SIDE2 = 1 | 1 << 3

_IDX_TRIANGLE = PATTERN_INDEX[Pattern.TRIANGLE]
_IDX_TWO_PATH = PATTERN_INDEX[Pattern.TWO_PATH]


def _exact_div(raw: int, norm: int, pattern: Pattern) -> int:
    count, rem = divmod(raw, norm)
    if rem:
        raise CountingError(
            f"accumulator {raw} for {pattern.key} not divisible by {norm}")
    return count


def _scan_counts(g: Graph, want3: bool, want4: bool) -> list[int]:
    """Raw (un-normalized) per-pattern accumulators over one edge traversal."""
    adj = g.adj
    raw = [0] * len(ALL_PATTERNS)
    t3 = TABLE3
    t4 = TABLE4
    for v1, v2 in g.edges:
        n1 = adj[v1]
        n2 = adj[v2]
        common = n1 & n2
        side1 = (n1 - n2) - {v2}
        side2 = (n2 - n1) - {v1}
        if want3:
            raw[_IDX_TRIANGLE] += len(common)
            raw[_IDX_TWO_PATH] += len(side1) + len(side2)
        if want4:
            union12 = n1 | n2
            for base, group in ((_BASE_COMMON, common),
                                (_BASE_SIDE1, side1),
                                (_BASE_SIDE2, side2)):
                for v3 in group:
                    n3 = adj[v3]
                    for v4 in union12 | n3:
                        if v4 == v1 or v4 == v2 or v4 == v3:
                            continue
                        mask = (base
                                | (v4 in n1) << 2
                                | (v4 in n2) << 4
                                | (v4 in n3) << 5)
                        idx = t4[mask]
                        if idx >= 0:
                            raw[idx] += 1
    return raw


def _scan_occurrences(g: Graph, want3: bool, want4: bool) -> list[set[tuple[int, ...]]]:
    """Occurrence node sets per pattern, deduplicated, over the same traversal."""
    adj = g.adj
    occ: list[set[tuple[int, ...]]] = [set() for _ in ALL_PATTERNS]
    t4 = TABLE4
    for v1, v2 in g.edges:
        n1 = adj[v1]
        n2 = adj[v2]
        common = n1 & n2
        side1 = (n1 - n2) - {v2}
        side2 = (n2 - n1) - {v1}
        if want3:
            for v3 in common:
                occ[_IDX_TRIANGLE].add(tuple(sorted((v1, v2, v3))))
            for v3 in side1:
                occ[_IDX_TWO_PATH].add(tuple(sorted((v1, v2, v3))))
            for v3 in side2:
                occ[_IDX_TWO_PATH].add(tuple(sorted((v1, v2, v3))))
        if want4:
            union12 = n1 | n2
            for base, group in ((_BASE_COMMON, common),
                                (_BASE_SIDE1, side1),
                                (_BASE_SIDE2, side2)):
                for v3 in group:
                    n3 = adj[v3]
                    for v4 in union12 | n3:
                        if v4 == v1 or v4 == v2 or v4 == v3:
                            continue
                        mask = (base
                                | (v4 in n1) << 2
                                | (v4 in n2) << 4
                                | (v4 in n3) << 5)
                        idx = t4[mask]
                        if idx >= 0:
                            occ[idx].add(tuple(sorted((v1, v2, v3, v4))))
    return occ


def count_all(g: Graph) -> CountVector:
    """Exact induced counts for all eight patterns in one shared traversal."""
    raw = _scan_counts(g, want3=True, want4=True)
    return {p: _exact_div(raw[PATTERN_INDEX[p]], p.norm, p) for p in ALL_PATTERNS}


def count_induced(g: Graph, pattern: Pattern) -> int:
    """Exact number of node subsets of ``g`` inducing ``pattern``."""
    raw = _scan_counts(g, want3=pattern.size == 3, want4=pattern.size == 4)
    return _exact_div(raw[PATTERN_INDEX[pattern]], pattern.norm, pattern)


def enumerate_induced(g: Graph, pattern: Pattern) -> OccurrenceSet:
    """The exact set of inducing node subsets, each a sorted id tuple."""
    occ = _scan_occurrences(g, want3=pattern.size == 3, want4=pattern.size == 4)
    return frozenset(occ[PATTERN_INDEX[pattern]])


# --- brute-force oracle --------------------------------------------------

def _subset_matches(g: Graph, subset: tuple[int, ...], pattern: Pattern) -> bool:
    """Isomorphism test of the induced subgraph by permutation enumeration."""
    adj = g.adj
    k = pattern.size
    local_edges = set()
    for a in range(k):
        va = subset[a]
        na = adj[va]
        for b in range(a + 1, k):
            if subset[b] in na:
                local_edges.add((a, b))
    target = pattern.graph().edge_set
    if len(local_edges) != len(target):
        return False
    for perm in permutations(range(k)):
        ok = True
        for (a, b) in local_edges:
            x, y = perm[a], perm[b]
            mapped = (x, y) if x < y else (y, x)
            if mapped not in target:
                ok = False
                break
        if ok:
            return True
    return False


def enumerate_bruteforce(g: Graph, pattern: Pattern) -> OccurrenceSet:
    """Oracle enumeration: every ``C(n, k)`` subset tested for isomorphism."""
    return frozenset(
        subset
        for subset in combinations(range(g.n), pattern.size)
        if _subset_matches(g, subset, pattern)
    )


def count_bruteforce(g: Graph, pattern: Pattern) -> int:
    """Oracle count by exhaustive subset enumeration (intended for n <= ~16)."""
    return sum(
        1
        for subset in combinations(range(g.n), pattern.size)
        if _subset_matches(g, subset, pattern)
    )


# --- serialization -------------------------------------------------------

def counts_to_json(counts: CountVector) -> dict[str, int]:
    """Pattern-name -> count map with the fixed pattern key vocabulary."""
    return {p.key: int(counts[p]) for p in ALL_PATTERNS}


def counts_from_json(obj: dict[str, int]) -> CountVector:
    missing = {p.key for p in ALL_PATTERNS} - set(obj)
    if missing:
        raise ValueError(f"count map missing patterns: {sorted(missing)}")
    return {Pattern.from_key(key): int(value) for key, value in obj.items()}
