"""Single-edge perturbations with exact, locally computed count updates.

Toggling one pair ``{i, j}`` can only change subsets that contain both
endpoints, and every such subset lies inside the diameter-radius egonet of
``i`` taken in the graph that contains the edge. Two consequences drive this
module:

* ``apply_edit`` / ``local_count_delta`` recount only the egonet patch
  (before vs. after) instead of the whole graph.
* The hot paths (one-step space generation, candidate scoring) shrink the
  patch further: subsets not containing both ``i`` and ``j`` cancel between
  the two patch counts, so it suffices to enumerate the subsets through the
  pair and classify each one with and without the edge.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .counting import (
    TABLE3,
    TABLE4,
    CountVector,
    OccurrenceSet,
    count_all,
    count_induced,
)
from .graph import Graph, all_pairs, ball_nodes, edge_flip, induced_subgraph
from .patterns import ALL_PATTERNS, MAX_DIAMETER, PATTERN_INDEX, Pattern


class EditError(ValueError):
    """Raised when an edit is invalid on the graph it is applied to."""


class EditOp(Enum):
    ADD = "add"
    DELETE = "del"


@dataclass(frozen=True)
class EdgeEdit:
    """A single edge toggle, canonicalized to ``i < j``."""

    i: int
    j: int
    op: EditOp

    def __post_init__(self) -> None:
        if not self.i < self.j:
            raise EditError(f"edit endpoints must satisfy i < j, got {(self.i, self.j)}")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)

    def sort_key(self) -> tuple[int, int, str]:
        return (self.i, self.j, self.op.value)

    def to_json_obj(self) -> dict:
        return {"op": self.op.value, "i": self.i, "j": self.j}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EdgeEdit":
        return cls(int(obj["i"]), int(obj["j"]), EditOp(obj["op"]))


EditSequence = Sequence[EdgeEdit]


def edits_to_json(edits: Iterable[EdgeEdit]) -> list[dict]:
    return [e.to_json_obj() for e in edits]


def edits_from_json(objs: Iterable[dict]) -> tuple[EdgeEdit, ...]:
    return tuple(EdgeEdit.from_json_obj(o) for o in objs)


def sequence_key(edits: Iterable[EdgeEdit]) -> tuple[tuple[int, int, str], ...]:
    """Deterministic lexicographic key for tie-breaking between sequences."""
    return tuple(e.sort_key() for e in edits)


def toggled_pairs(edits: Iterable[EdgeEdit]) -> frozenset[tuple[int, int]]:
    """Pairs toggled an odd number of times: the net perturbation size."""
    flipped: set[tuple[int, int]] = set()
    for e in edits:
        flipped.symmetric_difference_update((e.pair,))
    return frozenset(flipped)


def validate_edit(g: Graph, edit: EdgeEdit) -> None:
    if not (0 <= edit.i < g.n and 0 <= edit.j < g.n):
        raise EditError(f"edit endpoints out of range [0, {g.n}): {edit}")
    present = edit.pair in g.edge_set
    if edit.op is EditOp.ADD and present:
        raise EditError(f"cannot add existing edge {edit.pair}")
    if edit.op is EditOp.DELETE and not present:
        raise EditError(f"cannot delete absent edge {edit.pair}")


def edit_for_pair(g: Graph, i: int, j: int) -> EdgeEdit:
    """The toggle of ``{i, j}`` with the operation implied by membership."""
    if i > j:
        i, j = j, i
    op = EditOp.DELETE if (i, j) in g.edge_set else EditOp.ADD
    return EdgeEdit(i, j, op)


def apply_edits(g: Graph, edits: Iterable[EdgeEdit]) -> Graph:
    """Apply a sequence of validated edits, returning the final graph."""
    for e in edits:
        validate_edit(g, e)
        g = edge_flip(g, e.i, e.j)
    return g


# --- egonet patches ------------------------------------------------------

@dataclass(frozen=True)
class LocalPatch:
    """Induced before/after subgraphs on one egonet node set.

    ``nodes[k]`` is the original id of local node ``k``; ``before`` and
    ``after`` differ exactly by the toggled edge.
    """

    nodes: tuple[int, ...]
    before: Graph
    after: Graph


def _patch_and_flipped(g: Graph, edit: EdgeEdit, radius: int) -> tuple[LocalPatch, Graph]:
    flipped = edge_flip(g, edit.i, edit.j)
    host = g if edit.op is EditOp.DELETE else flipped
    nodes = sorted(ball_nodes(host.adj, edit.i, radius))
    before = induced_subgraph(g, nodes)
    after = induced_subgraph(flipped, nodes)
    return LocalPatch(tuple(nodes), before, after), flipped


def build_local_patch(g: Graph, edit: EdgeEdit, radius: int) -> LocalPatch:
    """Egonet patch rooted at ``edit.i`` in the graph containing the edge."""
    validate_edit(g, edit)
    patch, _ = _patch_and_flipped(g, edit, radius)
    return patch


def local_count_delta(g: Graph, edit: EdgeEdit, pattern: Pattern) -> int:
    """Exact count change of ``pattern`` caused by ``edit``, from one patch."""
    validate_edit(g, edit)
    patch, _ = _patch_and_flipped(g, edit, pattern.diam)
    return count_induced(patch.after, pattern) - count_induced(patch.before, pattern)


def apply_edit(g: Graph, counts: CountVector, edit: EdgeEdit) -> tuple[Graph, CountVector]:
    """Perturbed graph plus the exactly updated counts for all patterns.

    One shared patch (radius = the largest pattern diameter) serves every
    pattern; ``counts`` must be correct for ``g`` and is not modified.
    """
    validate_edit(g, edit)
    patch, flipped = _patch_and_flipped(g, edit, MAX_DIAMETER)
    before = count_all(patch.before)
    after = count_all(patch.after)
    updated = {p: counts[p] + after[p] - before[p] for p in ALL_PATTERNS}
    return flipped, updated


# --- pair-local scans (hot path) -----------------------------------------
# Enumerate exactly the 3- and 4-node subsets containing both i and j that
# are connected in at least one of the two edge states, classify each with
# and without the edge, and accumulate. Equivalent to differencing the two
# patch counts, with the cancelling terms dropped.
#
# Per-pattern lookup tables fold the with/without-edge classification into a
# single access: entry [mask] is the count change (or membership-changed
# flag) for a subset whose non-toggled edge bits are ``mask``.

_DELTA3 = tuple(
    tuple((TABLE3[m | 1] == pidx) - (TABLE3[m] == pidx) for m in range(8))
    for pidx in range(len(ALL_PATTERNS)))
_DELTA4 = tuple(
    tuple((TABLE4[m | 1] == pidx) - (TABLE4[m] == pidx) for m in range(64))
    for pidx in range(len(ALL_PATTERNS)))
_FLIP3 = tuple(
    tuple((TABLE3[m | 1] == pidx) != (TABLE3[m] == pidx) for m in range(8))
    for pidx in range(len(ALL_PATTERNS)))
_FLIP4 = tuple(
    tuple((TABLE4[m | 1] == pidx) != (TABLE4[m] == pidx) for m in range(64))
    for pidx in range(len(ALL_PATTERNS)))


def _pair_delta_with_minus_without(adj: Sequence[frozenset[int]], i: int, j: int,
                                   pattern: Pattern) -> int:
    ni = adj[i]
    nj = adj[j]
    anchored = (ni | nj) - {i, j}
    pidx = PATTERN_INDEX[pattern]
    delta = 0
    if pattern.size == 3:
        dt = _DELTA3[pidx]
        for a in anchored:
            delta += dt[((a in ni) << 1) | ((a in nj) << 2)]
        return delta
    dt = _DELTA4[pidx]
    for a in anchored:
        na = adj[a]
        base = ((a in ni) << 1) | ((a in nj) << 3)
        for b in anchored | na:
            if b == a or b == i or b == j:
                continue
            if b <= a and b in anchored:
                continue
            delta += dt[base
                        | (b in ni) << 2
                        | (b in nj) << 4
                        | (b in na) << 5]
    return delta


def pair_toggle_delta(g: Graph, i: int, j: int, pattern: Pattern) -> int:
    """Count change of ``pattern`` if the pair ``{i, j}`` were toggled in ``g``."""
    if i > j:
        i, j = j, i
    delta = _pair_delta_with_minus_without(g.adj, i, j, pattern)
    return -delta if (i, j) in g.edge_set else delta


def pair_preserves_occurrences(g: Graph, i: int, j: int, pattern: Pattern) -> bool:
    """Whether toggling ``{i, j}`` leaves the occurrence set of ``pattern`` intact.

    Each through-pair subset is enumerated exactly once, so the occurrence
    sets are equal iff no subset changes its pattern membership.
    """
    if i > j:
        i, j = j, i
    adj = g.adj
    ni = adj[i]
    nj = adj[j]
    anchored = (ni | nj) - {i, j}
    pidx = PATTERN_INDEX[pattern]
    if pattern.size == 3:
        ft = _FLIP3[pidx]
        for a in anchored:
            if ft[((a in ni) << 1) | ((a in nj) << 2)]:
                return False
        return True
    ft = _FLIP4[pidx]
    for a in anchored:
        na = adj[a]
        base = ((a in ni) << 1) | ((a in nj) << 3)
        for b in anchored | na:
            if b == a or b == i or b == j:
                continue
            if b <= a and b in anchored:
                continue
            if ft[base
                  | (b in ni) << 2
                  | (b in nj) << 4
                  | (b in na) << 5]:
                return False
    return True


def pair_scan_all(g: Graph, i: int, j: int) -> tuple[list[int], list[bool]]:
    """Toggle deltas and occurrence-set-changed flags for all eight patterns.

    Returns ``(deltas, changed)`` indexed like ``ALL_PATTERNS``; one pair
    enumeration covers every pattern.
    """
    if i > j:
        i, j = j, i
    adj = g.adj
    ni = adj[i]
    nj = adj[j]
    anchored = (ni | nj) - {i, j}
    deltas = [0] * len(ALL_PATTERNS)
    changed = [False] * len(ALL_PATTERNS)
    t3 = TABLE3
    t4 = TABLE4
    for a in anchored:
        base3 = ((a in ni) << 1) | ((a in nj) << 2)
        without = t3[base3]
        with_edge = t3[base3 | 1]
        if without != with_edge:
            if without >= 0:
                deltas[without] -= 1
                changed[without] = True
            if with_edge >= 0:
                deltas[with_edge] += 1
                changed[with_edge] = True
        na = adj[a]
        base4 = ((a in ni) << 1) | ((a in nj) << 3)
        for b in anchored | na:
            if b == a or b == i or b == j:
                continue
            if b <= a and b in anchored:
                continue
            mask = (base4
                    | (b in ni) << 2
                    | (b in nj) << 4
                    | (b in na) << 5)
            without = t4[mask]
            with_edge = t4[mask | 1]
            if without != with_edge:
                if without >= 0:
                    deltas[without] -= 1
                    changed[without] = True
                if with_edge >= 0:
                    deltas[with_edge] += 1
                    changed[with_edge] = True
    if (i, j) in g.edge_set:
        deltas = [-d for d in deltas]
    return deltas, changed


# --- one-step perturbation spaces -----------------------------------------

def gen_P1(g: Graph) -> Iterator[EdgeEdit]:
    """All single-pair toggles, in lexicographic pair order."""
    for i, j in all_pairs(g.n):
        op = EditOp.DELETE if (i, j) in g.edge_set else EditOp.ADD
        yield EdgeEdit(i, j, op)


def gen_P1_count_preserving(g: Graph, pattern: Pattern, count: int) -> list[EdgeEdit]:
    """The single toggles that leave the count of ``pattern`` unchanged.

    ``count`` must be the current exact count; each candidate's new count is
    obtained from the local update rule and compared against it.
    """
    kept = []
    for edit in gen_P1(g):
        new_count = count + pair_toggle_delta(g, edit.i, edit.j, pattern)
        if new_count == count:
            kept.append(edit)
    return kept


def gen_P1_subgraph_preserving(g: Graph, pattern: Pattern,
                               occ: OccurrenceSet) -> list[EdgeEdit]:
    """The single toggles that leave the exact occurrence set unchanged.

    ``occ`` pins the current occurrence set of ``pattern`` on ``g``; since a
    toggle can only create or destroy occurrences through its endpoints, the
    check is local to each candidate pair.
    """
    return [
        edit
        for edit in gen_P1(g)
        if pair_preserves_occurrences(g, edit.i, edit.j, pattern)
    ]


def sample_edits_degree_weighted(g: Graph, m: int,
                                 rng: random.Random) -> list[EdgeEdit]:
    """Sample ``m`` distinct toggles with weight ``d(i)^2 + d(j)^2``.

    Sampling is without replacement and fully determined by ``rng``. Pairs
    whose weight is zero (both endpoints isolated) are drawn uniformly once
    every positive-weight pair is exhausted; the all-zero-degree graph
    degenerates to uniform sampling outright.
    """
    pairs = list(all_pairs(g.n))
    if m > len(pairs):
        raise EditError(f"cannot sample {m} edits from {len(pairs)} pairs")
    deg = g.degrees()
    weights = [float(deg[i] * deg[i] + deg[j] * deg[j]) for i, j in pairs]
    chosen: list[EdgeEdit] = []
    active = list(range(len(pairs)))
    while len(chosen) < m:
        total = 0.0
        for idx in active:
            total += weights[idx]
        if total <= 0.0:
            pick_pos = rng.randrange(len(active))
        else:
            r = rng.random() * total
            acc = 0.0
            pick_pos = len(active) - 1
            for pos, idx in enumerate(active):
                acc += weights[idx]
                if r < acc:
                    pick_pos = pos
                    break
        idx = active.pop(pick_pos)
        i, j = pairs[idx]
        chosen.append(edit_for_pair(g, i, j))
    return chosen
