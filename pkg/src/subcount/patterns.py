"""The eight connected 3- and 4-node patterns with their counting metadata.

Each pattern carries the constants the edge-anchored counting scan needs:
``two_paths`` and ``triangles`` are the numbers of induced 2-paths and
triangles inside the pattern itself, so the scan discovers every occurrence
exactly ``2 * two_paths + 3 * triangles`` times.
"""
from __future__ import annotations

from enum import Enum
from functools import lru_cache

from .graph import Graph


class Pattern(Enum):
    TRIANGLE = ("triangle", 3, 1, 0, 1, ((0, 1), (0, 2), (1, 2)))
    TWO_PATH = ("2path", 3, 2, 1, 0, ((0, 1), (1, 2)))
    FOUR_CLIQUE = ("4clique", 4, 1, 0, 4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))
    CHORDAL_CYCLE = ("chordal_cycle", 4, 2, 2, 2, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3)))
    TAILED_TRIANGLE = ("tailed_triangle", 4, 2, 2, 1, ((0, 1), (0, 2), (1, 2), (2, 3)))
    THREE_STAR = ("3star", 4, 2, 3, 0, ((0, 1), (0, 2), (0, 3)))
    FOUR_CYCLE = ("4cycle", 4, 2, 4, 0, ((0, 1), (0, 3), (1, 2), (2, 3)))
    THREE_PATH = ("3path", 4, 3, 2, 0, ((0, 1), (1, 2), (2, 3)))

    def __init__(
        self,
        key: str,
        size: int,
        diam: int,
        two_paths: int,
        triangles: int,
        edges: tuple[tuple[int, int], ...],
    ) -> None:
        self.key = key
        self.size = size
        self.diam = diam
        self.two_paths = two_paths
        self.triangles = triangles
        self.canonical_edges = edges

    @property
    def norm(self) -> int:
        """Discovery multiplicity of the edge-anchored scan (always > 0)."""
        return 2 * self.two_paths + 3 * self.triangles

    def graph(self) -> Graph:
        return _pattern_graph(self)

    @classmethod
    def from_key(cls, key: str) -> "Pattern":
        try:
            return _BY_KEY[key]
        except KeyError:
            raise KeyError(f"unknown pattern name {key!r}; expected one of "
                           f"{sorted(_BY_KEY)}") from None


@lru_cache(maxsize=None)
def _pattern_graph(p: Pattern) -> Graph:
    return Graph(p.size, p.canonical_edges)


_BY_KEY = {p.key: p for p in Pattern}

ALL_PATTERNS: tuple[Pattern, ...] = tuple(Pattern)
PATTERNS_3: tuple[Pattern, ...] = tuple(p for p in Pattern if p.size == 3)
PATTERNS_4: tuple[Pattern, ...] = tuple(p for p in Pattern if p.size == 4)
PATTERN_INDEX: dict[Pattern, int] = {p: k for k, p in enumerate(ALL_PATTERNS)}
MAX_DIAMETER: int = max(p.diam for p in Pattern)
