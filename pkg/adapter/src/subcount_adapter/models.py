"""Adapter-side models: the user-model loader and two built-in references.

Models are plain callables ``fn(graphs, pattern_name) -> list[float]`` where
each graph arrives as ``(n, edge_list)``. The reference ``echo_count`` model
computes exact induced counts with its own subset classifier, so integration
tests can compare it against any other exact counter; ``edge_count`` is a
deliberately wrong model that predicts the edge number for every pattern.
"""
from __future__ import annotations

import importlib
import inspect
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

GraphTuple = Sequence  # (n, [(i, j), ...])


class AdapterStartupError(RuntimeError):
    """The user model could not be loaded or has the wrong signature."""


@dataclass(frozen=True)
class AdapterModel:
    name: str
    fn: Callable[[list[GraphTuple], str], list[float]]
    deterministic: bool = True


# every connected 3- or 4-node pattern is identified by its edge count plus
# sorted degree multiset within the subset
_PATTERN_SIGNATURES = {
    "triangle": (3, (2, 2, 2)),
    "2path": (3, (1, 1, 2)),
    "4clique": (4, (3, 3, 3, 3)),
    "chordal_cycle": (4, (2, 2, 3, 3)),
    "tailed_triangle": (4, (1, 2, 2, 3)),
    "3star": (4, (1, 1, 1, 3)),
    "4cycle": (4, (2, 2, 2, 2)),
    "3path": (4, (1, 1, 2, 2)),
}


def induced_count(n: int, edges: Sequence[Sequence[int]], pattern_name: str) -> int:
    """Exact induced count by exhaustive subset classification."""
    try:
        size, signature = _PATTERN_SIGNATURES[pattern_name]
    except KeyError:
        raise KeyError(f"unknown pattern {pattern_name!r}; expected one of "
                       f"{sorted(_PATTERN_SIGNATURES)}") from None
    adjacency = [set() for _ in range(n)]
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    count = 0
    for subset in combinations(range(n), size):
        degrees = sorted(
            sum(1 for w in subset if w in adjacency[v]) for v in subset)
        if tuple(degrees) == signature:
            count += 1
    return count


def _echo_count_fn(graphs: list[GraphTuple], pattern_name: str) -> list[float]:
    return [float(induced_count(n, edges, pattern_name)) for n, edges in graphs]


def _edge_count_fn(graphs: list[GraphTuple], pattern_name: str) -> list[float]:
    return [float(len(edges)) for _, edges in graphs]


def echo_count() -> Callable:
    """Reference model: exact induced counts (a perfect regressor)."""
    return _echo_count_fn


def edge_count() -> Callable:
    """Reference model: predicts the edge number for every pattern."""
    return _edge_count_fn


def load_user_model(model_spec: str) -> AdapterModel:
    """Import ``module.path:entrypoint`` and wrap the callable it returns.

    The entrypoint takes no arguments and must return a callable of the form
    ``fn(graphs, pattern_name) -> list[float]``.
    """
    if ":" not in model_spec:
        raise AdapterStartupError(
            f"model spec must look like 'module.path:entrypoint', got {model_spec!r}")
    module_path, entry_name = model_spec.split(":", 1)
    try:
        module = importlib.import_module(module_path)
    except ImportError as exc:
        raise AdapterStartupError(f"cannot import {module_path!r}: {exc}") from exc
    try:
        entrypoint = getattr(module, entry_name)
    except AttributeError:
        raise AdapterStartupError(
            f"{module_path!r} has no attribute {entry_name!r}") from None
    fn = entrypoint()
    if not callable(fn):
        raise AdapterStartupError(
            f"{model_spec} returned {type(fn).__name__}, expected a callable "
            f"fn(graphs, pattern_name) -> list[float]")
    params = [p for p in inspect.signature(fn).parameters.values()
              if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)]
    if len(params) != 2:
        raise AdapterStartupError(
            f"{model_spec} must accept (graphs, pattern_name); its callable "
            f"takes {len(params)} positional parameter(s)")
    return AdapterModel(name=model_spec, fn=fn)
