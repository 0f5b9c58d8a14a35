"""Synthetic graph corpora: stochastic block model and Erdos-Renyi.

Every graph gets its own RNG stream derived from (dataset seed, index), so
generation is reproducible byte-for-byte and independent of evaluation
order. Labels are the exact counts of all eight patterns.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .counting import CountVector, count_all, counts_from_json, counts_to_json
from .graph import Graph


class DatasetError(ValueError):
    """Invalid dataset specification or corrupted dataset file."""


@dataclass(frozen=True)
class SbmSpec:
    """Contiguous-block SBM: block c spans sizes[0..c) offsets."""

    community_sizes: tuple[int, ...]
    p_in: tuple[float, ...]
    p_out: float

    def __post_init__(self) -> None:
        if len(self.community_sizes) != len(self.p_in):
            raise DatasetError("one intra-community probability per community required")
        if any(s <= 0 for s in self.community_sizes):
            raise DatasetError("community sizes must be positive")
        for p in (*self.p_in, self.p_out):
            if not 0.0 <= p <= 1.0:
                raise DatasetError(f"probability {p} outside [0, 1]")

    @property
    def n(self) -> int:
        return sum(self.community_sizes)

    def to_json_obj(self) -> dict:
        return {"kind": "sbm", "community_sizes": list(self.community_sizes),
                "p_in": list(self.p_in), "p_out": self.p_out}


@dataclass(frozen=True)
class ErSpec:
    n: int
    p: float

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DatasetError("node count must be non-negative")
        if not 0.0 <= self.p <= 1.0:
            raise DatasetError(f"probability {self.p} outside [0, 1]")

    def to_json_obj(self) -> dict:
        return {"kind": "er", "n": self.n, "p": self.p}


GeneratorSpec = Union[SbmSpec, ErSpec]


def generator_from_json(obj: dict) -> GeneratorSpec:
    kind = obj.get("kind")
    if kind == "sbm":
        return SbmSpec(tuple(obj["community_sizes"]), tuple(obj["p_in"]),
                       float(obj["p_out"]))
    if kind == "er":
        return ErSpec(int(obj["n"]), float(obj["p"]))
    raise DatasetError(f"unknown generator kind {kind!r}")


@dataclass(frozen=True)
class DatasetSpec:
    generator: GeneratorSpec
    num_graphs: int
    split: tuple[float, float, float] = (0.3, 0.2, 0.5)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_graphs < 1:
            raise DatasetError("num_graphs must be >= 1")
        if any(f < 0 for f in self.split) or not math.isclose(sum(self.split), 1.0):
            raise DatasetError(f"split fractions must be >= 0 and sum to 1: {self.split}")

    def to_json_obj(self) -> dict:
        return {"generator": self.generator.to_json_obj(),
                "num_graphs": self.num_graphs,
                "split": list(self.split), "seed": self.seed}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DatasetSpec":
        return cls(generator_from_json(obj["generator"]), int(obj["num_graphs"]),
                   tuple(float(f) for f in obj["split"]), int(obj["seed"]))


def gen_sbm(sizes: tuple[int, ...], p_in: tuple[float, ...], p_out: float,
            rng: random.Random) -> Graph:
    """One SBM draw: independent edges, intra-block probability per block."""
    spec = SbmSpec(tuple(sizes), tuple(p_in), p_out)
    block = []
    for c, size in enumerate(spec.community_sizes):
        block.extend([c] * size)
    n = len(block)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = spec.p_in[block[i]] if block[i] == block[j] else spec.p_out
            if rng.random() < p:
                edges.append((i, j))
    return Graph(n, edges)


def gen_er(n: int, p: float, rng: random.Random) -> Graph:
    """One G(n, p) draw."""
    ErSpec(n, p)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return Graph(n, edges)


def _generate(spec: GeneratorSpec, rng: random.Random) -> Graph:
    if isinstance(spec, SbmSpec):
        return gen_sbm(spec.community_sizes, spec.p_in, spec.p_out, rng)
    return gen_er(spec.n, spec.p, rng)


@dataclass
class Dataset:
    spec: DatasetSpec
    graphs: list[Graph]
    labels: list[CountVector]
    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]

    def split_of(self, index: int) -> str:
        if index in self._split_lookup:
            return self._split_lookup[index]
        raise DatasetError(f"index {index} outside dataset")

    @property
    def _split_lookup(self) -> dict[int, str]:
        lookup = getattr(self, "_lookup_cache", None)
        if lookup is None:
            lookup = {}
            for name, idxs in (("train", self.train), ("val", self.val),
                               ("test", self.test)):
                for i in idxs:
                    lookup[i] = name
            object.__setattr__(self, "_lookup_cache", lookup)
        return lookup

    def mean_edge_count(self) -> float:
        return sum(g.num_edges for g in self.graphs) / len(self.graphs)

    def labeled(self, indices) -> list[tuple[Graph, CountVector]]:
        return [(self.graphs[i], self.labels[i]) for i in indices]


def dataset_graph(spec: DatasetSpec, index: int) -> Graph:
    """The graph at ``index``, from its own (seed, index)-derived RNG stream."""
    rng = random.Random(f"{spec.seed}:graph:{index}")
    return _generate(spec.generator, rng)


def dataset_split_indices(spec: DatasetSpec) -> tuple[tuple[int, ...], ...]:
    """(train, val, test) index tuples: shuffled once, floored train/val."""
    order = list(range(spec.num_graphs))
    random.Random(f"{spec.seed}:split").shuffle(order)
    n_train = math.floor(spec.split[0] * spec.num_graphs)
    n_val = math.floor(spec.split[1] * spec.num_graphs)
    return (tuple(sorted(order[:n_train])),
            tuple(sorted(order[n_train:n_train + n_val])),
            tuple(sorted(order[n_train + n_val:])))


def build_dataset(spec: DatasetSpec) -> Dataset:
    """Generate, label with exact counts, and split; pure function of the spec."""
    graphs = [dataset_graph(spec, index) for index in range(spec.num_graphs)]
    labels = [count_all(g) for g in graphs]
    train, val, test = dataset_split_indices(spec)
    return Dataset(spec, graphs, labels, train, val, test)


# --- files ------------------------------------------------------------------
# JSON-lines, one record per graph, plus a sidecar manifest with the spec.

def manifest_path(dataset_path: Path | str) -> Path:
    return Path(str(dataset_path) + ".manifest.json")


def save_dataset(ds: Dataset, path: Path | str) -> None:
    path = Path(path)
    lines = []
    for index, (g, counts) in enumerate(zip(ds.graphs, ds.labels)):
        record = {"graph": g.to_json_obj(),
                  "counts": counts_to_json(counts),
                  "split": ds.split_of(index)}
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {"spec": ds.spec.to_json_obj(), "num_graphs": len(ds.graphs)}
    manifest_path(path).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_dataset(path: Path | str) -> Dataset:
    path = Path(path)
    mpath = manifest_path(path)
    if not mpath.exists():
        raise DatasetError(f"missing manifest {mpath}")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    spec = DatasetSpec.from_json_obj(manifest["spec"])
    graphs: list[Graph] = []
    labels: list[CountVector] = []
    splits: dict[str, list[int]] = {"train": [], "val": [], "test": []}
    with path.open(encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            graphs.append(Graph.from_json_obj(record["graph"]))
            labels.append(counts_from_json(record["counts"]))
            name = record["split"]
            if name not in splits:
                raise DatasetError(f"record {index} has unknown split {name!r}")
            splits[name].append(index)
    if len(graphs) != spec.num_graphs:
        raise DatasetError(
            f"manifest promises {spec.num_graphs} graphs, file has {len(graphs)}")
    return Dataset(spec, graphs, labels, tuple(splits["train"]),
                   tuple(splits["val"]), tuple(splits["test"]))
