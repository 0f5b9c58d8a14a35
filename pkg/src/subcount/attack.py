"""Greedy and beam-search attacks over the one-step perturbation spaces.

The beam holds perturbed variants of one clean graph; every step expands each
member by its one-step space, scores all new candidates with a single batched
model call, and keeps the top ``k`` by adversarial loss. Ties are broken by
the lexicographic order of the edit sequences, which makes every attack a
pure function of (model, graph, config). Ground-truth counts ride along via
the exact local update, and the returned result is re-validated against a
fresh full recount before it leaves this module.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .counting import count_induced, enumerate_induced
from .graph import Graph, edge_flip
from .patterns import Pattern
from .perturb import (
    EdgeEdit,
    edits_from_json,
    edits_to_json,
    gen_P1,
    gen_P1_count_preserving,
    gen_P1_subgraph_preserving,
    pair_toggle_delta,
    sample_edits_degree_weighted,
    toggled_pairs,
)


class AttackError(ValueError):
    """Invalid attack configuration."""


class AttackInternalError(RuntimeError):
    """Post-hoc soundness validation of an attack result failed."""


class AttackAborted(RuntimeError):
    """The model failed mid-attack; ``partial`` holds the trajectory so far."""

    def __init__(self, message: str, partial: "AttackResult") -> None:
        super().__init__(message)
        self.partial = partial


class PerturbationSpace(Enum):
    CONSTRAINED = "constrained"
    COUNT_PRESERVING = "count"
    SUBGRAPH_PRESERVING = "subgraph"


@dataclass(frozen=True)
class AttackConfig:
    space: PerturbationSpace
    budget: int
    beam_width: int = 1
    margin: float = 1.0
    sample_m: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise AttackError(f"budget must be >= 1, got {self.budget}")
        if self.beam_width < 1:
            raise AttackError(f"beam width must be >= 1, got {self.beam_width}")
        if self.margin < 0:
            raise AttackError(f"margin must be >= 0, got {self.margin}")
        if self.sample_m is not None and self.sample_m < 1:
            raise AttackError(f"sample size must be >= 1, got {self.sample_m}")

    def to_json_obj(self) -> dict:
        return {"space": self.space.value, "budget": self.budget,
                "beam_width": self.beam_width, "margin": self.margin,
                "sample_m": self.sample_m, "seed": self.seed}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AttackConfig":
        return cls(PerturbationSpace(obj["space"]), int(obj["budget"]),
                   int(obj["beam_width"]), float(obj["margin"]),
                   None if obj.get("sample_m") is None else int(obj["sample_m"]),
                   int(obj["seed"]))


def adversarial_loss(pred: float, true_count: int) -> float:
    return abs(pred - true_count)


def round_to_count(pred: float) -> int:
    """Nearest-integer rounding as floor(pred + 0.5), negatives included."""
    return math.floor(pred + 0.5)


@dataclass(frozen=True)
class Verdict:
    """The three adversarial-example conditions, stored separately."""

    correct_clean: bool
    wrong_perturbed: bool
    margin_exceeded: bool
    adversarial: bool

    def to_json_obj(self) -> dict:
        return {"correct_clean": self.correct_clean,
                "wrong_perturbed": self.wrong_perturbed,
                "margin_exceeded": self.margin_exceeded,
                "adversarial": self.adversarial}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Verdict":
        return cls(bool(obj["correct_clean"]), bool(obj["wrong_perturbed"]),
                   bool(obj["margin_exceeded"]), bool(obj["adversarial"]))


def classify_adversarial(clean: tuple[float, int], perturbed: tuple[float, int],
                         margin: float) -> Verdict:
    """Apply the adversarial-example conditions to a clean/perturbed pair.

    When the clean loss is exactly zero the relative loss increase is taken
    as +inf, so the margin condition holds iff the perturbed loss is
    positive: a perfectly predicted clean graph cannot be a near-miss.
    """
    clean_pred, clean_count = clean
    pert_pred, pert_count = perturbed
    correct_clean = round_to_count(clean_pred) == clean_count
    wrong_perturbed = round_to_count(pert_pred) != pert_count
    clean_loss = adversarial_loss(clean_pred, clean_count)
    pert_loss = adversarial_loss(pert_pred, pert_count)
    if clean_loss == 0.0:
        margin_exceeded = pert_loss > 0.0
    else:
        margin_exceeded = (pert_loss - clean_loss) / clean_loss > margin
    return Verdict(correct_clean, wrong_perturbed, margin_exceeded,
                   correct_clean and wrong_perturbed and margin_exceeded)


@dataclass
class _Member:
    graph: Graph
    edits: tuple[EdgeEdit, ...]
    toggled: frozenset[tuple[int, int]]
    count: int
    seq_key: tuple = ()
    pred: float | None = None
    loss: float = -1.0


@dataclass(frozen=True)
class StepRecord:
    """Best candidate of one search step."""

    edits: tuple[EdgeEdit, ...]
    pred: float
    count: int
    loss: float

    def to_json_obj(self) -> dict:
        return {"edits": edits_to_json(self.edits), "pred": self.pred,
                "count": self.count, "loss": self.loss}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "StepRecord":
        return cls(edits_from_json(obj["edits"]), float(obj["pred"]),
                   int(obj["count"]), float(obj["loss"]))


@dataclass
class AttackResult:
    """Full trajectory of one attack on one clean graph.

    ``best`` is the trajectory-wide loss maximum (what the verdict is
    computed on); ``final_beam`` is the loss argmax over the final beam,
    which may be smaller when the search regresses after its peak.
    """

    pattern: Pattern
    config: AttackConfig
    model_name: str
    clean_graph: Graph
    clean_pred: float
    clean_count: int
    best_graph: Graph
    best: StepRecord
    verdict: Verdict
    final_beam: StepRecord
    final_verdict: Verdict
    steps: list[StepRecord] = field(default_factory=list)
    model_queries: int = 0
    terminated_early: bool = False
    graph_id: int | None = None

    @property
    def clean_loss(self) -> float:
        return adversarial_loss(self.clean_pred, self.clean_count)

    def to_json_obj(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "pattern": self.pattern.key,
            "model": self.model_name,
            "config": self.config.to_json_obj(),
            "clean": {"graph": self.clean_graph.to_json_obj(),
                      "pred": self.clean_pred, "count": self.clean_count,
                      "loss": self.clean_loss},
            "steps": [s.to_json_obj() for s in self.steps],
            "best": {**self.best.to_json_obj(),
                     "graph": self.best_graph.to_json_obj(),
                     "verdict": self.verdict.to_json_obj()},
            "final_beam": {**self.final_beam.to_json_obj(),
                           "verdict": self.final_verdict.to_json_obj()},
            "model_queries": self.model_queries,
            "terminated_early": self.terminated_early,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AttackResult":
        best = obj["best"]
        return cls(
            pattern=Pattern.from_key(obj["pattern"]),
            config=AttackConfig.from_json_obj(obj["config"]),
            model_name=obj["model"],
            clean_graph=Graph.from_json_obj(obj["clean"]["graph"]),
            clean_pred=float(obj["clean"]["pred"]),
            clean_count=int(obj["clean"]["count"]),
            best_graph=Graph.from_json_obj(best["graph"]),
            best=StepRecord.from_json_obj(best),
            verdict=Verdict.from_json_obj(best["verdict"]),
            final_beam=StepRecord.from_json_obj(obj["final_beam"]),
            final_verdict=Verdict.from_json_obj(obj["final_beam"]["verdict"]),
            steps=[StepRecord.from_json_obj(s) for s in obj["steps"]],
            model_queries=int(obj["model_queries"]),
            terminated_early=bool(obj["terminated_early"]),
            graph_id=obj.get("graph_id"),
        )


def _one_step_edits(member: _Member, pattern: Pattern, cfg: AttackConfig,
                    clean_occ, step: int, member_index: int) -> list[tuple[EdgeEdit, int]]:
    """(edit, count delta) pairs for one beam member's one-step space."""
    g = member.graph
    if cfg.space is PerturbationSpace.CONSTRAINED:
        if cfg.sample_m is not None and cfg.sample_m < g.n * (g.n - 1) // 2:
            rng = random.Random(f"{cfg.seed}:{step}:{member_index}")
            edits = sample_edits_degree_weighted(g, cfg.sample_m, rng)
        else:
            edits = list(gen_P1(g))
        return [(e, pair_toggle_delta(g, e.i, e.j, pattern)) for e in edits]
    if cfg.space is PerturbationSpace.COUNT_PRESERVING:
        return [(e, 0) for e in gen_P1_count_preserving(g, pattern, member.count)]
    return [(e, 0) for e in gen_P1_subgraph_preserving(g, pattern, clean_occ)]


def beam_attack(model, g: Graph, pattern: Pattern, cfg: AttackConfig,
                graph_id: int | None = None) -> AttackResult:
    """Beam search for the loss-maximizing perturbation (greedy when k = 1).

    Candidates with identical net toggled-pair sets are merged before
    scoring, so each distinct graph costs at most one model query per step.
    Members whose one-step space is empty are carried forward unexpanded; if
    no member can expand the attack terminates early with the current best.
    """
    if cfg.sample_m is not None and cfg.sample_m > g.n * (g.n - 1) // 2:
        raise AttackError(
            f"sample size {cfg.sample_m} exceeds the {g.n * (g.n - 1) // 2} node pairs")
    clean_count = count_induced(g, pattern)
    clean_occ = (enumerate_induced(g, pattern)
                 if cfg.space is PerturbationSpace.SUBGRAPH_PRESERVING else None)
    queries = 0
    steps: list[StepRecord] = []
    terminated_early = False

    def build_result(best: _Member, final: _Member, clean_pred: float) -> AttackResult:
        best_rec = StepRecord(best.edits, best.pred, best.count, best.loss)
        final_rec = StepRecord(final.edits, final.pred, final.count, final.loss)
        return AttackResult(
            pattern=pattern, config=cfg, model_name=getattr(model, "name", "model"),
            clean_graph=g, clean_pred=clean_pred, clean_count=clean_count,
            best_graph=best.graph, best=best_rec,
            verdict=classify_adversarial((clean_pred, clean_count),
                                         (best.pred, best.count), cfg.margin),
            final_beam=final_rec,
            final_verdict=classify_adversarial((clean_pred, clean_count),
                                               (final.pred, final.count), cfg.margin),
            steps=steps, model_queries=queries,
            terminated_early=terminated_early, graph_id=graph_id)

    try:
        clean_pred = model.predict_batch([g], pattern)[0]
    except Exception as exc:
        dummy = _Member(g, (), frozenset(), clean_count, seq_key=(),
                        pred=float("nan"), loss=0.0)
        raise AttackAborted(f"model failed on the clean graph: {exc}",
                            build_result(dummy, dummy, float("nan"))) from exc
    queries += 1
    clean_member = _Member(g, (), frozenset(), clean_count, seq_key=(),
                           pred=clean_pred,
                           loss=adversarial_loss(clean_pred, clean_count))
    best = clean_member
    members = [clean_member]

    for step in range(cfg.budget):
        pool: dict[frozenset[tuple[int, int]], _Member] = {}
        expanded_any = False

        def offer(cand: _Member) -> None:
            existing = pool.get(cand.toggled)
            if existing is None:
                pool[cand.toggled] = cand
            elif cand.seq_key < existing.seq_key:
                # same toggled set means the same graph; keep a known score
                if cand.pred is None and existing.pred is not None:
                    cand.pred = existing.pred
                    cand.loss = existing.loss
                pool[cand.toggled] = cand

        for member_index, mem in enumerate(members):
            expansions = _one_step_edits(mem, pattern, cfg, clean_occ,
                                         step, member_index)
            if not expansions:
                offer(mem)
                continue
            expanded_any = True
            for edit, delta in expansions:
                offer(_Member(
                    graph=edge_flip(mem.graph, edit.i, edit.j),
                    edits=mem.edits + (edit,),
                    toggled=mem.toggled ^ {edit.pair},
                    count=mem.count + delta,
                    seq_key=mem.seq_key + (edit.sort_key(),)))
        if not expanded_any:
            terminated_early = True
            break

        candidates = sorted(pool.values(), key=lambda m: m.seq_key)
        unscored = [m for m in candidates if m.pred is None]
        if unscored:
            try:
                preds = model.predict_batch([m.graph for m in unscored], pattern)
            except Exception as exc:
                final = members[0]
                raise AttackAborted(f"model failed at step {step}: {exc}",
                                    build_result(best, final, clean_pred)) from exc
            queries += len(unscored)
            for m, p in zip(unscored, preds):
                m.pred = p
                m.loss = adversarial_loss(p, m.count)
        ranked = sorted(candidates, key=lambda m: (-m.loss, m.seq_key))
        top = ranked[0]
        steps.append(StepRecord(top.edits, top.pred, top.count, top.loss))
        if top.loss > best.loss:
            best = top
        members = ranked[:cfg.beam_width]

    result = build_result(best, members[0], clean_pred)
    _validate_result(result, clean_occ)
    return result


def _validate_result(result: AttackResult, clean_occ) -> None:
    """Fresh full recount of the returned graphs; raises on any drift."""
    cfg = result.config
    for graph, record, label in ((result.best_graph, result.best, "best"),):
        fresh = count_induced(graph, result.pattern)
        if fresh != record.count:
            raise AttackInternalError(
                f"{label} graph count drifted: maintained {record.count}, "
                f"recounted {fresh}")
        if len(toggled_pairs(record.edits)) > cfg.budget:
            raise AttackInternalError(
                f"{label} edit sequence exceeds budget {cfg.budget}")
    if cfg.space is PerturbationSpace.COUNT_PRESERVING:
        if result.best.count != result.clean_count:
            raise AttackInternalError("count-preserving attack changed the count")
    if cfg.space is PerturbationSpace.SUBGRAPH_PRESERVING:
        if enumerate_induced(result.best_graph, result.pattern) != clean_occ:
            raise AttackInternalError(
                "subgraph-preserving attack changed the occurrence set")


# --- transfer evaluation ----------------------------------------------------

@dataclass
class TransferEval:
    """Adversarial verdicts of stored attack results re-queried on other models."""

    model_names: list[str]
    cells: list[list[bool | None]]        # [result][model]; None = model failed
    errors: list[list[str | None]]
    rates: dict[str, float]


def transfer_eval(results: Sequence[AttackResult], others: Sequence,
                  margin: float) -> TransferEval:
    """Re-query each model on every (clean, perturbed) pair and re-classify."""
    names = [getattr(m, "name", f"model{k}") for k, m in enumerate(others)]
    cells: list[list[bool | None]] = [[None] * len(others) for _ in results]
    errors: list[list[str | None]] = [[None] * len(others) for _ in results]
    rates: dict[str, float] = {}
    clean_graphs = [r.clean_graph for r in results]
    best_graphs = [r.best_graph for r in results]
    for col, model in enumerate(others):
        try:
            if results:
                pattern = results[0].pattern
                clean_preds = model.predict_batch(clean_graphs, pattern)
                pert_preds = model.predict_batch(best_graphs, pattern)
            else:
                clean_preds, pert_preds = [], []
            for row, r in enumerate(results):
                verdict = classify_adversarial(
                    (clean_preds[row], r.clean_count),
                    (pert_preds[row], r.best.count), margin)
                cells[row][col] = verdict.adversarial
        except Exception as exc:  # recorded, not fatal
            for row in range(len(results)):
                if cells[row][col] is None:
                    errors[row][col] = str(exc)
        evaluated = [cells[row][col] for row in range(len(results))
                     if cells[row][col] is not None]
        rates[names[col]] = (sum(evaluated) / len(evaluated)) if evaluated else 0.0
    return TransferEval(names, cells, errors, rates)
