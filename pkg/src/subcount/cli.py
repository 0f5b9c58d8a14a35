"""Command-line harness: dataset generation, counting, attack campaigns,
out-of-distribution evaluation, and distribution-shift reports.

Subcommands: ``generate``, ``count``, ``attack``, ``ood-eval``,
``shift-report``. Every output file is a pure function of the inputs and
seeds: no timestamps, fixed key ordering, deterministic float formatting.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .attack import (
    AttackAborted,
    AttackConfig,
    AttackInternalError,
    AttackResult,
    PerturbationSpace,
    beam_attack,
    classify_adversarial,
    round_to_count,
)
from .counting import count_all, count_induced, counts_to_json
from .datasets import Dataset, DatasetSpec, build_dataset, load_dataset, save_dataset
from .graph import Graph
from .metrics import (
    SuccessCurve,
    auc_normalized,
    mae,
    mae_count_norm,
    shift_report,
)
from .models import (
    FeatureRegressor,
    ModelProtocolError,
    Predictor,
    external_model_client,
    noisy_oracle,
    oracle_model,
    train_feature_regressor,
)
from .patterns import ALL_PATTERNS, Pattern

SHIFT_MIN_SUCCESS_RATE = 0.05
DEFAULT_BEAM = {PerturbationSpace.CONSTRAINED: 1,
                PerturbationSpace.COUNT_PRESERVING: 10,
                PerturbationSpace.SUBGRAPH_PRESERVING: 10}


class CliError(ValueError):
    """User-facing command error (bad arguments, corrupted inputs)."""


@dataclass(frozen=True)
class CampaignSpec:
    """One attack campaign: dataset x pattern x models x spaces x budgets."""

    dataset_path: str
    pattern: Pattern
    models: tuple[str, ...]
    spaces: tuple[PerturbationSpace, ...]
    budget_pcts: tuple[float, ...]
    margin: float = 1.0
    beam_width: int | None = None       # None: greedy for constrained, 10 otherwise
    sample_m: int | None = None
    clean_count: int = 100
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        if not self.models:
            raise CliError("at least one model spec is required")
        if not self.spaces or not self.budget_pcts:
            raise CliError("at least one space and one budget are required")
        if any(p <= 0 for p in self.budget_pcts):
            raise CliError("budget percents must be positive")
        if self.clean_count < 1:
            raise CliError("number of clean graphs must be >= 1")


def budget_abs(pct: float, mean_edges: float) -> int:
    """Percent of the dataset's mean edge count, rounded half-up, at least 1."""
    return max(1, math.floor(pct / 100.0 * mean_edges + 0.5))


def build_model(spec_text: str, pattern: Pattern, dataset: Dataset | None) -> Predictor:
    """Instantiate a model from its CLI spec string.

    ``oracle`` | ``noisy:SIGMA[:SEED]`` | ``regressor`` (train on the
    dataset's train split) | ``regressor:WEIGHTS.json`` | ``external:ENDPOINT``.
    """
    if spec_text == "oracle":
        return oracle_model(pattern)
    if spec_text.startswith("noisy:"):
        parts = spec_text.split(":")
        sigma = float(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        return noisy_oracle(pattern, sigma, seed)
    if spec_text == "regressor":
        if dataset is None:
            raise CliError("'regressor' needs a dataset to train on")
        pairs = [(g, counts[pattern]) for g, counts in dataset.labeled(dataset.train)]
        return train_feature_regressor(pairs, pattern)
    if spec_text.startswith("regressor:"):
        path = Path(spec_text.split(":", 1)[1])
        return FeatureRegressor.from_json_obj(
            json.loads(path.read_text(encoding="utf-8")))
    if spec_text.startswith("external:"):
        return external_model_client(spec_text.split(":", 1)[1])
    raise CliError(f"unknown model spec {spec_text!r}")


def select_clean_graphs(model: Predictor, dataset: Dataset, pattern: Pattern,
                        want: int) -> list[tuple[int, Graph, float]]:
    """First ``want`` test graphs whose rounded prediction is correct."""
    test_graphs = [dataset.graphs[i] for i in dataset.test]
    preds = model.predict_batch(test_graphs, pattern)
    chosen = []
    for idx, g, pred in zip(dataset.test, test_graphs, preds):
        if round_to_count(pred) == dataset.labels[idx][pattern]:
            chosen.append((idx, g, pred))
            if len(chosen) == want:
                break
    return chosen


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _close_models(models) -> None:
    for model in models:
        closer = getattr(model, "close", None)
        if closer is not None:
            closer()


def run_campaign(spec: CampaignSpec, out_dir: Path) -> dict[str, Path]:
    """Run the campaign and write campaign.jsonl plus summary tables.

    On model failure the partially completed campaign file is kept and the
    error re-raised. External adapter processes are shut down either way.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = load_dataset(spec.dataset_path)
    models = []
    try:
        for text in spec.models:
            models.append(build_model(text, spec.pattern, dataset))
        return _run_campaign_with_models(spec, out_dir, dataset, models)
    finally:
        _close_models(models)


def _run_campaign_with_models(spec: CampaignSpec, out_dir: Path,
                              dataset: Dataset, models) -> dict[str, Path]:
    mean_edges = dataset.mean_edge_count()
    budgets = {pct: budget_abs(pct, mean_edges) for pct in spec.budget_pcts}

    campaign_path = out_dir / "campaign.jsonl"
    results: dict[tuple[int, PerturbationSpace, float], list[AttackResult]] = {}
    lines: list[str] = []
    try:
        for model_index, model in enumerate(models):
            seed = spec.seeds[model_index % len(spec.seeds)]
            clean = select_clean_graphs(model, dataset, spec.pattern,
                                        spec.clean_count)
            if len(clean) < spec.clean_count:
                print(f"warning: only {len(clean)} of {spec.clean_count} requested "
                      f"test graphs are correctly predicted by {model.name}",
                      file=sys.stderr)
            for space in spec.spaces:
                beam = (spec.beam_width if spec.beam_width is not None
                        else DEFAULT_BEAM[space])
                for pct in spec.budget_pcts:
                    cfg = AttackConfig(space=space, budget=budgets[pct],
                                       beam_width=beam, margin=spec.margin,
                                       sample_m=spec.sample_m, seed=seed)
                    cell: list[AttackResult] = []
                    for graph_id, g, _pred in clean:
                        result = beam_attack(model, g, spec.pattern, cfg,
                                             graph_id=graph_id)
                        fresh = count_induced(result.best_graph, spec.pattern)
                        if fresh != result.best.count:
                            raise AttackInternalError(
                                f"stored count {result.best.count} for graph "
                                f"{graph_id} disagrees with recount {fresh}")
                        cell.append(result)
                        line = result.to_json_obj()
                        line["budget_pct"] = pct
                        line["model_index"] = model_index
                        lines.append(_dump(line))
                    results[(model_index, space, pct)] = cell
    except (AttackAborted, ConnectionError, TimeoutError,
            ModelProtocolError) as exc:
        campaign_path.write_text("\n".join(lines) + ("\n" if lines else ""),
                                 encoding="utf-8")
        raise CliError(f"model failure, partial campaign saved to "
                       f"{campaign_path}: {exc}") from exc

    campaign_path.write_text("\n".join(lines) + ("\n" if lines else ""),
                             encoding="utf-8")

    summary_rows = []
    for (model_index, space, pct), cell in sorted(
            results.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2])):
        n_adv = sum(r.verdict.adversarial for r in cell)
        rate = n_adv / len(cell) if cell else 0.0
        summary_rows.append([models[model_index].name, space.value, pct,
                             budgets[pct], len(cell), n_adv, rate])
    summary_path = out_dir / "summary.csv"
    _write_csv(summary_path,
               ["model", "space", "budget_pct", "budget_abs",
                "attacked", "adversarial", "success_rate"],
               summary_rows)

    curve_rows = []
    auc_rows = []
    for space in spec.spaces:
        mean_points = []
        for pct in sorted(spec.budget_pcts):
            rates = []
            for model_index in range(len(models)):
                cell = results[(model_index, space, pct)]
                if cell:
                    rates.append(sum(r.verdict.adversarial for r in cell) / len(cell))
            mean_rate = sum(rates) / len(rates) if rates else 0.0
            if len(rates) > 1:
                var = sum((r - mean_rate) ** 2 for r in rates) / (len(rates) - 1)
                stderr = math.sqrt(var / len(rates))
            else:
                stderr = 0.0
            curve_rows.append([space.value, pct, mean_rate, stderr])
            mean_points.append((pct, mean_rate))
        if len(mean_points) >= 2:
            auc = auc_normalized(SuccessCurve(tuple(mean_points)))
            auc_rows.append([space.value, "success", auc])
    curves_path = out_dir / "curves.csv"
    _write_csv(curves_path, ["space", "budget_pct", "mean_rate", "stderr"],
               curve_rows)

    paths = {"campaign": campaign_path, "summary": summary_path,
             "curves": curves_path}

    if len(models) > 1:
        transfer_rows = []
        transfer_curve: dict[tuple[PerturbationSpace, float], list[float]] = {}
        for (model_index, space, pct), cell in sorted(
                results.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2])):
            for target_index, target in enumerate(models):
                if target_index == model_index:
                    continue
                rate = _transfer_rate(cell, target, spec.margin)
                transfer_rows.append([space.value, pct,
                                      models[model_index].name, target.name, rate])
                transfer_curve.setdefault((space, pct), []).append(rate)
        transfer_path = out_dir / "transfer.csv"
        _write_csv(transfer_path,
                   ["space", "budget_pct", "source_model", "target_model",
                    "transfer_rate"], transfer_rows)
        paths["transfer"] = transfer_path
        for space in spec.spaces:
            pts = []
            for pct in sorted(spec.budget_pcts):
                rates = transfer_curve.get((space, pct), [])
                pts.append((pct, sum(rates) / len(rates) if rates else 0.0))
            if len(pts) >= 2:
                auc_rows.append([space.value, "transfer",
                                 auc_normalized(SuccessCurve(tuple(pts)))])

    auc_path = out_dir / "auc.csv"
    _write_csv(auc_path, ["space", "kind", "auc"], auc_rows)
    paths["auc"] = auc_path
    return paths


def _transfer_rate(cell: list[AttackResult], target: Predictor,
                   margin: float) -> float:
    if not cell:
        return 0.0
    clean_preds = target.predict_batch([r.clean_graph for r in cell],
                                       cell[0].pattern)
    pert_preds = target.predict_batch([r.best_graph for r in cell],
                                      cell[0].pattern)
    hits = sum(
        classify_adversarial((cp, r.clean_count), (pp, r.best.count),
                             margin).adversarial
        for r, cp, pp in zip(cell, clean_preds, pert_preds))
    return hits / len(cell)


# --- subcommands -------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> int:
    spec_obj = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = DatasetSpec.from_json_obj(spec_obj)
    dataset = build_dataset(spec)
    save_dataset(dataset, args.out)
    print(f"wrote {spec.num_graphs} graphs to {args.out} "
          f"(train/val/test = {len(dataset.train)}/{len(dataset.val)}/"
          f"{len(dataset.test)})")
    return 0


def cmd_count(args: argparse.Namespace) -> int:
    if (args.graph is None) == (args.dataset is None):
        raise CliError("exactly one of --graph or --dataset is required")
    if args.graph is not None:
        g = Graph.from_json(Path(args.graph).read_text(encoding="utf-8"))
        counts = count_all(g)
        if args.pattern == "all":
            print(_dump(counts_to_json(counts)))
        else:
            print(counts[Pattern.from_key(args.pattern)])
        return 0

    dataset = load_dataset(args.dataset)
    rows = []
    for index, (g, stored) in enumerate(zip(dataset.graphs, dataset.labels)):
        fresh = count_all(g)
        if fresh != stored:
            raise CliError(
                f"label validation failed for graph {index}: stored "
                f"{counts_to_json(stored)}, recomputed {counts_to_json(fresh)}")
        rows.append([index, dataset.split_of(index)]
                    + [fresh[p] for p in ALL_PATTERNS])
    header = ["index", "split"] + [p.key for p in ALL_PATTERNS]
    if args.out:
        _write_csv(Path(args.out), header, rows)
        print(f"validated and wrote {len(rows)} rows to {args.out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(v) for v in row))
    return 0


def cmd_attack(args: argparse.Namespace) -> int:
    spec = CampaignSpec(
        dataset_path=args.dataset,
        pattern=Pattern.from_key(args.pattern),
        models=tuple(args.model),
        spaces=tuple(PerturbationSpace(s) for s in args.space),
        budget_pcts=tuple(float(x) for x in args.budget_pcts.split(",")),
        margin=args.delta,
        beam_width=args.beam,
        sample_m=args.sample_m,
        clean_count=args.clean_count,
        seeds=tuple(int(x) for x in args.seed.split(",")),
    )
    paths = run_campaign(spec, Path(args.out))
    for kind, path in sorted(paths.items()):
        print(f"{kind}: {path}")
    return 0


def cmd_ood_eval(args: argparse.Namespace) -> int:
    pattern = Pattern.from_key(args.pattern)
    ds_a = load_dataset(args.dataset_a)
    ds_b = load_dataset(args.dataset_b)
    if not ds_a.test or not ds_b.test:
        raise CliError("both datasets need a non-empty test split")
    model = build_model(args.model, pattern, ds_a)
    rows = []
    try:
        for name, ds in (("a", ds_a), ("b", ds_b)):
            graphs = [ds.graphs[i] for i in ds.test]
            labels = [ds.labels[i][pattern] for i in ds.test]
            preds = model.predict_batch(graphs, pattern)
            rows.append([name, len(graphs), mae(preds, labels),
                         mae_count_norm(preds, labels)])
    finally:
        _close_models([model])
    header = ["dataset", "test_graphs", "l1", "lc"]
    print(",".join(header))
    for row in rows:
        print(",".join(str(v) for v in row))
    if args.out:
        _write_csv(Path(args.out), header, rows)
    return 0


def cmd_shift_report(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    groups: dict[tuple[str, float], list[AttackResult]] = {}
    pattern: Pattern | None = None
    with Path(args.campaign).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            result = AttackResult.from_json_obj(obj)
            pattern = result.pattern
            if result.graph_id is not None:
                stored = dataset.graphs[result.graph_id]
                if stored != result.clean_graph:
                    raise CliError(
                        f"campaign graph {result.graph_id} does not match the "
                        f"dataset; wrong --dataset?")
            key = (result.config.space.value, float(obj["budget_pct"]))
            groups.setdefault(key, []).append(result)
    if pattern is None:
        raise CliError("campaign file is empty")

    rows = []
    for (space, pct), cell in sorted(groups.items()):
        adversarial = [r for r in cell if r.verdict.adversarial]
        rate = len(adversarial) / len(cell)
        if rate < SHIFT_MIN_SUCCESS_RATE:
            for metric in ("count", "edges"):
                rows.append([space, pct, metric, len(adversarial), rate,
                             "", "", "omitted"])
            continue
        clean = [r.clean_graph for r in adversarial]
        adv = [r.best_graph for r in adversarial]
        for report in shift_report(clean, adv, pattern):
            if report.insufficient:
                rows.append([space, pct, report.metric, len(adversarial), rate,
                             "", "", "insufficient"])
            else:
                rows.append([space, pct, report.metric, len(adversarial), rate,
                             report.statistic, report.p_value, "ok"])
    header = ["space", "budget_pct", "metric", "adversarial", "success_rate",
              "statistic", "p_value", "status"]
    if args.out:
        _write_csv(Path(args.out), header, rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(v) for v in row))
    return 0


# --- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subcount",
        description="Probe subgraph-count regressors with sound structural attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a labeled dataset")
    p_gen.add_argument("--spec", required=True, help="dataset spec JSON file")
    p_gen.add_argument("--out", required=True, help="output JSON-lines path")
    p_gen.set_defaults(func=cmd_generate)

    p_count = sub.add_parser("count", help="count patterns in a graph or dataset")
    p_count.add_argument("--graph", help="graph JSON file")
    p_count.add_argument("--dataset", help="dataset JSON-lines file")
    p_count.add_argument("--pattern", default="all",
                         choices=["all"] + [p.key for p in ALL_PATTERNS])
    p_count.add_argument("--out", help="CSV output path (dataset mode)")
    p_count.set_defaults(func=cmd_count)

    p_attack = sub.add_parser("attack", help="run an attack campaign")
    p_attack.add_argument("--dataset", required=True)
    p_attack.add_argument("--pattern", required=True,
                          choices=[p.key for p in ALL_PATTERNS])
    p_attack.add_argument("--model", action="append", required=True,
                          help="oracle | noisy:SIGMA[:SEED] | regressor[:FILE] "
                               "| external:ENDPOINT (repeatable)")
    p_attack.add_argument("--space", action="append", required=True,
                          choices=[s.value for s in PerturbationSpace])
    p_attack.add_argument("--budget-pcts", default="1,5,10,25",
                          help="comma-separated budget percents")
    p_attack.add_argument("--delta", type=float, default=1.0,
                          help="relative loss-increase margin")
    p_attack.add_argument("--beam", type=int, default=None,
                          help="beam width (default: 1 constrained, 10 preserving)")
    p_attack.add_argument("--sample-m", type=int, default=None,
                          help="degree-weighted candidate subsample size")
    p_attack.add_argument("--seed", default="0",
                          help="comma-separated attack seeds, matched to models")
    p_attack.add_argument("--clean-count", type=int, default=100,
                          help="correctly predicted test graphs to attack")
    p_attack.add_argument("--out", required=True, help="output directory")
    p_attack.set_defaults(func=cmd_attack)

    p_ood = sub.add_parser("ood-eval", help="error metrics on two datasets")
    p_ood.add_argument("--model", required=True)
    p_ood.add_argument("--dataset-a", required=True,
                       help="in-distribution dataset (trains 'regressor')")
    p_ood.add_argument("--dataset-b", required=True, help="shifted dataset")
    p_ood.add_argument("--pattern", required=True,
                       choices=[p.key for p in ALL_PATTERNS])
    p_ood.add_argument("--out", help="CSV output path")
    p_ood.set_defaults(func=cmd_ood_eval)

    p_shift = sub.add_parser("shift-report",
                             help="distribution-shift p-values for a campaign")
    p_shift.add_argument("--campaign", required=True)
    p_shift.add_argument("--dataset", required=True)
    p_shift.add_argument("--out", help="CSV output path")
    p_shift.set_defaults(func=cmd_shift_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
