import csv
import json
from pathlib import Path

import pytest

from subcount.cli import budget_abs, main
from subcount.counting import counts_to_json
from subcount.datasets import load_dataset
from subcount.graph import Graph


def write_spec(path: Path, generator: dict, num_graphs: int, seed: int,
               split=(0.3, 0.2, 0.5)) -> Path:
    spec = {"generator": generator, "num_graphs": num_graphs,
            "split": list(split), "seed": seed}
    path.write_text(json.dumps(spec))
    return path


def tiny_er_dataset(tmp_path: Path, name: str = "er.jsonl", n: int = 8,
                    p: float = 0.35, num: int = 40, seed: int = 3) -> Path:
    spec_path = write_spec(tmp_path / f"{name}.spec.json",
                           {"kind": "er", "n": n, "p": p}, num, seed)
    out = tmp_path / name
    assert main(["generate", "--spec", str(spec_path), "--out", str(out)]) == 0
    return out


def read_csv(path: Path) -> list[dict]:
    with path.open() as handle:
        return list(csv.DictReader(handle))


class TestBudget:
    def test_rounding_half_up_with_floor_one(self):
        assert budget_abs(1.0, 70.5) == 1
        assert budget_abs(5.0, 70.5) == 4
        assert budget_abs(10.0, 70.5) == 7
        assert budget_abs(25.0, 70.5) == 18
        assert budget_abs(0.1, 10.0) == 1


class TestGenerate:
    def test_writes_dataset_and_manifest(self, tmp_path, capsys):
        path = tiny_er_dataset(tmp_path)
        assert path.exists()
        assert Path(str(path) + ".manifest.json").exists()
        ds = load_dataset(path)
        assert (len(ds.train), len(ds.val), len(ds.test)) == (12, 8, 20)

    def test_rerun_identical(self, tmp_path):
        a = tiny_er_dataset(tmp_path, "a.jsonl")
        b = tiny_er_dataset(tmp_path, "b.jsonl")
        assert a.read_bytes() == b.read_bytes()


class TestCount:
    def test_single_graph_all(self, tmp_path, capsys):
        k4 = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
        gpath = tmp_path / "k4.json"
        gpath.write_text(k4.to_json())
        assert main(["count", "--graph", str(gpath)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["triangle"] == 4 and out["4clique"] == 1

    def test_single_graph_one_pattern(self, tmp_path, capsys):
        k4 = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
        gpath = tmp_path / "k4.json"
        gpath.write_text(k4.to_json())
        assert main(["count", "--graph", str(gpath), "--pattern", "triangle"]) == 0
        assert capsys.readouterr().out.strip() == "4"

    def test_dataset_csv_matches_labels(self, tmp_path, capsys):
        path = tiny_er_dataset(tmp_path)
        out = tmp_path / "counts.csv"
        assert main(["count", "--dataset", str(path), "--out", str(out)]) == 0
        rows = read_csv(out)
        ds = load_dataset(path)
        assert len(rows) == 40
        for row in rows:
            label = counts_to_json(ds.labels[int(row["index"])])
            for key, value in label.items():
                assert int(row[key]) == value

    def test_corrupted_labels_rejected(self, tmp_path, capsys):
        path = tiny_er_dataset(tmp_path)
        lines = path.read_text().splitlines()
        record = json.loads(lines[0])
        record["counts"]["triangle"] += 1
        lines[0] = json.dumps(record, sort_keys=True, separators=(",", ":"))
        path.write_text("\n".join(lines) + "\n")
        assert main(["count", "--dataset", str(path)]) == 2
        assert "validation failed" in capsys.readouterr().err


class TestAttack:
    def _run(self, tmp_path, dataset, out_name, models, extra=()):
        args = ["attack", "--dataset", str(dataset), "--pattern", "triangle",
                "--space", "constrained", "--budget-pcts", "10,25",
                "--delta", "1", "--clean-count", "5",
                "--out", str(tmp_path / out_name)]
        for m in models:
            args += ["--model", m]
        args += list(extra)
        assert main(args) == 0
        return tmp_path / out_name

    def test_oracle_campaign_all_zero(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path)
        out = self._run(tmp_path, dataset, "oracle_run", ["oracle"])
        summary = read_csv(out / "summary.csv")
        assert all(float(r["success_rate"]) == 0.0 for r in summary)
        auc = read_csv(out / "auc.csv")
        assert all(float(r["auc"]) == 0.0 for r in auc)

    def test_noisy_campaign_reproducible_and_nonzero(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path)
        out1 = self._run(tmp_path, dataset, "noisy1", ["noisy:2.0:1"])
        out2 = self._run(tmp_path, dataset, "noisy2", ["noisy:2.0:1"])
        assert (out1 / "campaign.jsonl").read_bytes() == (out2 / "campaign.jsonl").read_bytes()
        summary = read_csv(out1 / "summary.csv")
        assert any(float(r["success_rate"]) > 0.0 for r in summary)

    def test_transfer_outputs_with_two_models(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path)
        out = self._run(tmp_path, dataset, "pair",
                        ["noisy:2.0:1", "noisy:2.0:2"], ["--seed", "0,1"])
        transfer = read_csv(out / "transfer.csv")
        assert transfer, "transfer matrix missing"
        names = {(r["source_model"], r["target_model"]) for r in transfer}
        assert all(src != dst for src, dst in names)
        kinds = {r["kind"] for r in read_csv(out / "auc.csv")}
        assert kinds == {"success", "transfer"}

    def test_regressor_curve_nondecreasing(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path, n=10, p=0.3, num=80)
        args = ["attack", "--dataset", str(dataset), "--pattern", "triangle",
                "--model", "regressor", "--space", "constrained",
                "--budget-pcts", "5,10,25", "--delta", "1",
                "--clean-count", "4", "--out", str(tmp_path / "reg_run")]
        assert main(args) == 0
        curves = read_csv(tmp_path / "reg_run" / "curves.csv")
        rates = [float(r["mean_rate"]) for r in curves]
        assert rates == sorted(rates)

    def test_insufficient_clean_graphs_warns(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path, num=12)
        args = ["attack", "--dataset", str(dataset), "--pattern", "triangle",
                "--model", "oracle", "--space", "constrained",
                "--budget-pcts", "10,25", "--clean-count", "50",
                "--out", str(tmp_path / "warn_run")]
        assert main(args) == 0
        assert "warning" in capsys.readouterr().err


class TestOodEval:
    def test_oracle_zero_errors(self, tmp_path, capsys):
        d1 = tiny_er_dataset(tmp_path, "d1.jsonl", n=8, p=0.3, num=30, seed=1)
        d2 = tiny_er_dataset(tmp_path, "d2.jsonl", n=8, p=0.8, num=30, seed=2)
        capsys.readouterr()
        assert main(["ood-eval", "--model", "oracle", "--dataset-a", str(d1),
                     "--dataset-b", str(d2), "--pattern", "triangle"]) == 0
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        for row in rows:
            _, _, l1, lc = row.split(",")
            assert float(l1) == 0.0 and float(lc) == 0.0

    def test_empty_test_split_rejected(self, tmp_path, capsys):
        spec_path = write_spec(tmp_path / "all_train.spec.json",
                               {"kind": "er", "n": 6, "p": 0.4}, 10, 4,
                               split=(0.8, 0.2, 0.0))
        d_empty = tmp_path / "all_train.jsonl"
        assert main(["generate", "--spec", str(spec_path),
                     "--out", str(d_empty)]) == 0
        d_ok = tiny_er_dataset(tmp_path, "ok.jsonl", num=20)
        assert main(["ood-eval", "--model", "oracle", "--dataset-a", str(d_empty),
                     "--dataset-b", str(d_ok), "--pattern", "triangle"]) == 2
        assert "test split" in capsys.readouterr().err

    def test_regressor_degrades_out_of_distribution(self, tmp_path, capsys):
        d1 = tiny_er_dataset(tmp_path, "d1.jsonl", n=10, p=0.3, num=120, seed=1)
        d2 = tiny_er_dataset(tmp_path, "d2.jsonl", n=10, p=0.8, num=120, seed=2)
        out = tmp_path / "ood.csv"
        assert main(["ood-eval", "--model", "regressor", "--dataset-a", str(d1),
                     "--dataset-b", str(d2), "--pattern", "triangle",
                     "--out", str(out)]) == 0
        rows = {r["dataset"]: r for r in read_csv(out)}
        assert float(rows["b"]["l1"]) > float(rows["a"]["l1"])


class TestShiftReport:
    def test_zero_adversarial_omitted(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path)
        run = tmp_path / "oracle_run"
        assert main(["attack", "--dataset", str(dataset), "--pattern", "triangle",
                     "--model", "oracle", "--space", "constrained",
                     "--budget-pcts", "10,25", "--clean-count", "5",
                     "--out", str(run)]) == 0
        out = tmp_path / "shift.csv"
        assert main(["shift-report", "--campaign", str(run / "campaign.jsonl"),
                     "--dataset", str(dataset), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows and all(r["status"] == "omitted" for r in rows)

    def test_successful_campaign_reports(self, tmp_path, capsys):
        dataset = tiny_er_dataset(tmp_path, num=60)
        run = tmp_path / "noisy_run"
        assert main(["attack", "--dataset", str(dataset), "--pattern", "triangle",
                     "--model", "noisy:3.0:1", "--space", "constrained",
                     "--budget-pcts", "10,25", "--clean-count", "8",
                     "--out", str(run)]) == 0
        out = tmp_path / "shift.csv"
        assert main(["shift-report", "--campaign", str(run / "campaign.jsonl"),
                     "--dataset", str(dataset), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert {r["metric"] for r in rows} == {"count", "edges"}
        # 8 attacked graphs can never reach the 25-sample requirement
        assert all(r["status"] in ("omitted", "insufficient") for r in rows)

    def test_wrong_dataset_rejected(self, tmp_path, capsys):
        d1 = tiny_er_dataset(tmp_path, "d1.jsonl", seed=1)
        d2 = tiny_er_dataset(tmp_path, "d2.jsonl", seed=99)
        run = tmp_path / "run"
        assert main(["attack", "--dataset", str(d1), "--pattern", "triangle",
                     "--model", "oracle", "--space", "constrained",
                     "--budget-pcts", "10,25", "--clean-count", "3",
                     "--out", str(run)]) == 0
        assert main(["shift-report", "--campaign", str(run / "campaign.jsonl"),
                     "--dataset", str(d2)]) == 2
        assert "does not match" in capsys.readouterr().err
