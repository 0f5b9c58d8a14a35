"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``. The heavyweight criteria
carry their own wall-clock budgets and assert them.
"""
import itertools
import math
import random
import time

import pytest
import scipy.stats

from subcount.attack import (
    AttackConfig,
    PerturbationSpace,
    adversarial_loss,
    beam_attack,
    classify_adversarial,
)
from subcount.cli import CampaignSpec, run_campaign
from subcount.counting import (
    count_all,
    count_bruteforce,
    count_induced,
    enumerate_bruteforce,
    enumerate_induced,
)
from subcount.datasets import (
    DatasetSpec,
    ErSpec,
    SbmSpec,
    build_dataset,
    dataset_graph,
    dataset_split_indices,
    save_dataset,
)
from subcount.graph import Graph, all_pairs, edge_flip
from subcount.metrics import SuccessCurve, auc_normalized, mae, mae_count_norm, welch_ttest
from subcount.models import noisy_oracle, oracle_model, train_feature_regressor
from subcount.patterns import ALL_PATTERNS, PATTERN_INDEX, Pattern
from subcount.perturb import (
    apply_edit,
    edit_for_pair,
    gen_P1,
    gen_P1_count_preserving,
    gen_P1_subgraph_preserving,
    pair_scan_all,
)

from conftest import random_er

SBM_61 = SbmSpec((10, 10, 10), (0.2, 0.3, 0.4), 0.1)


def _passed(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def test_counting_oracle_equivalence():
    """500 random ER graphs x 8 patterns: fast counts == brute force, < 60 s."""
    started = time.monotonic()
    rng = random.Random(2024)
    probabilities = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    for _ in range(500):
        n = rng.randint(5, 12)
        g = random_er(n, rng.choice(probabilities), rng)
        for pattern in ALL_PATTERNS:
            assert count_induced(g, pattern) == count_bruteforce(g, pattern)
            assert enumerate_induced(g, pattern) == enumerate_bruteforce(g, pattern)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _passed(f"counting-oracle-equivalence ({elapsed:.1f}s)")


def test_incremental_soundness():
    """1000 (graph, 10-edit sequence) trials: counts stay exact after every edit."""
    rng = random.Random(5150)
    for _ in range(1000):
        n = rng.randint(8, 14)
        g = random_er(n, rng.uniform(0.15, 0.5), rng)
        counts = count_all(g)
        for _ in range(10):
            i, j = sorted(rng.sample(range(n), 2))
            g, counts = apply_edit(g, counts, edit_for_pair(g, i, j))
            assert counts == count_all(g)
    _passed("incremental-soundness")


def test_locality_exhaustive():
    """All labeled graphs with n <= 7: every occurrence through a perturbed
    edge {i, j} lies inside the diameter-radius ball around i.

    All edges are checked for n <= 5; two deterministically sampled edges per
    graph for n in {6, 7}. The subset classifier here is independent of the
    library's tables: only the diameter of the induced class is needed, and
    it follows from the edge count (plus a degree disambiguation at 3 edges).
    """
    started = time.monotonic()
    violations = 0
    for n in range(2, 8):
        pairs = list(itertools.combinations(range(n), 2))
        check_all_edges = n <= 5
        for mask in range(1, 1 << len(pairs)):
            edges = []
            m = mask
            while m:
                low = m & (-m)
                edges.append(pairs[low.bit_length() - 1])
                m ^= low
            adj = [set() for _ in range(n)]
            for i, j in edges:
                adj[i].add(j)
                adj[j].add(i)
            if check_all_edges:
                sampled = edges
            else:
                first = edges[mask % len(edges)]
                second = edges[(mask >> 7) % len(edges)]
                sampled = (first, second) if second != first else (first,)
            for i, j in sampled:
                ball = {i} | adj[i]
                balls = [None, frozenset(ball)]
                for _ in range(2):
                    for u in tuple(ball):
                        ball |= adj[u]
                    balls.append(frozenset(ball))
                ni, nj = adj[i], adj[j]
                others = [v for v in range(n) if v != i and v != j]
                for a in others:
                    m3 = 1 + (a in ni) + (a in nj)
                    if m3 == 3:
                        diam = 1
                    elif m3 == 2:
                        diam = 2
                    else:
                        continue
                    if a not in balls[diam]:
                        violations += 1
                for a, b in itertools.combinations(others, 2):
                    e_ia, e_ib = a in ni, b in ni
                    e_ja, e_jb = a in nj, b in nj
                    e_ab = b in adj[a]
                    m4 = 1 + e_ia + e_ib + e_ja + e_jb + e_ab
                    if m4 >= 5:
                        diam = 1 if m4 == 6 else 2
                    elif m4 == 4:
                        diam = 2
                    elif m4 == 3:
                        degs = (1 + e_ia + e_ib, 1 + e_ja + e_jb,
                                e_ia + e_ja + e_ab, e_ib + e_jb + e_ab)
                        if 0 in degs:
                            continue
                        diam = 2 if 3 in degs else 3
                    else:
                        continue
                    if a not in balls[diam] or b not in balls[diam]:
                        violations += 1
    assert violations == 0
    _passed(f"locality-exhaustive-n7 ({time.monotonic() - started:.0f}s)")


def test_space_containment_and_semantics():
    """P1^s <= P1^c <= P1 on 200 random graphs, with global rechecks."""
    rng = random.Random(808)
    for trial in range(200):
        n = rng.randint(6, 12)
        g = random_er(n, rng.uniform(0.2, 0.6), rng)
        pattern = ALL_PATTERNS[trial % len(ALL_PATTERNS)]
        count = count_induced(g, pattern)
        occ = enumerate_induced(g, pattern)
        p1 = {e.pair for e in gen_P1(g)}
        pc = {e.pair for e in gen_P1_count_preserving(g, pattern, count)}
        ps = {e.pair for e in gen_P1_subgraph_preserving(g, pattern, occ)}
        assert ps <= pc <= p1
        assert len(p1) == n * (n - 1) // 2
        for i, j in pc:
            assert count_induced(edge_flip(g, i, j), pattern) == count
        for i, j in ps:
            assert enumerate_induced(edge_flip(g, i, j), pattern) == occ
        for i, j in pc - ps:
            assert enumerate_induced(edge_flip(g, i, j), pattern) != occ
    _passed("space-containment-semantics")


def test_preserving_space_sizes_on_sbm():
    """Mean one-step preserving-space sizes over the regenerated SBM test set.

    Reference means: 205.32 (triangle) and 244.04 (chordal cycle) within 10%,
    88.98 (4-cycle) within 15%; 2-path subgraph-preserving mean <= 0.1.
    Wall clock under 10 minutes.
    """
    started = time.monotonic()
    spec = DatasetSpec(SBM_61, num_graphs=5000, split=(0.3, 0.2, 0.5), seed=42)
    _, _, test_indices = dataset_split_indices(spec)
    assert len(test_indices) == 2500
    tri = PATTERN_INDEX[Pattern.TRIANGLE]
    chordal = PATTERN_INDEX[Pattern.CHORDAL_CYCLE]
    cyc = PATTERN_INDEX[Pattern.FOUR_CYCLE]
    two = PATTERN_INDEX[Pattern.TWO_PATH]
    sums = {tri: 0, chordal: 0, cyc: 0}
    sum_two_path_sp = 0
    for index in test_indices:
        g = dataset_graph(spec, index)
        for i, j in all_pairs(g.n):
            deltas, changed = pair_scan_all(g, i, j)
            for k in sums:
                if deltas[k] == 0:
                    sums[k] += 1
            if not changed[two]:
                sum_two_path_sp += 1
    n_graphs = len(test_indices)
    means = {k: s / n_graphs for k, s in sums.items()}
    mean_two_sp = sum_two_path_sp / n_graphs
    elapsed = time.monotonic() - started
    assert abs(means[tri] - 205.32) / 205.32 <= 0.10, means[tri]
    assert abs(means[chordal] - 244.04) / 244.04 <= 0.10, means[chordal]
    assert abs(means[cyc] - 88.98) / 88.98 <= 0.15, means[cyc]
    assert mean_two_sp <= 0.1, mean_two_sp
    assert elapsed < 600.0, f"took {elapsed:.1f}s"
    _passed(f"preserving-space-sizes (tri={means[tri]:.2f}, "
            f"chordal={means[chordal]:.2f}, 4cycle={means[cyc]:.2f}, "
            f"2path-sp={mean_two_sp:.4f}, {elapsed:.0f}s)")


def test_attack_correctness():
    """Oracle target is unattackable; greedy = exhaustive at one step;
    beam k=10 dominates greedy on 100 paired runs at budget 2."""
    rng = random.Random(31337)

    # (a) oracle target: no campaign cell can contain an adversarial example
    exact = oracle_model(Pattern.TRIANGLE)
    for space in PerturbationSpace:
        for _ in range(5):
            g = random_er(8, 0.45, rng)
            cfg = AttackConfig(space, budget=3, beam_width=4, margin=0.0, seed=1)
            res = beam_attack(exact, g, Pattern.TRIANGLE, cfg)
            assert res.best.loss == 0.0
            assert not res.verdict.adversarial

    # (b) greedy budget 1 equals the exhaustive single-flip argmax
    for trial in range(40):
        n = rng.randint(4, 8)
        g = random_er(n, 0.45, rng)
        model = noisy_oracle(Pattern.TRIANGLE, 2.0, seed=trial)
        cfg = AttackConfig(PerturbationSpace.CONSTRAINED, budget=1, beam_width=1)
        res = beam_attack(model, g, Pattern.TRIANGLE, cfg)
        best_flip = max(
            adversarial_loss(model.predict(edge_flip(g, i, j), Pattern.TRIANGLE),
                             count_induced(edge_flip(g, i, j), Pattern.TRIANGLE))
            for i, j in all_pairs(n))
        assert res.best.loss == pytest.approx(max(best_flip, res.clean_loss), abs=1e-12)

    # (c) beam k=10 >= greedy on 100 paired runs against the weak regressor
    train = [(random_er(12, 0.3, rng), None) for _ in range(60)]
    train = [(g, count_induced(g, Pattern.TRIANGLE)) for g, _ in train]
    model = train_feature_regressor(train, Pattern.TRIANGLE)
    for _ in range(100):
        g = random_er(12, 0.3, rng)
        greedy = beam_attack(model, g, Pattern.TRIANGLE, AttackConfig(
            PerturbationSpace.CONSTRAINED, budget=2, beam_width=1, seed=9))
        beam = beam_attack(model, g, Pattern.TRIANGLE, AttackConfig(
            PerturbationSpace.CONSTRAINED, budget=2, beam_width=10, seed=9))
        assert beam.best.loss >= greedy.best.loss - 1e-12
    _passed("attack-correctness")


def test_adversarial_verdict_fixture_table():
    """12 hand-derived verdict cases, including the zero-clean-loss convention
    and negative-prediction rounding."""
    # columns: clean (pred, count), perturbed (pred, count), margin,
    #          expected (i, ii, iii, adversarial)
    cases = [
        # (1.1-0.2)/0.2 = 4.5 > 1
        ((3.2, 3), (5.1, 4), 1.0, (True, True, True, True)),
        # prediction unchanged: (ii) fails, loss stays 0
        ((3.0, 3), (3.0, 3), 1.0, (True, False, False, False)),
        # 3.6 rounds to 4: (i) fails no matter what
        ((3.6, 3), (10.0, 3), 0.0, (False, True, True, False)),
        # clean loss 0: ratio is +inf, any positive perturbed loss passes (iii)
        ((3.0, 3), (4.0, 3), 5.0, (True, True, True, True)),
        # 3.4 still rounds to 3: (ii) fails although the loss grew from 0
        ((3.0, 3), (3.4, 3), 1.0, (True, False, True, False)),
        # floor(-0.4+0.5)=0 correct; floor(-0.6+0.5)=-1 wrong; (0.6-0.4)/0.4>0
        ((-0.4, 0), (-0.6, 0), 0.0, (True, True, True, True)),
        # floor(-0.5+0.5)=0 correct; ratio (0.5-0.5)/0.5 = 0, not > 0
        ((-0.5, 0), (0.5, 0), 0.0, (True, True, False, False)),
        # floor(2.5+0.5)=3 correct; (0.6-0.5)/0.5 = 0.2 > 0.1
        ((2.5, 3), (1.4, 2), 0.1, (True, True, True, True)),
        # same but 0.2 <= 0.25
        ((2.5, 3), (1.4, 2), 0.25, (True, True, False, False)),
        # floor(4.99)=4 correct; (2-0.49)/0.49 ~ 3.08 > 1
        ((4.49, 4), (10.0, 12), 1.0, (True, True, True, True)),
        # clean loss 0 with huge count error on the perturbed graph
        ((0.0, 0), (0.0, 5), 3.0, (True, True, True, True)),
        # both sides perfect: nothing holds beyond (i)
        ((0.0, 0), (0.0, 0), 0.0, (True, False, False, False)),
    ]
    for clean, perturbed, margin, expected in cases:
        v = classify_adversarial(clean, perturbed, margin)
        got = (v.correct_clean, v.wrong_perturbed, v.margin_exceeded, v.adversarial)
        assert got == expected, (clean, perturbed, margin, got, expected)
    _passed("def2-fixture-table")


def test_metric_fixtures():
    """AUC step-curve to 1e-12; Welch vs reference to 1e-6; l1/lc fixtures."""
    curve = SuccessCurve(((1.0, 0.0), (5.0, 0.0), (10.0, 1.0), (25.0, 1.0)))
    assert auc_normalized(curve) == pytest.approx(17.5 / 24, abs=1e-12)

    rng = random.Random(99)
    for _ in range(20):
        a = [rng.gauss(0, 1 + rng.random()) for _ in range(rng.randint(4, 50))]
        b = [rng.gauss(rng.uniform(-1, 1), 2) for _ in range(rng.randint(4, 50))]
        statistic, p = welch_ttest(a, b)
        ref = scipy.stats.ttest_ind(a, b, equal_var=False)
        assert statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert p == pytest.approx(ref.pvalue, abs=1e-6)

    assert mae([2.0], [4]) == 2.0 and mae_count_norm([2.0], [4]) == 0.5
    assert mae([1.0, 2.0, 3.0], [1, 2, 3]) == 0.0
    assert mae([2.0, 3.0, 4.0], [1, 2, 3]) == 1.0
    assert mae_count_norm([3.0], [0]) == 3.0
    _passed("metric-fixtures")


def test_end_to_end_campaign(tmp_path):
    """Full campaign on an SBM corpus against the weak feature regressor:
    all three spaces, budgets 1/5/10/25 % at margin 1; two runs give
    bit-identical outputs, at least one cell succeeds, under 15 minutes."""
    started = time.monotonic()
    spec = DatasetSpec(SBM_61, num_graphs=600, split=(0.3, 0.2, 0.5), seed=42)
    dataset_path = tmp_path / "sbm.jsonl"
    save_dataset(build_dataset(spec), dataset_path)
    campaign = CampaignSpec(
        dataset_path=str(dataset_path),
        pattern=Pattern.FOUR_CLIQUE,
        models=("regressor",),
        spaces=(PerturbationSpace.CONSTRAINED, PerturbationSpace.COUNT_PRESERVING,
                PerturbationSpace.SUBGRAPH_PRESERVING),
        budget_pcts=(1.0, 5.0, 10.0, 25.0),
        margin=1.0,
        clean_count=8,
        seeds=(0,),
    )
    paths_one = run_campaign(campaign, tmp_path / "run1")
    paths_two = run_campaign(campaign, tmp_path / "run2")
    for kind, first in paths_one.items():
        assert first.read_bytes() == paths_two[kind].read_bytes(), kind

    summary = (tmp_path / "run1" / "summary.csv").read_text().splitlines()[1:]
    rates = [float(line.split(",")[-1]) for line in summary]
    assert any(rate > 0.0 for rate in rates)
    elapsed = time.monotonic() - started
    assert elapsed < 900.0, f"took {elapsed:.1f}s"
    _passed(f"end-to-end-campaign (max rate {max(rates):.2f}, {elapsed:.0f}s)")
