"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Criteria 2-4 share one heteroscedastic experiment (three seeds,
splits 2000/1000/2000) through a module-scoped fixture.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

import cpdkit as ck
from cpdkit.cli import main as cli_main

from oracles import bisect_probit

SEEDS = (1, 2, 3)


def _report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS - {detail}")


# ---------------------------------------------------------------------------
# criterion 1: transducer equivalence


def test_criterion_1_transducer_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(20240101)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        # lattice values force ties; duplicate an entry to guarantee them
        thresholds = np.round(rng.uniform(-2.0, 2.0, size=n), 1)
        if n >= 2:
            thresholds[rng.integers(0, n)] = thresholds[rng.integers(0, n)]
        thresholds = np.sort(thresholds)
        queries = list(thresholds)
        uniq = sorted(set(thresholds.tolist()))
        queries += [(a + b) / 2.0 for a, b in zip(uniq, uniq[1:])]
        queries += [-10.0, 10.0]
        for tau in (0.0, 0.5, 1.0):
            dist = ck.PredictiveDistribution(thresholds=thresholds, tau=tau)
            for y in queries:
                assert ck.cdf_value(dist, y) == ck.counting_cdf(thresholds, y, tau)
                checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 5.0, f"criterion 1 took {elapsed:.1f}s (budget 5s)"
    _report(1, f"{checked} branch-vs-counting comparisons exactly equal in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criteria 2-4 share the heteroscedastic experiment


@pytest.fixture(scope="module")
def hetero_runs():
    runs = {}
    start = time.monotonic()
    for seed in SEEDS:
        spec = ck.SynthSpec(
            n=5000, feature_dim=2, noise=ck.HeteroscedasticNoise(0.1, 4.0), seed=seed
        )
        data = ck.synth_generate(spec)
        train, calib, test = ck.shuffle_split(
            data, ck.SplitSpec(seed=seed, fractions=(0.4, 0.2, 0.4))
        )
        assert (len(train), len(calib), len(test)) == (2000, 1000, 2000)
        artifacts = ck.fit_artifacts(train, calib, ck.KnnConfig())
        preds = ck.point_predictions(artifacts.knn, test)
        policy = ck.TauPolicy.seeded(seed)
        dists = ck.predictive_distributions(artifacts.conformal, preds, policy)
        labels = [ex.label for ex in test]
        runs[seed] = {
            "artifacts": artifacts,
            "preds": preds,
            "dists": dists,
            "labels": labels,
            "policy": policy,
        }
    runs["elapsed"] = time.monotonic() - start
    return runs


def test_criterion_2_validity_ks(hetero_runs):
    start = time.monotonic()
    pvalues = {}
    for seed in SEEDS:
        run = hetero_runs[seed]
        qvals = [ck.cdf_value(d, y) for d, y in zip(run["dists"], run["labels"])]
        assert all(0.0 <= q <= 1.0 for q in qvals)
        pvalues[seed] = stats.kstest(qvals, "uniform").pvalue
    passed = sum(1 for p in pvalues.values() if p > 0.01)
    elapsed = hetero_runs["elapsed"] + (time.monotonic() - start)
    assert passed >= 2, f"KS uniformity passed in only {passed}/3 seeds: {pvalues}"
    assert elapsed < 60.0, f"criterion 2 took {elapsed:.1f}s (budget 60s)"
    _report(
        2,
        "KS p-values "
        + ", ".join(f"seed {s}: {p:.4f}" for s, p in pvalues.items())
        + f" (pass at alpha=0.01 in {passed}/3 seeds) in {elapsed:.1f}s",
    )


def test_criterion_3_coverage(hetero_runs):
    start = time.monotonic()
    worst = 0.0
    for seed in SEEDS:
        run = hetero_runs[seed]
        for conf in (0.80, 0.90, 0.95):
            eps = 1.0 - conf
            hits = sum(
                1
                for d, y in zip(run["dists"], run["labels"])
                if ck.interval(d, eps).covers(y)
            )
            coverage = hits / len(run["labels"])
            gap = abs(coverage - conf)
            worst = max(worst, gap)
            assert gap <= 0.02, (
                f"seed {seed} confidence {conf}: coverage {coverage:.4f} is "
                f"{100 * gap:.2f}pp from nominal (limit 2pp)"
            )
    elapsed = hetero_runs["elapsed"] + (time.monotonic() - start)
    assert elapsed < 60.0, f"criterion 3 took {elapsed:.1f}s (budget 60s)"
    _report(3, f"all 9 coverage cells within 2pp (worst gap {100 * worst:.2f}pp) in {elapsed:.1f}s")


def test_criterion_4_calibration_ordering(hetero_runs):
    start = time.monotonic()
    grid = ck.grid_from_step(0.02)
    assert len(grid.levels) == 50
    wins = 0
    pairs = {}
    for seed in SEEDS:
        run = hetero_runs[seed]
        rep_cpd = ck.evaluate_predictions(
            run["preds"], run["labels"], "cpd", grid, run["policy"],
            conformal=run["artifacts"].conformal,
        )
        rep_gauss = ck.evaluate_predictions(
            run["preds"], run["labels"], "gaussian", grid, run["policy"],
            baseline=run["artifacts"].baseline,
        )
        pairs[seed] = (rep_cpd.ece, rep_gauss.ece)
        if rep_cpd.ece < rep_gauss.ece:
            wins += 1
    elapsed = hetero_runs["elapsed"] + (time.monotonic() - start)
    assert wins >= 2, f"CPD beat the baseline in only {wins}/3 seeds: {pairs}"
    assert elapsed < 60.0, f"criterion 4 took {elapsed:.1f}s (budget 60s)"
    detail = ", ".join(
        f"seed {s}: cpd {100 * c:.2f}% vs gaussian {100 * g:.2f}%"
        for s, (c, g) in pairs.items()
    )
    _report(4, f"ECE ordering holds in {wins}/3 seeds ({detail}) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 5: shuffle study


def _study_eces(shift, seed, n=6000, fractions=(0.5, 0.25, 0.25)):
    spec = ck.SynthSpec(
        n=n, feature_dim=2, noise=ck.HeteroscedasticNoise(0.1, 4.0), shift=shift, seed=seed
    )
    data = ck.synth_generate(spec)
    m = math.floor(fractions[0] * n)
    k = m + math.floor(fractions[1] * n)
    grid = ck.grid_from_step(0.02)
    policy = ck.TauPolicy.fixed(0.5)
    out = {}
    for arm, split in (
        ("passthrough", ck.passthrough_split(data, (m, k))),
        ("shuffled", ck.shuffle_split(data, ck.SplitSpec(seed=seed, fractions=fractions))),
    ):
        train, calib, test = split
        artifacts = ck.fit_artifacts(train, calib, ck.KnnConfig())
        out[arm] = ck.evaluate_split(artifacts, test, "cpd", grid, policy).ece
    return out


def test_criterion_5_shuffle_study():
    start = time.monotonic()
    shifted_wins = 0
    shifted_detail = []
    for seed in SEEDS:
        eces = _study_eces(0.3, seed)
        diff = eces["passthrough"] - eces["shuffled"]
        shifted_detail.append(f"seed {seed}: +{100 * diff:.1f}pp")
        if diff >= 0.01:
            shifted_wins += 1
    assert shifted_wins >= 2, f"passthrough-vs-shuffled gap >= 1pp in only {shifted_wins}/3 seeds"

    control_detail = []
    for seed in SEEDS:
        eces = _study_eces(0.0, seed)
        diff = abs(eces["passthrough"] - eces["shuffled"])
        control_detail.append(f"seed {seed}: {100 * diff:.2f}pp")
        assert diff < 0.02, f"control (shift=0) seed {seed} differs by {100 * diff:.2f}pp"
    elapsed = time.monotonic() - start
    assert elapsed < 90.0, f"criterion 5 took {elapsed:.1f}s (budget 90s)"
    _report(
        5,
        f"shifted gaps [{', '.join(shifted_detail)}] ({shifted_wins}/3 >= 1pp); "
        f"control gaps [{', '.join(control_detail)}] all < 2pp; in {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 6: probit accuracy


def test_criterion_6_probit_accuracy():
    start = time.monotonic()
    grid = np.linspace(1e-6, 1.0 - 1e-6, 10_000)
    worst = 0.0
    for p in grid:
        err = abs(ck.probit(float(p)) - bisect_probit(float(p)))
        worst = max(worst, err)
        assert err < 1e-6
    assert abs(ck.probit(0.975) - 1.959964) < 1e-6
    elapsed = time.monotonic() - start
    assert elapsed < 5.0, f"criterion 6 took {elapsed:.1f}s (budget 5s)"
    _report(6, f"10^4-point grid, worst |probit - bisection| = {worst:.2e} in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 7: AUROC oracle


def _auroc_pairwise_vectorized(scores, flags):
    """Exhaustive O(n^2) tie-corrected pairwise counting (numpy outer form)."""
    s = np.asarray(scores, dtype=np.float64)
    f = np.asarray(flags)
    pos = s[f == 1]
    neg = s[f == 0]
    wins = np.sum(pos[:, None] > neg[None, :])
    ties = np.sum(pos[:, None] == neg[None, :])
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def test_criterion_7_auroc_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(777)
    for trial in range(200):
        n = int(rng.integers(2, 501))
        # mix continuous scores with a coarse lattice so ties are common
        if trial % 2 == 0:
            scores = np.round(rng.normal(size=n), 1)
        else:
            scores = rng.normal(size=n)
        flags = (rng.random(n) < rng.uniform(0.1, 0.9)).astype(int)
        flags[0], flags[1] = 0, 1  # keep both classes present
        assert ck.auroc(scores, flags) == _auroc_pairwise_vectorized(scores, flags)
    assert ck.auroc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]) == 1.0
    assert ck.auroc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert ck.auroc([0.5, 0.5, 0.5, 0.5], [1, 1, 0, 0]) == 0.5
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"criterion 7 took {elapsed:.1f}s (budget 10s)"
    _report(7, f"200 random instances exactly match pairwise counting in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 8: hand-example suite


def test_criterion_8_hand_examples():
    start = time.monotonic()
    tol = 1e-9

    # calibration scores (0.6, 1.5, 1.5)
    preds = [
        ck.PointPrediction("a", 0.5, 1.0),
        ck.PointPrediction("b", 0.2, 0.5),
        ck.PointPrediction("c", 1.0, 2.0),
    ]
    model = ck.fit_conformal(preds, [1.0, 0.0, 2.0], label_ids=["a", "b", "c"])
    scores = ck.calibration_scores(model, ck.PointPrediction("t", 1.0, 1.0))
    assert scores == pytest.approx([0.6, 1.5, 1.5], abs=tol)

    # cdf values 0.375 / 0.625 / 0.125 / 0.875
    dist = ck.PredictiveDistribution(thresholds=scores, tau=0.5)
    for y, expected in ((1.0, 0.375), (1.5, 0.625), (-10.0, 0.125), (10.0, 0.875)):
        assert ck.cdf_value(dist, y) == pytest.approx(expected, abs=tol)

    # ECE 0.03 from err(0.1)=0.12, err(0.5)=0.46
    labels = [float(i) for i in range(50)]

    def provider(eps):
        miss = {0.1: 6, 0.5: 23}[eps]
        return [
            ck.PredictionInterval(y + 10.0, y + 11.0, 0.5)
            if i < miss
            else ck.PredictionInterval(y - 1.0, y + 1.0, 0.5)
            for i, y in enumerate(labels)
        ]

    grid = ck.SignificanceGrid((0.1, 0.5))
    assert ck.ece(provider, labels, grid) == pytest.approx(0.03, abs=tol)

    # z-normalized {0, 50, 100} -> {-1.2247, 0, 1.2247}
    zlabels, mu, sigma = ck.znormalize([0.0, 50.0, 100.0])
    assert mu == pytest.approx(50.0, abs=tol)
    assert zlabels == pytest.approx(
        [-1.2247448713915892, 0.0, 1.2247448713915892], abs=tol
    )

    # KNN difficulty 1.01
    train = [ck.LabeledExample(f"t{i}", (float(i),), 0.0) for i in range(4)]
    knn = ck.fit(train, ck.KnnConfig(k_regress=1, k_difficulty=2, difficulty_floor=0.01))
    assert ck.difficulty(knn, [1.5]) == pytest.approx(1.01, abs=tol)

    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"criterion 8 took {elapsed:.2f}s (budget 1s)"
    _report(8, f"all hand examples within 1e-9 in {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# criterion 9: command determinism


def test_criterion_9_cli_determinism(tmp_path):
    # computation is sequential by design, so thread count cannot enter;
    # the check here is byte-identical reruns of fit / predict / evaluate
    data = tmp_path / "data.csv"
    assert cli_main(["synth", "--n", "300", "--seed", "5", "--out", str(data)]) == 0
    splits = tmp_path / "splits"
    assert (
        cli_main(
            ["split", "--input", str(data), "--seed", "2", "--fractions",
             "0.5,0.25,0.25", "--out", str(splits)]
        )
        == 0
    )
    outputs = {}
    model = tmp_path / "model.json"
    preds = tmp_path / "preds.csv"
    cdf = tmp_path / "cdf.jsonl"
    report = tmp_path / "report.json"
    for attempt in ("first", "second"):
        assert (
            cli_main(
                ["fit", "--train", str(splits / "train.csv"), "--calib",
                 str(splits / "calib.csv"), "--k-regress", "5", "--k-difficulty", "7",
                 "--out", str(model)]
            )
            == 0
        )
        assert (
            cli_main(
                ["predict", "--model", str(model), "--input", str(splits / "test.csv"),
                 "--epsilons", "0.1,0.2", "--tau", "random:11", "--out", str(preds),
                 "--dump-cdf", str(cdf)]
            )
            == 0
        )
        assert (
            cli_main(
                ["evaluate", "--model", str(model), "--input", str(splits / "test.csv"),
                 "--method", "cpd", "--tau", "random:11", "--out", str(report)]
            )
            == 0
        )
        outputs[attempt] = tuple(
            p.read_bytes() for p in (model, preds, cdf, report)
        )
    assert outputs["first"] == outputs["second"]
    _report(9, "fit/predict/evaluate reruns byte-identical (4 artifacts compared)")
