#!/usr/bin/env python3
"""Record core outputs as JSON fixtures for the language-bindings tests.

The bindings package replays these requests through the wire protocol and
demands agreement with the recorded results to 1e-12, so any marshaling
loss or semantic drift at the boundary shows up immediately. Regenerate
with: python3 scripts/make_binding_fixtures.py [--out-dir bindings/fixtures]
"""

import argparse
import json
import os

import numpy as np

from cpdkit.api import handle_request


def record(op, **fields):
    response = handle_request({"op": op, **fields})
    assert response["ok"], response
    return {"op": op, "request": fields, "expected": response["result"]}


def stepwise_cdf_instances(count=200, seed=20240101):
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(count):
        n = int(rng.integers(1, 21))
        thresholds = np.round(rng.uniform(-2.0, 2.0, size=n), 1)
        if n >= 2:
            thresholds[rng.integers(0, n)] = thresholds[rng.integers(0, n)]
        thresholds = np.sort(thresholds).tolist()
        queries = list(thresholds)
        uniq = sorted(set(thresholds))
        queries += [(a + b) / 2.0 for a, b in zip(uniq, uniq[1:])]
        queries += [-10.0, 10.0]
        for tau in (0.0, 0.5, 1.0):
            response = handle_request(
                {
                    "op": "cdf_batch",
                    "model": {"residuals": thresholds, "n_calib": n},
                    "queries": [
                        {"y_hat": 0.0, "sigma_hat": 1.0, "tau": tau, "y": y}
                        for y in queries
                    ],
                }
            )
            assert response["ok"], response
            instances.append(
                {
                    "thresholds": thresholds,
                    "tau": tau,
                    "queries": queries,
                    "expected": response["result"]["values"],
                }
            )
    return {"instances": instances}


def hand_example_cases():
    hand_model = {"residuals": [-0.4, 0.5, 0.5], "n_calib": 3}
    wide_model = {"residuals": [float(i) for i in range(1, 20)], "n_calib": 19}
    labels = [float(i) for i in range(50)]

    def ece_intervals(miss):
        return [
            [y + 10.0, y + 11.0] if i < miss else [y - 1.0, y + 1.0]
            for i, y in enumerate(labels)
        ]

    cases = [
        record("fit", y=[1.0, 0.0, 2.0], y_hat=[0.5, 0.2, 1.0], sigma_hat=[1.0, 0.5, 2.0]),
        record("calibration_scores", model=hand_model, y_hat=1.0, sigma_hat=1.0),
        record("cdf", model=hand_model, y_hat=1.0, sigma_hat=1.0, y=1.0, tau=0.5),
        record("cdf", model=hand_model, y_hat=1.0, sigma_hat=1.0, y=1.5, tau=0.5),
        record("cdf", model=hand_model, y_hat=1.0, sigma_hat=1.0, y=-10.0, tau=0.5),
        record("cdf", model=hand_model, y_hat=1.0, sigma_hat=1.0, y=10.0, tau=0.5),
        record("interval", model=wide_model, y_hat=0.0, sigma_hat=1.0, epsilon=0.2),
        record("interval", model=wide_model, y_hat=0.0, sigma_hat=1.0, epsilon=0.9),
        record("interval", model=hand_model, y_hat=0.0, sigma_hat=1.0, epsilon=0.1),
        record("ece", labels=labels, levels=[0.1, 0.5],
               intervals=[ece_intervals(6), ece_intervals(23)]),
        record("sharpness", intervals=[[0.0, 2.0], ["-inf", 1.0], [1.0, 2.0]]),
        record("auroc", scores=[0.9, 0.8, 0.3, 0.1], flags=[1, 1, 0, 0]),
        record("auroc", scores=[0.1, 0.2, 0.8, 0.9], flags=[1, 1, 0, 0]),
        record("auroc", scores=[0.5, 0.5, 0.5, 0.5], flags=[1, 1, 0, 0]),
        record("decile_flags", labels=[float(i) for i in range(1, 11)]),
        record("gaussian_fit", labels=[1.0, -1.0, 1.0, -1.0], preds=[0.0, 0.0, 0.0, 0.0]),
        record("gaussian_fit", labels=[2.0, 0.0], preds=[0.0, 0.0]),
        record("gaussian_interval", mu=0.0, sigma_fixed=1.0, confidence=0.9),
        record("gaussian_interval", mu=5.0, sigma_fixed=2.0, confidence=0.9),
        record("gaussian_cdf", mu=0.0, sigma_fixed=1.0, y=1.9599639845400538),
        record("probit", p=0.975),
        record("probit", p=0.95),
        record("probit", p=0.5),
    ]
    return {"cases": cases}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="bindings/fixtures")
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    fixtures = {
        "stepwise_cdf.json": stepwise_cdf_instances(),
        "hand_examples.json": hand_example_cases(),
    }
    for name, payload in fixtures.items():
        path = os.path.join(args.out_dir, name)
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
