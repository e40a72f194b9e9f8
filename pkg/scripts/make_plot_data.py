#!/usr/bin/env python3
"""Emit plot-ready tables: one example's stepwise CDF and a sharpness curve.

Drives the CLI end to end in a scratch directory: synth -> split -> fit ->
predict (with CDF dump) -> sharpness-curve + reliability, then converts the
first test example's CDF dump into (y, Q(y)) step coordinates. Output files
land in --out-dir; point any plotting tool at them.
"""

import argparse
import json
import os
import sys

import numpy as np

import cpdkit as ck
from cpdkit.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="plot_data")
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    data = os.path.join(out, "data.csv")
    splits = os.path.join(out, "splits")
    model = os.path.join(out, "model.json")
    preds = os.path.join(out, "predictions.csv")
    cdf_dump = os.path.join(out, "cdf_dump.jsonl")

    steps = [
        ["synth", "--n", str(args.n), "--seed", str(args.seed), "--out", data],
        ["split", "--input", data, "--seed", str(args.seed),
         "--fractions", "0.5,0.25,0.25", "--out", splits],
        ["fit", "--train", f"{splits}/train.csv", "--calib", f"{splits}/calib.csv",
         "--out", model],
        ["predict", "--model", model, "--input", f"{splits}/test.csv",
         "--epsilons", "0.05,0.1,0.2", "--tau", "fixed:0.5",
         "--out", preds, "--dump-cdf", cdf_dump],
        ["sharpness-curve", "--model", model, "--input", f"{splits}/test.csv",
         "--out", os.path.join(out, "sharpness_curve.csv")],
        ["reliability", "--model", model, "--input", f"{splits}/test.csv",
         "--out", os.path.join(out, "reliability.csv")],
    ]
    for argv in steps:
        code = cli_main(argv)
        if code != 0:
            return code

    # stepwise CDF coordinates for the first test example
    first = json.loads(open(cdf_dump).readline())
    dist = ck.PredictiveDistribution(
        thresholds=np.asarray(first["thresholds"]), tau=first["tau"]
    )
    lo = float(dist.thresholds[0]) - 0.5
    hi = float(dist.thresholds[-1]) + 0.5
    with open(os.path.join(out, "cdf_steps.csv"), "w") as fh:
        fh.write("y,cdf\n")
        for y in np.linspace(lo, hi, 400):
            fh.write(f"{float(y)!r},{ck.cdf_value(dist, float(y))!r}\n")
    print(f"plot data for example {first['id']!r} and curves written to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
