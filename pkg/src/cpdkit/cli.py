"""Command-line surface: split, fit, predict, evaluate, and experiments.

Every command is deterministic given its input files and flags; all
randomness flows through explicit seeds that end up in the report
provenance. Exit codes: 0 success, 2 input-contract violation, 3 numeric
degeneracy, anything else is a crash.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

from . import __version__, api
from .baseline import gaussian_interval
from .cpd import TauPolicy, interval
from .data import (
    HeteroscedasticNoise,
    HomoscedasticNoise,
    SplitSpec,
    SynthSpec,
    load_examples,
    load_model,
    passthrough_split,
    save_examples,
    save_model,
    save_report,
    shuffle_split,
    synth_generate,
)
from .knn import KnnConfig
from .metrics import grid_from_step, reliability_table, sharpness
from .pipeline import (
    evaluate_split,
    fit_artifacts,
    gaussian_interval_provider,
    cpd_interval_provider,
    point_predictions,
    predictive_distributions,
)
from .types import ContractError, DegenerateDataError

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_DEGENERATE = 3


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ContractError(f"bad float list {text!r}: {exc}") from exc


def _parse_fractions(text: str) -> tuple[float, float, float]:
    values = _parse_floats(text)
    if len(values) != 3:
        raise ContractError(f"--fractions needs three comma-separated values, got {text!r}")
    return tuple(values)


def _parse_tau(text: str) -> TauPolicy:
    kind, _, arg = text.partition(":")
    if kind == "fixed" and arg:
        return TauPolicy.fixed(float(arg))
    if kind == "random" and arg:
        try:
            return TauPolicy.seeded(int(arg))
        except ValueError as exc:
            raise ContractError(f"bad tau seed {arg!r}") from exc
    raise ContractError(f"bad --tau {text!r}; expected fixed:VALUE or random:SEED")


def _parse_noise(text: str):
    kind, _, arg = text.partition(":")
    values = _parse_floats(arg) if arg else []
    if kind in ("homo", "homoscedastic") and len(values) == 1:
        return HomoscedasticNoise(values[0])
    if kind in ("het", "heteroscedastic") and len(values) == 2:
        return HeteroscedasticNoise(values[0], values[1])
    raise ContractError(
        f"bad --noise {text!r}; expected homo:SIGMA or het:SIGMA0,SLOPE"
    )


def _tau_provenance(policy: TauPolicy) -> dict:
    if policy.mode == "fixed":
        return {"mode": "fixed", "value": policy.value}
    return {"mode": "seeded_random", "seed": policy.seed}


def _knn_config(args) -> KnnConfig:
    return KnnConfig(
        k_regress=args.k_regress,
        k_difficulty=args.k_difficulty,
        difficulty_floor=args.difficulty_floor,
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_split(args) -> int:
    examples = load_examples(args.input, args.format)
    if args.passthrough:
        bounds = [int(v) for v in args.passthrough.split(",")]
        if len(bounds) != 2:
            raise ContractError(f"--passthrough needs m,n, got {args.passthrough!r}")
        train, calib, test = passthrough_split(examples, (bounds[0], bounds[1]))
        mode = {"mode": "passthrough", "boundaries": bounds}
    else:
        spec = SplitSpec(seed=args.seed, fractions=_parse_fractions(args.fractions))
        train, calib, test = shuffle_split(examples, spec)
        mode = {"mode": "shuffle", "seed": spec.seed, "fractions": list(spec.fractions)}
    out = args.out.rstrip("/")
    os.makedirs(out, exist_ok=True)
    ext = args.format
    for name, part in (("train", train), ("calib", calib), ("test", test)):
        save_examples(part, os.path.join(out, f"{name}.{ext}"), args.format)
    manifest = {
        "format_version": 1,
        "kind": "split-manifest",
        "input": args.input,
        "input_sha256": _sha256(args.input),
        "sizes": {"train": len(train), "calib": len(calib), "test": len(test)},
        **mode,
    }
    with open(os.path.join(out, "split.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(train)}/{len(calib)}/{len(test)} examples to {out}/")
    return EXIT_OK


def _cmd_fit(args) -> int:
    train = load_examples(args.train, args.format)
    calib = load_examples(args.calib, args.format)
    config = _knn_config(args)
    provenance = {
        "tool_version": __version__,
        "train_file": args.train,
        "train_sha256": _sha256(args.train),
        "calib_file": args.calib,
        "calib_sha256": _sha256(args.calib),
        "k_regress": config.k_regress,
        "k_difficulty": config.k_difficulty,
        "difficulty_floor": config.difficulty_floor,
        "n_train": len(train),
        "n_calib": len(calib),
    }
    artifacts = fit_artifacts(train, calib, config, provenance=provenance)
    save_model(args.out, artifacts.conformal, knn=artifacts.knn, baseline=artifacts.baseline)
    print(
        f"fit: {len(train)} train, {len(calib)} calibration, "
        f"sigma_fixed={artifacts.baseline.sigma_fixed:.6g} -> {args.out}"
    )
    return EXIT_OK


def _load_artifacts(path):
    conformal, knn, baseline = load_model(path)
    if knn is None:
        raise ContractError(f"{path}: model file has no KNN component")
    if baseline is None:
        raise ContractError(f"{path}: model file has no baseline sigma")
    return conformal, knn, baseline


def _cmd_predict(args) -> int:
    conformal, knn, _baseline = _load_artifacts(args.model)
    test = load_examples(args.input, args.format)
    epsilons = _parse_floats(args.epsilons)
    for eps in epsilons:
        if not 0.0 < eps < 1.0:
            raise ContractError(f"--epsilons values must be in (0, 1), got {eps}")
    policy = _parse_tau(args.tau)
    preds = point_predictions(knn, test)
    dists = predictive_distributions(conformal, preds, policy)

    header = ["id", "y_hat", "sigma_hat", "tau"]
    for eps in epsilons:
        header += [f"lower_{eps:g}", f"upper_{eps:g}"]
    rows = []
    for pred, dist in zip(preds, dists):
        row = [pred.id, _fmt(pred.y_hat), _fmt(pred.sigma_hat), _fmt(dist.tau)]
        for eps in epsilons:
            iv = interval(dist, eps)
            row += [_fmt(iv.lower), _fmt(iv.upper)]
        rows.append(row)
    _write_rows(args.out, header, rows)

    if args.dump_cdf:
        with open(args.dump_cdf, "w") as fh:
            for pred, dist in zip(preds, dists):
                fh.write(
                    json.dumps(
                        {
                            "id": pred.id,
                            "tau": dist.tau,
                            "thresholds": dist.thresholds.tolist(),
                        }
                    )
                    + "\n"
                )
    print(f"predicted {len(preds)} examples -> {args.out}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    conformal, knn, baseline = _load_artifacts(args.model)
    test = load_examples(args.input, args.format)
    grid = grid_from_step(args.grid_step)
    policy = _parse_tau(args.tau)
    confidences = _parse_floats(args.sharpness_confidences)
    from .pipeline import FittedArtifacts

    artifacts = FittedArtifacts(knn=knn, conformal=conformal, baseline=baseline)
    report = evaluate_split(
        artifacts, test, args.method, grid, policy, sharpness_confidences=confidences
    )
    provenance = {
        "tool_version": __version__,
        "model_file": args.model,
        "model_sha256": _sha256(args.model),
        "test_file": args.input,
        "test_sha256": _sha256(args.input),
        "grid_step": args.grid_step,
        "grid_levels": len(grid.levels),
        "tau": _tau_provenance(policy),
        "method": args.method,
    }
    save_report(args.out, report, provenance=provenance)
    sharp = ", ".join(
        f"Sha@{conf:g}={report.sharpness_at[conf]:.4f}" for conf in report.sharpness_at
    )
    print(
        f"{report.method_name}: %ECE={100 * report.ece:.2f} {sharp} "
        f"AUC@10%={report.auroc:.4f} (n={report.n_test}) -> {args.out}"
    )
    return EXIT_OK


def _providers_for(args, conformal, knn, baseline, test, policy):
    preds = point_predictions(knn, test)
    if args.method == "cpd":
        dists = predictive_distributions(conformal, preds, policy)
        return cpd_interval_provider(dists)
    return gaussian_interval_provider(preds, baseline)


def _cmd_reliability(args) -> int:
    conformal, knn, baseline = _load_artifacts(args.model)
    test = load_examples(args.input, args.format)
    grid = grid_from_step(args.grid_step)
    policy = _parse_tau(args.tau)
    provider = _providers_for(args, conformal, knn, baseline, test, policy)
    table = reliability_table(provider, [ex.label for ex in test], grid)
    _write_rows(
        args.out,
        ["epsilon", "err"],
        [[_fmt(eps), _fmt(err)] for eps, err in table],
    )
    print(f"wrote {len(table)} (epsilon, err) rows -> {args.out}")
    return EXIT_OK


def _cmd_sharpness_curve(args) -> int:
    conformal, knn, baseline = _load_artifacts(args.model)
    test = load_examples(args.input, args.format)
    policy = _parse_tau(args.tau)
    confidences = _parse_floats(args.confidences)
    for conf in confidences:
        if not 0.0 <= conf < 1.0:
            raise ContractError(f"confidence levels must be in [0, 1), got {conf}")
    provider = _providers_for(args, conformal, knn, baseline, test, policy)
    rows = []
    for conf in confidences:
        mean_width, excluded = sharpness(provider(1.0 - conf))
        rows.append([_fmt(conf), _fmt(mean_width), excluded])
    _write_rows(args.out, ["confidence", "mean_width", "excluded_unbounded"], rows)
    print(f"wrote {len(rows)} sharpness points -> {args.out}")
    return EXIT_OK


def _study_arm(examples, split, config, grid, policy, confidences):
    train, calib, test = split
    artifacts = fit_artifacts(train, calib, config)
    out = {}
    for method in ("cpd", "gaussian"):
        report = evaluate_split(
            artifacts, test, method, grid, policy, sharpness_confidences=confidences
        )
        out[method] = {
            "ece": report.ece,
            "sharpness_at": {repr(k): v for k, v in report.sharpness_at.items()},
            "auroc": report.auroc,
            "n_test": report.n_test,
        }
    return out


def _cmd_shuffle_study(args) -> int:
    seeds = [int(v) for v in args.seeds.split(",") if v.strip() != ""]
    if not seeds:
        raise ContractError(f"--seeds must list at least one seed, got {args.seeds!r}")
    fractions = _parse_fractions(args.fractions)
    noise = _parse_noise(args.noise)
    if args.shift is None:
        print("note: --shift not given, defaulting to 0 (no regime shift)")
        shift = 0.0
    else:
        shift = args.shift
    config = _knn_config(args)
    grid = grid_from_step(args.grid_step)
    policy = _parse_tau(args.tau)
    confidences = _parse_floats(args.sharpness_confidences)

    n = args.n
    m = math.floor(fractions[0] * n)
    k = m + math.floor(fractions[1] * n)
    per_seed = []
    for seed in seeds:
        spec = SynthSpec(
            n=n, feature_dim=args.feature_dim, noise=noise, shift=shift, seed=seed
        )
        examples = synth_generate(spec)
        arms = {
            "passthrough": _study_arm(
                examples, passthrough_split(examples, (m, k)), config, grid, policy, confidences
            ),
            "shuffled": _study_arm(
                examples,
                shuffle_split(examples, SplitSpec(seed=seed, fractions=fractions)),
                config,
                grid,
                policy,
                confidences,
            ),
        }
        per_seed.append({"seed": seed, **arms})

    def _mean(arm, method):
        return sum(s[arm][method]["ece"] for s in per_seed) / len(per_seed)

    payload = {
        "format_version": 1,
        "kind": "shuffle-study",
        "spec": {
            "n": n,
            "feature_dim": args.feature_dim,
            "noise": args.noise,
            "shift": shift,
            "fractions": list(fractions),
            "boundaries": [m, k],
            "k_regress": config.k_regress,
            "k_difficulty": config.k_difficulty,
            "grid_step": args.grid_step,
            "tau": _tau_provenance(policy),
            "seeds": seeds,
        },
        "per_seed": per_seed,
        "summary": {
            "mean_ece": {
                arm: {method: _mean(arm, method) for method in ("cpd", "gaussian")}
                for arm in ("passthrough", "shuffled")
            }
        },
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for arm in ("passthrough", "shuffled"):
        print(
            f"{arm}: mean ECE cpd={100 * _mean(arm, 'cpd'):.2f}% "
            f"gaussian={100 * _mean(arm, 'gaussian'):.2f}%"
        )
    print(f"wrote study report -> {args.out}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        n=args.n,
        feature_dim=args.feature_dim,
        noise=_parse_noise(args.noise),
        shift=args.shift or 0.0,
        seed=args.seed,
    )
    examples = synth_generate(spec)
    save_examples(examples, args.out, args.format)
    print(f"wrote {len(examples)} synthetic examples -> {args.out}")
    return EXIT_OK


def _cmd_api(args) -> int:
    if args.request:
        with open(args.request, "r") as fh:
            raw = fh.read()
    else:
        raw = sys.stdin.read()
    response = api.handle_raw(raw)
    sys.stdout.write(response)
    sys.stdout.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring


def _add_common_model_flags(p):
    p.add_argument("--model", required=True, help="model file from `fit`")
    p.add_argument("--input", required=True, help="test dataset file")
    p.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p.add_argument("--tau", default="fixed:0.5", help="fixed:VALUE or random:SEED")


def _add_knn_flags(p):
    p.add_argument("--k-regress", type=int, default=10)
    p.add_argument("--k-difficulty", type=int, default=25)
    p.add_argument("--difficulty-floor", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdkit",
        description="Split conformal predictive distributions for scalar regressors.",
    )
    parser.add_argument("--version", action="version", version=f"cpdkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="shuffle-split or passthrough-split a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--fractions", default="0.7,0.15,0.15")
    p.add_argument("--passthrough", default=None, help="m,n contiguous boundaries")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("fit", help="fit KNN + conformal residuals + baseline sigma")
    p.add_argument("--train", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    _add_knn_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="per-example intervals and optional CDF dump")
    _add_common_model_flags(p)
    p.add_argument("--epsilons", default="0.05,0.1,0.2")
    p.add_argument("--dump-cdf", default=None, help="write per-example CDFs (jsonl)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="ECE / sharpness / failure AUROC report")
    _add_common_model_flags(p)
    p.add_argument("--method", default="cpd", choices=["cpd", "gaussian"])
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--sharpness-confidences", default="0.9")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("reliability", help="(epsilon, err) calibration table")
    _add_common_model_flags(p)
    p.add_argument("--method", default="cpd", choices=["cpd", "gaussian"])
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reliability)

    p = sub.add_parser("sharpness-curve", help="(confidence, mean width) table")
    _add_common_model_flags(p)
    p.add_argument("--method", default="cpd", choices=["cpd", "gaussian"])
    p.add_argument(
        "--confidences",
        default="0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sharpness_curve)

    p = sub.add_parser(
        "shuffle-study",
        help="passthrough vs shuffled splits on synthetic (optionally shifted) data",
    )
    p.add_argument("--n", type=int, default=6000)
    p.add_argument("--feature-dim", type=int, default=2)
    p.add_argument("--noise", default="het:0.1,4")
    p.add_argument("--shift", type=float, default=None)
    p.add_argument("--seeds", default="1,2,3")
    p.add_argument("--fractions", default="0.5,0.25,0.25")
    _add_knn_flags(p)
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--tau", default="fixed:0.5")
    p.add_argument("--sharpness-confidences", default="0.9")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_shuffle_study)

    p = sub.add_parser("synth", help="generate a synthetic dataset file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--feature-dim", type=int, default=2)
    p.add_argument("--noise", default="het:0.1,4")
    p.add_argument("--shift", type=float, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("api", help="serve one JSON request (stdin) for bindings")
    p.add_argument("--request", default=None, help="read the request from a file")
    p.set_defaults(func=_cmd_api)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"error (degenerate data): {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
