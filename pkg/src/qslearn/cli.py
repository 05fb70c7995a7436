"""Batch command-line surface: constants | check | train | predict | eval | rates.

Exit codes: 0 success, 1 check failure, 2 usage error (bad flags, missing
files, malformed config).  All commands are deterministic given --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .data import DataFormatError, MultilabelDataset, parse_multilabel, split, standardize
from .decode import DEFAULT_BUDGET, decode, decode_bruteforce
from .estimator import empirical_risk, fit, load_model, predict_batch, save_model
from .kernels import KernelSpec, median_heuristic
from .losses import (
    DiscreteLoss,
    LossConfigError,
    decomposition_check,
    make_loss,
)
from .synth import SyntheticSpec, rate_experiment, rate_rows_csv

USAGE_ERROR = 2
CHECK_FAILURE = 1

_COMPLEXITY = {
    "zero_one": "O(min(n, 2^m)) mass accumulation",
    "block_zero_one": "O(b) block argmax",
    "hamming": "O(m) coordinate signs",
    "prec_at_k": "O(m log k) top-k",
    "fscore": "O(m^2) after O(m^3) side conversion",
    "ndcg": "O(m log m) argsort",
    "eru": "O(m log m) argsort",
    "pd": "NP-hard (MWFAS); exact <= budget, else greedy arcset",
    "map": "NP-hard (QAP); exact <= budget, else 2-swap local search",
}


def _loss_from_args(args) -> DiscreteLoss:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    name = args.loss or cfg.get("name")
    m = args.m if args.m is not None else cfg.get("m")
    if name is None or m is None:
        raise LossConfigError("loss name and m are required (flags or config)")
    params = {k: v for k, v in cfg.items() if k not in ("name", "m")}
    for key in ("k", "R", "side"):
        val = getattr(args, key if key != "R" else "relevance", None)
        if val is not None:
            params[key] = val
    return make_loss(name, int(m), **params)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_constants(args) -> int:
    loss = _loss_from_args(args)
    sharp = loss.sharp()
    record = {
        "loss": loss.name,
        "m": loss.m,
        "r": sharp.r,
        "f_inf_norm": sharp.f_inf_norm,
        "u_max": sharp.u_max,
        "a": sharp.a,
        "is_bound": sharp.is_bound,
        "affine_dimension": loss.r,
        "decoder": _COMPLEXITY.get(loss.name, "enumeration"),
        "note": sharp.note,
    }
    if args.format == "json":
        _emit(json.dumps(record, indent=2) + "\n", args.out)
    else:
        header = ",".join(record)
        values = ",".join(str(record[k]) for k in record)
        _emit(header + "\n" + values + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    loss = _loss_from_args(args)
    failures = []
    err = decomposition_check(loss)
    print(f"decomposition identity: max error {err:.3e}")
    if err > 1e-12:
        failures.append(f"{loss.name}: decomposition error {err:.3e} > 1e-12")
    rng = np.random.default_rng(args.seed)
    observations = list(loss.observations())
    mismatches = 0
    for _ in range(args.instances):
        n = int(rng.integers(5, 15))
        weights = rng.normal(size=n)
        ys = [observations[i] for i in rng.integers(len(observations), size=n)]
        theta = np.sum([w * loss.u_row(y) for w, y in zip(weights, ys)], axis=0)
        if decode(loss, theta) != decode_bruteforce(loss, weights, ys):
            mismatches += 1
    print(f"decoder vs brute force: {mismatches} mismatches in {args.instances} instances")
    if mismatches:
        failures.append(f"{loss.name}: {mismatches} decoder mismatches")
    if failures:
        for f in failures:
            print("FAIL:", f, file=sys.stderr)
        return CHECK_FAILURE
    print("ok")
    return 0


def _kernel_from_args(args, x_train) -> KernelSpec:
    if args.kernel == "linear":
        return KernelSpec("linear")
    bw = args.bandwidth if args.bandwidth is not None else median_heuristic(x_train)
    return KernelSpec("gaussian", bw)


def _lambda_grid(args, n: int) -> list[float]:
    if args.lam is not None:
        return [args.lam]
    if args.lambda_grid:
        return [float(t) for t in args.lambda_grid.split(",")]
    return [10.0**k * n**-0.5 for k in range(-3, 2)]


def _load_dataset(args) -> MultilabelDataset:
    if args.m is None:
        raise LossConfigError("--m is required to parse multilabel data")
    return parse_multilabel(args.data, args.m, fmt=args.data_format, d=args.d)


def cmd_train(args) -> int:
    ds = _load_dataset(args)
    loss = _loss_from_args(args)
    x = ds.dense_features()
    if args.standardize:
        x = standardize(x).apply(x)
    grid = _lambda_grid(args, ds.n)
    if len(grid) > 1:
        rng = np.random.default_rng(args.seed)
        perm = rng.permutation(ds.n)
        n_val = max(1, int(0.25 * ds.n))
        val_idx, tr_idx = perm[:n_val], perm[n_val:]
        best_lam, best_risk = None, np.inf
        for lam in grid:
            model = fit(loss, _kernel_from_args(args, x[tr_idx]), lam, x[tr_idx],
                        [ds.labels[i] for i in tr_idx])
            risk = empirical_risk(
                predict_batch(model, x[val_idx]), loss, [ds.labels[i] for i in val_idx]
            )
            if risk < best_risk:
                best_lam, best_risk = lam, risk
        lam = best_lam
        print(f"selected lambda = {lam:.6g} (validation risk {best_risk:.4f})")
    else:
        lam = grid[0]
    model = fit(loss, _kernel_from_args(args, x), lam, x, ds.labels)
    if not args.out:
        print("--out is required for train", file=sys.stderr)
        return USAGE_ERROR
    save_model(model, args.out)
    print(f"model written to {args.out}")
    return 0


def _format_label(z) -> str:
    if sorted(z) == list(range(1, len(z) + 1)):  # permutation
        return " ".join(str(r) for r in z)
    return ",".join(str(j) for j, b in enumerate(z) if b)


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ds = parse_multilabel(args.data, model.loss.m, fmt=args.data_format, d=model.x_train.shape[1])
    x = ds.dense_features()
    if args.standardize:
        x = standardize(x).apply(x)
    path = "alpha" if args.decompose_free else "fast"
    preds = predict_batch(model, x, DEFAULT_BUDGET, path=path)
    _emit("\n".join(_format_label(z) for z in preds) + "\n", args.out)
    return 0


def cmd_eval(args) -> int:
    ds = _load_dataset(args)
    train, val, test = split(ds, seed=args.seed)
    scaler = standardize(train.dense_features())
    x_tr = scaler.apply(train.dense_features())
    x_va = scaler.apply(val.dense_features())
    x_te = scaler.apply(test.dense_features())
    losses = [make_loss(name, ds.m) for name in (args.losses or "zero_one,hamming,fscore").split(",")]
    path = "alpha" if args.decompose_free else "fast"
    records = []
    for loss in losses:
        best = (np.inf, None, None)
        for lam in _lambda_grid(args, train.n):
            model = fit(loss, _kernel_from_args(args, x_tr), lam, x_tr, train.labels)
            risk = empirical_risk(predict_batch(model, x_va, path=path), loss, val.labels)
            if risk < best[0]:
                best = (risk, lam, model)
        val_risk, lam, model = best
        test_risk = empirical_risk(predict_batch(model, x_te, path=path), loss, test.labels)
        records.append(
            {"loss": loss.name, "lambda": lam, "val_risk": val_risk, "test_risk": test_risk}
        )
        print(f"{loss.name}: lambda={lam:.6g} val={val_risk:.4f} test={test_risk:.4f}")
    if args.format == "json":
        _emit(json.dumps(records, indent=2) + "\n", args.out)
    elif args.out:
        lines = ["loss,lambda,val_risk,test_risk"] + [
            f"{r['loss']},{r['lambda']:.6g},{r['val_risk']:.6g},{r['test_risk']:.6g}"
            for r in records
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_rates(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"bad rates spec {args.spec}: {exc}") from exc
    modes = cfg.pop("noise_modes", None) or [cfg.pop("noise_mode", "smooth_crossing")]
    if "loss_params" in cfg:
        cfg["loss_params"] = tuple(tuple(p) for p in cfg["loss_params"])
    if "n_grid" in cfg:
        cfg["n_grid"] = tuple(cfg["n_grid"])
    if not cfg.get("n_grid", (1,)):
        print("empty n_grid", file=sys.stderr)
        return USAGE_ERROR
    if args.seed is not None:
        cfg["seed"] = args.seed
    specs = [SyntheticSpec(noise_mode=mode, **cfg) for mode in modes]
    with ThreadPoolExecutor(max_workers=max(args.threads, 1)) as pool:
        reports = list(pool.map(rate_experiment, specs))
    rows = [row for rep in reports for row in rep.rows]
    csv_text = rate_rows_csv(rows)
    summary = json.dumps([rep.summary() for rep in reports], indent=2) + "\n"
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(f"{args.out_dir}/rates.csv", "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        with open(f"{args.out_dir}/summary.json", "w", encoding="utf-8") as fh:
            fh.write(summary)
        print(f"wrote {args.out_dir}/rates.csv and {args.out_dir}/summary.json")
    else:
        sys.stdout.write(csv_text)
        sys.stdout.write(summary)
    return 0


def _add_loss_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--loss", help="loss name (zero_one, hamming, prec_at_k, fscore, ndcg, eru, pd, map, block_zero_one)")
    p.add_argument("--m", type=int, help="number of classes")
    p.add_argument("--k", type=int, help="Prec@k cutoff")
    p.add_argument("--relevance", "--R", type=int, dest="relevance", help="top relevance score for ndcg/eru")
    p.add_argument("--side", choices=["p", "a"], help="F-score decomposition side")
    p.add_argument("--config", help="JSON loss config; flags override")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=["gaussian", "linear"], default="gaussian")
    p.add_argument("--bandwidth", type=float, help="gaussian bandwidth (default: median heuristic)")
    p.add_argument("--lambda", dest="lam", type=float, help="ridge regularization")
    p.add_argument("--lambda-grid", help="comma-separated grid; default 10^k n^-1/2, k=-3..1")
    p.add_argument("--standardize", action="store_true", help="standardize features from train stats")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset path (.gz ok)")
    p.add_argument("--data-format", choices=["libsvm_multilabel", "csv"], default="libsvm_multilabel")
    p.add_argument("--d", type=int, help="feature dimension override for libsvm parsing")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="qsl", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="sharp constant table for a loss")
    _add_loss_flags(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("check", parents=[common], help="decomposition + decoder/oracle verification")
    _add_loss_flags(p)
    p.add_argument("--instances", type=int, default=50)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("train", parents=[common], help="fit a surrogate model on a dataset")
    _add_loss_flags(p)
    _add_kernel_flags(p)
    _add_data_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="predict labels with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--decompose-free", action="store_true", help="use the weight-based inference path")
    p.add_argument("--standardize", action="store_true")
    _add_data_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", parents=[common], help="split, validate lambda, report test metrics")
    _add_loss_flags(p)
    _add_kernel_flags(p)
    _add_data_flags(p)
    p.add_argument("--losses", help="comma-separated metric losses (default zero_one,hamming,fscore)")
    p.add_argument("--decompose-free", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rates", parents=[common], help="learning-rate experiment from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_rates)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LossConfigError, DataFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
