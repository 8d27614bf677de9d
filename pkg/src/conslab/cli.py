"""Command-line interface.

One subcommand per invocation: dataset generation, single training runs,
gradient-flow integration, registry experiments, the full suite, closed-form
imbalance prediction, and report rendering.  Exit codes: 0 success, 1
runtime failure, 2 usage error, 3 experiment target failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, conservation, experiments, plots, theory
from .data import gen_gaussian_mixture, save_csv
from .errors import ConslabError
from .model import LINEAR, RELU, init_kaiming_balanced, leaky
from .training import (OptimizerKind, TrainConfig, integrate_flow,
                       save_trace_summary, trace_summary, trace_to_csv, train)


def _parse_widths(text):
    try:
        widths = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad widths list: {text!r}")
    if len(widths) < 2:
        raise argparse.ArgumentTypeError("need at least input and output widths")
    return widths


def _parse_activation(text):
    if text == "linear":
        return LINEAR
    if text == "relu":
        return RELU
    if text.startswith("leaky:"):
        try:
            return leaky(float(text.split(":", 1)[1]))
        except (ValueError, ConslabError):
            raise argparse.ArgumentTypeError(f"bad activation: {text!r}")
    raise argparse.ArgumentTypeError(
        f"unknown activation {text!r} (use linear, relu, or leaky:<slope>)")


def _parse_eta_grid(text):
    try:
        lo, hi, num = text.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eta grid: {text!r} (want lo:hi:n)")
    if lo <= 0 or hi <= lo or num < 1:
        raise argparse.ArgumentTypeError("eta grid needs 0 < lo < hi and n >= 1")
    return np.logspace(np.log10(lo), np.log10(hi), num)


def _parse_seeds(text):
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list: {text!r}")


def _default_out():
    return os.environ.get("CONSLAB_OUT", "runs")


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    sub.add_argument("--out", default=None,
                     help="output directory (default $CONSLAB_OUT or ./runs)")
    sub.add_argument("--jobs", type=int, default=1,
                     help="max concurrent experiment cells (default 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conslab",
        description="Conservation-law drift and Hessian spectral dynamics "
                    "in small bias-free MLPs.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen-data", help="generate a Gaussian mixture dataset CSV")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--dim", type=int, default=20)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--separation", type=float, default=2.0)
    _add_common(p)

    p = subs.add_parser("train", help="run full-batch training, emit trace CSV")
    p.add_argument("--widths", type=_parse_widths, default=[20, 64, 5])
    p.add_argument("--activation", type=_parse_activation, default=RELU)
    p.add_argument("--loss", choices=["mse", "ce"], default="mse")
    p.add_argument("--opt", choices=["gd", "adam"], default="gd")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--bias", action="store_true")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--separation", type=float, default=2.0)
    _add_common(p)

    p = subs.add_parser("flow", help="integrate gradient flow, report drift")
    p.add_argument("--widths", type=_parse_widths, default=[20, 32, 5])
    p.add_argument("--activation", type=_parse_activation, default=RELU)
    p.add_argument("--loss", choices=["mse", "ce"], default="mse")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--step-size", type=float, default=1e-4)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--separation", type=float, default=2.0)
    _add_common(p)

    p = subs.add_parser("experiment", help="run one registry experiment")
    p.add_argument("id", help="experiment id, E1..E23")
    p.add_argument("--seeds", type=_parse_seeds, default=None,
                   help="comma-separated seed override")
    _add_common(p)

    p = subs.add_parser("suite", help="run many experiments and summarize")
    p.add_argument("ids", help="'all' or comma-separated ids, e.g. E1,E5")
    _add_common(p)

    p = subs.add_parser("predict", help="closed-form imbalance over an eta grid")
    p.add_argument("--spectrum", required=True,
                   help="JSON file with lambdas, coeffs, steps")
    p.add_argument("--eta-grid", type=_parse_eta_grid, required=True,
                   help="log-spaced grid as lo:hi:n")
    _add_common(p)

    p = subs.add_parser("report", help="summarize an output directory and "
                                       "render figures")
    p.add_argument("dir", help="directory holding experiment results")
    _add_common(p)
    return parser


def _cmd_gen_data(args):
    out_dir = args.out or _default_out()
    os.makedirs(out_dir, exist_ok=True)
    ds = gen_gaussian_mixture(args.n, args.dim, args.classes, args.separation,
                              args.seed)
    path = os.path.join(out_dir, f"mixture_n{args.n}_d{args.dim}_seed{args.seed}.csv")
    save_csv(ds, path)
    print(f"wrote {path} ({ds.n} samples, {ds.d} features, {ds.c} classes)")
    return 0


def _cmd_train(args):
    out_dir = args.out or _default_out()
    os.makedirs(out_dir, exist_ok=True)
    ds = gen_gaussian_mixture(args.n, args.widths[0], args.widths[-1],
                              args.separation, args.seed)
    cfg = TrainConfig(widths=args.widths, activation=args.activation,
                      loss=args.loss, opt=OptimizerKind(args.opt, args.eta),
                      steps=args.steps, seed=args.seed, bias=args.bias)
    trace = train(cfg, ds)
    trace_path = os.path.join(out_dir, "trace.csv")
    trace_to_csv(trace, trace_path)
    save_trace_summary(trace, os.path.join(out_dir, "summary.json"))
    rep = conservation.drift_report(trace)
    summary = trace_summary(trace)
    print(f"status={trace.status} steps={trace.steps_run} "
          f"final_loss={summary['final_loss']:.6g}")
    print(f"total_drift={np.max(rep.total_drift):.6g} "
          f"identity_applicable={rep.identity_applicable}")
    print(f"wrote {trace_path}")
    return 0


def _cmd_flow(args):
    out_dir = args.out or _default_out()
    os.makedirs(out_dir, exist_ok=True)
    ds = gen_gaussian_mixture(args.n, args.widths[0], args.widths[-1],
                              args.separation, args.seed)
    p0 = init_kaiming_balanced(args.widths, args.seed)
    flow = integrate_flow(p0, ds, args.activation, args.loss,
                          args.duration, args.step_size)
    rel = float(np.max(np.abs(flow.cons - flow.cons[0])
                       / (1.0 + np.abs(flow.cons[0]))))
    path = os.path.join(out_dir, "flow.csv")
    with open(path, "w") as fh:
        pairs = flow.cons.shape[1]
        fh.write("time,loss," + ",".join(f"cons_{j + 1}" for j in range(pairs)) + "\n")
        for i in range(len(flow.times)):
            row = [f"{flow.times[i]:.17g}", f"{flow.loss[i]:.17g}"]
            row += [f"{v:.17g}" for v in flow.cons[i]]
            fh.write(",".join(row) + "\n")
    print(f"status={flow.status} max_relative_drift={rel:.6g}")
    print(f"wrote {path}")
    return 0


def _print_result(result):
    for t in result.targets:
        print(f"  {t.name}: {experiments._fmt(t.value)} "
              f"[{t.comparator} {t.threshold}] "
              f"{'pass' if t.passed else 'FAIL'}")
    print(f"{result.id}: {'pass' if result.passed else 'FAIL'}")


def _cmd_experiment(args):
    spec = experiments.get_spec(args.id)
    if args.seeds:
        spec.seeds = args.seeds
    out_dir = args.out or _default_out()
    result = experiments.run_experiment(spec, out_dir)
    _print_result(result)
    return 0 if result.passed else 3


def _cmd_suite(args):
    ids = None if args.ids == "all" else args.ids.split(",")
    out_dir = args.out or _default_out()
    summary = experiments.run_suite(ids, out_dir, parallelism=args.jobs)
    print(experiments.summary_markdown(summary))
    return 0 if summary["failed"] == 0 else 3


def _cmd_predict(args):
    with open(args.spectrum) as fh:
        payload = json.load(fh)
    lambdas = np.asarray(payload["lambdas"], dtype=float)
    coeffs = np.asarray(payload["coeffs"], dtype=float)
    steps = int(payload.get("steps", 1000))
    rows = []
    print(f"{'eta':>12} {'imbalance':>14} {'local_exponent':>15}")
    base = theory.SpectralModel(lambdas, coeffs, float(args.eta_grid[0]), steps)
    exponents = theory.local_exponent(base, args.eta_grid) \
        if len(args.eta_grid) >= 3 else [float("nan")] * len(args.eta_grid)
    for eta, beta in zip(args.eta_grid, exponents):
        model = theory.SpectralModel(lambdas, coeffs, float(eta), steps)
        total, _ = theory.crossover_sum(model)
        rows.append((float(eta), total, float(beta)))
        print(f"{eta:>12.5g} {total:>14.6g} {beta:>15.4f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "prediction.csv")
        with open(path, "w") as fh:
            fh.write("eta,imbalance,local_exponent\n")
            for eta, total, beta in rows:
                fh.write(f"{eta:.17g},{total:.17g},{beta:.17g}\n")
        print(f"wrote {path}")
    return 0


def _cmd_report(args):
    out_dir = args.dir
    if not os.path.isdir(out_dir):
        print(f"conslab: not a directory: {out_dir}", file=sys.stderr)
        return 1
    results = {}
    for entry in sorted(os.listdir(out_dir)):
        path = os.path.join(out_dir, entry, "results.json")
        if os.path.isfile(path):
            with open(path) as fh:
                payload = json.load(fh)
            payload.pop("timestamp", None)
            results[payload["id"]] = payload
    if results:
        summary = {
            "results": results,
            "passed": sum(1 for r in results.values() if r["passed"]),
            "failed": sum(1 for r in results.values() if not r["passed"]),
        }
        print(experiments.summary_markdown(summary))
    else:
        print("no results.json files found")
    figures = plots.render_report_figures(out_dir)
    for path in figures:
        print(f"wrote {path}")
    return 0


_DISPATCH = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "flow": _cmd_flow,
    "experiment": _cmd_experiment,
    "suite": _cmd_suite,
    "predict": _cmd_predict,
    "report": _cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ConslabError as exc:
        print(f"conslab: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"conslab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
