"""Figure rendering for traces, sweeps, and experiment result files.

Everything renders through the Agg backend straight to disk; no interactive
display.  The report entry point scans an output directory for results.json
files and trace CSVs and emits whatever figures the stored metrics support.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_trace_csv(csv_path, out_path):
    """Loss, conservation quantities, and per-step drift from a trace CSV."""
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    steps = np.array([int(r["step"]) for r in rows])
    loss = np.array([float(r["loss"]) for r in rows])
    cons_cols = sorted(c for c in rows[0] if c.startswith("cons_"))
    dc_cols = sorted(c for c in rows[0] if c.startswith("delta_c_"))
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    axes[0].semilogy(steps, np.maximum(loss, 1e-300))
    axes[0].set_xlabel("step")
    axes[0].set_ylabel("loss")
    for c in cons_cols:
        axes[1].plot(steps, [float(r[c]) for r in rows], label=c)
    axes[1].set_xlabel("step")
    axes[1].set_ylabel("layer norm difference")
    axes[1].legend(fontsize=7)
    for c in dc_cols:
        vals = np.abs([float(r[c]) for r in rows])
        axes[2].semilogy(steps, np.maximum(vals, 1e-300), label=c)
    axes[2].set_xlabel("step")
    axes[2].set_ylabel("per-step drift")
    axes[2].legend(fontsize=7)
    return _save(fig, out_path)


def plot_power_law(xs, ys, out_path, xlabel="eta", ylabel="total drift",
                   slope=None, intercept=None):
    """Log-log scatter with an optional fitted power law overlaid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    ax.loglog(xs, ys, "o", ms=4)
    if slope is not None and intercept is not None:
        grid = np.logspace(np.log10(xs.min()), np.log10(xs.max()), 50)
        ax.loglog(grid, np.exp(intercept) * grid ** slope, "-", lw=1,
                  label=f"slope {slope:.3f}")
        ax.legend(fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return _save(fig, out_path)


def plot_series(xs, ys, out_path, xlabel="step", ylabel="value", logy=False,
                label=None):
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    plot = ax.semilogy if logy else ax.plot
    plot(xs, ys, "o-", ms=3, lw=1, label=label)
    if label:
        ax.legend(fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return _save(fig, out_path)


def plot_ck_scatter(predicted, empirical, out_path, r=None):
    """Predicted vs measured mode coefficients with the identity line."""
    predicted = np.asarray(predicted, dtype=float)
    empirical = np.asarray(empirical, dtype=float)
    fig, ax = plt.subplots(figsize=(3.8, 3.6))
    ax.plot(predicted, empirical, "o", ms=4)
    lim = max(predicted.max(), empirical.max()) * 1.1
    ax.plot([0, lim], [0, lim], "k--", lw=0.8)
    ax.set_xlabel("predicted coefficient")
    ax.set_ylabel("measured coefficient")
    if r is not None:
        ax.set_title(f"R = {r:.3f}", fontsize=9)
    return _save(fig, out_path)


def plot_flow_drift(times, cons, out_path):
    """Relative conservation drift along a gradient-flow trajectory."""
    cons = np.asarray(cons, dtype=float)
    rel = np.abs(cons - cons[0]) / (1.0 + np.abs(cons[0]))
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    for j in range(rel.shape[1]):
        ax.semilogy(times, np.maximum(rel[:, j], 1e-18), lw=1,
                    label=f"pair {j + 1}")
    ax.set_xlabel("flow time")
    ax.set_ylabel("relative drift")
    ax.legend(fontsize=8)
    return _save(fig, out_path)


def _fig_from_result(exp_id, metrics, fig_dir):
    """Render whatever figure the stored metrics of one experiment support."""
    out = os.path.join(fig_dir, f"{exp_id}.png")
    if exp_id == "E5" and "beta_per_seed" in metrics:
        betas = metrics["beta_per_seed"]
        fig, ax = plt.subplots(figsize=(4.2, 3.4))
        ax.bar(range(len(betas)), betas)
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_xlabel("seed index")
        ax.set_ylabel("drift exponent")
        return _save(fig, out)
    if exp_id in ("E13", "E19") and "hidden" in metrics:
        key = "beta_ce" if exp_id == "E13" else "beta_mse"
        return plot_series(metrics["hidden"], metrics[key], out,
                           xlabel="hidden width", ylabel="drift exponent")
    if exp_id == "E15" and "sub_eos_rates" in metrics:
        return plot_power_law(metrics["hidden"], metrics["sub_eos_rates"], out,
                              xlabel="hidden width", ylabel="switch rate")
    if exp_id == "E21" and "pearson_r_by_eta" in metrics:
        pairs = sorted((float(k), v) for k, v in metrics["pearson_r_by_eta"].items())
        return plot_series([p[0] for p in pairs], [p[1] for p in pairs], out,
                           xlabel="eta", ylabel="mode coefficient correlation")
    if exp_id == "E22" and "ratio_by_dim" in metrics:
        pairs = sorted((int(k), v) for k, v in metrics["ratio_by_dim"].items())
        return plot_series([p[0] for p in pairs], [p[1] for p in pairs], out,
                           xlabel="input dimension", ylabel="transition width / d")
    if exp_id == "E23" and "taus" in metrics:
        inv = [1.0 / e for e in metrics["etas"]]
        return plot_series(inv, metrics["taus"], out, xlabel="1 / eta",
                           ylabel="decay timescale (steps)")
    return None


def render_report_figures(out_dir):
    """Render figures for every recognized results.json under out_dir.

    Also renders any trace_*.csv files found alongside them.  Returns the
    list of figure paths written.
    """
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    written = []
    for entry in sorted(os.listdir(out_dir)):
        cell = os.path.join(out_dir, entry)
        results = os.path.join(cell, "results.json")
        if os.path.isfile(results):
            with open(results) as fh:
                payload = json.load(fh)
            path = _fig_from_result(payload.get("id", entry),
                                    payload.get("metrics", {}), fig_dir)
            if path:
                written.append(path)
        if os.path.isdir(cell):
            for name in sorted(os.listdir(cell)):
                if name.startswith("trace") and name.endswith(".csv"):
                    stem = f"{entry}_{os.path.splitext(name)[0]}.png"
                    written.append(plot_trace_csv(os.path.join(cell, name),
                                                  os.path.join(fig_dir, stem)))
    for name in sorted(os.listdir(out_dir)):
        if name.startswith("trace") and name.endswith(".csv"):
            stem = f"{os.path.splitext(name)[0]}.png"
            written.append(plot_trace_csv(os.path.join(out_dir, name),
                                          os.path.join(fig_dir, stem)))
    return written
