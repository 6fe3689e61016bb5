"""Optional figure rendering for Monte Carlo reports.

The delimited output (CSV/JSON) is the interface contract; figures are a
convenience layered on top when a subcommand gets --plot, written next to
the delimited output with a non-interactive backend.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_failure_rate(path: str, title: str, labels, frequencies, bounds=None,
                      upper_intervals=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(labels))
    ax.bar(xs, frequencies, width=0.55, label="empirical", color="#33658a")
    if upper_intervals is not None:
        ax.errorbar(xs, frequencies,
                    yerr=[[0] * len(labels),
                          [max(u - f, 0) for u, f in zip(upper_intervals, frequencies)]],
                    fmt="none", ecolor="#2f2f2f", capsize=4, label="Wilson 99% upper")
    if bounds is not None:
        ax.plot(xs, bounds, "v", color="#f26419", markersize=9, label="analytic bound")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("per-output failure frequency")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_trial_scatter(path: str, title: str, xvals, yvals, xlabel, ylabel,
                       fit_slope=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xvals, yvals, ".", alpha=0.4, color="#33658a", label="trials")
    if fit_slope is not None and xvals:
        xs = sorted(set(xvals))
        ax.plot(xs, [fit_slope * x for x in xs], "-", color="#f26419",
                label=f"fitted slope {fit_slope:.3g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_depth_report(path: str, title: str, histogram: dict):
    fig, ax = plt.subplots(figsize=(6, 4))
    keys = sorted(histogram)
    ax.bar(range(len(keys)), [histogram[k] for k in keys], color="#33658a")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("op count")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
