"""Convergence figures (matplotlib, rendered to files) and gnuplot scripts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps repeated renders byte-stable
_PNG_META = {"Software": None}


def _finish(fig, path):
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_convergence(records, path, title="", levels=None):
    """``eps_n(N)`` against ``N`` for each level of one run."""
    fig, ax = plt.subplots(figsize=(6, 4))
    recs = [r for r in records if r.eps is not None]
    if recs:
        nlev = len(recs[0].eps) if levels is None else levels
        N = np.array([r.N for r in recs])
        for n in range(nlev):
            eps = np.array([float(r.eps[n]) for r in recs])
            ax.semilogy(N, np.maximum(eps, 1e-17), marker=".", lw=1, label=f"n = {n}")
        ax.legend(fontsize=8)
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\epsilon_n(N)$")
    ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def plot_study(report, path, level=0):
    """One ``eps_level(N)`` trace per random potential."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for e in report.entries:
        recs = [r for r in e.records if r.eps is not None]
        if not recs:
            continue
        N = [r.N for r in recs]
        eps = np.maximum([float(r.eps[level]) for r in recs], 1e-17)
        ax.semilogy(N, eps, lw=0.7, alpha=0.6)
    ax.axhline(report.tol, color="k", ls="--", lw=0.8)
    ax.set_xlabel("N")
    ax.set_ylabel(rf"$\epsilon_{level}(N)$")
    ax.set_title(f"{report.count} random potentials, m = {report.m}, l = {report.l}")
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def plot_exact_errors(traces, path):
    """Absolute and relative error curves for the exact test cases.

    ``traces`` maps a label to ``(N list, absolute error list, exact energy)``.
    """
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for label, (N, err, exact) in traces.items():
        err = np.maximum(np.asarray(err, dtype=float), 1e-17)
        axes[0].semilogy(N, err, marker=".", lw=1, label=label)
        if exact != 0:
            axes[1].semilogy(N, err / abs(exact), marker=".", lw=1, label=label)
    axes[0].set_ylabel("absolute error")
    axes[1].set_ylabel("relative error")
    for ax in axes:
        ax.set_xlabel("N")
        ax.grid(alpha=0.3, which="both")
        ax.legend(fontsize=8)
    return _finish(fig, path)


def write_gnuplot_script(csv_name, path, title="", level=0, by_potential=True):
    """Gnuplot script drawing ``eps`` against ``N`` from the CSV columns.

    Column order is ``potential_id, N, h, level, energy, eps``.
    """
    png = Path(path).with_suffix(".gp.png").name
    select = f"($4=={level} && strcol(6) ne '' ? $6 : 1/0)"
    lines = [
        "set datafile separator ','",
        "set terminal pngcairo size 800,560",
        f"set output '{png}'",
        "set logscale y",
        "set format y '10^{%L}'",
        "set xlabel 'N'",
        f"set ylabel 'eps_{level}(N)'",
        f"set title '{title}'",
        "set key off",
    ]
    if by_potential:
        lines += [
            f"stats '{csv_name}' using 1 nooutput",
            "n = int(STATS_max)",
            f"plot for [i=0:n] '{csv_name}' using 2:(($1==i) ? {select} : 1/0) every ::1 with lines",
        ]
    else:
        lines.append(f"plot '{csv_name}' using 2:{select} every ::1 with linespoints")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)
