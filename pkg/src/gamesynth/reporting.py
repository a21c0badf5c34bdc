"""Benchmark figure rendering (matplotlib, file output only)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _series(results, y_attr):
    """Group ok-rows into {(turn_model, objects): ([locations], [y])}."""
    out: dict = {}
    for r in results:
        if r.status != "ok":
            continue
        key = (r.turn_model, r.objects)
        xs, ys = out.setdefault(key, ([], []))
        xs.append(r.locations)
        ys.append(getattr(r, y_attr))
    return out


def _plot(results, y_attr, ylabel, title, path, logy=True):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (tm, objects), (xs, ys) in sorted(_series(results, y_attr).items()):
        order = sorted(range(len(xs)), key=xs.__getitem__)
        ax.plot(
            [xs[i] for i in order],
            [ys[i] for i in order],
            marker="o",
            label=f"{tm}, {objects} obj",
        )
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("locations")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bench_figures(results, directory: str) -> list:
    """Write the standard benchmark figures next to the CSV; returns paths."""
    os.makedirs(directory, exist_ok=True)
    paths = [
        _plot(
            results, "states", "product states", "Model size vs locations",
            os.path.join(directory, "bench_states.png"),
        ),
        _plot(
            results, "transitions", "product transitions",
            "Transitions vs locations",
            os.path.join(directory, "bench_transitions.png"),
        ),
        _plot(
            results, "solve_s", "solve time (s)", "Synthesis time vs locations",
            os.path.join(directory, "bench_solve_time.png"),
        ),
        _plot(
            results, "build_s", "build time (s)", "Abstraction time vs locations",
            os.path.join(directory, "bench_build_time.png"),
        ),
    ]
    return paths
