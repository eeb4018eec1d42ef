"""Figure rendering for benchmark reports.

Figures are written to files next to the delimited report output: a success
rate chart (error bars over iterations, against the threshold when several
were swept) and a stacked bar chart of the per-phase training times.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_csr_figure", "save_timing_figure"]

_PHASES = ("time_train", "time_project", "time_classify")


def _method_groups(reports):
    groups = {}
    for r in reports:
        groups.setdefault(r.method, []).append(r)
    return groups


def save_csr_figure(reports, path):
    """Success rate per method, against epsilon when it varies."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, runs in sorted(_method_groups(reports).items()):
        runs = sorted(runs, key=lambda r: (r.epsilon is None, r.epsilon or 0.0))
        xs = [r.epsilon for r in runs]
        if any(x is None for x in xs) or len(set(xs)) < len(xs):
            xs = list(range(len(runs)))
            ax.set_xlabel("run index")
        else:
            ax.set_xlabel("singular-value mass threshold")
        ax.errorbar(
            xs,
            [r.csr_mean for r in runs],
            yerr=[r.csr_std for r in runs],
            marker="o",
            capsize=3,
            label=method,
        )
    ax.set_ylabel("classification success rate")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_timing_figure(reports, path):
    """Stacked per-phase wall-clock times, one bar per run."""
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = []
    for r in reports:
        tag = r.method
        if r.epsilon is not None:
            tag += f" e{r.epsilon:g}"
        if r.ranks is not None:
            tag += " r" + "x".join(str(v) for v in r.ranks)
        labels.append(tag)
    bottoms = [0.0] * len(reports)
    for phase in _PHASES:
        values = [getattr(r, phase) for r in reports]
        ax.bar(range(len(reports)), values, bottom=bottoms,
               label=phase.removeprefix("time_"))
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("wall time (s), summed over iterations")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
