"""Figure rendering for evaluation reports.

Writes PNG files next to the delimited report output: a per-category
accuracy heatmap for each tolerance level, and a summary bar chart across
levels.  matplotlib is imported lazily so the rest of the package works in
minimal environments.
"""

from __future__ import annotations

from pathlib import Path

from .evaluate import EvalReport

_STATE_TYPES = ["integrative", "consequent", "terminal"]
_ACTION_TYPES = ["self-state", "symbol-state", "equation-state"]


def render_figures(report: EvalReport, outdir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for eta in report.etas:
        cells = report.cells(eta)
        grid = [[float("nan")] * len(_ACTION_TYPES) for _ in _STATE_TYPES]
        for i, st in enumerate(_STATE_TYPES):
            for j, at in enumerate(_ACTION_TYPES):
                if (st, at) in cells:
                    w, n = cells[(st, at)]
                    grid[i][j] = w / n
        fig, ax = plt.subplots(figsize=(6, 4))
        im = ax.imshow(grid, vmin=0.0, vmax=1.0, cmap="viridis")
        ax.set_xticks(range(len(_ACTION_TYPES)), _ACTION_TYPES)
        ax.set_yticks(range(len(_STATE_TYPES)), _STATE_TYPES)
        for i, st in enumerate(_STATE_TYPES):
            for j, at in enumerate(_ACTION_TYPES):
                if (st, at) in cells:
                    w, n = cells[(st, at)]
                    ax.text(
                        j, i, f"{w / n:.3f}\n({n})",
                        ha="center", va="center", fontsize=9, color="white",
                    )
        ax.set_title(
            f"{report.measure}, eta={eta}: accuracy by state and action type"
        )
        fig.colorbar(im, ax=ax)
        fig.tight_layout()
        path = out / f"accuracy_cells_eta{eta}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(4, 3))
    labels = [f"eta={eta}" for eta in report.etas]
    values = [report.accuracy(eta) for eta in report.etas]
    ax.bar(labels, values, color="#46788e")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("accuracy")
    ax.set_title(f"{report.measure}: overall accuracy")
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.3f}", ha="center", fontsize=9)
    fig.tight_layout()
    path = out / "accuracy_overall.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
