"""Static plot emission: mean lines with +/- one stddev bands, plus the data.

Every figure gets a sibling CSV so the numbers behind the plot are always
recoverable without re-running anything.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def curve_plot(
    series: dict[str, tuple[list, list, list]],
    xlabel: str,
    ylabel: str,
    out_path: str | Path,
) -> Path:
    """Plot mean curves with shaded stddev bands.

    ``series`` maps a label to (x values, means, stddevs).
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, means, stds) in sorted(series.items()):
        ax.plot(xs, means, marker="o", label=label)
        lo = [m - s for m, s in zip(means, stds)]
        hi = [m + s for m, s in zip(means, stds)]
        ax.fill_between(xs, lo, hi, alpha=0.25)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)

    with open(out_path.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "x", "mean", "stddev"])
        for label, (xs, means, stds) in sorted(series.items()):
            for x, m, s in zip(xs, means, stds):
                writer.writerow([label, x, m, s])
    return out_path
