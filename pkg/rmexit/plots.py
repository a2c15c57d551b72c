import logging
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "rmexit"

import matplotlib.pyplot as plt  # noqa: E402

from .schemas import ExitCurve  # noqa: E402

logger = logging.getLogger(__name__)


def plot_exit_curves(curves: Sequence[ExitCurve], path: Path, title: str = "EXIT functions") -> Path:
    """Overlay of h(ε) curves with a dashed capacity line at 1−R for each rate."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for curve in curves:
            line, = ax.plot(curve.epsilons, curve.values, linestyle="-", label=f"{curve.label} (N={curve.N})")
            if any(p.half_width > 0 for p in curve.points):
                widths = [p.half_width for p in curve.points]
                ax.fill_between(
                    curve.epsilons,
                    (curve.values - widths).clip(0.0, 1.0),
                    (curve.values + widths).clip(0.0, 1.0),
                    color=line.get_color(),
                    alpha=0.2,
                    linewidth=0,
                )

        for rate in sorted({Fraction(curve.rate) for curve in curves}):
            ax.axvline(float(1 - rate), color="k", linestyle="--", linewidth=1, label=f"capacity 1-R = {1 - rate}")

        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("erasure probability ε")
        ax.set_ylabel("h(ε)")
        ax.set_title(title)
        ax.legend(loc="upper left", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)

    logger.info("Wrote %s with %d curves", path, len(curves))
    return path
