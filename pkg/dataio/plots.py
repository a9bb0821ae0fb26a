import io
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.errors import RenderError  # noqa: E402

logger = logging.getLogger(__name__)

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]
WIDTH_INCHES = 8.0
PANEL_HEIGHT_INCHES = 2.4

# Fixed hash salt and no date stamp: equal data give equal bytes
SVG_RC = {
    "svg.hashsalt": "recovery-lab",
    "svg.fonttype": "none",
    "path.simplify": False,
}


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    color: Optional[str] = None
    dashed: bool = False
    markers: bool = False


@dataclass
class Panel:
    title: str
    series: list[Series] = field(default_factory=list)
    x_label: str = ""
    y_label: str = ""
    # x values are day numbers to be labelled as calendar dates
    x_dates: bool = False


def _draw(ax, panel: Panel) -> None:
    for i, s in enumerate(panel.series):
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        x, y = x[keep], y[keep]
        if panel.x_dates:
            x = np.round(x).astype("int64").astype("datetime64[D]")
        ax.plot(
            x,
            y,
            color=s.color or PALETTE[i % len(PALETTE)],
            linestyle="--" if s.dashed else "-",
            linewidth=0 if s.markers else 1.2,
            marker="o" if s.markers else None,
            label=s.label,
        )
    ax.set_title(panel.title, fontsize=10)
    ax.set_xlabel(panel.x_label)
    ax.set_ylabel(panel.y_label)
    ax.grid(True, alpha=0.3)
    if 1 < len(panel.series) <= len(PALETTE):
        ax.legend(fontsize=8)


def render_svg(panels: Sequence[Panel], title: str = "") -> str:
    """Render stacked panels, one axes each, into an SVG document."""
    if not panels:
        raise RenderError("nothing to plot")
    with plt.rc_context(SVG_RC):
        fig, axes = plt.subplots(
            len(panels),
            1,
            figsize=(WIDTH_INCHES, PANEL_HEIGHT_INCHES * len(panels) + 0.6),
            squeeze=False,
        )
        try:
            for ax, panel in zip(axes[:, 0], panels):
                _draw(ax, panel)
            if title:
                fig.suptitle(title)
            fig.tight_layout()
            buffer = io.BytesIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        except (ValueError, TypeError, OverflowError) as e:
            raise RenderError(f"cannot render chart '{title or panels[0].title}': {e}") from e
        finally:
            plt.close(fig)
    return buffer.getvalue().decode("utf-8")


def write_svg(panels: Sequence[Panel], path: str, title: str = "") -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_svg(panels, title))
    logger.info("Wrote '%s'", path)
    return path
