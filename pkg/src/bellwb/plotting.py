"""Headless, reproducible figure rendering.

Uses the Agg backend and pins everything matplotlib would otherwise salt
with session state (hash salt, creation date), so rendering the same data
twice gives byte-identical SVG files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

_RC = {
    "svg.hashsalt": "bellwb",
    "figure.dpi": 100,
    "savefig.dpi": 100,
}


def render_factor_curves(path: str, m_values, curves, svg: bool,
                         limits=None) -> None:
    """Plot violation factor against setting count, one curve per party count.

    curves is a sequence of (n_parties, factors) with factors aligned to
    m_values.  limits maps a party count to its large-M level, drawn dashed
    in the curve's color.  The horizontal line at 1 separates violation
    from none.
    """
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for n_parties, factors in curves:
            line, = ax.plot(m_values, factors, marker="o", markersize=3.5,
                            label=f"{n_parties} parties")
            if limits and n_parties in limits:
                ax.axhline(limits[n_parties], color=line.get_color(),
                           linewidth=0.8, linestyle=":", alpha=0.7)
        ax.axhline(1.0, color="0.5", linewidth=0.8, linestyle="--")
        ax.set_xlabel("settings per party")
        ax.set_ylabel("quantum value / classical bound")
        ax.legend(loc="best")
        fig.tight_layout()
        try:
            if svg:
                fig.savefig(path, format="svg", metadata={"Date": None})
            else:
                fig.savefig(path, format="png")
        finally:
            plt.close(fig)
