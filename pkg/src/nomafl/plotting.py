"""Static SVG rendering of sweep results.

Output is byte-deterministic for a given CSV: the SVG hash salt is
pinned, text stays text (no font paths), and the date metadata is
stripped.
"""
from __future__ import annotations

from .schemes import SCHEME_ORDER
from .sweep import read_rows_csv

_RC = {
    "svg.hashsalt": "nomafl",
    "svg.fonttype": "none",
    "figure.figsize": (6.4, 4.2),
    "font.size": 10.0,
}


def emit_plot(csv_path: str, out_path: str) -> None:
    """Render mean learning error vs sweep value, one line per scheme."""
    rows = read_rows_csv(csv_path)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    order = [s.value for s in SCHEME_ORDER]
    by_scheme: dict[str, list] = {}
    for r in rows:
        by_scheme.setdefault(r.scheme, []).append((r.sweep_value, r.mean_error))
    labels = ([s for s in order if s in by_scheme]
              + sorted(set(by_scheme) - set(order)))

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for scheme in labels:
            pts = sorted(by_scheme[scheme])
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", markersize=4, label=scheme)
        ax.set_xlabel(rows[0].sweep_param if rows else "sweep value")
        ax.set_ylabel("mean learning error")
        ax.grid(True, alpha=0.3)
        if labels:
            ax.legend(loc="best")
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
