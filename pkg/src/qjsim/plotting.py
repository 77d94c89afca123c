"""Decay-curve plots: theory lines with estimate symbols and error bars.

``build_panels`` assembles the plotted arrays without touching matplotlib,
so the no-resampling policy (estimates keep their own abscissae) is plain
data that tests can pin down; ``render_panels`` draws them to SVG.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import ESTIMATE_COLUMNS, THEORY_COLUMNS

_POPULATIONS = ("rho11", "rho22", "rho33")
_COHERENCES = ("abs_sigma12", "abs_sigma13", "abs_sigma23")
_SERIES_STYLE = {0: "black", 1: "red", 2: "blue"}


def classify_decay(data: np.ndarray) -> str:
    """Name the decay topology from which probability columns are active."""
    has21, has31, has32 = (np.any(data[:, c] > 0) for c in range(3))
    if has21 and has32 and not has31:
        return "cascade"
    if has31 and has32 and not has21:
        return "lambda"
    if has21 and has31 and not has32:
        return "vee"
    return "decay"


def progress_axis(kind: str, data: np.ndarray) -> np.ndarray:
    """Scalar decay progress per row, used as the plot abscissa."""
    p21, p31, p32 = data[:, 0], data[:, 1], data[:, 2]
    if kind == "cascade":
        return p21
    if kind == "lambda":
        return p31 + p32
    if kind == "vee":
        return p31
    return np.maximum(p21, np.maximum(p31, p32))


def _column_map(columns):
    return {name: i for i, name in enumerate(columns)}


def build_panels(theory: np.ndarray | None, estimates: np.ndarray | None) -> list[dict]:
    """Panel descriptions: one populations and one coherences panel per
    decay type present, with estimates on their own abscissae (never
    resampled onto the theory grid)."""
    base = theory if theory is not None else estimates
    if base is None or base.shape[0] == 0:
        raise ValueError("nothing to plot")
    kind = classify_decay(base)
    tcols = _column_map(THEORY_COLUMNS)
    ecols = _column_map(ESTIMATE_COLUMNS)
    panels = []
    for label, quantities in (("populations", _POPULATIONS), ("coherences", _COHERENCES)):
        panel = {
            "name": f"{kind}_{label}",
            "kind": kind,
            "quantities": quantities,
            "theory_x": None,
            "theory_y": {},
            "est_x": None,
            "est_y": {},
            "est_err": {},
        }
        if theory is not None and theory.shape[0]:
            panel["theory_x"] = progress_axis(kind, theory).tolist()
            for q in quantities:
                panel["theory_y"][q] = theory[:, tcols[q]].tolist()
        if estimates is not None and estimates.shape[0]:
            panel["est_x"] = progress_axis(kind, estimates).tolist()
            for q in quantities:
                panel["est_y"][q] = estimates[:, ecols[q]].tolist()
                panel["est_err"][q] = estimates[:, ecols[q + "_err"]].tolist()
        panels.append(panel)
    return panels


def render_panels(panels: list[dict], out_dir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for panel in panels:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for i, q in enumerate(panel["quantities"]):
            color = _SERIES_STYLE[i]
            if panel["theory_x"] is not None and q in panel["theory_y"]:
                ax.plot(panel["theory_x"], panel["theory_y"][q], color=color, label=q)
            if panel["est_x"] is not None and q in panel["est_y"]:
                ax.errorbar(
                    panel["est_x"],
                    panel["est_y"][q],
                    yerr=panel["est_err"][q],
                    fmt="o",
                    color=color,
                    markersize=4,
                    capsize=2,
                    linestyle="none",
                    label=None if panel["theory_x"] is not None else q,
                )
        ax.set_xlabel("decay progress p")
        ax.set_ylabel(
            "population" if panel["name"].endswith("populations") else "coherence modulus"
        )
        ax.set_title(f"{panel['kind']} decay")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{panel['name']}.svg"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
