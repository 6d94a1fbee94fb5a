"""Figure specifications and the renderer.

The input is a summary CSV with one row per (policy, scale) and, for every
metric, a ``<metric>_mean`` and ``<metric>_std`` column. Each figure is three
panels; every panel is a grouped bar chart (one group per scale, one bar per
policy) with standard-deviation error bars.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path


class SchemaError(ValueError):
    """The CSV does not carry the columns a figure needs."""


#: fixed bar order and display names; unknown policies are appended alphabetically
POLICY_ORDER = ("reactive", "random", "best_channel", "best_resource",
                "fresco_nopred", "fresco")
POLICY_LABELS = {
    "reactive": "Reactive",
    "random": "Random",
    "best_channel": "BestChannel",
    "best_resource": "BestResource",
    "fresco_nopred": "FrescoNoPred",
    "fresco": "Fresco",
}
POLICY_COLORS = {
    "reactive": "#7f7f7f",
    "random": "#9467bd",
    "best_channel": "#2ca02c",
    "best_resource": "#ff7f0e",
    "fresco_nopred": "#17becf",
    "fresco": "#1f77b4",
}


@dataclass(frozen=True)
class FigureSpec:
    """Three metric columns (without the _mean/_std suffix) and their panel titles."""

    figure_id: int
    metrics: tuple[str, str, str]
    panels: tuple[str, str, str]
    ylabels: tuple[str, str, str] = ("", "", "")
    policy_order: tuple[str, ...] = POLICY_ORDER
    colors: dict = field(default_factory=lambda: dict(POLICY_COLORS))

    def required_columns(self) -> set[str]:
        return {f"{m}_{s}" for m in self.metrics for s in ("mean", "std")}


FIGURE_SPECS: dict[int, FigureSpec] = {
    1: FigureSpec(1, ("scr", "aid_s", "tcr"), ("SCR", "AID", "TCR"),
                  ("service continuity rate", "avg. interruption duration (s)",
                   "timely completion rate")),
    2: FigureSpec(2, ("trr", "acstr", "fr"), ("TRR", "ACSTR", "FR"),
                  ("takeover readiness rate", "successful takeover rate",
                   "fallback rate")),
    3: FigureSpec(3, ("adt_ms", "peo_kj", "asw"), ("ADT", "PEO", "ASW"),
                  ("avg. decision time (ms)", "preparation energy (kJ)",
                   "avg. reservation welfare")),
}


def read_summary(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: summary has no data rows")
    for column in ("policy", "scale"):
        if column not in rows[0]:
            raise SchemaError(f"{path}: missing required column {column!r}")
    return rows


def _series(rows: list[dict[str, str]], policy: str, scales: list[str],
            metric: str) -> tuple[list[float], list[float]]:
    by_scale = {r["scale"]: r for r in rows if r["policy"] == policy}
    means, stds = [], []
    for scale in scales:
        row = by_scale.get(scale)
        means.append(float(row[f"{metric}_mean"]) if row else 0.0)
        stds.append(float(row[f"{metric}_std"]) if row else 0.0)
    return means, stds


def render(summary_csv: str | Path, figure_id: int, out_path: str | Path,
           fmt: str = "svg") -> Path:
    """Render one three-panel figure; SVG output is byte-deterministic."""
    if figure_id not in FIGURE_SPECS:
        raise SchemaError(f"unknown figure id {figure_id}; expected one of 1, 2, 3")
    spec = FIGURE_SPECS[figure_id]
    rows = read_summary(summary_csv)
    missing = spec.required_columns() - set(rows[0])
    if missing:
        raise SchemaError(f"{summary_csv}: missing columns {sorted(missing)}")

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    present = {r["policy"] for r in rows}
    policies = [p for p in spec.policy_order if p in present]
    policies += sorted(present - set(policies))
    scales = sorted({r["scale"] for r in rows})

    # fixed hashsalt + text-as-text keep SVG bytes a pure function of the CSV
    with plt.rc_context({"svg.hashsalt": "plotkit", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.4))
        width = 0.8 / max(1, len(policies))
        for ax, metric, panel, ylabel, tag in zip(
                axes, spec.metrics, spec.panels, spec.ylabels, "abc"):
            for slot, policy in enumerate(policies):
                means, stds = _series(rows, policy, scales, metric)
                xs = [i + (slot - (len(policies) - 1) / 2.0) * width
                      for i in range(len(scales))]
                ax.bar(xs, means, width=width, yerr=stds, capsize=2.0,
                       color=spec.colors.get(policy),
                       label=POLICY_LABELS.get(policy, policy))
            ax.set_xticks(range(len(scales)))
            ax.set_xticklabels(scales)
            ax.set_title(f"({tag}) {panel}")
            ax.set_ylabel(ylabel or metric)
        axes[0].legend(fontsize=7, ncols=2)
        fig.tight_layout()
        out_path = Path(out_path)
        metadata = {"Date": None} if fmt == "svg" else None
        fig.savefig(out_path, format=fmt, metadata=metadata)
        plt.close(fig)
    return out_path
