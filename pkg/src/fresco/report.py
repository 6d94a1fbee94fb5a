"""Render the three summary figures (grouped bars with error bars) from summary.csv."""
from __future__ import annotations

import csv
from pathlib import Path

#: figure id -> (metric keys in summary.csv column prefixes, panel labels)
FIGURES: dict[int, tuple[tuple[str, str, str], tuple[str, str, str]]] = {
    1: (("scr", "aid_s", "tcr"), ("SCR", "AID", "TCR")),
    2: (("trr", "acstr", "fr"), ("TRR", "ACSTR", "FR")),
    3: (("adt_ms", "peo_kj", "asw"), ("ADT", "PEO", "ASW")),
}

#: fixed drawing order and display names
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

AXIS_LABELS = {
    "scr": "service continuity rate",
    "aid_s": "avg. interruption duration (s)",
    "tcr": "timely completion rate",
    "trr": "takeover readiness rate",
    "acstr": "successful takeover rate",
    "fr": "fallback rate",
    "adt_ms": "avg. decision time (ms)",
    "peo_kj": "preparation energy (kJ)",
    "asw": "avg. reservation welfare",
}


class SummaryError(ValueError):
    """Raised when summary.csv is missing required columns or rows."""


def read_summary(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SummaryError(f"{path}: no data rows")
    return rows


def _series(rows: list[dict[str, str]], policy: str, scales: list[str], metric: str
            ) -> tuple[list[float], list[float]]:
    mean_col, std_col = f"{metric}_mean", f"{metric}_std"
    by_scale = {r["scale"]: r for r in rows if r["policy"] == policy}
    means, stds = [], []
    for scale in scales:
        row = by_scale.get(scale)
        if row is None:
            means.append(0.0)
            stds.append(0.0)
            continue
        if mean_col not in row or std_col not in row:
            raise SummaryError(f"summary is missing column {mean_col!r} or {std_col!r}")
        means.append(float(row[mean_col]))
        stds.append(float(row[std_col]))
    return means, stds


def render_figure(rows: list[dict[str, str]], figure_id: int, out_path: str | Path,
                  fmt: str = "png") -> Path:
    """One 3-panel figure: bars grouped by scale, one bar per policy, std error bars."""
    if figure_id not in FIGURES:
        raise SummaryError(f"unknown figure id {figure_id}; expected 1, 2, or 3")
    metrics, panel_names = FIGURES[figure_id]
    required = {f"{m}_{suffix}" for m in metrics for suffix in ("mean", "std")}
    missing = required - set(rows[0])
    if missing:
        raise SummaryError(f"summary is missing columns: {sorted(missing)}")

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    scales = sorted({r["scale"] for r in rows})
    policies = [p for p in POLICY_ORDER if any(r["policy"] == p for r in rows)]
    extras = sorted({r["policy"] for r in rows} - set(policies))
    policies += extras

    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.4))
    width = 0.8 / max(1, len(policies))
    for ax, metric, panel, tag in zip(axes, metrics, panel_names, "abc"):
        for slot, policy in enumerate(policies):
            means, stds = _series(rows, policy, scales, metric)
            xs = [i + (slot - (len(policies) - 1) / 2.0) * width
                  for i in range(len(scales))]
            ax.bar(xs, means, width=width, yerr=stds, capsize=2.0,
                   label=POLICY_LABELS.get(policy, policy))
        ax.set_xticks(range(len(scales)))
        ax.set_xticklabels(scales)
        ax.set_title(f"({tag}) {panel}")
        ax.set_ylabel(AXIS_LABELS.get(metric, metric))
    axes[0].legend(fontsize=7, ncols=2)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)
    return out_path


def render_all(summary_path: str | Path, out_dir: str | Path, fmt: str = "png"
               ) -> list[Path]:
    """Write figure1..figure3 next to the delimited output; returns the paths."""
    rows = read_summary(summary_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [render_figure(rows, fid, out_dir / f"figure{fid}.{fmt}", fmt)
            for fid in sorted(FIGURES)]
