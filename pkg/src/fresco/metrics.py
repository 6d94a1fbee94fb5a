"""The nine evaluation metrics and their cross-seed aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import EpisodeResult

CSV_HEADER = "policy,scale,seed,scr,aid_s,tcr,trr,acstr,fr,adt_ms,peo_kj,asw"


@dataclass
class MetricsRow:
    policy: str
    scale: str
    seed: int
    scr: float
    aid_s: float
    tcr: float
    trr: float
    acstr: float
    fr: float
    adt_ms: float
    peo_kj: float
    asw: float
    aid_defined: bool = True   # False when no mission was ever interrupted

    def to_csv(self) -> str:
        vals = [self.policy, self.scale, str(self.seed)]
        for name in ("scr", "aid_s", "tcr", "trr", "acstr", "fr",
                     "adt_ms", "peo_kj", "asw"):
            vals.append(f"{getattr(self, name):.6g}")
        return ",".join(vals)


METRIC_NAMES = ("scr", "aid_s", "tcr", "trr", "acstr", "fr", "adt_ms", "peo_kj", "asw")


def compute_metrics(result: EpisodeResult, policy: str, scale: str, seed: int) -> MetricsRow:
    """Fold one episode trace into the nine-metric row."""
    w = result.world
    missions = w.missions
    n = len(missions)
    tau = w.config.tau

    interrupted = [m for m in missions.values() if m.interrupted_slots > 0]
    scr = sum(1 for m in missions.values() if m.interrupted_slots == 0) / n
    aid_defined = bool(interrupted)
    aid = (sum(m.interrupted_slots for m in interrupted) * tau / len(interrupted)
           if interrupted else 0.0)

    def timely(m) -> bool:
        return (m.status == "completed"
                and all(d <= m.t_max + 1e-9 for d in m.takeover_delays))

    tcr = sum(1 for m in missions.values() if timely(m)) / n

    alarms = ready = takeovers = fallbacks = 0
    peo = 0.0
    asw = 0.0
    for ev in result.trace:
        if ev.kind == "alarm":
            alarms += 1
            if ev.detail.get("ready"):
                ready += 1
            branch = ev.detail.get("branch")
            if branch == "takeover":
                takeovers += 1
            elif branch == "fallback":
                fallbacks += 1
        elif ev.kind == "sync":
            peo += ev.detail.get("energy", 0.0)
        elif ev.kind == "reserve":
            asw += ev.detail.get("welfare", 0.0)

    trr = ready / alarms if alarms else 1.0
    acstr = takeovers / alarms if alarms else 1.0
    fr = fallbacks / alarms if alarms else 0.0
    adt_ms = (sum(result.decision_times_s) / len(result.decision_times_s) * 1e3
              if result.decision_times_s else 0.0)

    return MetricsRow(policy=policy, scale=scale, seed=seed, scr=scr, aid_s=aid,
                      tcr=tcr, trr=trr, acstr=acstr, fr=fr, adt_ms=adt_ms,
                      peo_kj=peo / n, asw=asw / n, aid_defined=aid_defined)


def aggregate(rows: list[MetricsRow]) -> dict[tuple[str, str], dict[str, float]]:
    """Per (policy, scale) sample mean and (n-1) std for every metric."""
    groups: dict[tuple[str, str], list[MetricsRow]] = {}
    for row in rows:
        groups.setdefault((row.policy, row.scale), []).append(row)
    out: dict[tuple[str, str], dict[str, float]] = {}
    for key, members in groups.items():
        stats: dict[str, float] = {"n": len(members)}
        for name in METRIC_NAMES:
            vals = [getattr(m, name) for m in members]
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                std = math.sqrt(var)
            else:
                std = 0.0
            stats[f"{name}_mean"] = mean
            stats[f"{name}_std"] = std
        out[key] = stats
    return out


SUMMARY_HEADER = ("policy,scale,n," +
                  ",".join(f"{m}_mean,{m}_std" for m in METRIC_NAMES))


def summary_csv(rows: list[MetricsRow]) -> str:
    """Summary table ordered by (policy, scale) for stable output bytes."""
    agg = aggregate(rows)
    lines = [SUMMARY_HEADER]
    for (policy, scale) in sorted(agg):
        stats = agg[(policy, scale)]
        cells = [policy, scale, str(int(stats["n"]))]
        for m in METRIC_NAMES:
            cells.append(f"{stats[f'{m}_mean']:.6g}")
            cells.append(f"{stats[f'{m}_std']:.6g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def metrics_csv(rows: list[MetricsRow]) -> str:
    lines = [CSV_HEADER]
    for row in sorted(rows, key=lambda r: (r.policy, r.scale, r.seed)):
        lines.append(row.to_csv())
    return "\n".join(lines) + "\n"
