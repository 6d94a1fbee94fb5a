"""Domain records, scenario generation, and per-slot mission bookkeeping."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, ConfigError


class ScenarioError(RuntimeError):
    """Raised when a valid configuration cannot produce a feasible world."""


@dataclass
class ReservationTemplate:
    """Minimum reserved resources for one (mission, serving, candidate) triplet."""

    b_syn_min: float = 0.0    # MHz on the serving-candidate sync link
    b_acc_min: float = 0.0    # MHz takeover access bandwidth
    f_min: float = 0.0        # Gcycles/s reserved computation
    d_tk_min: float = 0.0     # s, post-takeover completion delay under the template
    e_res: float = 0.0        # kJ/slot reservation energy

    def to_dict(self) -> dict:
        return {
            "b_syn_min": self.b_syn_min,
            "b_acc_min": self.b_acc_min,
            "f_min": self.f_min,
            "d_tk_min": self.d_tk_min,
            "e_res": self.e_res,
        }


@dataclass
class MissionState:
    id: int
    d_rem: float              # Mb
    c_rem: float              # Gcycles
    t_max: float              # s
    zeta: float               # Mb, service-context size (constant over lifetime)
    status: str = "active"    # active | interrupted | completed | failed
    interrupted_slots: int = 0
    completed_at: int | None = None

    # Bookkeeping beyond the mission tuple
    d_total: float = 0.0
    c_total: float = 0.0
    delivered: float = 0.0    # Mb handed over so far; compute may not outrun it
    b_alloc: float = 0.0      # MHz primary access bandwidth
    f_alloc: float = 0.0      # Gcycles/s primary computation
    holdoff_s: float = 0.0    # residual-context transfer time after a takeover
    takeover_delays: list[float] = field(default_factory=list)
    recovery_sync: float = 0.0  # re-synchronized fraction while interrupted

    @property
    def workload_fraction(self) -> float:
        d = self.d_rem / self.d_total if self.d_total > 0 else 0.0
        c = self.c_rem / self.c_total if self.c_total > 0 else 0.0
        return 0.5 * (d + c)


@dataclass
class ServingUavState:
    id: int
    e_s: float                # kJ
    q: np.ndarray             # 3-D position, m
    served_missions: set[int] = field(default_factory=set)
    drain_rate: float = 0.5   # kJ/slot baseline
    degraded: bool = False
    waypoint: np.ndarray | None = None
    speed: float = 0.0
    v_max: float = 10.0


@dataclass
class CandidateUavState:
    id: int
    b_ava: float              # MHz available for reservation
    f_ava: float              # Gcycles/s available for reservation
    e_c: float                # kJ
    q: np.ndarray
    v_max: float = 10.0
    b_total: float = 0.0      # sampled capacity, for budget audits
    f_total: float = 0.0
    waypoint: np.ndarray | None = None
    speed: float = 0.0


@dataclass
class ServingPair:
    mission_id: int
    serving_uav_id: int


@dataclass
class ReservationState:
    mission_id: int
    serving_uav_id: int
    candidate_uav_id: int
    template: ReservationTemplate
    s: float = 0.0
    active: bool = True
    welfare: float = 0.0
    low_risk_streak: int = 0


@dataclass
class WorldState:
    t: int
    config: ScenarioConfig
    seed: int
    missions: dict[int, MissionState]
    serving_uavs: dict[int, ServingUavState]
    candidate_uavs: dict[int, CandidateUavState]
    pairs: dict[int, ServingPair]                  # mission_id -> pair
    reservations: dict[int, ReservationState]      # mission_id -> reservation
    mu_positions: dict[int, np.ndarray]
    mu_waypoints: dict[int, np.ndarray] = field(default_factory=dict)
    mu_speeds: dict[int, float] = field(default_factory=dict)
    feature_history: dict[int, list[list[float]]] = field(default_factory=dict)

    def rng_for(self, *tags: int) -> np.random.Generator:
        """Counter-style generator keyed on (seed, tags); call-order independent."""
        return np.random.default_rng((self.seed, 0x5EED, *tags))

    def uav_position(self, uav_id: int) -> np.ndarray:
        if uav_id in self.serving_uavs:
            return self.serving_uavs[uav_id].q
        return self.candidate_uavs[uav_id].q


def _sample(rng: np.random.Generator, lo_hi: tuple[float, float]) -> float:
    lo, hi = lo_hi
    return float(rng.uniform(lo, hi))


def generate_scenario(config: ScenarioConfig, seed: int) -> WorldState:
    """Build the slot-0 world: sampled missions/UAVs plus nearest-feasible associations."""
    config.validate()
    rng = np.random.default_rng((seed, 0xC0FFEE))
    n_cand = config.num_candidates
    n_srv = config.num_serving
    if n_srv <= 0:
        raise ConfigError("candidate_fraction leaves no serving UAVs")

    missions: dict[int, MissionState] = {}
    mu_positions: dict[int, np.ndarray] = {}
    for i in range(config.num_mus):
        d0 = _sample(rng, config.d0_range)
        c0 = _sample(rng, config.c0_range)
        missions[i] = MissionState(
            id=i,
            d_rem=d0,
            c_rem=c0,
            t_max=_sample(rng, config.t_max_range),
            zeta=_sample(rng, config.zeta_range),
            d_total=d0,
            c_total=c0,
            b_alloc=_sample(rng, config.serve_bandwidth_range),
            f_alloc=_sample(rng, config.serve_compute_range),
        )
        mu_positions[i] = np.array(
            [rng.uniform(0, config.area_side), rng.uniform(0, config.area_side), 0.0]
        )

    serving: dict[int, ServingUavState] = {}
    candidates: dict[int, CandidateUavState] = {}
    for j in range(config.num_uavs):
        q = np.array(
            [rng.uniform(0, config.area_side), rng.uniform(0, config.area_side),
             config.uav_altitude]
        )
        v_max = _sample(rng, config.v_max_range)
        if j < n_srv:
            serving[j] = ServingUavState(
                id=j,
                e_s=_sample(rng, config.e_s_range),
                q=q,
                drain_rate=_sample(rng, config.drain_range),
                v_max=v_max,
            )
        else:
            b = _sample(rng, config.b_ava_range)
            f = _sample(rng, config.f_ava_range)
            candidates[j] = CandidateUavState(
                id=j,
                b_ava=b,
                f_ava=f,
                e_c=_sample(rng, config.e_c_range),
                q=q,
                v_max=v_max,
                b_total=b,
                f_total=f,
            )

    # Nearest serving UAV whose load permits, per-UAV cap keeps loads balanced.
    cap = config.mission_cap
    pairs: dict[int, ServingPair] = {}
    for i in sorted(missions):
        order = sorted(
            serving.values(),
            key=lambda s: (float(np.linalg.norm(mu_positions[i] - s.q)), s.id),
        )
        chosen = next((s for s in order if len(s.served_missions) < cap), None)
        if chosen is None:
            raise ScenarioError(f"no feasible initial association for mission {i}")
        chosen.served_missions.add(i)
        pairs[i] = ServingPair(mission_id=i, serving_uav_id=chosen.id)

    return WorldState(
        t=0,
        config=config,
        seed=seed,
        missions=missions,
        serving_uavs=serving,
        candidate_uavs=candidates,
        pairs=pairs,
        reservations={},
        mu_positions=mu_positions,
        feature_history={i: [] for i in missions},
    )


def advance_mission(m: MissionState, access_rate: float, compute: float, tau: float) -> MissionState:
    """Drain remaining data/compute for one slot; compute runs only on delivered data."""
    if access_rate < 0 or compute < 0:
        raise ValueError("rates must be non-negative")
    if m.status != "active":
        raise ValueError(f"mission {m.id} is not active")
    delivered_now = min(m.d_rem, access_rate * tau)
    m.d_rem = max(0.0, m.d_rem - delivered_now)
    m.delivered += delivered_now
    # Compute cannot outrun delivery: cap total consumed compute by delivered share.
    if m.d_total > 0:
        compute_ceiling = (m.delivered / m.d_total) * m.c_total
    else:
        compute_ceiling = m.c_total
    consumed = m.c_total - m.c_rem
    allowed = max(0.0, min(compute * tau, compute_ceiling - consumed))
    m.c_rem = max(0.0, m.c_rem - allowed)
    if m.d_rem == 0.0 and m.c_rem == 0.0:
        m.status = "completed"
    return m


def validate_world(w: WorldState) -> list[str]:
    """Report (never raise) violations of the structural invariants."""
    out: list[str] = []
    srv_ids = set(w.serving_uavs)
    cand_ids = set(w.candidate_uavs)
    overlap = srv_ids & cand_ids
    for uid in sorted(overlap):
        out.append(f"role-partition: UAV {uid} is both serving and candidate")

    seen: dict[int, int] = {}
    for s in w.serving_uavs.values():
        for mid in s.served_missions:
            if mid in seen:
                out.append(f"association: mission {mid} served by UAVs {seen[mid]} and {s.id}")
            seen[mid] = s.id

    for i, m in w.missions.items():
        if m.d_rem < 0 or m.c_rem < 0 or m.zeta <= 0 or m.t_max <= 0:
            out.append(f"mission {i}: negative or degenerate quantities")
        completed = m.status == "completed"
        if completed != (m.d_rem == 0 and m.c_rem == 0):
            out.append(f"mission {i}: status/remaining-work mismatch")
        if m.status == "active" and i not in w.pairs:
            out.append(f"mission {i}: active without a serving pair")

    for i, pair in w.pairs.items():
        if pair.serving_uav_id not in w.serving_uavs:
            out.append(f"pair for mission {i}: serving UAV {pair.serving_uav_id} missing")

    res_counts: dict[int, int] = {}
    for i, r in w.reservations.items():
        if r.active:
            res_counts[r.mission_id] = res_counts.get(r.mission_id, 0) + 1
            if not (0.0 <= r.s <= 1.0):
                out.append(f"reservation for mission {i}: sync ratio out of [0,1]")
            if r.candidate_uav_id == r.serving_uav_id:
                out.append(f"reservation for mission {i}: candidate equals serving")
            if r.mission_id not in w.pairs or w.pairs[r.mission_id].serving_uav_id != r.serving_uav_id:
                out.append(f"reservation for mission {i}: no matching serving pair")
    for mid, count in res_counts.items():
        if count > 1:
            out.append(f"mission {mid}: {count} active reservations")

    for k, c in w.candidate_uavs.items():
        if c.b_ava < -1e-9 or c.f_ava < -1e-9 or c.e_c < 0:
            out.append(f"candidate {k}: negative residual budget or energy")
    for j, s in w.serving_uavs.items():
        if s.e_s < 0:
            out.append(f"serving {j}: negative energy")
    return out


def _round(x: float) -> float:
    return float(f"{x:.10g}")


def world_to_dict(w: WorldState) -> dict:
    """Canonical JSON-able snapshot (stable ordering, rounded floats)."""
    return {
        "t": w.t,
        "seed": w.seed,
        "missions": {
            str(i): {
                "d_rem": _round(m.d_rem), "c_rem": _round(m.c_rem),
                "t_max": _round(m.t_max), "zeta": _round(m.zeta),
                "status": m.status, "interrupted_slots": m.interrupted_slots,
                "completed_at": m.completed_at,
                "b_alloc": _round(m.b_alloc), "f_alloc": _round(m.f_alloc),
            } for i, m in sorted(w.missions.items())
        },
        "serving_uavs": {
            str(j): {
                "e_s": _round(s.e_s), "q": [_round(v) for v in s.q],
                "served": sorted(s.served_missions),
                "drain": _round(s.drain_rate), "degraded": s.degraded,
            } for j, s in sorted(w.serving_uavs.items())
        },
        "candidate_uavs": {
            str(k): {
                "b_ava": _round(c.b_ava), "f_ava": _round(c.f_ava),
                "e_c": _round(c.e_c), "q": [_round(v) for v in c.q],
                "v_max": _round(c.v_max),
            } for k, c in sorted(w.candidate_uavs.items())
        },
        "pairs": {str(i): p.serving_uav_id for i, p in sorted(w.pairs.items())},
        "reservations": {
            str(i): {
                "serving": r.serving_uav_id, "candidate": r.candidate_uav_id,
                "s": _round(r.s), "active": r.active,
                "template": {k: _round(v) for k, v in r.template.to_dict().items()},
            } for i, r in sorted(w.reservations.items())
        },
        "mu_positions": {
            str(i): [_round(v) for v in q] for i, q in sorted(w.mu_positions.items())
        },
    }


def world_snapshot(w: WorldState) -> str:
    return json.dumps(world_to_dict(w), sort_keys=True, separators=(",", ":"))


def world_hash(w: WorldState) -> str:
    return hashlib.sha256(world_snapshot(w).encode()).hexdigest()
