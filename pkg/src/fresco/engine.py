"""Per-slot simulation loop: predict, match, reserve, synchronize, takeover, progress."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import geo, risk as risk_mod
from .config import ScenarioConfig
from .model import (
    MissionState,
    ReservationState,
    ServingPair,
    ServingUavState,
    WorldState,
    generate_scenario,
)
from .matching import run_matching
from .template import takeover_delay
from .utility import feasible_candidates, preference_set

POLICIES = ("fresco", "fresco_nopred", "best_channel", "best_resource", "random", "reactive")


@dataclass
class SlotEvent:
    t: int
    kind: str   # predict | reserve | release | sync | alarm | takeover | fallback |
                # interrupt | recover | complete
    mission: int
    serving: int | None = None
    candidate: int | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        detail = {k: (float(f"{v:.10g}") if isinstance(v, float) else v)
                  for k, v in self.detail.items()}
        return {"t": self.t, "kind": self.kind, "mission": self.mission,
                "serving": self.serving, "candidate": self.candidate, "detail": detail}


@dataclass
class EpisodeResult:
    trace: list[SlotEvent]
    world: WorldState
    decision_times_s: list[float]
    observations: dict[int, list[tuple[int, list[float], bool]]] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)


class ContractViolation(RuntimeError):
    pass


def update_sync(r: ReservationState, r_syn: float, tau: float, zeta: float) -> ReservationState:
    """Advance the context-synchronization ratio by one slot, clamped at 1."""
    if r.active:
        r.s = min(1.0, r.s + r_syn * tau / zeta)
    return r


def _release_reservation(w: WorldState, r: ReservationState, restore: bool = True) -> None:
    r.active = False
    w.reservations.pop(r.mission_id, None)
    if restore and r.candidate_uav_id in w.candidate_uavs:
        cand = w.candidate_uavs[r.candidate_uav_id]
        cand.b_ava += r.template.b_acc_min
        cand.f_ava += r.template.f_min


def _residual_budgets(w: WorldState) -> tuple[dict[int, dict[str, float]], dict[tuple[int, int], float]]:
    """Candidate-side residual capacities given the currently active reservations."""
    cfg = w.config
    budgets = {}
    reserved_energy: dict[int, float] = {}
    link_used: dict[tuple[int, int], float] = {}
    for r in w.reservations.values():
        if not r.active:
            continue
        reserved_energy[r.candidate_uav_id] = (
            reserved_energy.get(r.candidate_uav_id, 0.0) + r.template.e_res)
        key = (r.serving_uav_id, r.candidate_uav_id)
        link_used[key] = link_used.get(key, 0.0) + r.template.b_syn_min
    for k, c in w.candidate_uavs.items():
        budgets[k] = {
            "b_ava": c.b_ava,
            "f_ava": c.f_ava,
            "headroom": max(0.0, c.e_c - cfg.e_min - reserved_energy.get(k, 0.0)),
        }
    links = {}
    for j in w.serving_uavs:
        for k in w.candidate_uavs:
            links[(j, k)] = cfg.radio.b_link - link_used.get((j, k), 0.0)
    return budgets, links


def apply_takeover(w: WorldState, r: ReservationState,
                   promoted_this_slot: set[int] | None = None) -> tuple[float, float]:
    """Promote (or join) the reserved successor; returns (delay, residual sync time).

    A candidate accepted several pairs; when a sibling takeover already promoted
    it this slot, later takeovers attach to the new serving UAV, whose reserved
    (b_acc, f) budgets were committed at reservation time.
    """
    if not r.active or r.s < w.config.s_min:
        raise ContractViolation("takeover requires an active, takeover-ready reservation")
    m = w.missions[r.mission_id]
    k = r.candidate_uav_id
    if k not in w.candidate_uavs and not (
            promoted_this_slot is not None and k in promoted_this_slot
            and k in w.serving_uavs):
        raise ContractViolation(f"successor {k} is not available for takeover")
    links = geo.link_snapshot(w, r.mission_id, r.serving_uav_id, k)
    t = r.template
    delay = takeover_delay(m, r.s, t.b_syn_min, t.b_acc_min, t.f_min, links)
    residual = (1.0 - r.s) * m.zeta
    r_syn = geo.sync_rate(t.b_syn_min, links.snr_serving_candidate)
    holdoff = residual / r_syn if residual > 0 and r_syn > 0 else 0.0

    if k in w.candidate_uavs:
        # Role transition: the candidate leaves its role set and starts serving.
        cand = w.candidate_uavs.pop(k)
        w.serving_uavs[k] = ServingUavState(
            id=k, e_s=cand.e_c, q=cand.q, served_missions={m.id},
            drain_rate=w.config.promoted_drain, v_max=cand.v_max,
            waypoint=cand.waypoint, speed=cand.speed,
        )
        if promoted_this_slot is not None:
            promoted_this_slot.add(k)
    else:
        w.serving_uavs[k].served_missions.add(m.id)
    old = w.serving_uavs.get(r.serving_uav_id)
    if old is not None:
        old.served_missions.discard(m.id)
    w.pairs[m.id] = ServingPair(mission_id=m.id, serving_uav_id=k)
    m.b_alloc = t.b_acc_min
    m.f_alloc = t.f_min
    m.holdoff_s = holdoff
    m.takeover_delays.append(delay)
    r.active = False
    w.reservations.pop(m.id, None)
    return delay, holdoff


def _drop_reservations_on(w: WorldState, candidate_id: int, events: list[SlotEvent]) -> None:
    """Release every reservation held by a UAV that just left the candidate role."""
    for mid in sorted(w.reservations):
        r = w.reservations[mid]
        if r.candidate_uav_id == candidate_id:
            _release_reservation(w, r, restore=False)
            events.append(SlotEvent(w.t, "release", mid, r.serving_uav_id, candidate_id,
                                    {"reason": "candidate_promoted"}))


def _interrupt_mission(w: WorldState, mission_id: int, events: list[SlotEvent]) -> None:
    m = w.missions[mission_id]
    pair = w.pairs.pop(mission_id, None)
    if pair is not None and pair.serving_uav_id in w.serving_uavs:
        w.serving_uavs[pair.serving_uav_id].served_missions.discard(mission_id)
    r = w.reservations.get(mission_id)
    if r is not None:
        _release_reservation(w, r)
        events.append(SlotEvent(w.t, "release", mission_id, r.serving_uav_id,
                                r.candidate_uav_id, {"reason": "fallback"}))
    m.status = "interrupted"
    m.recovery_sync = 0.0
    events.append(SlotEvent(w.t, "interrupt", mission_id,
                            pair.serving_uav_id if pair else None))


def _find_recovery_uav(w: WorldState, mission_id: int) -> tuple[int, float] | None:
    """Feasible UAV (any role) with budget and energy headroom, best MU SNR."""
    cfg = w.config
    m = w.missions[mission_id]
    best: tuple[float, int] | None = None
    for j in sorted(w.serving_uavs):
        s = w.serving_uavs[j]
        if s.degraded or s.e_s < cfg.serving_energy_floor:
            continue
        if len(s.served_missions) >= cfg.mission_cap:
            continue
        snr = _mu_uav_snr(w, mission_id, j)
        if best is None or snr > best[0]:
            best = (snr, j)
    for k in sorted(w.candidate_uavs):
        c = w.candidate_uavs[k]
        if c.e_c < cfg.e_min or c.b_ava < m.b_alloc or c.f_ava < m.f_alloc:
            continue
        snr = _mu_uav_snr(w, mission_id, k)
        if best is None or snr > best[0]:
            best = (snr, k)
    if best is None:
        return None
    return best[1], best[0]


def _mu_uav_snr(w: WorldState, mission_id: int, uav_id: int) -> float:
    import numpy as np
    d = float(np.linalg.norm(w.mu_positions[mission_id] - w.uav_position(uav_id)))
    rng = geo.link_shadow_rng(w, 10_000 + mission_id, uav_id)
    return geo.snr(w.config.radio.tx_power_mu, d, w.config.radio, rng)


def _compute_risks(w: WorldState, policy: str, params, snrs: dict[int, float]) -> dict[int, float]:
    active = [i for i in sorted(w.missions)
              if w.missions[i].status == "active" and i in w.pairs]
    if policy == "reactive":
        return {}
    if policy == "fresco":
        if params is None:
            raise ValueError("policy 'fresco' requires trained predictor params")
        import numpy as np
        if not active:
            return {}
        feats = np.stack([risk_mod.extract_features(w, i) for i in active])
        probs = risk_mod.lstm_forward_batch(params, feats)
        return {i: float(p) for i, p in zip(active, probs)}
    # Non-predictive policies share the instantaneous indicator.
    return {i: risk_mod.heuristic_risk(w, i, snrs.get(i)) for i in active}


def _greedy_pick(policy: str, w: WorldState, mission_id: int, prefs: list) -> object | None:
    """Baseline selection among the acceptable candidates of one pair."""
    if not prefs:
        return None
    if policy == "best_channel":
        return max(prefs, key=lambda e: (e.links.snr_mu_candidate, -e.candidate_uav_id))
    if policy == "best_resource":
        def budget(e):
            c = w.candidate_uavs[e.candidate_uav_id]
            return c.b_ava + c.f_ava
        return max(prefs, key=lambda e: (budget(e), -e.candidate_uav_id))
    if policy == "random":
        rng = w.rng_for(3, w.t, mission_id)
        idx = int(rng.integers(0, len(prefs)))
        return sorted(prefs, key=lambda e: e.candidate_uav_id)[idx]
    raise ValueError(f"unknown greedy policy {policy!r}")


def _make_reservation(w: WorldState, ev, events: list[SlotEvent]) -> None:
    cand = w.candidate_uavs[ev.candidate_uav_id]
    cand.b_ava -= ev.template.b_acc_min
    cand.f_ava -= ev.template.f_min
    w.reservations[ev.mission_id] = ReservationState(
        mission_id=ev.mission_id,
        serving_uav_id=ev.serving_uav_id,
        candidate_uav_id=ev.candidate_uav_id,
        template=ev.template,
        s=0.0,
        welfare=ev.welfare,
    )
    events.append(SlotEvent(
        w.t, "reserve", ev.mission_id, ev.serving_uav_id, ev.candidate_uav_id,
        {"welfare": ev.welfare, "u_mission": ev.u_mission, "u_uav": ev.u_uav,
         "e_res": ev.template.e_res, "b_syn": ev.template.b_syn_min,
         "b_acc": ev.template.b_acc_min, "f": ev.template.f_min,
         "d_tk": ev.template.d_tk_min}))


def run_slot(w: WorldState, policy: str, params=None,
             collect_observations: bool = False,
             observations: dict | None = None) -> tuple[list[SlotEvent], float]:
    """Advance the world one slot; returns (events, decision seconds)."""
    cfg = w.config
    events: list[SlotEvent] = []

    # (0) Link snapshot and degradation flags for this slot.
    for j, s in w.serving_uavs.items():
        s.degraded = s.e_s < cfg.serving_energy_floor
    snrs: dict[int, float] = {}
    sustainable_now: dict[int, bool] = {}
    for i in sorted(w.pairs):
        if w.missions[i].status not in ("active", "interrupted"):
            continue
        snrs[i] = geo.mu_serving_snr(w, i)
        sustainable_now[i] = geo.sustainable(w.pairs[i], w, cfg.radio, snrs[i])

    # (1) Observation rows feed both the predictor and the label generator.
    for i in sorted(w.missions):
        m = w.missions[i]
        if m.status in ("completed", "failed"):
            continue
        row = risk_mod.feature_row(w, i, snrs.get(i, 0.0))
        w.feature_history[i].append(row)
        if collect_observations and observations is not None:
            sus = sustainable_now.get(i, False) if m.status == "active" else False
            observations.setdefault(i, []).append((w.t, row, sus))

    # (2)-(4) Decision round: risk prediction, high-risk set, successor selection.
    t_start = time.perf_counter()
    risks = _compute_risks(w, policy, params, snrs)
    hr = risk_mod.high_risk_set(risks, cfg.xi_th) if risks else set()

    # Reservation maintenance: drop infeasible or persistently low-risk reservations.
    for mid in sorted(w.reservations):
        r = w.reservations[mid]
        m = w.missions[mid]
        reason = None
        if m.status != "active" or mid not in w.pairs:
            reason = "mission_gone"
        elif w.pairs[mid].serving_uav_id != r.serving_uav_id:
            reason = "serving_changed"
        elif r.candidate_uav_id not in w.candidate_uavs:
            reason = "candidate_gone"
        elif w.candidate_uavs[r.candidate_uav_id].e_c < cfg.e_min:
            reason = "candidate_energy"
        else:
            r.low_risk_streak = 0 if mid in hr else r.low_risk_streak + 1
            if r.low_risk_streak >= cfg.release_slots:
                reason = "low_risk"
        if reason is not None:
            _release_reservation(w, r, restore=reason != "candidate_gone")
            events.append(SlotEvent(w.t, "release", mid, r.serving_uav_id,
                                    r.candidate_uav_id, {"reason": reason}))

    for i in sorted(hr):
        events.append(SlotEvent(w.t, "predict", i,
                                w.pairs[i].serving_uav_id if i in w.pairs else None,
                                None, {"risk": risks[i]}))

    need = [i for i in sorted(hr)
            if w.missions[i].status == "active" and i in w.pairs
            and i not in w.reservations]
    if need and w.candidate_uavs:
        budgets, links = _residual_budgets(w)
        if policy in ("fresco", "fresco_nopred"):
            prefs = {}
            evals = {}
            for i in need:
                pair = w.pairs[i]
                pk = (i, pair.serving_uav_id)
                cand_evals = feasible_candidates(pair, w, risks[i], budgets, links)
                ordered = preference_set(cand_evals)
                prefs[pk] = [e.candidate_uav_id for e in ordered]
                for e in cand_evals:
                    evals[(pk, e.candidate_uav_id)] = e
            state = run_matching(prefs, evals, budgets, links)
            for pk in sorted(state.mu):
                cand = state.mu[pk]
                if cand is not None:
                    _make_reservation(w, evals[(pk, cand)], events)
        else:
            for i in sorted(need, key=lambda i: (-risks[i], i)):
                pair = w.pairs[i]
                cand_evals = feasible_candidates(pair, w, risks[i], budgets, links)
                pick = _greedy_pick(policy, w, i, preference_set(cand_evals))
                if pick is None:
                    continue
                _make_reservation(w, pick, events)
                budgets[pick.candidate_uav_id]["b_ava"] -= pick.template.b_acc_min
                budgets[pick.candidate_uav_id]["f_ava"] -= pick.template.f_min
                budgets[pick.candidate_uav_id]["headroom"] = max(
                    0.0, budgets[pick.candidate_uav_id]["headroom"] - pick.template.e_res)
                key = (pair.serving_uav_id, pick.candidate_uav_id)
                links[key] = links.get(key, cfg.radio.b_link) - pick.template.b_syn_min
    decision_s = time.perf_counter() - t_start

    # (5) Context synchronization and reservation energy.
    for mid in sorted(w.reservations):
        r = w.reservations[mid]
        links_snap = geo.link_snapshot(w, mid, r.serving_uav_id, r.candidate_uav_id)
        r_syn = geo.sync_rate(r.template.b_syn_min, links_snap.snr_serving_candidate)
        update_sync(r, r_syn, cfg.tau, w.missions[mid].zeta)
        cand = w.candidate_uavs[r.candidate_uav_id]
        cand.e_c = max(0.0, cand.e_c - r.template.e_res)
        sync_energy = cfg.kappa_b * r.template.b_syn_min * cfg.tau
        srv = w.serving_uavs.get(r.serving_uav_id)
        if srv is not None:
            srv.e_s = max(0.0, srv.e_s - sync_energy)
        events.append(SlotEvent(w.t, "sync", mid, r.serving_uav_id, r.candidate_uav_id,
                                {"s": r.s, "r_syn": r_syn,
                                 "energy": r.template.e_res + sync_energy}))

    # (6) Alarms: takeover when ready, maintain when sustainable, else fallback.
    # Sibling reservations on a successor promoted this slot stay valid until the
    # whole round is processed, so every ready pair matched to it can follow.
    promoted: set[int] = set()
    for i in sorted(w.pairs):
        m = w.missions[i]
        if m.status != "active":
            continue
        risk_i = risks.get(i)
        alarmed = (risk_i is not None and risk_i >= cfg.xi_alarm) or not sustainable_now.get(i, True)
        if not alarmed:
            continue
        r = w.reservations.get(i)
        ready = r is not None and r.active and r.s >= cfg.s_min
        if ready:
            branch = "takeover"
        elif sustainable_now.get(i, False):
            branch = "maintain"
        else:
            branch = "fallback"
        events.append(SlotEvent(w.t, "alarm", i, w.pairs[i].serving_uav_id,
                                r.candidate_uav_id if r else None,
                                {"risk": risk_i if risk_i is not None else -1.0,
                                 "ready": ready, "branch": branch}))
        if branch == "takeover":
            cand_id = r.candidate_uav_id
            old_serving = w.pairs[i].serving_uav_id
            s_at = r.s
            delay, holdoff = apply_takeover(w, r, promoted)
            events.append(SlotEvent(w.t, "takeover", i, old_serving,
                                    cand_id, {"delay": delay, "t_max": m.t_max,
                                              "s": s_at, "holdoff": holdoff}))
            if delay > m.t_max:
                m.interrupted_slots += 1
                events.append(SlotEvent(w.t, "interrupt", i, cand_id,
                                        None, {"reason": "deadline_miss"}))
        elif branch == "fallback":
            events.append(SlotEvent(w.t, "fallback", i, w.pairs[i].serving_uav_id))
            _interrupt_mission(w, i, events)
    for k in sorted(promoted):
        _drop_reservations_on(w, k, events)

    # (7) Reactive recovery for interrupted missions.
    for i in sorted(w.missions):
        m = w.missions[i]
        if m.status != "interrupted":
            continue
        m.interrupted_slots += 1
        if i not in w.pairs:
            found = _find_recovery_uav(w, i)
            if found is None:
                continue
            uav_id, _ = found
            if uav_id in w.candidate_uavs:
                c = w.candidate_uavs.pop(uav_id)
                _drop_reservations_on(w, uav_id, events)
                w.serving_uavs[uav_id] = ServingUavState(
                    id=uav_id, e_s=c.e_c, q=c.q, served_missions=set(),
                    drain_rate=cfg.promoted_drain, v_max=c.v_max,
                    waypoint=c.waypoint, speed=c.speed)
            w.serving_uavs[uav_id].served_missions.add(i)
            w.pairs[i] = ServingPair(mission_id=i, serving_uav_id=uav_id)
            m.recovery_sync = 0.0
        else:
            # Full context re-synchronization from scratch before service resumes.
            if not geo.sustainable(w.pairs[i], w, cfg.radio, snrs.get(i)):
                pair = w.pairs.pop(i)
                if pair.serving_uav_id in w.serving_uavs:
                    w.serving_uavs[pair.serving_uav_id].served_missions.discard(i)
                m.recovery_sync = 0.0
                continue
            snr = _mu_uav_snr(w, i, w.pairs[i].serving_uav_id)
            rate = geo.access_rate(m.b_alloc, snr)
            m.recovery_sync += rate * cfg.tau / m.zeta
            if m.recovery_sync >= 1.0:
                m.status = "active"
                m.recovery_sync = 0.0
                events.append(SlotEvent(w.t, "recover", i, w.pairs[i].serving_uav_id))

    # (8) Mission progress.
    for i in sorted(w.pairs):
        m = w.missions[i]
        if m.status != "active":
            continue
        if m.holdoff_s > 0.0:
            m.holdoff_s = max(0.0, m.holdoff_s - cfg.tau)
            continue
        snr = _mu_uav_snr(w, i, w.pairs[i].serving_uav_id)
        rate = geo.access_rate(m.b_alloc, snr)
        from .model import advance_mission
        advance_mission(m, rate, m.f_alloc, cfg.tau)
        if m.status == "completed":
            m.completed_at = w.t
            pair = w.pairs.pop(i)
            w.serving_uavs[pair.serving_uav_id].served_missions.discard(i)
            r = w.reservations.get(i)
            if r is not None:
                _release_reservation(w, r)
                events.append(SlotEvent(w.t, "release", i, r.serving_uav_id,
                                        r.candidate_uav_id, {"reason": "completed"}))
            events.append(SlotEvent(w.t, "complete", i, pair.serving_uav_id))

    # (9) Energy drain and a safety re-check of reservation headroom.
    for j in sorted(w.serving_uavs):
        s = w.serving_uavs[j]
        service = sum(w.missions[i].f_alloc for i in s.served_missions
                      if w.missions[i].status == "active")
        s.e_s = max(0.0, s.e_s - s.drain_rate - cfg.kappa_f * service * cfg.tau)
    for k in sorted(w.candidate_uavs):
        c = w.candidate_uavs[k]
        c.e_c = max(0.0, c.e_c - cfg.candidate_idle_drain)
    for mid in sorted(w.reservations):
        r = w.reservations[mid]
        cand = w.candidate_uavs.get(r.candidate_uav_id)
        if cand is not None and cand.e_c - cfg.e_min < _reserved_energy(w, r.candidate_uav_id):
            _release_reservation(w, r)
            events.append(SlotEvent(w.t, "release", mid, r.serving_uav_id,
                                    r.candidate_uav_id, {"reason": "headroom"}))

    # (10) Mobility and the slot boundary.
    geo.step_mobility(w)
    w.t += 1
    return events, decision_s


def _reserved_energy(w: WorldState, candidate_id: int) -> float:
    return sum(r.template.e_res for r in w.reservations.values()
               if r.active and r.candidate_uav_id == candidate_id)


def run_episode(config: ScenarioConfig, seed: int, policy: str, params=None,
                collect_observations: bool = False,
                check_invariants: bool = False) -> EpisodeResult:
    """Run a full T-slot episode under one policy."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if policy == "fresco" and params is None:
        raise ValueError("policy 'fresco' requires trained predictor params")
    w = generate_scenario(config, seed)
    trace: list[SlotEvent] = []
    times: list[float] = []
    observations: dict = {}
    violations: list[str] = []
    checker = InvariantChecker(w) if check_invariants else None
    for _ in range(config.slots):
        events, decision_s = run_slot(w, policy, params, collect_observations, observations)
        trace.extend(events)
        times.append(decision_s)
        if checker is not None:
            violations.extend(checker.check(w))
    for m in w.missions.values():
        if m.status == "interrupted":
            m.status = "failed"
    return EpisodeResult(trace=trace, world=w, decision_times_s=times,
                         observations=observations, violations=violations)


class InvariantChecker:
    """Per-slot audit of role partition, budget conservation, and sync monotonicity."""

    def __init__(self, w: WorldState):
        self.capacities = {k: (c.b_total, c.f_total) for k, c in w.candidate_uavs.items()}
        self.prev_sync: dict[tuple[int, int, int], float] = {}
        self.tol = 1e-6

    def check(self, w: WorldState) -> list[str]:
        from .model import validate_world
        out = [f"t={w.t}: {v}" for v in validate_world(w)]
        cfg = w.config

        reserved_b: dict[int, float] = {}
        reserved_f: dict[int, float] = {}
        reserved_e: dict[int, float] = {}
        link_used: dict[tuple[int, int], float] = {}
        seen_missions: set[int] = set()
        for r in w.reservations.values():
            if not r.active:
                continue
            if r.mission_id in seen_missions:
                out.append(f"t={w.t}: (8a) mission {r.mission_id} doubly reserved")
            seen_missions.add(r.mission_id)
            reserved_b[r.candidate_uav_id] = reserved_b.get(r.candidate_uav_id, 0.0) + r.template.b_acc_min
            reserved_f[r.candidate_uav_id] = reserved_f.get(r.candidate_uav_id, 0.0) + r.template.f_min
            reserved_e[r.candidate_uav_id] = reserved_e.get(r.candidate_uav_id, 0.0) + r.template.e_res
            key = (r.serving_uav_id, r.candidate_uav_id)
            link_used[key] = link_used.get(key, 0.0) + r.template.b_syn_min

        for k, c in w.candidate_uavs.items():
            cap_b, cap_f = self.capacities.get(k, (c.b_total, c.f_total))
            if reserved_b.get(k, 0.0) > cap_b + self.tol:
                out.append(f"t={w.t}: (8b) candidate {k} over-reserved bandwidth")
            if reserved_f.get(k, 0.0) > cap_f + self.tol:
                out.append(f"t={w.t}: (8c) candidate {k} over-reserved compute")
            if c.b_ava < -self.tol or c.f_ava < -self.tol:
                out.append(f"t={w.t}: candidate {k} negative residual budget")
            if abs((c.b_ava + reserved_b.get(k, 0.0)) - cap_b) > self.tol:
                out.append(f"t={w.t}: (8b) candidate {k} budget accounting drift")
            if reserved_e.get(k, 0.0) > max(0.0, c.e_c - cfg.e_min) + self.tol:
                out.append(f"t={w.t}: (8e) candidate {k} energy headroom violated")
        for (j, k), used in link_used.items():
            if used > cfg.radio.b_link + self.tol:
                out.append(f"t={w.t}: (8d) link ({j},{k}) over capacity")

        live: set[tuple[int, int, int]] = set()
        for r in w.reservations.values():
            if not r.active:
                continue
            key = (r.mission_id, r.serving_uav_id, r.candidate_uav_id)
            live.add(key)
            prev = self.prev_sync.get(key)
            if prev is not None and r.s < prev - 1e-12:
                out.append(f"t={w.t}: sync ratio decreased for {key}")
            self.prev_sync[key] = r.s
        for key in list(self.prev_sync):
            if key not in live:
                del self.prev_sync[key]
        return out
