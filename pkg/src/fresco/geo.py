"""Mobility, the SNR / rate abstraction, and the serving-path sustainability predicate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RadioParams
from .model import ServingPair, WorldState


@dataclass
class LinkSnapshot:
    """Per-slot link view for one (mission, serving, candidate) triplet."""

    snr_mu_serving: float = 0.0
    snr_mu_candidate: float = 0.0      # gamma_cand
    snr_serving_candidate: float = 0.0  # gamma_syn
    dist_mu_serving: float = 0.0
    dist_mu_candidate: float = 0.0
    dist_serving_candidate: float = 0.0


def snr(tx_power: float, distance: float, radio: RadioParams,
        rng: np.random.Generator | None = None) -> float:
    """Log-distance path-loss SNR with optional log-normal shadowing (linear ratio)."""
    if tx_power < 0 or distance < 0:
        raise ValueError("tx_power and distance must be non-negative")
    d = max(distance, 1.0)  # clamp inside reference distance
    shadow_db = 0.0
    if rng is not None and radio.shadowing_sigma > 0:
        shadow_db = float(rng.normal(0.0, radio.shadowing_sigma))
    gain = radio.reference_gain * d ** (-radio.pathloss_exponent) * 10.0 ** (shadow_db / 10.0)
    return tx_power * gain / radio.noise_power


def access_rate(bandwidth: float, snr_linear: float) -> float:
    """Shannon-style access rate in Mbps (bandwidth MHz, SNR linear)."""
    if bandwidth < 0 or snr_linear < 0:
        raise ValueError("bandwidth and SNR must be non-negative")
    if bandwidth == 0.0:
        return 0.0
    return bandwidth * math.log2(1.0 + snr_linear)


def sync_rate(b_syn: float, snr_syn: float) -> float:
    """Synchronization-link rate in Mbps; same Shannon form as access_rate."""
    return access_rate(b_syn, snr_syn)


def link_shadow_rng(w: WorldState, id_a: int, id_b: int) -> np.random.Generator:
    """Shadowing source for link (a, b) at the current slot; order-independent."""
    return w.rng_for(1, w.t, min(id_a, id_b) + 1, max(id_a, id_b) + 1)


def mu_serving_snr(w: WorldState, mission_id: int) -> float:
    pair = w.pairs[mission_id]
    srv = w.serving_uavs[pair.serving_uav_id]
    d = float(np.linalg.norm(w.mu_positions[mission_id] - srv.q))
    # MU ids and UAV ids may collide numerically; offset MU ids into their own space
    rng = link_shadow_rng(w, 10_000 + mission_id, srv.id)
    return snr(w.config.radio.tx_power_mu, d, w.config.radio, rng)


def link_snapshot(w: WorldState, mission_id: int, serving_id: int, candidate_id: int) -> LinkSnapshot:
    radio = w.config.radio
    q_mu = w.mu_positions[mission_id]
    q_srv = w.uav_position(serving_id)
    q_cand = w.uav_position(candidate_id)
    d_ms = float(np.linalg.norm(q_mu - q_srv))
    d_mc = float(np.linalg.norm(q_mu - q_cand))
    d_sc = float(np.linalg.norm(q_srv - q_cand))
    return LinkSnapshot(
        snr_mu_serving=snr(radio.tx_power_mu, d_ms, radio,
                           link_shadow_rng(w, 10_000 + mission_id, serving_id)),
        snr_mu_candidate=snr(radio.tx_power_mu, d_mc, radio,
                             link_shadow_rng(w, 10_000 + mission_id, candidate_id)),
        snr_serving_candidate=snr(radio.tx_power_uav, d_sc, radio,
                                  link_shadow_rng(w, serving_id, candidate_id)),
        dist_mu_serving=d_ms,
        dist_mu_candidate=d_mc,
        dist_serving_candidate=d_sc,
    )


def sustainable(pair: ServingPair, w: WorldState, radio: RadioParams,
                snr_mu_srv: float | None = None) -> bool:
    """True iff the current serving path can keep carrying the mission."""
    srv = w.serving_uavs.get(pair.serving_uav_id)
    if srv is None:
        return False
    if srv.degraded:
        return False
    if srv.e_s < w.config.serving_energy_floor:
        return False
    if snr_mu_srv is None:
        snr_mu_srv = mu_serving_snr(w, pair.mission_id)
    return snr_mu_srv >= radio.snr_min


def _move_waypoint(pos: np.ndarray, waypoint: np.ndarray | None, speed: float,
                   v_max: float, tau: float, area: float, altitude: float,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, float]:
    """One random-waypoint step; returns (position, waypoint, leg speed)."""
    if waypoint is None or float(np.linalg.norm(waypoint[:2] - pos[:2])) < 1e-9:
        waypoint = np.array([rng.uniform(0, area), rng.uniform(0, area), altitude])
        speed = float(rng.uniform(0.0, v_max))
    direction = waypoint[:2] - pos[:2]
    dist = float(np.linalg.norm(direction))
    step = min(dist, speed * tau)
    new = pos.copy()
    if dist > 0:
        new[:2] = pos[:2] + direction / dist * step
    new[:2] = np.clip(new[:2], 0.0, area)
    return new, waypoint, speed


def step_mobility(w: WorldState) -> WorldState:
    """Advance all MU and UAV positions by one random-waypoint step (in place)."""
    cfg = w.config
    for i in sorted(w.mu_positions):
        rng = w.rng_for(2, w.t, 10_000 + i)
        pos, wp, speed = _move_waypoint(
            w.mu_positions[i], w.mu_waypoints.get(i), w.mu_speeds.get(i, 0.0),
            cfg.mu_speed_max, cfg.tau, cfg.area_side, 0.0, rng)
        w.mu_positions[i] = pos
        w.mu_waypoints[i] = wp
        w.mu_speeds[i] = speed
    for j in sorted(w.serving_uavs):
        s = w.serving_uavs[j]
        rng = w.rng_for(2, w.t, j)
        s.q, s.waypoint, s.speed = _move_waypoint(
            s.q, s.waypoint, s.speed, min(cfg.uav_speed_max, s.v_max),
            cfg.tau, cfg.area_side, cfg.uav_altitude, rng)
    for k in sorted(w.candidate_uavs):
        c = w.candidate_uavs[k]
        rng = w.rng_for(2, w.t, k)
        c.q, c.waypoint, c.speed = _move_waypoint(
            c.q, c.waypoint, c.speed, min(cfg.uav_speed_max, c.v_max),
            cfg.tau, cfg.area_side, cfg.uav_altitude, rng)
    return w
