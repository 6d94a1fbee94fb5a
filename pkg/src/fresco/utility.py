"""Feasibility screening, mission/UAV utilities, preference sets, and welfare."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geo import LinkSnapshot, link_snapshot
from .model import ReservationTemplate, ServingPair, WorldState
from .template import build_template


@dataclass
class CandidateEvaluation:
    mission_id: int
    serving_uav_id: int
    candidate_uav_id: int
    template: ReservationTemplate
    links: LinkSnapshot
    u_mission: float = 0.0
    u_uav: float = 0.0
    c_res: float = 0.0
    feasible: bool = False

    @property
    def welfare(self) -> float:
        return self.u_mission + self.u_uav

    @property
    def acceptable(self) -> bool:
        return self.feasible and self.u_mission >= 0.0


def reservation_cost(t: ReservationTemplate, b_link: float, b_ava: float, f_ava: float,
                     nu: tuple[float, float, float], epsilon: float) -> float:
    """Relative footprint of a template against the candidate-side budgets."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return (
        nu[0] * t.b_syn_min / (b_link + epsilon)
        + nu[1] * t.b_acc_min / (b_ava + epsilon)
        + nu[2] * t.f_min / (f_ava + epsilon)
    )


def mission_utility(risk: float, t: ReservationTemplate, s: float, zeta: float,
                    t_max: float, snr_syn: float, tau: float,
                    beta: tuple[float, float, float, float], c_res: float) -> float:
    """Serving-pair-side utility of reserving this candidate."""
    if not (0.0 <= risk <= 1.0):
        raise ValueError("risk must be in [0, 1]")
    bracket = (
        beta[0] * (1.0 - t.d_tk_min / t_max)
        + beta[1] * s
        + beta[2] * t.b_syn_min * math.log2(1.0 + snr_syn) * tau / zeta
    )
    return risk * bracket - beta[3] * c_res


def uav_utility(risk: float, t: ReservationTemplate, b_link: float, b_ava: float,
                f_ava: float, e_c: float, eta: tuple[float, float, float, float, float],
                epsilon: float) -> float:
    """Candidate-side utility of accepting this serving pair."""
    if not (0.0 <= risk <= 1.0):
        raise ValueError("risk must be in [0, 1]")
    return (
        eta[0] * risk
        - eta[1] * t.b_syn_min / (b_link + epsilon)
        - eta[2] * t.b_acc_min / (b_ava + epsilon)
        - eta[3] * t.f_min / (f_ava + epsilon)
        - eta[4] * t.e_res / (e_c + epsilon)
    )


def evaluate_candidate(risk: float, t: ReservationTemplate, s: float, zeta: float,
                       t_max: float, links: LinkSnapshot, b_link: float, b_ava: float,
                       f_ava: float, e_c: float, cfg) -> tuple[float, float, float]:
    """(u_mission, u_uav, c_res) for an already-solved template."""
    c_res = reservation_cost(t, b_link, b_ava, f_ava, cfg.nu, cfg.epsilon)
    u_u = mission_utility(risk, t, s, zeta, t_max, links.snr_serving_candidate,
                          cfg.tau, cfg.beta, c_res)
    u_n = uav_utility(risk, t, b_link, b_ava, f_ava, e_c, cfg.eta, cfg.epsilon)
    return u_u, u_n, c_res


def feasible_candidates(pair: ServingPair, w: WorldState, risk: float,
                        residual_budgets: dict[int, dict[str, float]],
                        residual_links: dict[tuple[int, int], float]) -> list[CandidateEvaluation]:
    """Evaluate every candidate for one high-risk serving pair.

    ``residual_budgets[k]`` holds b_ava / f_ava / headroom left after already
    active reservations; ``residual_links[(j, k)]`` the remaining sync-link
    capacity. A candidate is included iff a template exists within those
    boxes and the battery-safety condition holds.
    """
    cfg = w.config
    m = w.missions[pair.mission_id]
    out: list[CandidateEvaluation] = []
    for k in sorted(w.candidate_uavs):
        cand = w.candidate_uavs[k]
        budgets = residual_budgets[k]
        b_link = residual_links.get((pair.serving_uav_id, k), cfg.radio.b_link)
        links = link_snapshot(w, pair.mission_id, pair.serving_uav_id, k)
        t = build_template(
            m, 0.0, links, cfg.nu,
            boxes=(b_link, budgets["b_ava"], budgets["f_ava"]),
            kappa_b=cfg.kappa_b, kappa_f=cfg.kappa_f, tau=cfg.tau,
        )
        if t is None:
            continue
        if budgets["headroom"] - t.e_res < 0.0:
            continue  # E_c - e_res >= E_min would fail
        u_u, u_n, c_res = evaluate_candidate(
            risk, t, 0.0, m.zeta, m.t_max, links, b_link,
            budgets["b_ava"], budgets["f_ava"], cand.e_c, cfg)
        out.append(CandidateEvaluation(
            mission_id=pair.mission_id,
            serving_uav_id=pair.serving_uav_id,
            candidate_uav_id=k,
            template=t,
            links=links,
            u_mission=u_u,
            u_uav=u_n,
            c_res=c_res,
            feasible=True,
        ))
    return out


def preference_set(evaluations: list[CandidateEvaluation]) -> list[CandidateEvaluation]:
    """Acceptable candidates (u_mission >= 0) best-first, ties by candidate id."""
    kept = [e for e in evaluations if e.feasible and e.u_mission >= 0.0]
    return sorted(kept, key=lambda e: (-e.u_mission, e.candidate_uav_id))


def total_welfare(matching: dict, evaluations: dict) -> float:
    """Sum of pairwise welfare over matched triplets.

    ``matching`` maps pair key -> candidate id (or None); ``evaluations`` maps
    (pair key, candidate id) -> CandidateEvaluation.
    """
    total = 0.0
    for pair_key, cand in matching.items():
        if cand is None:
            continue
        total += evaluations[(pair_key, cand)].welfare
    return total
