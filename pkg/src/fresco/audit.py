"""Randomized desk-scale matching instances and the stability/optimality audit."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .geo import LinkSnapshot
from .matching import (
    audit_blocking_pairs,
    brute_force_optimum,
    matching_welfare,
    run_matching,
)
from .model import MissionState
from .template import build_template
from .utility import CandidateEvaluation, evaluate_candidate, preference_set


@dataclass
class AuditInstance:
    prefs: dict
    evals: dict
    budgets: dict
    links: dict


@dataclass
class AuditReport:
    instances: int = 0
    blocking_pairs: int = 0
    ir_violations: int = 0
    termination_violations: int = 0
    welfare_violations: int = 0
    ratios: list[float] = field(default_factory=list)

    @property
    def mean_ratio(self) -> float:
        return sum(self.ratios) / len(self.ratios) if self.ratios else 1.0

    @property
    def ok(self) -> bool:
        return (self.blocking_pairs == 0 and self.ir_violations == 0
                and self.termination_violations == 0 and self.welfare_violations == 0)


def random_instance(rng: np.random.Generator, cfg: ScenarioConfig | None = None,
                    max_pairs: int = 5, max_cands: int = 4) -> AuditInstance:
    """One synthetic slot-level matching instance with realistic parameter ranges."""
    cfg = cfg or ScenarioConfig()
    n_pairs = int(rng.integers(1, max_pairs + 1))
    n_cands = int(rng.integers(1, max_cands + 1))

    budgets = {}
    e_c = {}
    for k in range(n_cands):
        e_val = float(rng.uniform(20.0, 120.0))
        e_c[k] = e_val
        budgets[k] = {
            "b_ava": float(rng.uniform(1.0, 8.0)),
            "f_ava": float(rng.uniform(2.0, 12.0)),
            "headroom": max(0.0, e_val - cfg.e_min),
        }

    serving_ids = [int(rng.integers(100, 103)) for _ in range(n_pairs)]
    links = {}
    for j in set(serving_ids):
        for k in range(n_cands):
            links[(j, k)] = float(rng.uniform(0.5, 6.0))

    prefs = {}
    evals = {}
    for p in range(n_pairs):
        m = MissionState(
            id=p,
            d_rem=float(rng.uniform(2.0, 15.0)),
            c_rem=float(rng.uniform(4.0, 20.0)),
            t_max=float(rng.uniform(6.0, 18.0)),
            zeta=float(rng.uniform(2.0, 6.0)),
        )
        risk = float(rng.uniform(cfg.xi_th, 1.0))
        pk = (p, serving_ids[p])
        cand_evals = []
        for k in range(n_cands):
            snap = LinkSnapshot(
                snr_mu_candidate=float(10.0 ** rng.uniform(1.5, 4.5)),
                snr_serving_candidate=float(10.0 ** rng.uniform(1.5, 4.5)),
            )
            t = build_template(
                m, 0.0, snap, cfg.nu,
                boxes=(links[(pk[1], k)], budgets[k]["b_ava"], budgets[k]["f_ava"]),
                kappa_b=cfg.kappa_b, kappa_f=cfg.kappa_f, tau=cfg.tau)
            if t is None or budgets[k]["headroom"] < t.e_res:
                continue
            u_u, u_n, c_res = evaluate_candidate(
                risk, t, 0.0, m.zeta, m.t_max, snap, links[(pk[1], k)],
                budgets[k]["b_ava"], budgets[k]["f_ava"], e_c[k], cfg)
            cand_evals.append(CandidateEvaluation(
                mission_id=p, serving_uav_id=pk[1], candidate_uav_id=k,
                template=t, links=snap, u_mission=u_u, u_uav=u_n,
                c_res=c_res, feasible=True))
        ordered = preference_set(cand_evals)
        prefs[pk] = [e.candidate_uav_id for e in ordered]
        for e in cand_evals:
            evals[(pk, e.candidate_uav_id)] = e
    return AuditInstance(prefs=prefs, evals=evals, budgets=budgets, links=links)


def audit_instance(inst: AuditInstance, report: AuditReport) -> None:
    state = run_matching(inst.prefs, inst.evals, inst.budgets, inst.links)
    report.instances += 1

    max_proposals = sum(len(p) for p in inst.prefs.values())
    if state.proposals > max_proposals:
        report.termination_violations += 1

    report.blocking_pairs += len(
        audit_blocking_pairs(state, inst.prefs, inst.evals, inst.budgets, inst.links))

    for pk, cand in state.mu.items():
        if cand is not None and inst.evals[(pk, cand)].u_mission < 0.0:
            report.ir_violations += 1
    for cand, accepted in state.accepted.items():
        total = sum(inst.evals[(pk, cand)].u_uav for pk in accepted)
        if total < -1e-9:
            report.ir_violations += 1

    welfare = matching_welfare(state, inst.evals)
    _, optimum = brute_force_optimum(inst.prefs, inst.evals, inst.budgets, inst.links)
    if welfare > optimum + 1e-6:
        report.welfare_violations += 1
    if optimum > 1e-12:
        report.ratios.append(max(0.0, welfare) / optimum)


def run_audit(n_instances: int, seed: int = 0,
              cfg: ScenarioConfig | None = None,
              max_pairs: int = 5, max_cands: int = 4) -> AuditReport:
    rng = np.random.default_rng((seed, 0xA0D17))
    report = AuditReport()
    for _ in range(n_instances):
        inst = random_instance(rng, cfg, max_pairs, max_cands)
        audit_instance(inst, report)
    return report
