"""Utility formulas against independent re-computation, and preference ordering."""
import math

import numpy as np
import pytest

from fresco.config import ScenarioConfig
from fresco.engine import _residual_budgets
from fresco.geo import LinkSnapshot
from fresco.model import MissionState, ReservationTemplate, generate_scenario
from fresco.utility import (
    CandidateEvaluation,
    evaluate_candidate,
    feasible_candidates,
    mission_utility,
    preference_set,
    reservation_cost,
    total_welfare,
    uav_utility,
)

LINKS = LinkSnapshot(snr_mu_candidate=1023.0, snr_serving_candidate=255.0)
TEMPLATE = ReservationTemplate(b_syn_min=0.8, b_acc_min=1.5, f_min=2.0,
                               d_tk_min=6.0, e_res=0.063)


def test_reservation_cost_formula():
    nu = (1.0, 2.0, 3.0)
    eps = 1e-6
    got = reservation_cost(TEMPLATE, b_link=10.0, b_ava=5.0, f_ava=4.0, nu=nu, epsilon=eps)
    want = (1.0 * 0.8 / (10.0 + eps) + 2.0 * 1.5 / (5.0 + eps) + 3.0 * 2.0 / (4.0 + eps))
    assert got == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        reservation_cost(TEMPLATE, 10.0, 5.0, 4.0, nu, epsilon=0.0)


def test_mission_utility_formula():
    beta = (1.0, 1.0, 1.0, 0.5)
    risk, s, zeta, t_max, tau, c_res = 0.4, 0.25, 4.0, 12.0, 1.0, 0.3
    got = mission_utility(risk, TEMPLATE, s, zeta, t_max, 255.0, tau, beta, c_res)
    bracket = (1.0 * (1.0 - 6.0 / 12.0)
               + 1.0 * 0.25
               + 1.0 * 0.8 * math.log2(256.0) * tau / zeta)
    assert got == pytest.approx(risk * bracket - 0.5 * c_res, rel=1e-12)


def test_mission_utility_decreases_with_delay():
    beta = (1.0, 1.0, 1.0, 0.5)
    slow = ReservationTemplate(b_syn_min=0.8, b_acc_min=1.5, f_min=2.0, d_tk_min=11.0)
    fast = ReservationTemplate(b_syn_min=0.8, b_acc_min=1.5, f_min=2.0, d_tk_min=2.0)
    lo = mission_utility(0.4, slow, 0.0, 4.0, 12.0, 255.0, 1.0, beta, 0.0)
    hi = mission_utility(0.4, fast, 0.0, 4.0, 12.0, 255.0, 1.0, beta, 0.0)
    assert hi > lo


def test_uav_utility_formula():
    eta = (2.0, 0.5, 0.5, 0.5, 0.5)
    eps = 1e-6
    got = uav_utility(0.4, TEMPLATE, b_link=10.0, b_ava=5.0, f_ava=4.0, e_c=80.0,
                      eta=eta, epsilon=eps)
    want = (2.0 * 0.4
            - 0.5 * 0.8 / (10.0 + eps)
            - 0.5 * 1.5 / (5.0 + eps)
            - 0.5 * 2.0 / (4.0 + eps)
            - 0.5 * 0.063 / (80.0 + eps))
    assert got == pytest.approx(want, rel=1e-12)


def test_utilities_increase_with_risk():
    beta = (1.0, 1.0, 1.0, 0.5)
    eta = (2.0, 0.5, 0.5, 0.5, 0.5)
    u_lo = mission_utility(0.1, TEMPLATE, 0.0, 4.0, 12.0, 255.0, 1.0, beta, 0.3)
    u_hi = mission_utility(0.9, TEMPLATE, 0.0, 4.0, 12.0, 255.0, 1.0, beta, 0.3)
    assert u_hi > u_lo
    n_lo = uav_utility(0.1, TEMPLATE, 10.0, 5.0, 4.0, 80.0, eta, 1e-6)
    n_hi = uav_utility(0.9, TEMPLATE, 10.0, 5.0, 4.0, 80.0, eta, 1e-6)
    assert n_hi > n_lo


def test_risk_bounds_enforced():
    beta = (1.0, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        mission_utility(-0.1, TEMPLATE, 0.0, 4.0, 12.0, 255.0, 1.0, beta, 0.0)
    with pytest.raises(ValueError):
        uav_utility(1.2, TEMPLATE, 10.0, 5.0, 4.0, 80.0, (1, 1, 1, 1, 1), 1e-6)


def test_evaluate_candidate_composes_both_sides():
    cfg = ScenarioConfig()
    u_u, u_n, c_res = evaluate_candidate(0.4, TEMPLATE, 0.0, 4.0, 12.0, LINKS,
                                         10.0, 5.0, 4.0, 80.0, cfg)
    assert c_res == pytest.approx(
        reservation_cost(TEMPLATE, 10.0, 5.0, 4.0, cfg.nu, cfg.epsilon))
    assert u_u == pytest.approx(mission_utility(
        0.4, TEMPLATE, 0.0, 4.0, 12.0, LINKS.snr_serving_candidate, cfg.tau,
        cfg.beta, c_res))
    assert u_n == pytest.approx(uav_utility(
        0.4, TEMPLATE, 10.0, 5.0, 4.0, 80.0, cfg.eta, cfg.epsilon))


def _eval(mission_id, cand_id, u_mission, feasible=True):
    return CandidateEvaluation(
        mission_id=mission_id, serving_uav_id=100, candidate_uav_id=cand_id,
        template=TEMPLATE, links=LINKS, u_mission=u_mission, feasible=feasible)


def test_preference_set_filters_and_sorts():
    evals = [_eval(0, 1, 0.5), _eval(0, 2, -0.1), _eval(0, 3, 0.9),
             _eval(0, 4, 0.5), _eval(0, 5, 0.2, feasible=False)]
    ordered = preference_set(evals)
    assert [e.candidate_uav_id for e in ordered] == [3, 1, 4]
    # zero utility is acceptable (weak preference over staying unmatched)
    assert [e.candidate_uav_id for e in preference_set([_eval(0, 7, 0.0)])] == [7]


def test_total_welfare_sums_matched_only():
    e1, e2 = _eval(0, 1, 0.5), _eval(1, 2, 0.7)
    e1.u_uav, e2.u_uav = 0.2, 0.1
    evals = {((0, 100), 1): e1, ((1, 100), 2): e2}
    matching = {(0, 100): 1, (1, 100): None}
    assert total_welfare(matching, evals) == pytest.approx(0.7)


def test_feasible_candidates_respects_residual_budgets():
    w = generate_scenario(ScenarioConfig(), seed=0)
    budgets, links = _residual_budgets(w)
    pair = w.pairs[0]
    full = feasible_candidates(pair, w, 0.5, budgets, links)
    assert full, "expected at least one feasible candidate at slot 0"
    for e in full:
        assert e.template.d_tk_min <= w.missions[0].t_max * (1.0 + 1e-9)
        assert budgets[e.candidate_uav_id]["headroom"] >= e.template.e_res
    # zeroing a candidate's budget removes it
    gone = full[0].candidate_uav_id
    budgets[gone]["b_ava"] = 0.0
    reduced = feasible_candidates(pair, w, 0.5, budgets, links)
    assert gone not in {e.candidate_uav_id for e in reduced
                        if w.missions[0].d_rem > 0}
