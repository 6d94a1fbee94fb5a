"""Proposal-rejection successor matching with an exact local choice rule.

Pairs are keyed by (mission_id, serving_uav_id). Budgets are a snapshot of the
candidate-side residual capacities at matching time:
``budgets[k] = {"b_ava", "f_ava", "headroom"}`` and ``links[(j, k)]`` the
remaining sync capacity of the serving-candidate link.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .utility import CandidateEvaluation

PairKey = tuple[int, int]

_EPS = 1e-9      # slack for float budget sums
_TIE = 1e-12     # utilities closer than this count as tied


@dataclass
class MatchingState:
    mu: dict[PairKey, int | None]
    accepted: dict[int, set[PairKey]]
    proposals: int = 0
    rounds: int = 0
    residual_budgets: dict[int, dict[str, float]] = field(default_factory=dict)
    residual_links: dict[tuple[int, int], float] = field(default_factory=dict)


def _subset_feasible(cand: int, subset: tuple[PairKey, ...],
                     evals: dict[tuple[PairKey, int], CandidateEvaluation],
                     budgets: dict[str, float],
                     links: dict[tuple[int, int], float]) -> bool:
    b_acc = f = e = 0.0
    link_use: dict[int, float] = {}
    for pk in subset:
        t = evals[(pk, cand)].template
        b_acc += t.b_acc_min
        f += t.f_min
        e += t.e_res
        link_use[pk[1]] = link_use.get(pk[1], 0.0) + t.b_syn_min
    if b_acc > budgets["b_ava"] + _EPS or f > budgets["f_ava"] + _EPS:
        return False
    if e > budgets["headroom"] + _EPS:
        return False
    for j, used in link_use.items():
        if used > links.get((j, cand), 0.0) + _EPS:
            return False
    return True


def choose(cand: int, pool: list[PairKey],
           evals: dict[tuple[PairKey, int], CandidateEvaluation],
           budgets: dict[str, float],
           links: dict[tuple[int, int], float],
           incumbents: set[PairKey] | None = None) -> set[PairKey]:
    """Exact maximizer of the accepted-set UAV utility under the local budgets.

    Depth-first branch and bound; negative-utility pairs are never taken (the
    empty set is always feasible). Ties prefer retaining incumbents, then the
    lexicographically smallest mission-id set.
    """
    incumbents = incumbents or set()
    items = sorted(
        (pk for pk in pool if evals[(pk, cand)].u_uav >= 0.0),
        key=lambda pk: (-evals[(pk, cand)].u_uav, pk),
    )
    suffix_value = [0.0] * (len(items) + 1)
    for idx in range(len(items) - 1, -1, -1):
        suffix_value[idx] = suffix_value[idx + 1] + evals[(items[idx], cand)].u_uav

    best: dict = {"value": 0.0, "subset": ()}

    def tiebreak_key(subset: tuple[PairKey, ...]) -> tuple:
        retained = sum(1 for pk in subset if pk in incumbents)
        missions = tuple(sorted(pk[0] for pk in subset))
        return (-retained, missions)

    def consider(subset: tuple[PairKey, ...], value: float) -> None:
        if value > best["value"] + _TIE:
            best["value"], best["subset"] = value, subset
        elif value >= best["value"] - _TIE and tiebreak_key(subset) < tiebreak_key(best["subset"]):
            best["value"] = max(best["value"], value)
            best["subset"] = subset

    def dfs(idx: int, chosen: tuple[PairKey, ...], value: float) -> None:
        if value + suffix_value[idx] < best["value"] - _TIE:
            return  # optimistic bound cannot beat (or tie) the incumbent best
        if idx == len(items):
            consider(chosen, value)
            return
        pk = items[idx]
        with_pk = chosen + (pk,)
        if _subset_feasible(cand, with_pk, evals, budgets, links):
            dfs(idx + 1, with_pk, value + evals[(pk, cand)].u_uav)
        dfs(idx + 1, chosen, value)

    dfs(0, (), 0.0)
    return set(best["subset"])


def run_matching(prefs: dict[PairKey, list[int]],
                 evals: dict[tuple[PairKey, int], CandidateEvaluation],
                 budgets: dict[int, dict[str, float]],
                 links: dict[tuple[int, int], float]) -> MatchingState:
    """Deferred-acceptance loop: propose, re-choose, permanently strike on rejection."""
    remaining = {pk: list(cands) for pk, cands in prefs.items()}
    state = MatchingState(
        mu={pk: None for pk in prefs},
        accepted={},
        residual_budgets=budgets,
        residual_links=links,
    )
    max_proposals = sum(len(c) for c in prefs.values())

    while True:
        proposals: dict[int, list[PairKey]] = {}
        for pk in sorted(remaining):
            if state.mu[pk] is None and remaining[pk]:
                cand = remaining[pk][0]
                proposals.setdefault(cand, []).append(pk)
                state.proposals += 1
        if not proposals:
            break
        state.rounds += 1
        if state.proposals > max_proposals:
            raise RuntimeError("proposal budget exceeded; matching failed to terminate")

        for cand in sorted(proposals):
            incumbents = state.accepted.get(cand, set())
            pool = sorted(incumbents | set(proposals[cand]))
            chosen = choose(cand, pool, evals, budgets[cand], links, incumbents)
            for pk in pool:
                if pk in chosen:
                    state.mu[pk] = cand
                else:
                    if state.mu.get(pk) == cand:
                        state.mu[pk] = None  # bumped incumbent re-enters the loop
                    if cand in remaining[pk]:
                        remaining[pk].remove(cand)
            state.accepted[cand] = chosen
    return state


def audit_blocking_pairs(state: MatchingState,
                         prefs: dict[PairKey, list[int]],
                         evals: dict[tuple[PairKey, int], CandidateEvaluation],
                         budgets: dict[int, dict[str, float]],
                         links: dict[tuple[int, int], float]) -> list[tuple[PairKey, int]]:
    """Exhaustive blocking-pair search: a pair strictly preferring some candidate
    that can weakly improve by a feasible re-selection including that pair."""
    blocking: list[tuple[PairKey, int]] = []
    for pk, pref in prefs.items():
        matched = state.mu.get(pk)
        matched_u = evals[(pk, matched)].u_mission if matched is not None else 0.0
        for cand in pref:
            if cand == matched:
                continue
            u_here = evals[(pk, cand)].u_mission
            if matched is None:
                if u_here <= 0.0:
                    continue  # indifferent or worse than staying unmatched
            elif u_here <= matched_u:
                continue
            accepted = sorted(state.accepted.get(cand, set()))
            current = sum(evals[(q, cand)].u_uav for q in accepted)
            for r in range(len(accepted) + 1):
                found = False
                for keep in itertools.combinations(accepted, r):
                    subset = keep + (pk,)
                    value = sum(evals[(q, cand)].u_uav for q in subset)
                    if value >= current - _TIE and _subset_feasible(
                            cand, subset, evals, budgets[cand], links):
                        blocking.append((pk, cand))
                        found = True
                        break
                if found:
                    break
    return blocking


def brute_force_optimum(prefs: dict[PairKey, list[int]],
                        evals: dict[tuple[PairKey, int], CandidateEvaluation],
                        budgets: dict[int, dict[str, float]],
                        links: dict[tuple[int, int], float]
                        ) -> tuple[dict[PairKey, int | None], float]:
    """Enumerate every assignment satisfying the reservation constraints and
    return a welfare maximizer. Guarded to desk-scale instances."""
    pair_keys = sorted(prefs)
    cand_ids = sorted({c for pref in prefs.values() for c in pref})
    if len(pair_keys) > 6 or len(cand_ids) > 5:
        raise ValueError("brute force guarded to <=6 pairs and <=5 candidates")

    best_assign: dict[PairKey, int | None] = {pk: None for pk in pair_keys}
    best_value = 0.0
    options = [[None] + prefs[pk] for pk in pair_keys]
    for combo in itertools.product(*options):
        by_cand: dict[int, list[PairKey]] = {}
        for pk, cand in zip(pair_keys, combo):
            if cand is not None:
                by_cand.setdefault(cand, []).append(pk)
        if any(not _subset_feasible(c, tuple(v), evals, budgets[c], links)
               for c, v in by_cand.items()):
            continue
        value = sum(evals[(pk, c)].welfare
                    for pk, c in zip(pair_keys, combo) if c is not None)
        if value > best_value + _TIE:
            best_value = value
            best_assign = dict(zip(pair_keys, combo))
    return best_assign, best_value


def matching_welfare(state: MatchingState,
                     evals: dict[tuple[PairKey, int], CandidateEvaluation]) -> float:
    return sum(evals[(pk, c)].welfare for pk, c in state.mu.items() if c is not None)
