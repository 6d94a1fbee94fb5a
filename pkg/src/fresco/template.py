"""Post-takeover delay evaluation and the minimum reserved-resource template solver."""
from __future__ import annotations

import math

from .geo import LinkSnapshot
from .model import MissionState, ReservationTemplate

INFEASIBLE_DELAY = math.inf


def takeover_delay(m: MissionState, s: float, b_syn: float, b_acc: float, f: float,
                   links: LinkSnapshot) -> float:
    """Completion delay if the candidate takes over now: residual sync + delivery + compute.

    A term with a zero numerator contributes 0 regardless of its resource; a
    positive numerator with zero effective rate yields the infinite sentinel.
    """
    if not (0.0 <= s <= 1.0):
        raise ValueError("sync ratio must be in [0, 1]")
    total = 0.0
    residual_context = (1.0 - s) * m.zeta
    terms = (
        (residual_context, b_syn * math.log2(1.0 + links.snr_serving_candidate)),
        (m.d_rem, b_acc * math.log2(1.0 + links.snr_mu_candidate)),
        (m.c_rem, f),
    )
    for numerator, rate in terms:
        if numerator <= 0.0:
            continue
        if rate <= 0.0:
            return INFEASIBLE_DELAY
        total += numerator / rate
    return total


def solve_min_template(
    a: tuple[float, float, float],
    nu: tuple[float, float, float],
    t_max: float,
    boxes: tuple[float, float, float],
) -> tuple[float, float, float] | None:
    """Minimize nu.x subject to sum(a_m / x_m) <= t_max and 0 <= x <= boxes.

    ``a`` are the time loads per unit resource: a1 = (1-s)*zeta/log2(1+snr_syn),
    a2 = D_rem/log2(1+snr_cand), a3 = C_rem. Closed-form stationary point
    x_m = sqrt(lambda a_m / nu_m) on the unclamped set, with iterative clamping
    to violated box bounds. Returns None when infeasible.
    """
    if min(nu) <= 0:
        raise ValueError("nu components must be positive")
    if t_max <= 0:
        return None
    for a_m, ub in zip(a, boxes):
        if a_m < 0 or ub < 0:
            raise ValueError("loads and boxes must be non-negative")
        if not math.isfinite(a_m):
            return None

    x = [0.0, 0.0, 0.0]
    active = [m for m in range(3) if a[m] > 0.0]
    # Feasibility screen at the all-upper-bounds corner.
    corner = 0.0
    for m in active:
        if boxes[m] <= 0.0:
            return None
        corner += a[m] / boxes[m]
    if corner > t_max:
        return None

    free = list(active)
    budget = t_max
    for _ in range(3):  # at most one clamping round per variable
        if not free:
            break
        sqrt_lam = sum(math.sqrt(a[m] * nu[m]) for m in free) / budget
        trial = {m: math.sqrt(a[m] / nu[m]) * sqrt_lam for m in free}
        violated = [m for m in free if trial[m] > boxes[m]]
        if not violated:
            for m in free:
                x[m] = trial[m]
            break
        for m in violated:
            x[m] = boxes[m]
            budget -= a[m] / boxes[m]
            free.remove(m)
    return (x[0], x[1], x[2])


def solve_min_template_bisect(
    a: tuple[float, float, float],
    nu: tuple[float, float, float],
    t_max: float,
    boxes: tuple[float, float, float],
    iters: int = 200,
) -> tuple[float, float, float] | None:
    """Bisection on the delay multiplier; cross-check path for the closed form."""
    if min(nu) <= 0:
        raise ValueError("nu components must be positive")
    active = [m for m in range(3) if a[m] > 0.0]
    if any(boxes[m] <= 0.0 for m in active):
        return None
    if t_max <= 0:
        return None
    if sum(a[m] / boxes[m] for m in active) > t_max:
        return None

    def delay_at(lam: float) -> tuple[float, list[float]]:
        x = [0.0, 0.0, 0.0]
        d = 0.0
        for m in active:
            x[m] = min(boxes[m], math.sqrt(lam * a[m] / nu[m]))
            d += a[m] / x[m] if x[m] > 0 else math.inf
        return d, x

    lo, hi = 1e-12, 1.0
    while delay_at(hi)[0] > t_max:
        hi *= 2.0
        if hi > 1e30:
            return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if delay_at(mid)[0] > t_max:
            lo = mid
        else:
            hi = mid
    _, x = delay_at(hi)
    return (x[0], x[1], x[2])


def template_loads(m: MissionState, s: float, links: LinkSnapshot) -> tuple[float, float, float]:
    """Time load per unit resource for each template dimension; inf when the link is dead."""

    def load(numerator: float, per_unit: float) -> float:
        if numerator <= 0.0:
            return 0.0
        if per_unit <= 0.0:
            return math.inf
        return numerator / per_unit

    return (
        load((1.0 - s) * m.zeta, math.log2(1.0 + links.snr_serving_candidate)),
        load(m.d_rem, math.log2(1.0 + links.snr_mu_candidate)),
        load(m.c_rem, 1.0),
    )


def reservation_energy(t: ReservationTemplate, kappa_b: float, kappa_f: float, tau: float) -> float:
    """Per-slot reservation energy, linear in the reserved resources (kJ/slot)."""
    if kappa_b < 0 or kappa_f < 0:
        raise ValueError("energy coefficients must be non-negative")
    return (kappa_b * (t.b_syn_min + t.b_acc_min) + kappa_f * t.f_min) * tau


def build_template(
    m: MissionState,
    s: float,
    links: LinkSnapshot,
    nu: tuple[float, float, float],
    boxes: tuple[float, float, float],
    kappa_b: float,
    kappa_f: float,
    tau: float,
) -> ReservationTemplate | None:
    """Solve the minimum template for a triplet and attach its delay and energy."""
    a = template_loads(m, s, links)
    if any(math.isinf(v) for v in a):
        return None
    x = solve_min_template(a, nu, m.t_max, boxes)
    if x is None:
        return None
    t = ReservationTemplate(b_syn_min=x[0], b_acc_min=x[1], f_min=x[2])
    t.d_tk_min = takeover_delay(m, s, x[0], x[1], x[2], links)
    t.e_res = reservation_energy(t, kappa_b, kappa_f, tau)
    return t
