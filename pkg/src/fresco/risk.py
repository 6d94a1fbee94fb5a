"""Disruption-risk features, labels, and the from-scratch LSTM predictor."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .model import WorldState

INPUT_DIM = 5


@dataclass
class LstmParams:
    """Gate weights for a single-layer LSTM (gate order i, f, g, o) plus a sigmoid head."""

    wx: np.ndarray       # (4H, INPUT_DIM)
    wh: np.ndarray       # (4H, H)
    b: np.ndarray        # (4H,)
    w_out: np.ndarray    # (H,)
    b_out: float

    @property
    def hidden(self) -> int:
        return self.wh.shape[1]

    def copy(self) -> "LstmParams":
        return LstmParams(self.wx.copy(), self.wh.copy(), self.b.copy(),
                          self.w_out.copy(), float(self.b_out))

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.wx.ravel(), self.wh.ravel(), self.b,
                               self.w_out, [self.b_out]])

    def unflatten(self, vec: np.ndarray) -> "LstmParams":
        h = self.hidden
        sizes = [4 * h * INPUT_DIM, 4 * h * h, 4 * h, h, 1]
        parts = np.split(vec, np.cumsum(sizes)[:-1])
        return LstmParams(
            parts[0].reshape(4 * h, INPUT_DIM),
            parts[1].reshape(4 * h, h),
            parts[2].copy(),
            parts[3].copy(),
            float(parts[4][0]),
        )


def init_params(hidden: int = 32, scale: float = 0.08, seed: int = 0) -> LstmParams:
    rng = np.random.default_rng((seed, 0x157A))
    return LstmParams(
        wx=rng.uniform(-scale, scale, (4 * hidden, INPUT_DIM)),
        wh=rng.uniform(-scale, scale, (4 * hidden, hidden)),
        b=np.zeros(4 * hidden),
        w_out=rng.uniform(-scale, scale, hidden),
        b_out=0.0,
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def _forward_batch(p: LstmParams, x: np.ndarray):
    """x: (N, L, INPUT_DIM) -> probabilities (N,) plus the backward cache."""
    n, seq_len, _ = x.shape
    h_dim = p.hidden
    h = np.zeros((n, h_dim))
    c = np.zeros((n, h_dim))
    cache = []
    for t in range(seq_len):
        xt = x[:, t, :]
        z = xt @ p.wx.T + h @ p.wh.T + p.b
        i = _sigmoid(z[:, :h_dim])
        f = _sigmoid(z[:, h_dim:2 * h_dim])
        g = np.tanh(z[:, 2 * h_dim:3 * h_dim])
        o = _sigmoid(z[:, 3 * h_dim:])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        cache.append((xt, h, c, i, f, g, o, c_new, tanh_c))
        h = o * tanh_c
        c = c_new
    logit = h @ p.w_out + p.b_out
    prob = _sigmoid(logit)
    return prob, (cache, h)


def _backward_batch(p: LstmParams, x: np.ndarray, y: np.ndarray, pos_weight: float = 1.0):
    """Mean weighted binary cross-entropy loss and its parameter gradients."""
    n = x.shape[0]
    h_dim = p.hidden
    prob, (cache, h_last) = _forward_batch(p, x)
    eps = 1e-12
    weights = np.where(y > 0.5, pos_weight, 1.0)
    loss = float(np.mean(
        -weights * (y * np.log(prob + eps) + (1.0 - y) * np.log(1.0 - prob + eps))
    ))
    # d loss / d logit for the weighted BCE with sigmoid head
    dlogit = (weights * (prob - y)) / n

    grads = LstmParams(np.zeros_like(p.wx), np.zeros_like(p.wh), np.zeros_like(p.b),
                       np.zeros_like(p.w_out), 0.0)
    grads.w_out = h_last.T @ dlogit
    grads.b_out = float(np.sum(dlogit))
    dh = dlogit[:, None] * p.w_out[None, :]
    dc = np.zeros((n, h_dim))
    for t in range(x.shape[1] - 1, -1, -1):
        xt, h_prev, c_prev, i, f, g, o, c_new, tanh_c = cache[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c ** 2)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ], axis=1)
        grads.wx += dz.T @ xt
        grads.wh += dz.T @ h_prev
        grads.b += dz.sum(axis=0)
        dh = dz @ p.wh
        dc = dc * f
    return loss, grads


def lstm_forward(p: LstmParams, x: np.ndarray) -> float:
    """Disruption probability for one length-L feature sequence."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != INPUT_DIM:
        raise ValueError(f"expected (L, {INPUT_DIM}) features, got {x.shape}")
    prob, _ = _forward_batch(p, x[None, :, :])
    return float(prob[0])


def lstm_forward_batch(p: LstmParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    prob, _ = _forward_batch(p, x)
    return prob


def lstm_train(dataset: tuple[np.ndarray, np.ndarray],
               epochs: int = 20, lr: float = 0.001, batch: int = 128,
               hidden: int = 32, init_scale: float = 0.08,
               seed: int = 0) -> tuple[LstmParams, list[float]]:
    """Mini-batch Adam on weighted BCE; returns params and per-epoch loss."""
    x, y = dataset
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0:
        raise ValueError("training dataset is empty")
    n = x.shape[0]
    pos = float(np.sum(y > 0.5))
    neg = float(n - pos)
    pos_weight = (neg / pos) if (pos > 0 and neg > 0) else 1.0

    p = init_params(hidden=hidden, scale=init_scale, seed=seed)
    rng = np.random.default_rng((seed, 0x7AA1))
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    m1 = np.zeros(p.flatten().size)
    m2 = np.zeros_like(m1)
    step = 0
    trace: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, grads = _backward_batch(p, x[idx], y[idx], pos_weight)
            losses.append(loss)
            if lr > 0.0:
                step += 1
                g = grads.flatten()
                m1 = beta1 * m1 + (1.0 - beta1) * g
                m2 = beta2 * m2 + (1.0 - beta2) * g * g
                m1_hat = m1 / (1.0 - beta1 ** step)
                m2_hat = m2 / (1.0 - beta2 ** step)
                p = p.unflatten(p.flatten() - lr * m1_hat / (np.sqrt(m2_hat) + adam_eps))
        trace.append(float(np.mean(losses)))
    return p, trace


def gradient_check(p: LstmParams, sample: tuple[np.ndarray, float],
                   n_params: int = 50, step: float = 1e-5, seed: int = 0) -> float:
    """Max relative error between analytic and central finite-difference gradients."""
    x, y = sample
    x = np.asarray(x, dtype=float)[None, :, :]
    y_arr = np.asarray([float(y)])
    _, grads = _backward_batch(p, x, y_arr)
    flat = p.flatten()
    gflat = grads.flatten()
    rng = np.random.default_rng((seed, 0x6C))
    picks = rng.choice(flat.size, size=min(n_params, flat.size), replace=False)
    worst = 0.0
    for idx in picks:
        bumped = flat.copy()
        bumped[idx] += step
        lp, _ = _backward_batch(p.unflatten(bumped), x, y_arr)
        bumped[idx] -= 2 * step
        lm, _ = _backward_batch(p.unflatten(bumped), x, y_arr)
        numeric = (lp - lm) / (2 * step)
        analytic = gflat[idx]
        denom = max(abs(numeric), abs(analytic), 1e-8)
        worst = max(worst, abs(numeric - analytic) / denom)
    return worst


# ---------------------------------------------------------------------------
# Features, labels, and the non-predictive indicator
# ---------------------------------------------------------------------------

def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def feature_row(w: WorldState, mission_id: int, snr_mu_srv: float) -> list[float]:
    """One normalized observation row for a mission (serving-path view)."""
    cfg = w.config
    m = w.missions[mission_id]
    pair = w.pairs.get(mission_id)
    if pair is None or pair.serving_uav_id not in w.serving_uavs:
        return [0.0, 0.0, 1.0, 0.0, _clamp01(m.workload_fraction)]
    srv = w.serving_uavs[pair.serving_uav_id]
    snr_db = 10.0 * math.log10(snr_mu_srv) if snr_mu_srv > 0 else cfg.feat_snr_db_min
    dist = float(np.linalg.norm(w.mu_positions[mission_id] - srv.q))
    return [
        _clamp01(srv.e_s / cfg.feat_e_s_max),
        _clamp01((snr_db - cfg.feat_snr_db_min)
                 / (cfg.feat_snr_db_max - cfg.feat_snr_db_min)),
        _clamp01(dist / cfg.feat_dist_max),
        _clamp01(len(srv.served_missions) / cfg.feat_load_max),
        _clamp01(m.workload_fraction),
    ]


def extract_features(w: WorldState, mission_id: int, window: int | None = None) -> np.ndarray:
    """Last ``window`` feature rows, oldest first, padded by repeating the oldest."""
    if mission_id not in w.missions:
        raise ValueError(f"unknown mission {mission_id}")
    window = window or w.config.window
    history = w.feature_history.get(mission_id, [])
    if not history:
        raise ValueError(f"mission {mission_id} has no recorded history")
    rows = history[-window:]
    while len(rows) < window:
        rows = [rows[0]] + rows
    return np.asarray(rows, dtype=float)


def heuristic_risk(w: WorldState, mission_id: int,
                   snr_mu_srv: float | None = None) -> float:
    """Instantaneous risk: 1 - min(battery margin, SNR margin), history-free."""
    from .geo import mu_serving_snr  # local to avoid a module cycle

    cfg = w.config
    pair = w.pairs.get(mission_id)
    if pair is None or pair.serving_uav_id not in w.serving_uavs:
        return 1.0
    srv = w.serving_uavs[pair.serving_uav_id]
    if snr_mu_srv is None:
        snr_mu_srv = mu_serving_snr(w, mission_id)
    e_margin = _clamp01((srv.e_s - cfg.serving_energy_floor) / cfg.heuristic_e_margin)
    snr_db = 10.0 * math.log10(snr_mu_srv) if snr_mu_srv > 0 else -1e9
    snr_min_db = 10.0 * math.log10(cfg.radio.snr_min) if cfg.radio.snr_min > 0 else -1e9
    s_margin = _clamp01((snr_db - snr_min_db) / cfg.heuristic_snr_margin_db)
    return _clamp01(1.0 - min(e_margin, s_margin))


def high_risk_set(risks: dict[int, float], xi_th: float) -> set[int]:
    """Missions whose predicted risk meets the reservation threshold (inclusive)."""
    for v in risks.values():
        if not (0.0 <= v <= 1.0):
            raise ValueError("risk probabilities must lie in [0, 1]")
    return {i for i, v in risks.items() if v >= xi_th}


def generate_labels(config: ScenarioConfig, seeds: list[int]
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Shadow-run the reactive policy and window the observed disruptions.

    Returns (features, labels): features (N, L, 5), labels in {0, 1} with
    y=1 iff the serving path is unsustainable somewhere in [t+1, t+H].
    """
    from .engine import run_episode  # engine depends on risk for prediction

    xs: list[np.ndarray] = []
    ys: list[int] = []
    for seed in seeds:
        result = run_episode(config, seed, "reactive", collect_observations=True)
        for mission_id, obs in sorted(result.observations.items()):
            # obs: list of (slot, feature_row, sustainable) while not completed
            slots = [o[0] for o in obs]
            sustain = {o[0]: o[2] for o in obs}
            for pos, t in enumerate(slots):
                rows = [o[1] for o in obs[max(0, pos - config.window + 1):pos + 1]]
                while len(rows) < config.window:
                    rows = [rows[0]] + rows
                label = 0
                for dt in range(1, config.horizon + 1):
                    if sustain.get(t + dt) is False:
                        label = 1
                        break
                xs.append(np.asarray(rows, dtype=float))
                ys.append(label)
    if not xs:
        return np.zeros((0, config.window, INPUT_DIM)), np.zeros(0)
    return np.stack(xs), np.asarray(ys, dtype=float)


def save_params(p: LstmParams, path) -> None:
    """Plain-text tensor file: one header line per tensor, then the values."""
    with open(path, "w") as fh:
        for name, arr in (("wx", p.wx), ("wh", p.wh), ("b", p.b),
                          ("w_out", p.w_out), ("b_out", np.asarray([p.b_out]))):
            shape = "x".join(str(d) for d in arr.shape)
            fh.write(f"# {name} {shape}\n")
            fh.write(" ".join(repr(float(v)) for v in np.ravel(arr)) + "\n")


def load_params(path) -> LstmParams:
    tensors: dict[str, np.ndarray] = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    for header, data in zip(lines[::2], lines[1::2]):
        _, name, shape = header.split()
        dims = tuple(int(d) for d in shape.split("x"))
        tensors[name] = np.asarray([float(v) for v in data.split()]).reshape(dims)
    return LstmParams(tensors["wx"], tensors["wh"], tensors["b"],
                      tensors["w_out"], float(tensors["b_out"][0]))
