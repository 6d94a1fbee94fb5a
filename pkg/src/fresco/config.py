"""Scenario / radio / policy configuration with a flat ``section.key = value`` file format."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Raised when a configuration file or value set is invalid."""


#: (num_mus, num_uavs) for the four system-scale settings.
SCALES = {
    "S1": (48, 12),
    "S2": (72, 18),
    "S3": (96, 24),
    "S4": (120, 30),
}


@dataclass
class RadioParams:
    """Log-distance path-loss channel abstraction.

    Powers are linear mW, gains linear, bandwidths MHz. ``snr_min`` is the
    sustainability threshold (linear), ``b_link`` the per serving-candidate
    synchronization-link capacity.
    """

    pathloss_exponent: float = 2.2
    reference_gain: float = 1e-4      # -40 dB at 1 m
    noise_power: float = 1e-10        # -100 dBm
    tx_power_mu: float = 200.0        # 23 dBm
    tx_power_uav: float = 1000.0      # 30 dBm
    shadowing_sigma: float = 4.0      # dB
    snr_min: float = 1.0              # 0 dB
    b_link: float = 10.0              # MHz

    def validate(self) -> None:
        if self.pathloss_exponent < 2.0:
            raise ConfigError("pathloss_exponent must be >= 2 (free space)")
        for name in ("reference_gain", "noise_power", "tx_power_mu", "tx_power_uav"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"radio.{name} must be > 0")
        if self.b_link <= 0:
            raise ConfigError("radio.b_link must be > 0")
        if self.shadowing_sigma < 0 or self.snr_min < 0:
            raise ConfigError("radio shadowing/snr_min must be >= 0")


@dataclass
class ScenarioConfig:
    # Topology / horizon
    num_mus: int = 48
    num_uavs: int = 12
    candidate_fraction: float = 1.0 / 3.0
    area_side: float = 100.0
    uav_altitude: float = 100.0
    slots: int = 80
    tau: float = 1.0
    mu_speed_max: float = 2.0
    uav_speed_max: float = 10.0

    # Mission generation ranges
    d0_range: tuple[float, float] = (5.0, 15.0)        # Mb
    c0_range: tuple[float, float] = (8.0, 20.0)        # Gcycles
    zeta_range: tuple[float, float] = (2.0, 6.0)       # Mb
    t_max_range: tuple[float, float] = (10.0, 18.0)    # s

    # UAV generation ranges
    b_ava_range: tuple[float, float] = (10.0, 20.0)    # MHz
    f_ava_range: tuple[float, float] = (10.0, 25.0)    # Gcycles/s
    e_c_range: tuple[float, float] = (60.0, 120.0)     # kJ
    e_s_range: tuple[float, float] = (20.0, 60.0)      # kJ
    drain_range: tuple[float, float] = (0.3, 1.0)      # kJ/slot
    v_max_range: tuple[float, float] = (5.0, 10.0)     # m/s

    # Primary (serving) per-mission allocations, fixed at generation
    serve_bandwidth_range: tuple[float, float] = (0.02, 0.06)   # MHz
    serve_compute_range: tuple[float, float] = (0.2, 0.5)       # Gcycles/s

    # Risk / reservation thresholds
    xi_th: float = 0.08
    xi_alarm: float = 0.16
    s_min: float = 0.30
    horizon: int = 4          # H
    window: int = 6           # L
    release_slots: int = 3    # drop a reservation after this many low-risk slots

    # Utility weights
    beta: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 0.5)
    nu: tuple[float, float, float] = (1.0, 1.0, 1.0)
    eta: tuple[float, float, float, float, float] = (2.0, 0.5, 0.5, 0.5, 0.5)
    epsilon: float = 1e-6

    # Energy model
    kappa_b: float = 0.01     # kJ per MHz*s
    kappa_f: float = 0.02     # kJ per (Gcycles/s)*s
    e_min: float = 5.0        # candidate battery floor, kJ
    serving_energy_floor: float = 2.0
    candidate_idle_drain: float = 0.1   # kJ/slot
    promoted_drain: float = 0.5         # kJ/slot after a candidate turns serving

    # Heuristic risk margins
    heuristic_e_margin: float = 10.0    # kJ above the serving floor
    heuristic_snr_margin_db: float = 10.0

    # Feature normalization maxima (run-independent)
    feat_e_s_max: float = 60.0
    feat_snr_db_min: float = -20.0
    feat_snr_db_max: float = 60.0
    feat_load_max: float = 8.0

    # LSTM predictor
    lstm_hidden: int = 32
    lstm_epochs: int = 20
    lstm_lr: float = 0.001
    lstm_batch: int = 128
    lstm_init_scale: float = 0.08

    radio: RadioParams = field(default_factory=RadioParams)
    seed: int = 0

    def validate(self) -> None:
        if self.num_mus <= 0 or self.num_uavs <= 1:
            raise ConfigError("need at least one MU and two UAVs")
        if not (0.0 < self.candidate_fraction < 1.0):
            raise ConfigError("candidate_fraction must be in (0, 1)")
        if not (0.0 < self.xi_th < self.xi_alarm <= 1.0):
            raise ConfigError("need 0 < xi_th < xi_alarm <= 1")
        if not (0.0 <= self.s_min <= 1.0):
            raise ConfigError("s_min must be in [0, 1]")
        if self.horizon < 1 or self.window < 1:
            raise ConfigError("horizon and window must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if min(self.beta) < 0 or min(self.nu) <= 0 or min(self.eta) < 0:
            raise ConfigError("beta/eta must be >= 0 and nu > 0")
        if self.slots <= 0 or self.tau <= 0:
            raise ConfigError("slots and tau must be positive")
        for name in ("d0_range", "c0_range", "zeta_range", "t_max_range",
                     "b_ava_range", "f_ava_range", "e_c_range", "e_s_range",
                     "drain_range", "v_max_range", "serve_bandwidth_range",
                     "serve_compute_range"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi):
                raise ConfigError(f"{name} must satisfy 0 <= lo <= hi")
        self.radio.validate()

    @property
    def num_candidates(self) -> int:
        return math.ceil(self.candidate_fraction * self.num_uavs)

    @property
    def num_serving(self) -> int:
        return self.num_uavs - self.num_candidates

    @property
    def mission_cap(self) -> int:
        return math.ceil(self.num_mus / max(1, self.num_serving))

    @property
    def feat_dist_max(self) -> float:
        return math.hypot(self.area_side * math.sqrt(2.0), self.uav_altitude)

    def with_scale(self, scale: str) -> "ScenarioConfig":
        if scale not in SCALES:
            raise ConfigError(f"unknown scale {scale!r}; expected one of {sorted(SCALES)}")
        num_mus, num_uavs = SCALES[scale]
        return dataclasses.replace(self, num_mus=num_mus, num_uavs=num_uavs)

    def to_flat(self) -> dict[str, object]:
        """Flatten to dotted keys for the key=value file format."""
        out: dict[str, object] = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if f.name == "radio":
                for rf in dataclasses.fields(RadioParams):
                    out[f"radio.{rf.name}"] = getattr(val, rf.name)
            else:
                out[f"scenario.{f.name}"] = val
        return out


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_value(text: str):
    if "," in text:
        return tuple(_parse_scalar(p) for p in text.split(",") if p.strip())
    return _parse_scalar(text)


def parse_flat_file(path: str | Path) -> dict[str, object]:
    """Parse a ``key = value`` file; '#' starts a comment, commas make tuples."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = _parse_value(val)
    return values


_SCENARIO_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_RADIO_FIELDS = {f.name: f for f in dataclasses.fields(RadioParams)}


def load_config(path: str | Path | None = None, overrides: dict[str, object] | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from defaults, an optional file, and overrides."""
    cfg = ScenarioConfig()
    flat: dict[str, object] = {}
    if path is not None:
        flat.update(parse_flat_file(path))
    if overrides:
        flat.update(overrides)
    for key, val in flat.items():
        section, _, name = key.partition(".")
        if section == "radio" and name in _RADIO_FIELDS:
            setattr(cfg.radio, name, val)
        elif section in ("scenario", "fresco") and name in _SCENARIO_FIELDS:
            if isinstance(val, tuple):
                val = tuple(float(v) for v in val)
            setattr(cfg, name, val)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    cfg.validate()
    return cfg


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical flat-text rendering (stable key order, diff-friendly)."""
    lines = []
    for key in sorted(cfg.to_flat()):
        val = cfg.to_flat()[key]
        if isinstance(val, tuple):
            text = ",".join(repr(v) for v in val)
        else:
            text = repr(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
