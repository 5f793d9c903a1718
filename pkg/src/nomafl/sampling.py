"""Seeded scenario sampling for the Monte-Carlo harness.

Instances follow the survey defaults: urban path loss 128.1 + 37.6 log10(d_km)
dB with unit-mean exponential fading on top, device scalars drawn uniformly
from configured ranges, and radio/learning constants fixed in the config.

Reproducibility contract: every drop uses a counter-based generator (Philox)
keyed by SHA-256 of ``"{seed}:{drop_index}"``, so instances are identical no
matter which order drops or sweep points execute in.  The sweep value is
deliberately NOT part of the key: it is applied as an override after drawing,
so two sweep points share every random draw and differ only in the swept
quantity.  The draw order per drop is fixed:

1. total synthetic-sample budget, 2. model size in bits, then per device
(in index order): local samples, max CPU frequency, cycles per sample,
distance, downlink fading, uplink fading.

Growing ``k_devices`` therefore extends the device list without changing
the devices already drawn.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInstanceError
from .model import (
    CanonicalInstance,
    ChannelState,
    DeviceProfile,
    SystemParams,
    canonicalize,
    dbm_to_watts,
)

SCHEMA_VERSION = 1

# parameters the harness knows how to sweep (figure x-axes)
SWEEPABLE = (
    "bs_power_dbm",        # base-station transmit power
    "dgen_total_samples",  # synthetic-data budget
    "model_size_bits",     # per-round model upload/broadcast size
    "t_max_s",             # wall-clock training budget
    "e_max_j",             # per-device energy budget
    "k_devices",           # cohort size
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything the sampler and sweep runner need, JSON-serializable."""

    seed: int
    k_devices: int
    drops: int
    schemes: tuple[str, ...]
    sweep_parameter: str
    sweep_values: tuple[float, ...]

    distance_range_m: tuple[float, float] = (150.0, 300.0)
    d_loc_range: tuple[float, float] = (300.0, 500.0)
    f_max_range_hz: tuple[float, float] = (1e9, 2e9)
    w_range_cycles: tuple[float, float] = (1e6, 2e6)
    dgen_total_range: tuple[float, float] = (3000.0, 5000.0)
    model_bits_range: tuple[float, float] = (1.5e6, 2.5e6)

    bandwidth_hz: float = 1e6
    noise_psd_dbm_per_hz: float = -160.0
    rounds_n: int = 100
    t_max_s: float = 900.0
    tau_epochs: float = 1.0
    zeta: float = 50.0
    alpha: float = 3.819
    beta: float = 0.198
    gamma: float = 0.231
    bs_power_dbm: float = 35.0
    q_max_dbm: float = 20.0
    e_max_j: float = 1.2
    varpi: float = 1e-27
    sample_size_bits: float = 2e4
    synth_rate_s_per_sample: float = 0.0646

    def __post_init__(self):
        if self.drops < 1:
            raise InvalidInstanceError("drops must be >= 1")
        if self.k_devices < 1:
            raise InvalidInstanceError("k_devices must be >= 1")
        if len(self.sweep_values) == 0:
            raise InvalidInstanceError("sweep value list must be non-empty")
        if self.sweep_parameter not in SWEEPABLE:
            raise InvalidInstanceError(
                f"unknown sweep parameter {self.sweep_parameter!r}; "
                f"one of {SWEEPABLE} expected")
        if len(self.schemes) == 0:
            raise InvalidInstanceError("scheme list must be non-empty")
        for name in ("distance_range_m", "d_loc_range", "f_max_range_hz",
                     "w_range_cycles", "dgen_total_range", "model_bits_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise InvalidInstanceError(f"{name} must satisfy min <= max")


_RANGE_FIELDS = ("distance_range_m", "d_loc_range", "f_max_range_hz",
                 "w_range_cycles", "dgen_total_range", "model_bits_range")
_SCALAR_FIELDS = ("bandwidth_hz", "noise_psd_dbm_per_hz", "rounds_n", "t_max_s",
                  "tau_epochs", "zeta", "alpha", "beta", "gamma", "bs_power_dbm",
                  "q_max_dbm", "e_max_j", "varpi", "sample_size_bits",
                  "synth_rate_s_per_sample")


def config_to_json(config: ScenarioConfig) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
        "k_devices": config.k_devices,
        "drops": config.drops,
        "schemes": list(config.schemes),
        "sweep": {"parameter": config.sweep_parameter,
                  "values": list(config.sweep_values)},
    }
    for name in _RANGE_FIELDS:
        doc[name] = list(getattr(config, name))
    for name in _SCALAR_FIELDS:
        doc[name] = getattr(config, name)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def config_from_json(text: str) -> ScenarioConfig:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInstanceError(
            f"unsupported config schema_version {version!r} (want {SCHEMA_VERSION})")
    sweep = doc.get("sweep", {})
    kwargs = dict(
        seed=int(doc["seed"]), k_devices=int(doc["k_devices"]),
        drops=int(doc["drops"]), schemes=tuple(doc["schemes"]),
        sweep_parameter=sweep.get("parameter", ""),
        sweep_values=tuple(float(v) for v in sweep.get("values", ())))
    for name in _RANGE_FIELDS:
        if name in doc:
            lo, hi = doc[name]
            kwargs[name] = (float(lo), float(hi))
    for name in _SCALAR_FIELDS:
        if name in doc:
            value = doc[name]
            kwargs[name] = int(value) if name == "rounds_n" else float(value)
    return ScenarioConfig(**kwargs)


def _drop_generator(seed: int, drop_index: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{drop_index}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pathloss_gain(distance_m: np.ndarray) -> np.ndarray:
    """Linear attenuation 10^(-PL/10) of the urban-macro path-loss curve."""
    pl_db = 128.1 + 37.6 * np.log10(np.asarray(distance_m) / 1000.0)
    return 10.0 ** (-pl_db / 10.0)


def sample_instance(config: ScenarioConfig, drop_index: int,
                    sweep_value: float | None = None) -> CanonicalInstance:
    """Draw one instance; deterministic in (config.seed, drop_index).

    ``sweep_value`` overrides the swept parameter after all draws are made,
    so instances at different sweep points share the rest of their
    randomness draw for draw.
    """
    cfg = config
    if sweep_value is not None and cfg.sweep_parameter == "k_devices":
        cfg = replace(cfg, k_devices=int(sweep_value))
    k = cfg.k_devices

    rng = _drop_generator(cfg.seed, drop_index)
    dgen_total = float(rng.uniform(*cfg.dgen_total_range))
    model_bits = float(rng.uniform(*cfg.model_bits_range))
    d_loc = np.empty(k)
    f_max = np.empty(k)
    w_cycles = np.empty(k)
    dist = np.empty(k)
    fade_h = np.empty(k)
    fade_g = np.empty(k)
    for i in range(k):
        d_loc[i] = rng.uniform(*cfg.d_loc_range)
        f_max[i] = rng.uniform(*cfg.f_max_range_hz)
        w_cycles[i] = rng.uniform(*cfg.w_range_cycles)
        dist[i] = rng.uniform(*cfg.distance_range_m)
        fade_h[i] = rng.exponential()
        fade_g[i] = rng.exponential()

    bs_power_dbm = cfg.bs_power_dbm
    t_max_s = cfg.t_max_s
    e_max_j = cfg.e_max_j
    if sweep_value is not None:
        param = cfg.sweep_parameter
        if param == "bs_power_dbm":
            bs_power_dbm = float(sweep_value)
        elif param == "dgen_total_samples":
            dgen_total = float(sweep_value)
        elif param == "model_size_bits":
            model_bits = float(sweep_value)
        elif param == "t_max_s":
            t_max_s = float(sweep_value)
        elif param == "e_max_j":
            e_max_j = float(sweep_value)

    params = SystemParams(
        bandwidth_hz=cfg.bandwidth_hz,
        noise_psd_w_per_hz=dbm_to_watts(cfg.noise_psd_dbm_per_hz),
        rounds_n=cfg.rounds_n, t_max_s=t_max_s, tau_epochs=cfg.tau_epochs,
        zeta=cfg.zeta, alpha=cfg.alpha, beta=cfg.beta, gamma=cfg.gamma,
        bs_power_w=dbm_to_watts(bs_power_dbm),
        synth_rate_s_per_sample=cfg.synth_rate_s_per_sample,
        sample_size_bits=cfg.sample_size_bits, model_size_bits=model_bits,
        dgen_total_samples=dgen_total)
    q_max_w = dbm_to_watts(cfg.q_max_dbm)
    profiles = [
        DeviceProfile(d_loc_samples=float(d_loc[i]), f_max_hz=float(f_max[i]),
                      q_max_w=q_max_w, e_max_j=e_max_j, varpi=cfg.varpi,
                      w_cycles_per_sample=float(w_cycles[i]),
                      distance_m=float(dist[i]))
        for i in range(k)
    ]
    atten = pathloss_gain(dist)
    return canonicalize(params, profiles,
                        ChannelState(h=atten * fade_h, g=atten * fade_g))
