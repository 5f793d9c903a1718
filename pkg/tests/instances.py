"""Shared instance builders for the solver-level tests."""
from __future__ import annotations

import numpy as np

from nomafl.model import (
    CanonicalInstance,
    ChannelState,
    DeviceProfile,
    SystemParams,
    canonicalize,
)

# survey-scale defaults: 1 MHz band, -160 dBm/Hz noise, 35 dBm base station
SURVEY_PARAMS = dict(
    bandwidth_hz=1e6, noise_psd_w_per_hz=1e-19, rounds_n=100, t_max_s=900.0,
    tau_epochs=1.0, zeta=50.0, alpha=3.819, beta=0.198, gamma=0.231,
    bs_power_w=3.1622776601683795, synth_rate_s_per_sample=0.0646,
    sample_size_bits=2.0e6, model_size_bits=2.0e4, dgen_total_samples=4000.0)


def survey_params(**over) -> SystemParams:
    base = dict(SURVEY_PARAMS)
    base.update(over)
    return SystemParams(**base)


def golden_instance(**params_over) -> CanonicalInstance:
    """Fixed 3-device instance used for the frozen regression values."""
    params = survey_params(**params_over)
    h = np.array([4.0e-11, 9.0e-11, 2.5e-10])
    g = np.array([6.0e-11, 1.2e-10, 3.0e-11])
    profiles = [
        DeviceProfile(d_loc_samples=320.0, f_max_hz=1.1e9, q_max_w=0.1,
                      e_max_j=1.2, varpi=1e-27, w_cycles_per_sample=1.8e6,
                      distance_m=260.0),
        DeviceProfile(d_loc_samples=410.0, f_max_hz=1.6e9, q_max_w=0.1,
                      e_max_j=1.2, varpi=1e-27, w_cycles_per_sample=1.3e6,
                      distance_m=210.0),
        DeviceProfile(d_loc_samples=480.0, f_max_hz=1.9e9, q_max_w=0.1,
                      e_max_j=1.2, varpi=1e-27, w_cycles_per_sample=1.1e6,
                      distance_m=160.0),
    ]
    return canonicalize(params, profiles, ChannelState(h, g))


def random_instance(seed: int, k: int, **params_over) -> CanonicalInstance:
    """Seeded draw with survey-like ranges and Rayleigh-faded urban gains."""
    rng = np.random.default_rng(seed)
    params = survey_params(
        sample_size_bits=rng.uniform(1.5e6, 2.5e6),
        dgen_total_samples=rng.uniform(3000.0, 5000.0), **params_over)

    def gain(dist_m: float) -> float:
        pl_db = 128.1 + 37.6 * np.log10(dist_m / 1000.0)
        return 10.0 ** (-pl_db / 10.0) * rng.exponential()

    profiles, h, g = [], [], []
    for _ in range(k):
        dist = rng.uniform(150.0, 300.0)
        profiles.append(DeviceProfile(
            d_loc_samples=rng.uniform(300.0, 500.0),
            f_max_hz=rng.uniform(1e9, 2e9), q_max_w=0.1, e_max_j=1.2,
            varpi=1e-27, w_cycles_per_sample=rng.uniform(1e6, 2e6),
            distance_m=dist))
        h.append(gain(dist))
        g.append(gain(dist))
    return canonicalize(params, profiles, ChannelState(np.array(h), np.array(g)))
