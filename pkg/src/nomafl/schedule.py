"""Closed-form time allocation and the quantities that follow from it.

Given the synthetic-data split and the link rates, the round structure
collapses to closed forms: the download window is exactly as long as the
slowest device needs, broadcast and upload windows are set by their
weakest rates, and everything left inside the per-round budget becomes
the shared local-training window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnergyInfeasibleError, InvalidInstanceError, ScheduleInfeasibleError
from .model import CanonicalInstance, SystemParams, broadcast_time


@dataclass(frozen=True)
class TimeAllocation:
    t_down_s: float
    t_br_s: float
    t_loc_s: float
    t_up_s: float
    t_loc_cap_s: float  # per-round budget left after broadcast + upload


def max_download_seconds(d_gen: np.ndarray, rates_down: np.ndarray,
                         params: SystemParams) -> float:
    """Download window demanded by the slowest device, Gamma*max(D/R).

    Devices with no synthetic data contribute 0 regardless of their rate.
    """
    d_gen = np.asarray(d_gen, dtype=float)
    rates = np.asarray(rates_down, dtype=float)
    active = d_gen > 0.0
    if not np.any(active):
        return 0.0
    if np.any(rates[active] <= 0.0):
        return math.inf
    return params.sample_size_bits * float(np.max(d_gen[active] / rates[active]))


def assemble_times(d_gen: np.ndarray, t_down_s: float, t_up_s: float,
                   inst: CanonicalInstance) -> TimeAllocation:
    """Fill in the remaining windows around given download/upload times.

    Raises :class:`ScheduleInfeasibleError` when the local-training window
    would be nonpositive; it is never clamped.
    """
    p = inst.params
    if p.rounds_n <= 0:
        raise InvalidInstanceError("time allocation needs at least one round")
    if t_up_s <= 0.0 or not math.isfinite(t_up_s):
        raise ScheduleInfeasibleError("upload window must be positive and finite")
    t_br = broadcast_time(float(inst.h[0]), p)
    t_up = t_up_s
    t_loc_cap = p.t_max_s / p.rounds_n - t_up - t_br
    t_syn = p.synth_rate_s_per_sample * float(np.sum(d_gen))
    t_loc = t_loc_cap - t_syn / p.rounds_n - t_down_s / p.rounds_n
    if t_loc <= 0.0:
        raise ScheduleInfeasibleError(
            f"local-training window {t_loc:.3e} s is nonpositive")
    return TimeAllocation(t_down_s=float(t_down_s), t_br_s=t_br, t_loc_s=t_loc,
                          t_up_s=t_up, t_loc_cap_s=t_loc_cap)


def time_allocation(d_gen: np.ndarray, rates_down: np.ndarray, rates_up: np.ndarray,
                    inst: CanonicalInstance) -> TimeAllocation:
    """Optimal window split for the superposition-coding scheme."""
    rates_up = np.asarray(rates_up, dtype=float)
    t_down = max_download_seconds(d_gen, rates_down, inst.params)
    if not math.isfinite(t_down):
        raise ScheduleInfeasibleError("a device with synthetic data has zero downlink rate")
    slowest = float(np.min(rates_up))
    if slowest <= 0.0:
        raise ScheduleInfeasibleError("no positive uplink rate")
    return assemble_times(d_gen, t_down, inst.params.model_size_bits / slowest, inst)


def optimal_frequencies(d_gen: np.ndarray, t_loc_s: float,
                        inst: CanonicalInstance) -> np.ndarray:
    """Slowest CPU speed that still finishes local training exactly on time."""
    if t_loc_s <= 0.0:
        raise ScheduleInfeasibleError("local-training window must be positive")
    d_total = inst.d_loc + np.asarray(d_gen, dtype=float)
    return inst.w_cycles * inst.params.tau_epochs * d_total / t_loc_s


def compute_energy_j(d_gen: np.ndarray, t_loc_s: float,
                     inst: CanonicalInstance) -> np.ndarray:
    """Per-device training energy when the CPU runs just fast enough."""
    p = inst.params
    d_total = inst.d_loc + np.asarray(d_gen, dtype=float)
    return (inst.varpi * inst.w_cycles ** 3 * p.tau_epochs ** 3 * d_total ** 3
            / t_loc_s ** 2)


def q_max_vector(d_gen: np.ndarray, times: TimeAllocation,
                 inst: CanonicalInstance) -> np.ndarray:
    """Per-device uplink power cap: hardware cap vs energy left after compute.

    Raises :class:`EnergyInfeasibleError` naming the first device whose cap
    would be nonpositive.
    """
    compute_j = compute_energy_j(d_gen, times.t_loc_s, inst)
    cap = np.minimum(inst.q_cap, (inst.e_max - compute_j) / times.t_up_s)
    bad = np.nonzero(cap <= 0.0)[0]
    if bad.size:
        raise EnergyInfeasibleError(int(bad[0]))
    return cap
