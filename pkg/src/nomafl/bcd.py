"""Alternating optimization of the data split and the link blocks.

One iteration solves the convex data-split subproblem at the current link
rates, rebuilds the time windows, then re-optimizes downlink powers and
uplink powers/decoding order at the new split.  Either block can only
improve the windows the other one sees, so the recorded objective is
non-increasing; a keep-previous safeguard makes that robust to solver
tolerance jitter.

The module is generic over a link model (superposition coding or one of
the orthogonal-access baselines); the concrete models live in
:mod:`nomafl.schemes`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .dgen import DgenSubproblem, forced_zero_solution, solve_dgen
from .errors import InfeasibleError, RateOverflowError, ScheduleInfeasibleError
from .model import (
    Allocation,
    CanonicalInstance,
    SolveReport,
    broadcast_time,
    learning_error,
)
from .schedule import TimeAllocation, assemble_times, optimal_frequencies


@dataclass(frozen=True)
class DownlinkState:
    """Downlink block output: transmit powers and the per-device rates they
    imply (slot capacities for the slotted baseline)."""

    p_w: np.ndarray
    rates_down: np.ndarray


@dataclass(frozen=True)
class UplinkState:
    """Uplink block output.  ``t_up_s`` is the full upload window and
    ``upload_energy_j`` the per-device energy spent inside it."""

    q_w: np.ndarray
    sic_order: np.ndarray
    rates_up: np.ndarray
    t_up_s: float
    upload_energy_j: np.ndarray


class LinkModel(Protocol):
    """Access-scheme strategy used by the alternating loop."""

    name: str

    def downlink(self, d_gen: np.ndarray, inst: CanonicalInstance) -> DownlinkState: ...

    def download_model(self, down: DownlinkState, inst: CanonicalInstance) -> dict: ...

    def uplink(self, q_caps: np.ndarray, inst: CanonicalInstance) -> UplinkState: ...

    def energy_caps(self, d_gen: np.ndarray, times: TimeAllocation,
                    inst: CanonicalInstance) -> np.ndarray: ...


@dataclass(frozen=True)
class InitState:
    d_gen: np.ndarray
    down: DownlinkState
    up: UplinkState
    times: TimeAllocation


def _window_seconds(model_kwargs: dict, d_gen: np.ndarray, sample_bits: float) -> float:
    """Download window implied by a subproblem download model at a given split."""
    rates = model_kwargs.get("download_rates")
    if rates is not None:
        act = d_gen > 0.0
        if not np.any(act):
            return 0.0
        if np.any(rates[act] <= 0.0):
            raise ScheduleInfeasibleError("synthetic data assigned to a zero-rate device")
        return sample_bits * float(np.max(d_gen[act] / rates[act]))
    return float(np.sum(model_kwargs["download_s_per_sample"] * d_gen))


def _subproblem(inst: CanonicalInstance, model_kwargs: dict, up: UplinkState,
                t_loc_cap_s: float) -> DgenSubproblem:
    p = inst.params
    return DgenSubproblem(
        beta=p.beta, d_loc=inst.d_loc, f_max=inst.f_max, w_cycles=inst.w_cycles,
        varpi=inst.varpi, e_max=inst.e_max, uplink_energy_j=up.upload_energy_j,
        tau_epochs=p.tau_epochs, rounds_n=p.rounds_n,
        synth_s_per_sample=p.synth_rate_s_per_sample,
        sample_bits=p.sample_size_bits, t_loc_cap_s=t_loc_cap_s,
        budget_samples=p.dgen_total_samples, **model_kwargs)


def _consistent_uplink(d_gen: np.ndarray, t_down_s: float, link: LinkModel,
                       inst: CanonicalInstance, max_passes: int = 8
                       ) -> tuple[UplinkState, TimeAllocation]:
    """Fixed point of uplink powers against the energy left after compute.

    Power caps shrink the uplink rates, which lengthen the upload window,
    which shrinks the training window and raises compute energy, which
    shrinks the caps again; the map is monotone, so a few passes settle it.
    """
    caps = np.array(inst.q_cap, dtype=float)
    up = link.uplink(caps, inst)
    times = assemble_times(d_gen, t_down_s, up.t_up_s, inst)
    for _ in range(max_passes):
        caps_new = link.energy_caps(d_gen, times, inst)
        if np.all(np.abs(caps_new - caps) <= 1e-9 * np.maximum(np.abs(caps), 1e-300)):
            break
        caps = caps_new
        up = link.uplink(caps, inst)
        times = assemble_times(d_gen, t_down_s, up.t_up_s, inst)
    return up, times


def initialize(inst: CanonicalInstance, link: LinkModel,
               force_zero_dgen: bool = False) -> InitState:
    """Deterministic starting point: a uniform split sized from the training
    window slack, with a straight fall-back to the empty split when any step
    of the construction fails."""
    p = inst.params
    k = inst.n_devices
    t_br = broadcast_time(float(inst.h[0]), p)

    if force_zero_dgen or p.dgen_total_samples <= 0.0:
        d_bar = 0.0
    else:
        up0 = link.uplink(np.array(inst.q_cap, dtype=float), inst)
        window = p.t_max_s / p.rounds_n - t_br - up0.t_up_s
        if window <= 0.0:
            raise ScheduleInfeasibleError("round budget exhausted before local training")
        # largest uniform split the per-device limits leave room for at the
        # full window: CPU-speed slack and compute-energy slack
        slack_f = inst.f_max * window / (inst.w_cycles * p.tau_epochs) - inst.d_loc
        kap = np.sqrt(inst.varpi * inst.w_cycles ** 3 * p.tau_epochs ** 3
                      / inst.e_max)
        slack_e = (window / kap) ** (2.0 / 3.0) - inst.d_loc
        d_bar = max(min(p.dgen_total_samples / k, float(np.min(slack_f)),
                        float(np.min(slack_e))) / 2.0, 0.0)

    # geometric backoff toward the guaranteed-checkable empty split
    values = [d_bar / 2 ** i for i in range(20) if d_bar > 0.0] + [0.0]
    last_err: InfeasibleError | None = None
    for value in values:
        d0 = np.full(k, value)
        try:
            down = link.downlink(d0, inst)
            t_down = _window_seconds(link.download_model(down, inst), d0,
                                     p.sample_size_bits)
            up, times = _consistent_uplink(d0, t_down, link, inst)
            freq = optimal_frequencies(d0, times.t_loc_s, inst)
            e_loc = (inst.varpi * inst.w_cycles * p.tau_epochs
                     * (inst.d_loc + d0) * freq ** 2)
            if (np.all(freq <= inst.f_max * (1.0 + 1e-9))
                    and np.all(e_loc + up.upload_energy_j
                               <= inst.e_max * (1.0 + 1e-9))):
                return InitState(d0, down, up, times)
            last_err = ScheduleInfeasibleError(
                "mandatory local work does not fit the training window")
        except (InfeasibleError, RateOverflowError) as err:
            last_err = err
    assert last_err is not None
    raise last_err


def infeasible_report(inst: CanonicalInstance, scheme: str = "",
                      notes: tuple[str, ...] = ()) -> SolveReport:
    """The all-zero report every failure mode folds into."""
    k = inst.n_devices
    zeros = np.zeros(k)
    alloc = Allocation(d_gen=zeros, t_down_s=0.0, t_br_s=0.0, t_loc_s=0.0,
                       t_up_s=0.0, p_down_w=zeros, q_up_w=zeros,
                       sic_order=np.arange(k), freq_hz=zeros)
    return SolveReport(feasible=False, learning_error=1.0, objective_trace=(),
                       allocation=alloc, iterations=0, per_device_energy_j=zeros,
                       scheme=scheme, notes=notes)


def _finalize(inst: CanonicalInstance, link: LinkModel, d_gen: np.ndarray,
              down: DownlinkState, up: UplinkState, trace: list[float],
              scheme: str, notes: tuple[str, ...]) -> SolveReport:
    """Assemble the report from the last iterate, rebuilding every window
    from the final rates so the optimality identities hold exactly."""
    p = inst.params
    t_down = _window_seconds(link.download_model(down, inst), d_gen,
                             p.sample_size_bits)
    times = assemble_times(d_gen, t_down, up.t_up_s, inst)
    freq = optimal_frequencies(d_gen, times.t_loc_s, inst)
    e_loc = (inst.varpi * inst.w_cycles * p.tau_epochs
             * (inst.d_loc + d_gen) * freq ** 2)
    alloc = Allocation(d_gen=d_gen, t_down_s=times.t_down_s, t_br_s=times.t_br_s,
                       t_loc_s=times.t_loc_s, t_up_s=times.t_up_s,
                       p_down_w=down.p_w, q_up_w=up.q_w,
                       sic_order=up.sic_order, freq_hz=freq)
    err = learning_error(inst.d_loc + d_gen, p)
    return SolveReport(feasible=True, learning_error=err,
                       objective_trace=tuple(trace), allocation=alloc,
                       iterations=len(trace),
                       per_device_energy_j=e_loc + up.upload_energy_j,
                       scheme=scheme, notes=notes)


def _bcd_core(inst: CanonicalInstance, link: LinkModel, force_zero_dgen: bool,
              tol: float, max_iters: int, scheme: str,
              notes: tuple[str, ...]) -> SolveReport:
    p = inst.params
    init = initialize(inst, link, force_zero_dgen=force_zero_dgen)
    down, up = init.down, init.up
    t_br = init.times.t_br_s

    trace: list[float] = []
    prev_d: np.ndarray | None = None
    d = init.d_gen

    for _ in range(max_iters):
        t_loc_cap = p.t_max_s / p.rounds_n - t_br - up.t_up_s
        if t_loc_cap <= 0.0:
            raise ScheduleInfeasibleError("round budget exhausted before local training")
        sub = _subproblem(inst, link.download_model(down, inst), up, t_loc_cap)
        if force_zero_dgen:
            sol = forced_zero_solution(sub)
        else:
            sol = solve_dgen(sub, warm_start=prev_d)
        d, obj = sol.d_gen, sol.objective
        if (trace and obj > trace[-1] and prev_d is not None
                and sub.max_violation(prev_d) <= 1e-9):
            # the previous split stays feasible here, so never accept worse
            d, obj = prev_d, trace[-1]
        converged = bool(trace) and abs(obj - trace[-1]) <= tol * abs(trace[-1])
        trace.append(obj)
        prev_d = d

        times = assemble_times(d, sub.download_seconds(d), up.t_up_s, inst)
        down = link.downlink(d, inst)
        caps = link.energy_caps(d, times, inst)
        up = link.uplink(caps, inst)
        if converged:
            break

    return _finalize(inst, link, d, down, up, trace, scheme, notes)


def bcd_solve(inst: CanonicalInstance, link: LinkModel,
              force_zero_dgen: bool = False, tol: float = 1e-6,
              max_iters: int = 50, scheme: str = "",
              notes: tuple[str, ...] = ()) -> SolveReport:
    """Full solve for one instance under one access scheme.

    Never raises on infeasibility: a failed run retries with the empty
    split, and if that fails too the instance is reported infeasible with
    learning error pinned to one.
    """
    try:
        return _bcd_core(inst, link, force_zero_dgen, tol, max_iters, scheme, notes)
    except (InfeasibleError, RateOverflowError):
        pass
    if not force_zero_dgen:
        try:
            return _bcd_core(inst, link, True, tol, max_iters, scheme, notes)
        except (InfeasibleError, RateOverflowError):
            pass
    return infeasible_report(inst, scheme=scheme, notes=notes)
