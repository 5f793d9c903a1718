"""The five benchmarked schemes: access model x synthetic-data switch.

The superposition-coding scheme is the primary one; the two orthogonal
baselines replace the link blocks while keeping the same alternating
loop and data-split subproblem:

* equal-share scheme: every device owns a 1/K slice of the band in both
  directions, so rates are interference-free and the uplink simply runs
  at the per-device power cap;
* slotted scheme: the full band is time-shared, one slot per device, so
  the shared windows become sums of per-device slot lengths and the
  downlink always transmits at full base-station power.

Both constructions are this project's reading of the baseline sketches;
reports carry a note saying so.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bcd import DownlinkState, UplinkState, bcd_solve
from .errors import EnergyInfeasibleError, RateOverflowError
from .model import (
    CanonicalInstance,
    SolveReport,
    SystemParams,
    Violation,
    check_feasible,
    downlink_rates,
    uplink_rates,
)
from .downlink import DownlinkSolution, solve_downlink
from .schedule import TimeAllocation, compute_energy_j, q_max_vector
from .uplink import solve_uplink

_MAX_EXP2 = 1000.0


class SchemeId(enum.Enum):
    """Closed enumeration of the benchmarked schemes, in report order."""

    NomaAigc = "NomaAigc"
    FdmaAigc = "FdmaAigc"
    TdmaAigc = "TdmaAigc"
    NomaNoAigc = "NomaNoAigc"
    FdmaNoAigc = "FdmaNoAigc"


SCHEME_ORDER: tuple[SchemeId, ...] = tuple(SchemeId)


# ----------------------------------------------------------------------
# equal-share rate formulas and downlink solve


def fdma_downlink_rates(h: np.ndarray, p: np.ndarray,
                        params: SystemParams) -> np.ndarray:
    """Per-device downlink rate on its own 1/K band slice."""
    k = len(h)
    bk = params.bandwidth_hz / k
    snr = np.asarray(h) * np.asarray(p) * k / params.noise_power_w
    return bk * np.log2(1.0 + snr)


def fdma_uplink_rates(g: np.ndarray, q: np.ndarray,
                      params: SystemParams) -> np.ndarray:
    k = len(g)
    bk = params.bandwidth_hz / k
    snr = np.asarray(g) * np.asarray(q) * k / params.noise_power_w
    return bk * np.log2(1.0 + snr)


def fdma_downlink_powers(eta: float, d_gen: np.ndarray, h: np.ndarray,
                         params: SystemParams) -> np.ndarray:
    """Minimal per-slice powers delivering ``eta * d_gen[k]`` bits/s each.

    No interference between slices, so each power is closed form.
    """
    d_gen = np.asarray(d_gen, dtype=float)
    h = np.asarray(h, dtype=float)
    k = len(h)
    exps = eta * d_gen * k / params.bandwidth_hz
    if float(np.max(exps, initial=0.0)) > _MAX_EXP2:
        raise RateOverflowError(f"rate target needs 2**{np.max(exps):.1f}")
    n0k = params.noise_power_w / k
    p = np.where(d_gen > 0.0, (np.exp2(exps) - 1.0) * n0k / h, 0.0)
    return p


def solve_fdma_downlink(d_gen: np.ndarray, h: np.ndarray, params: SystemParams,
                        tol: float = 1e-9, max_iters: int = 200) -> DownlinkSolution:
    """Bisect the common rate-per-sample on the sliced band."""
    d_gen = np.asarray(d_gen, dtype=float)
    h = np.asarray(h, dtype=float)
    active = d_gen > 0.0
    if not np.any(active):
        return DownlinkSolution(eta=math.inf, p_w=np.zeros(len(h)), iterations=0)

    k = len(h)
    budget = params.bs_power_w
    top_rate = (params.bandwidth_hz / k) * math.log2(
        1.0 + float(h[-1]) * budget * k / params.noise_power_w)
    hi = top_rate / float(np.min(d_gen[active]))
    lo = 0.0

    def fits(eta: float) -> bool:
        try:
            p = fdma_downlink_powers(eta, d_gen, h, params)
        except RateOverflowError:
            return False
        return float(np.sum(p)) <= budget

    iters = 0
    while (hi - lo) / hi >= tol and iters < max_iters:
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
        iters += 1

    return DownlinkSolution(eta=lo, p_w=fdma_downlink_powers(lo, d_gen, h, params),
                            iterations=iters)


# ----------------------------------------------------------------------
# slotted rate formulas and energy cap


def tdma_downlink_capacities(h: np.ndarray, params: SystemParams) -> np.ndarray:
    """Full-band, full-power rate of each device's download slot."""
    snr = np.asarray(h) * params.bs_power_w / params.noise_power_w
    return params.bandwidth_hz * np.log2(1.0 + snr)


def tdma_uplink_rates(g: np.ndarray, q: np.ndarray,
                      params: SystemParams) -> np.ndarray:
    snr = np.asarray(g) * np.asarray(q) / params.noise_power_w
    return params.bandwidth_hz * np.log2(1.0 + snr)


def slotted_energy_cap(g: float, q_hw: float, budget_j: float,
                       params: SystemParams, iters: int = 60) -> float:
    """Largest power whose own-slot upload stays within an energy budget.

    Spent energy q * model_bits / rate(q) is increasing in q, and its
    q -> 0 limit is model_bits * noise * ln2 / (B * g), so a too-small
    budget admits no power at all (returned as 0.0 for the caller to
    flag).
    """
    bits = params.model_size_bits

    def spent(q: float) -> float:
        rate = params.bandwidth_hz * math.log2(1.0 + g * q / params.noise_power_w)
        return q * bits / rate

    if spent(q_hw) <= budget_j:
        return q_hw
    floor = bits * params.noise_power_w * math.log(2.0) / (params.bandwidth_hz * g)
    if budget_j <= floor:
        return 0.0
    lo, hi = 0.0, q_hw
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if spent(mid) <= budget_j:
            lo = mid
        else:
            hi = mid
    return lo


# ----------------------------------------------------------------------
# link models plugged into the alternating loop


class NomaLink:
    """Superposition coding both ways, SIC at the base station."""

    name = "noma"
    notes: tuple[str, ...] = ()

    def downlink(self, d_gen: np.ndarray, inst: CanonicalInstance) -> DownlinkState:
        sol = solve_downlink(d_gen, inst.h, inst.params)
        return DownlinkState(sol.p_w, downlink_rates(inst.h, sol.p_w, inst.params))

    def download_model(self, down: DownlinkState, inst: CanonicalInstance) -> dict:
        return {"download_rates": down.rates_down}

    def uplink(self, q_caps: np.ndarray, inst: CanonicalInstance) -> UplinkState:
        sol = solve_uplink(inst.g, q_caps, inst.params)
        rates = uplink_rates(inst.g, sol.q_w, sol.sic_order, inst.params)
        slowest = float(np.min(rates))
        t_up = inst.params.model_size_bits / slowest if slowest > 0.0 else math.inf
        return UplinkState(sol.q_w, sol.sic_order, rates, t_up, t_up * sol.q_w)

    def energy_caps(self, d_gen: np.ndarray, times: TimeAllocation,
                    inst: CanonicalInstance) -> np.ndarray:
        return q_max_vector(d_gen, times, inst)

    def validator_kwargs(self, inst: CanonicalInstance, alloc) -> dict:
        return {}


class FdmaLink:
    """Equal 1/K band slices in both directions, no interference."""

    name = "fdma"
    notes = ("orthogonal baseline: equal 1/K bandwidth shares both ways",)

    def downlink(self, d_gen: np.ndarray, inst: CanonicalInstance) -> DownlinkState:
        sol = solve_fdma_downlink(d_gen, inst.h, inst.params)
        return DownlinkState(sol.p_w, fdma_downlink_rates(inst.h, sol.p_w, inst.params))

    def download_model(self, down: DownlinkState, inst: CanonicalInstance) -> dict:
        return {"download_rates": down.rates_down}

    def uplink(self, q_caps: np.ndarray, inst: CanonicalInstance) -> UplinkState:
        q = np.array(q_caps, dtype=float)
        rates = fdma_uplink_rates(inst.g, q, inst.params)
        slowest = float(np.min(rates))
        t_up = inst.params.model_size_bits / slowest if slowest > 0.0 else math.inf
        return UplinkState(q, np.arange(inst.n_devices), rates, t_up, t_up * q)

    def energy_caps(self, d_gen: np.ndarray, times: TimeAllocation,
                    inst: CanonicalInstance) -> np.ndarray:
        return q_max_vector(d_gen, times, inst)

    def validator_kwargs(self, inst: CanonicalInstance, alloc) -> dict:
        return {
            "rates_down": fdma_downlink_rates(inst.h, alloc.p_down_w, inst.params),
            "rates_up": fdma_uplink_rates(inst.g, alloc.q_up_w, inst.params),
        }


class TdmaLink:
    """Full band time-shared, one slot per device in both directions."""

    name = "tdma"
    notes = ("orthogonal baseline: sequential full-band slots both ways",)

    def downlink(self, d_gen: np.ndarray, inst: CanonicalInstance) -> DownlinkState:
        caps = tdma_downlink_capacities(inst.h, inst.params)
        p = np.where(np.asarray(d_gen) > 0.0, inst.params.bs_power_w, 0.0)
        return DownlinkState(p, caps)

    def download_model(self, down: DownlinkState, inst: CanonicalInstance) -> dict:
        caps = tdma_downlink_capacities(inst.h, inst.params)
        return {"download_s_per_sample": inst.params.sample_size_bits / caps}

    def uplink(self, q_caps: np.ndarray, inst: CanonicalInstance) -> UplinkState:
        q = np.array(q_caps, dtype=float)
        rates = tdma_uplink_rates(inst.g, q, inst.params)
        if np.any(rates <= 0.0):
            slots = np.full(len(q), math.inf)
        else:
            slots = inst.params.model_size_bits / rates
        return UplinkState(q, np.arange(inst.n_devices), rates,
                           float(np.sum(slots)), slots * q)

    def energy_caps(self, d_gen: np.ndarray, times: TimeAllocation,
                    inst: CanonicalInstance) -> np.ndarray:
        budget = inst.e_max - compute_energy_j(d_gen, times.t_loc_s, inst)
        caps = np.empty(inst.n_devices)
        for i in range(inst.n_devices):
            if budget[i] <= 0.0:
                raise EnergyInfeasibleError(i)
            caps[i] = slotted_energy_cap(float(inst.g[i]), float(inst.q_cap[i]),
                                         float(budget[i]), inst.params)
            if caps[i] <= 0.0:
                raise EnergyInfeasibleError(
                    i, f"device {i} cannot afford its upload slot at any power")
        return caps

    def validator_kwargs(self, inst: CanonicalInstance, alloc) -> dict:
        p = inst.params
        caps_down = tdma_downlink_capacities(inst.h, p)
        rates_up = tdma_uplink_rates(inst.g, alloc.q_up_w, p)
        slots_up = np.where(rates_up > 0.0, p.model_size_bits / np.maximum(rates_up, 1e-300),
                            math.inf)
        return {
            "rates_down": caps_down,
            "rates_up": rates_up,
            "required_download_s": float(np.sum(p.sample_size_bits
                                                * np.asarray(alloc.d_gen) / caps_down)),
            "required_upload_s": float(np.sum(slots_up)),
            "per_device_power_budget": True,
            "upload_energy_j": slots_up * np.asarray(alloc.q_up_w),
        }


@dataclass(frozen=True)
class _SchemeSpec:
    link: object
    force_zero_dgen: bool


_SCHEMES: dict[SchemeId, _SchemeSpec] = {
    SchemeId.NomaAigc: _SchemeSpec(NomaLink(), False),
    SchemeId.FdmaAigc: _SchemeSpec(FdmaLink(), False),
    SchemeId.TdmaAigc: _SchemeSpec(TdmaLink(), False),
    SchemeId.NomaNoAigc: _SchemeSpec(NomaLink(), True),
    SchemeId.FdmaNoAigc: _SchemeSpec(FdmaLink(), True),
}


def run_scheme(inst: CanonicalInstance, scheme: SchemeId, tol: float = 1e-6,
               max_iters: int = 50) -> SolveReport:
    """Solve one instance under one scheme; never raises on infeasibility."""
    spec = _SCHEMES[scheme]
    return bcd_solve(inst, spec.link, force_zero_dgen=spec.force_zero_dgen,
                     tol=tol, max_iters=max_iters, scheme=scheme.value,
                     notes=spec.link.notes)


def check_report(inst: CanonicalInstance, report: SolveReport, scheme: SchemeId,
                 tol: float = 1e-6) -> list[Violation]:
    """Validate a feasible report against its scheme's constraint set."""
    link = _SCHEMES[scheme].link
    return check_feasible(inst, report.allocation, tol,
                          **link.validator_kwargs(inst, report.allocation))
