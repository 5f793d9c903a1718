"""Core types and closed-form physics of the system.

One federated round is: server-side data synthesis, a shared download
window in which every device fetches its synthetic samples, then N
training rounds of (model broadcast, local training, model upload).
All formulas here are pure functions of the instance and an allocation;
iterative solvers live in the sibling modules.

Units: Hz, W, W/Hz, seconds, bits, samples, joules, CPU cycles.
dBm appears only at config boundaries (see :func:`dbm_to_watts`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInstanceError

# Tie-break nudge applied to duplicate downlink gains so the decoding
# order is strict (relative, applied to the later duplicate).
_TIE_EPS = 1e-12


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) / 1000.0


def watts_to_dbm(x_w: float) -> float:
    if x_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(x_w * 1000.0)


@dataclass(frozen=True)
class SystemParams:
    """Shared (non-per-device) constants of one instance."""

    bandwidth_hz: float            # B
    noise_psd_w_per_hz: float      # noise power spectral density
    rounds_n: int                  # number of training rounds per federation run
    t_max_s: float                 # wall-clock budget for the whole run
    tau_epochs: float              # local epochs per round
    zeta: float                    # error-surrogate temperature
    alpha: float                   # error-surrogate scale
    beta: float                    # error-surrogate data exponent
    gamma: float                   # error-surrogate offset
    bs_power_w: float              # total base-station transmit power
    synth_rate_s_per_sample: float  # server time to synthesize one sample
    sample_size_bits: float        # bits to push one synthetic sample downlink
    model_size_bits: float         # bits per model exchange
    dgen_total_samples: float      # server-side synthetic data budget

    def __post_init__(self):
        if self.bandwidth_hz <= 0 or self.noise_psd_w_per_hz <= 0:
            raise InvalidInstanceError("bandwidth and noise PSD must be positive")
        if self.rounds_n < 0:
            raise InvalidInstanceError("rounds_n must be >= 0")
        if self.zeta <= 0 or self.beta <= 0:
            raise InvalidInstanceError("zeta and beta must be positive")

    @property
    def noise_power_w(self) -> float:
        """Noise power over the full band."""
        return self.noise_psd_w_per_hz * self.bandwidth_hz


@dataclass(frozen=True)
class DeviceProfile:
    d_loc_samples: float        # local dataset size
    f_max_hz: float             # CPU frequency cap
    q_max_w: float              # uplink transmit power cap
    e_max_j: float              # per-round energy budget
    varpi: float                # effective switched capacitance
    w_cycles_per_sample: float  # CPU cycles to train one sample for one epoch
    distance_m: float = 0.0     # BS distance (bookkeeping only)

    def __post_init__(self):
        if self.d_loc_samples <= 0:
            raise InvalidInstanceError("d_loc_samples must be positive")
        if self.f_max_hz <= 0 or self.q_max_w <= 0 or self.e_max_j <= 0:
            raise InvalidInstanceError("device caps must be positive")
        if self.varpi <= 0 or self.w_cycles_per_sample <= 0:
            raise InvalidInstanceError("varpi and w_cycles_per_sample must be positive")


@dataclass(frozen=True)
class ChannelState:
    """Downlink (h) and uplink (g) power gains, one entry per device."""

    h: np.ndarray
    g: np.ndarray


def _frozen_array(a) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CanonicalInstance:
    """Instance with devices reordered so h is strictly ascending.

    ``orig_index[i]`` is the position the i-th canonical device had in the
    caller's ordering, so reports can be mapped back.
    """

    params: SystemParams
    profiles: tuple[DeviceProfile, ...]
    h: np.ndarray
    g: np.ndarray
    orig_index: np.ndarray
    # vector views of the profiles, precomputed for the solvers
    d_loc: np.ndarray = field(repr=False, default=None)
    f_max: np.ndarray = field(repr=False, default=None)
    q_cap: np.ndarray = field(repr=False, default=None)
    e_max: np.ndarray = field(repr=False, default=None)
    varpi: np.ndarray = field(repr=False, default=None)
    w_cycles: np.ndarray = field(repr=False, default=None)

    @property
    def n_devices(self) -> int:
        return len(self.profiles)


def canonicalize(params: SystemParams, profiles: list[DeviceProfile],
                 channel: ChannelState) -> CanonicalInstance:
    """Validate an instance and reorder devices by ascending downlink gain.

    Duplicate h values are nudged up by a relative ``1e-12`` (applied to the
    later duplicate) so the ordering is strict; original-index order breaks
    the tie.
    """
    if len(profiles) == 0:
        raise InvalidInstanceError("instance has no devices")
    h = np.asarray(channel.h, dtype=float)
    g = np.asarray(channel.g, dtype=float)
    if h.shape != (len(profiles),) or g.shape != (len(profiles),):
        raise InvalidInstanceError("channel vectors must have one entry per device")
    if np.any(h <= 0) or np.any(g <= 0):
        raise InvalidInstanceError("channel gains must be positive")
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
        raise InvalidInstanceError("channel gains must be finite")

    order = np.argsort(h, kind="stable")
    h_sorted = h[order].copy()
    for i in range(1, len(h_sorted)):
        if h_sorted[i] <= h_sorted[i - 1]:
            h_sorted[i] = h_sorted[i - 1] * (1.0 + _TIE_EPS)
    prof_sorted = tuple(profiles[i] for i in order)

    return CanonicalInstance(
        params=params,
        profiles=prof_sorted,
        h=_frozen_array(h_sorted),
        g=_frozen_array(g[order]),
        orig_index=_frozen_array(order).astype(int),
        d_loc=_frozen_array([p.d_loc_samples for p in prof_sorted]),
        f_max=_frozen_array([p.f_max_hz for p in prof_sorted]),
        q_cap=_frozen_array([p.q_max_w for p in prof_sorted]),
        e_max=_frozen_array([p.e_max_j for p in prof_sorted]),
        varpi=_frozen_array([p.varpi for p in prof_sorted]),
        w_cycles=_frozen_array([p.w_cycles_per_sample for p in prof_sorted]),
    )


@dataclass(frozen=True)
class Allocation:
    """One candidate resource allocation, in canonical device order.

    ``sic_order[k]`` is the uplink decoding position of device k
    (0 = decoded first, so positions > sic_order[k] are still undecoded
    interference while k is being decoded).
    """

    d_gen: np.ndarray       # synthetic samples per device
    t_down_s: float         # shared synthetic-data download window
    t_br_s: float           # per-round model broadcast time
    t_loc_s: float          # per-round local training window
    t_up_s: float           # per-round model upload window
    p_down_w: np.ndarray    # downlink power split
    q_up_w: np.ndarray      # uplink transmit powers
    sic_order: np.ndarray   # decoding positions, 0-based
    freq_hz: np.ndarray     # CPU frequencies


@dataclass(frozen=True)
class Violation:
    constraint: str
    device: int | None
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class SolveReport:
    feasible: bool
    learning_error: float
    objective_trace: tuple[float, ...]
    allocation: Allocation
    iterations: int
    per_device_energy_j: np.ndarray
    scheme: str = ""
    notes: tuple[str, ...] = ()


# ----------------------------------------------------------------------
# closed-form physics


def downlink_rates(h: np.ndarray, p: np.ndarray, params: SystemParams) -> np.ndarray:
    """Superposition-coding downlink rates with SIC at the receivers.

    Devices are in canonical (ascending-h) order; device k is interfered
    by the power of every stronger-channel device j > k.
    """
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    n0 = params.noise_power_w
    # suffix sum of p over j > k
    tail = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
    return params.bandwidth_hz * np.log2(1.0 + h * p / (n0 + h * tail))


def broadcast_time(h1: float, params: SystemParams) -> float:
    """Time to broadcast the global model to all devices.

    The broadcast must be decodable by the weakest device, so the rate is
    set by the smallest downlink gain and the full BS power.
    """
    rate = params.bandwidth_hz * math.log2(1.0 + h1 * params.bs_power_w / params.noise_power_w)
    if rate <= 0.0:
        raise InvalidInstanceError("broadcast rate is zero")
    return params.model_size_bits / rate


def uplink_rates(g: np.ndarray, q: np.ndarray, sic_order: np.ndarray,
                 params: SystemParams) -> np.ndarray:
    """Uplink NOMA rates under the given decoding order.

    While device k is decoded, every device with a later decoding position
    is still unresolved interference.
    """
    g = np.asarray(g, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = np.asarray(sic_order)
    n0 = params.noise_power_w
    n = len(g)
    # received powers arranged in decoding order, suffix-summed
    seq = np.empty(n, dtype=int)
    seq[pos] = np.arange(n)
    rx = g[seq] * q[seq]
    tail = np.concatenate([np.cumsum(rx[::-1])[::-1][1:], [0.0]])
    interf = tail[pos]
    return params.bandwidth_hz * np.log2(1.0 + g * q / (n0 + interf))


def learning_error(d_total: np.ndarray, params: SystemParams) -> float:
    """Analytic surrogate for the final model error, decreasing in data."""
    d_total = np.asarray(d_total, dtype=float)
    if np.any(d_total <= 0):
        raise InvalidInstanceError("every device needs a positive dataset")
    k = len(d_total)
    mean_term = params.alpha / k * float(np.sum(d_total ** (-params.beta)))
    return math.exp(params.rounds_n * (mean_term - params.gamma - 1.0) / params.zeta)


def equivalent_objective(d_total: np.ndarray, params: SystemParams) -> float:
    """Monotone equivalent of :func:`learning_error`: sum of D^(-beta)."""
    d_total = np.asarray(d_total, dtype=float)
    if np.any(d_total <= 0):
        raise InvalidInstanceError("every device needs a positive dataset")
    return float(np.sum(d_total ** (-params.beta)))


def local_time(d_total: float, freq_hz: float, w_cycles: float, params: SystemParams) -> float:
    """Per-round local training time for one device."""
    load = w_cycles * params.tau_epochs * d_total
    if freq_hz <= 0.0:
        if load == 0.0:
            return 0.0
        raise InvalidInstanceError("zero CPU frequency with nonzero training load")
    return load / freq_hz


def local_energy(d_total: float, freq_hz: float, w_cycles: float, varpi: float,
                 params: SystemParams) -> float:
    """Per-round local training energy for one device."""
    return varpi * w_cycles * params.tau_epochs * (freq_hz ** 2) * d_total


def upload_energy(t_up_s: float, q_w: float) -> float:
    return t_up_s * q_w


def synthesis_time(d_gen: np.ndarray, params: SystemParams) -> float:
    return params.synth_rate_s_per_sample * float(np.sum(d_gen))


# ----------------------------------------------------------------------
# feasibility validator


def _append_if_exceeds(out: list[Violation], name: str, device, lhs: float, rhs: float,
                       tol: float) -> None:
    # violation when lhs > rhs beyond a relative margin with an absolute floor
    margin = tol * max(abs(lhs), abs(rhs)) + 1e-12
    if lhs > rhs + margin:
        out.append(Violation(name, device, float(lhs), float(rhs)))


def check_feasible(inst: CanonicalInstance, alloc: Allocation, tol: float = 1e-6, *,
                   rates_down: np.ndarray | None = None,
                   rates_up: np.ndarray | None = None,
                   required_download_s: float | None = None,
                   required_upload_s: float | None = None,
                   per_device_power_budget: bool = False,
                   upload_energy_j: np.ndarray | None = None) -> list[Violation]:
    """Evaluate every constraint of the allocation problem; never raises.

    Returns the (possibly empty) list of violations.  The keyword overrides
    let the orthogonal-access schemes reuse the same validator with their
    own rate formulas, download-time accounting, per-slot power budget and
    slotted upload energies.
    """
    p = inst.params
    k = inst.n_devices
    out: list[Violation] = []

    d_gen = np.asarray(alloc.d_gen, dtype=float)
    q = np.asarray(alloc.q_up_w, dtype=float)
    pw = np.asarray(alloc.p_down_w, dtype=float)
    f = np.asarray(alloc.freq_hz, dtype=float)

    # sign constraints first; everything else is evaluated as given
    for i in range(k):
        _append_if_exceeds(out, "dgen-nonneg", i, 0.0, d_gen[i], tol)
        _append_if_exceeds(out, "downlink-power-nonneg", i, 0.0, pw[i], tol)
        _append_if_exceeds(out, "uplink-power-nonneg", i, 0.0, q[i], tol)
        _append_if_exceeds(out, "freq-nonneg", i, 0.0, f[i], tol)
    for name, val in (("time-nonneg", alloc.t_down_s), ("time-nonneg", alloc.t_br_s),
                      ("time-nonneg", alloc.t_loc_s), ("time-nonneg", alloc.t_up_s)):
        _append_if_exceeds(out, name, None, 0.0, val, tol)

    order = np.asarray(alloc.sic_order)
    if sorted(order.tolist()) != list(range(k)):
        out.append(Violation("sic-permutation", None, float(len(set(order.tolist()))), float(k)))
        order = np.arange(k)  # fall back so the rate formula below stays defined

    _append_if_exceeds(out, "data-budget", None, float(np.sum(d_gen)),
                       p.dgen_total_samples, tol)

    total = (synthesis_time(d_gen, p) + alloc.t_down_s
             + p.rounds_n * (alloc.t_br_s + alloc.t_loc_s + alloc.t_up_s))
    _append_if_exceeds(out, "round-latency", None, total, p.t_max_s, tol)

    if rates_down is None:
        rates_down = downlink_rates(inst.h, np.maximum(pw, 0.0), p)
    if rates_up is None:
        rates_up = uplink_rates(inst.g, np.maximum(q, 0.0), order, p)

    if required_download_s is not None:
        _append_if_exceeds(out, "download-deadline", None, required_download_s,
                           alloc.t_down_s, tol)
    if required_upload_s is not None:
        _append_if_exceeds(out, "upload-deadline", None, required_upload_s,
                           alloc.t_up_s, tol)

    try:
        t_br_needed = broadcast_time(float(inst.h[0]), p)
    except InvalidInstanceError:
        t_br_needed = math.inf
    _append_if_exceeds(out, "broadcast-deadline", None, t_br_needed, alloc.t_br_s, tol)

    if per_device_power_budget:
        for i in range(k):
            _append_if_exceeds(out, "bs-power-budget", i, pw[i], p.bs_power_w, tol)
    else:
        _append_if_exceeds(out, "bs-power-budget", None, float(np.sum(pw)),
                           p.bs_power_w, tol)

    e_up = (upload_energy_j if upload_energy_j is not None
            else np.array([upload_energy(alloc.t_up_s, q[i]) for i in range(k)]))

    for i in range(k):
        prof = inst.profiles[i]
        _append_if_exceeds(out, "freq-cap", i, f[i], prof.f_max_hz, tol)
        _append_if_exceeds(out, "uplink-power-cap", i, q[i], prof.q_max_w, tol)

        d_tot = prof.d_loc_samples + max(d_gen[i], 0.0)
        # training must fit the shared window; vacuous when no round runs
        if p.rounds_n > 0:
            load = prof.w_cycles_per_sample * p.tau_epochs * d_tot
            t_i = load / f[i] if f[i] > 0.0 else (0.0 if load == 0.0 else math.inf)
            _append_if_exceeds(out, "local-deadline", i, t_i, alloc.t_loc_s, tol)

        if required_download_s is None and d_gen[i] > 0.0:
            _append_if_exceeds(out, "download-deadline", i,
                               p.sample_size_bits * d_gen[i],
                               alloc.t_down_s * rates_down[i], tol)

        if required_upload_s is None:
            _append_if_exceeds(out, "upload-deadline", i, p.model_size_bits,
                               alloc.t_up_s * rates_up[i], tol)

        e_loc = local_energy(d_tot, f[i], prof.w_cycles_per_sample, prof.varpi, p)
        _append_if_exceeds(out, "energy-budget", i, e_loc + float(e_up[i]),
                           prof.e_max_j, tol)

    return out
