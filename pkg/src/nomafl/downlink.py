"""Downlink power split maximizing the common rate-per-sample.

With superposition coding the minimal power split delivering a per-sample
rate ``eta`` to every device is a closed-form recursion from the
strongest channel down.  Total power is increasing in ``eta``, so the
optimum under the power budget is a scalar bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RateOverflowError
from .model import SystemParams

# exp2 beyond this is treated as an unreachable rate target
_MAX_EXP2 = 1000.0


@dataclass(frozen=True)
class DownlinkSolution:
    eta: float              # bits/s per synthetic sample delivered to every device
    p_w: np.ndarray
    iterations: int


def recursive_downlink_powers(eta: float, d_gen: np.ndarray, h: np.ndarray,
                              params: SystemParams) -> np.ndarray:
    """Minimal powers delivering ``eta * d_gen[k]`` bits/s to each device.

    Runs from the strongest channel down; devices without synthetic data
    get exactly zero power.  Raises :class:`RateOverflowError` when a
    required exponent is absurdly large (the bisection treats that as an
    infeasible candidate).
    """
    d_gen = np.asarray(d_gen, dtype=float)
    h = np.asarray(h, dtype=float)
    n0 = params.noise_power_w
    exps = eta * d_gen / params.bandwidth_hz
    if float(np.max(exps, initial=0.0)) > _MAX_EXP2:
        raise RateOverflowError(f"rate target needs 2**{np.max(exps):.1f}")
    grow = np.exp2(exps) - 1.0

    k = len(h)
    p = [0.0] * k
    tail = 0.0
    glist = grow.tolist()
    hlist = h.tolist()
    dlist = d_gen.tolist()
    for i in range(k - 1, -1, -1):
        if dlist[i] > 0.0:
            p[i] = glist[i] * (n0 / hlist[i] + tail)
            tail += p[i]
    return np.asarray(p)


def solve_downlink(d_gen: np.ndarray, h: np.ndarray, params: SystemParams,
                   tol: float = 1e-9, max_iters: int = 200) -> DownlinkSolution:
    """Bisect the common rate-per-sample until the power budget binds.

    With no synthetic data anywhere there is nothing to deliver: powers are
    zero and ``eta`` is the +inf sentinel.
    """
    d_gen = np.asarray(d_gen, dtype=float)
    h = np.asarray(h, dtype=float)
    active = d_gen > 0.0
    if not np.any(active):
        return DownlinkSolution(eta=math.inf, p_w=np.zeros(len(h)), iterations=0)

    budget = params.bs_power_w
    top_rate = params.bandwidth_hz * math.log2(
        1.0 + float(h[-1]) * budget / params.noise_power_w)
    hi = top_rate / float(np.min(d_gen[active]))
    lo = 0.0

    def fits(eta: float) -> bool:
        try:
            p = recursive_downlink_powers(eta, d_gen, h, params)
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

    return DownlinkSolution(eta=lo, p_w=recursive_downlink_powers(lo, d_gen, h, params),
                            iterations=iters)
