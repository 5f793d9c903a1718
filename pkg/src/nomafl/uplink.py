"""Uplink decoding order and max-min rate power control.

The decoder removes the strongest effective transmitters first
(descending gain*power-cap), so weaker devices see less residual
interference.  For a fixed order and a common rate target ``theta`` the
required powers, normalized by each cap, follow a closed-form recursion
from the last-decoded device backwards; a target is feasible exactly when
every normalized power is at most 1.  The optimum is a scalar bisection.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstanceError, RateOverflowError
from .model import SystemParams

_MAX_EXP2 = 1000.0


@dataclass(frozen=True)
class UplinkSolution:
    theta: float            # common uplink rate, bits/s
    q_w: np.ndarray
    sic_order: np.ndarray   # decoding positions, 0-based
    iterations: int


def sic_order(g: np.ndarray, q_max: np.ndarray) -> np.ndarray:
    """Decoding positions: descending g*q_max, ties by device index."""
    g = np.asarray(g, dtype=float)
    q_max = np.asarray(q_max, dtype=float)
    seq = np.argsort(-g * q_max, kind="stable")  # device ids in decode order
    pos = np.empty(len(seq), dtype=int)
    pos[seq] = np.arange(len(seq))
    return pos


def _decode_sequence(pos: np.ndarray) -> np.ndarray:
    seq = np.empty(len(pos), dtype=int)
    seq[np.asarray(pos)] = np.arange(len(pos))
    return seq


def recursive_uplink_fracs(theta: float, pos: np.ndarray, g: np.ndarray,
                           q_max: np.ndarray, params: SystemParams) -> np.ndarray:
    """Normalized powers q/q_max achieving rate ``theta`` for every device.

    Values above 1 mean the target is infeasible for that order.
    """
    g = np.asarray(g, dtype=float)
    q_max = np.asarray(q_max, dtype=float)
    if np.any(q_max <= 0.0):
        raise InvalidInstanceError("uplink power caps must be positive")
    expo = theta / params.bandwidth_hz
    if expo > _MAX_EXP2:
        raise RateOverflowError(f"rate target needs 2**{expo:.1f}")
    grow = 2.0 ** expo - 1.0
    n0 = params.noise_power_w

    seq = _decode_sequence(pos)
    rx_cap = (g * q_max).tolist()
    frac = [0.0] * len(g)
    interference = 0.0
    for i in range(len(seq) - 1, -1, -1):
        dev = int(seq[i])
        frac[dev] = grow * (n0 + interference) / rx_cap[dev]
        interference += rx_cap[dev] * frac[dev]
    return np.asarray(frac)


def _bisect_theta(pos: np.ndarray, g: np.ndarray, q_max: np.ndarray,
                  params: SystemParams, tol: float, max_iters: int):
    b = params.bandwidth_hz
    n0 = params.noise_power_w
    hi = (b * math.log2(1.0 + float(np.min(g * q_max)) / n0)
          + b * math.log2(len(g) + 1))
    lo = 0.0

    def fits(theta: float) -> bool:
        try:
            frac = recursive_uplink_fracs(theta, pos, g, q_max, params)
        except RateOverflowError:
            return False
        return float(np.max(frac)) <= 1.0

    iters = 0
    while (hi - lo) / hi >= tol and iters < max_iters:
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
        iters += 1
    return lo, iters


def solve_uplink(g: np.ndarray, q_max: np.ndarray, params: SystemParams,
                 tol: float = 1e-9, max_iters: int = 200) -> UplinkSolution:
    """Max-min uplink rate under per-device power caps and SIC."""
    g = np.asarray(g, dtype=float)
    q_max = np.asarray(q_max, dtype=float)
    pos = sic_order(g, q_max)
    theta, iters = _bisect_theta(pos, g, q_max, params, tol, max_iters)
    frac = recursive_uplink_fracs(theta, pos, g, q_max, params)
    return UplinkSolution(theta=theta, q_w=q_max * frac, sic_order=pos,
                          iterations=iters)


def uplink_oracle_perm(g: np.ndarray, q_max: np.ndarray, params: SystemParams,
                       tol: float = 1e-9, max_iters: int = 200) -> UplinkSolution:
    """Brute-force check of the ordering rule: try every decoding order.

    Refuses more than 5 devices (factorial blow-up is the point of the
    closed-form rule).  Ties keep the lexicographically first sequence.
    """
    g = np.asarray(g, dtype=float)
    q_max = np.asarray(q_max, dtype=float)
    k = len(g)
    if k > 5:
        raise InvalidInstanceError("permutation oracle is limited to 5 devices")

    best = None
    for seq in itertools.permutations(range(k)):
        pos = np.empty(k, dtype=int)
        pos[list(seq)] = np.arange(k)
        theta, iters = _bisect_theta(pos, g, q_max, params, tol, max_iters)
        if best is None or theta > best[0]:
            best = (theta, pos, iters)
    theta, pos, iters = best
    frac = recursive_uplink_fracs(theta, pos, g, q_max, params)
    return UplinkSolution(theta=theta, q_w=q_max * frac, sic_order=pos,
                          iterations=iters)
