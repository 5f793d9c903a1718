"""Convex split of the synthetic-data budget across devices.

Given fixed link rates (hence fixed broadcast/upload windows and upload
energies), choosing per-device synthetic sample counts is a convex
problem: the objective sum of (D_loc + D_gen)^(-beta) is decreasing and
convex, and each device's compute-time and compute-energy limits plus the
shared data budget carve out a convex set.  The download window is either
the max over devices of demand/rate (superposition scheme; handled with
an epigraph variable) or a weighted sum of demands (slotted scheme).

Solved with a log-barrier interior-point method; a brute-force grid
oracle over the budget box cross-checks it for up to 3 devices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EnergyInfeasibleError,
    InvalidInstanceError,
    SynthesisInfeasibleError,
)

_MU_START = 1.0
_MU_SHRINK = 0.1
_MU_NOMINAL_FLOOR = 1e-9   # schedule floor; extended only if the gap rule asks
_MU_HARD_FLOOR = 1e-13
_GAP_TOL = 1e-8            # stop once mu * n_constraints < this ...
_DECREMENT_TOL = 1e-8      # ... and the Newton decrement is below this
_ARMIJO_C = 1e-4
_ARMIJO_SHRINK = 0.5


@dataclass(frozen=True)
class DgenSubproblem:
    """Frozen inputs of one data-split solve.

    ``download_rates`` selects the max-demand/rate window model (one of the
    two must be given); ``download_s_per_sample`` the additive slotted one.
    Devices whose download rate is nonpositive are locked to zero samples.
    """

    beta: float
    d_loc: np.ndarray
    f_max: np.ndarray
    w_cycles: np.ndarray
    varpi: np.ndarray
    e_max: np.ndarray
    uplink_energy_j: np.ndarray
    tau_epochs: float
    rounds_n: int
    synth_s_per_sample: float
    sample_bits: float
    t_loc_cap_s: float
    budget_samples: float
    download_rates: np.ndarray | None = None
    download_s_per_sample: np.ndarray | None = None
    locked_zero: np.ndarray = field(default=None)

    def __post_init__(self):
        if (self.download_rates is None) == (self.download_s_per_sample is None):
            raise InvalidInstanceError("exactly one download-time model must be given")
        if self.rounds_n <= 0:
            raise InvalidInstanceError("data split needs at least one round")
        slack = self.e_max - self.uplink_energy_j
        bad = np.nonzero(slack <= 0.0)[0]
        if bad.size:
            raise EnergyInfeasibleError(int(bad[0]),
                                        f"device {bad[0]} has no energy left after upload")
        if self.locked_zero is None:
            if self.download_rates is not None:
                locked = np.asarray(self.download_rates) <= 0.0
            else:
                locked = np.zeros(len(self.d_loc), dtype=bool)
            object.__setattr__(self, "locked_zero", locked)

    @property
    def n_devices(self) -> int:
        return len(self.d_loc)

    def kappa(self) -> np.ndarray:
        """Coefficient of (D_loc+D)^1.5 in the compute-time-at-energy-limit bound."""
        return np.sqrt(self.varpi * self.w_cycles ** 3 * self.tau_epochs ** 3
                       / (self.e_max - self.uplink_energy_j))

    def objective(self, d_gen: np.ndarray) -> float:
        return float(np.sum((self.d_loc + np.asarray(d_gen)) ** (-self.beta)))

    def download_seconds(self, d_gen: np.ndarray) -> float:
        d_gen = np.asarray(d_gen, dtype=float)
        if self.download_rates is not None:
            act = d_gen > 0.0
            if not np.any(act):
                return 0.0
            return self.sample_bits * float(np.max(d_gen[act] / self.download_rates[act]))
        return float(np.sum(self.download_s_per_sample * d_gen))

    def residuals(self, d_gen: np.ndarray) -> np.ndarray:
        """Constraint values (<= 0 feasible) in a fixed order, all in
        comparable units: per-device time limits in seconds, budget in samples."""
        d_gen = np.asarray(d_gen, dtype=float)
        shared = (self.synth_s_per_sample * np.sum(d_gen)
                  + self.download_seconds(d_gen)) / self.rounds_n
        d_tot = self.d_loc + d_gen
        time_rows = (self.w_cycles * self.tau_epochs * d_tot / self.f_max
                     + shared - self.t_loc_cap_s)
        energy_rows = self.kappa() * d_tot ** 1.5 + shared - self.t_loc_cap_s
        budget_row = np.sum(d_gen) - self.budget_samples
        return np.concatenate([time_rows, energy_rows, [budget_row], -d_gen])

    def max_violation(self, d_gen: np.ndarray) -> float:
        """Worst relative constraint violation (negative means feasible)."""
        r = self.residuals(d_gen)
        k = self.n_devices
        t_scale = max(1.0, abs(self.t_loc_cap_s))
        s_scale = max(1.0, self.budget_samples)
        scales = np.concatenate([np.full(2 * k, t_scale), [s_scale], np.full(k, s_scale)])
        return float(np.max(r / scales))


@dataclass(frozen=True)
class DgenSolution:
    d_gen: np.ndarray
    objective: float
    newton_steps: int


def _zero_point_status(sub: DgenSubproblem, tol: float = 1e-9) -> str:
    """Classify d=0: 'infeasible', 'tight' (no room to grow), or 'interior'."""
    zero = np.zeros(sub.n_devices)
    rows = sub.residuals(zero)[:2 * sub.n_devices]      # the two time-limit groups
    scale = max(1.0, abs(sub.t_loc_cap_s))
    worst = float(np.max(rows))
    if worst > tol * scale:
        return "infeasible"
    if worst > -tol * scale or sub.budget_samples <= tol:
        return "tight"
    return "interior"


# ----------------------------------------------------------------------
# grid oracle


def dgen_oracle_grid(sub: DgenSubproblem, points_per_dim: int = 400
                     ) -> tuple[np.ndarray, float]:
    """Exhaustive search over the budget box on a regular grid.

    Deliberately refuses more than 3 devices.  Returns (d_gen, objective)
    of the best feasible grid point; ties resolve to the first point in
    row-major order.
    """
    k = sub.n_devices
    if k > 3:
        raise InvalidInstanceError("grid oracle is limited to 3 devices")
    if points_per_dim < 2:
        raise InvalidInstanceError("need at least 2 points per dimension")

    status = _zero_point_status(sub)
    if status == "infeasible":
        raise SynthesisInfeasibleError("even zero synthetic data violates the limits")

    axes = [np.array([0.0]) if sub.locked_zero[i]
            else np.linspace(0.0, sub.budget_samples, points_per_dim)
            for i in range(k)]
    grids = np.meshgrid(*axes, indexing="ij")
    d = np.stack([g.ravel() for g in grids], axis=-1)      # (#points, k)

    s = d.sum(axis=1)
    if sub.download_rates is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0.0, d / np.maximum(sub.download_rates, 1e-300), 0.0)
        t_dn = sub.sample_bits * ratio.max(axis=1)
    else:
        t_dn = d @ sub.download_s_per_sample
    shared = (sub.synth_s_per_sample * s + t_dn) / sub.rounds_n

    d_tot = sub.d_loc + d
    cap = sub.t_loc_cap_s
    tol = 1e-9 * max(1.0, abs(cap))
    ok = s <= sub.budget_samples * (1.0 + 1e-12) + 1e-12
    ok &= np.all(sub.w_cycles * sub.tau_epochs * d_tot / sub.f_max
                 + shared[:, None] <= cap + tol, axis=1)
    ok &= np.all(sub.kappa() * d_tot ** 1.5 + shared[:, None] <= cap + tol, axis=1)

    obj = np.where(ok, (d_tot ** (-sub.beta)).sum(axis=1), np.inf)
    best = int(np.argmin(obj))
    if not np.isfinite(obj[best]):
        raise SynthesisInfeasibleError("no feasible grid point")
    return d[best].copy(), float(obj[best])


# ----------------------------------------------------------------------
# interior-point solver


def _strictly_feasible_start(sub: DgenSubproblem, free: np.ndarray,
                             warm: np.ndarray | None):
    """Interior start: warm point if strictly feasible, else a tiny uniform
    push off zero scaled down until every constraint has slack."""
    k = sub.n_devices

    def lift(d_free):
        d = np.zeros(k)
        d[free] = d_free
        return d

    def strict(d_free) -> bool:
        d = lift(d_free)
        if np.any(d_free <= 0.0):
            return False
        r = sub.residuals(d)
        scale = max(1.0, abs(sub.t_loc_cap_s))
        return float(np.max(r[:2 * k + 1])) < -1e-12 * scale

    if warm is not None:
        # pull 1% toward zero so the early (large-mu) barrier stages are not
        # started hard against the active constraints
        cand = np.maximum(warm[free], 0.0) * 0.99
        base = max(sub.budget_samples, 1.0)
        cand = np.where(cand > 0.0, cand, 1e-9 * base / max(len(cand), 1))
        if strict(cand):
            return cand

    step = 1e-6 * max(sub.budget_samples, 1.0) / max(len(free), 1)
    cand = np.full(len(free), step)
    for _ in range(80):
        if strict(cand):
            return cand
        cand *= 0.1
    raise SynthesisInfeasibleError("could not find an interior starting point")


def solve_dgen(sub: DgenSubproblem, warm_start: np.ndarray | None = None,
               max_newton_per_stage: int = 60) -> DgenSolution:
    """Log-barrier interior-point solve of the data split.

    Raises :class:`SynthesisInfeasibleError` when even d=0 is infeasible.
    A zero budget or a fully tight zero point short-circuits to d=0.
    """
    k = sub.n_devices
    status = _zero_point_status(sub)
    if status == "infeasible":
        raise SynthesisInfeasibleError("even zero synthetic data violates the limits")
    free = np.nonzero(~sub.locked_zero)[0]
    if status == "tight" or free.size == 0:
        zero = np.zeros(k)
        return DgenSolution(zero, sub.objective(zero), 0)

    epigraph = sub.download_rates is not None
    nf = free.size
    n = nf + (1 if epigraph else 0)

    d_loc_f = sub.d_loc[free]
    fmax_row = sub.w_cycles * sub.tau_epochs / sub.f_max          # per device, all k
    kap = sub.kappa()
    rho = sub.synth_s_per_sample
    nn = sub.rounds_n
    cap = sub.t_loc_cap_s
    if epigraph:
        rate_f = sub.download_rates[free]
        dn_coeff = None
    else:
        dn_coeff = sub.download_s_per_sample[free]

    # constraint rows: time(k) + energy(k) + budget(1) + [epigraph(nf)] + d>=0(nf) + [t>=0]
    m = 2 * k + 1 + (2 * nf + 1 if epigraph else nf)

    def unpack(x):
        return x[:nf], (x[nf] if epigraph else None)

    def g_values(x):
        df, t = unpack(x)
        d = np.zeros(k)
        d[free] = df
        s = float(np.sum(df))
        t_dn = t if epigraph else float(df @ dn_coeff)
        shared = (rho * s + t_dn) / nn
        d_tot = sub.d_loc + d
        g = np.empty(m)
        g[:k] = fmax_row * d_tot + shared - cap
        g[k:2 * k] = kap * d_tot ** 1.5 + shared - cap
        g[2 * k] = s - sub.budget_samples
        row = 2 * k + 1
        if epigraph:
            g[row:row + nf] = sub.sample_bits * df / rate_f - t
            row += nf
        g[row:row + nf] = -df
        if epigraph:
            g[row + nf] = -t
        return g, d_tot

    # constant part of the m x n gradient stack; only the energy rows'
    # own-coordinate entries change between Newton steps
    G_const = np.zeros((m, n))
    G_const[:2 * k, :nf] = rho / nn
    for j, dev in enumerate(free):
        G_const[dev, j] += fmax_row[dev]
    if epigraph:
        G_const[:2 * k, nf] = 1.0 / nn
    else:
        G_const[:2 * k, :nf] += dn_coeff[None, :] / nn
    G_const[2 * k, :nf] = 1.0
    _row = 2 * k + 1
    if epigraph:
        G_const[_row:_row + nf, :nf] = np.diag(sub.sample_bits / rate_f)
        G_const[_row:_row + nf, nf] = -1.0
        _row += nf
    G_const[_row:_row + nf, :nf] = -np.eye(nf)
    if epigraph:
        G_const[_row + nf, nf] = -1.0
    energy_rows = k + free
    energy_cols = np.arange(nf)

    def grad_matrix(x, d_tot):
        G = G_const.copy()
        G[energy_rows, energy_cols] += 1.5 * kap[free] * np.sqrt(d_tot[free])
        return G

    locked_term = float(np.sum((sub.d_loc[sub.locked_zero]) ** (-sub.beta)))
    neg_beta = -sub.beta

    def f_value(df):
        return float(((d_loc_f + df) ** neg_beta).sum()) + locked_term

    df0 = _strictly_feasible_start(sub, free, warm_start)
    x = np.empty(n)
    x[:nf] = df0
    if epigraph:
        t0 = float(np.max(sub.sample_bits * df0 / rate_f))
        x[nf] = t0 * (1.0 + 1e-6) + 1e-12

    newton_steps = 0
    mu = _MU_START
    g, d_tot = g_values(x)
    while True:
        for _ in range(max_newton_per_stage):
            s = -g
            G = grad_matrix(x, d_tot)
            tot_f = d_tot[free]
            val = float((tot_f ** neg_beta).sum()) + locked_term
            inv_s = 1.0 / s
            grad = mu * (G.T @ inv_s)
            grad[:nf] += neg_beta * tot_f ** (neg_beta - 1.0)
            H = mu * (G.T * inv_s ** 2) @ G
            diag = H.ravel()[:: n + 1]
            diag[:nf] += (sub.beta * (sub.beta + 1.0) * tot_f ** (neg_beta - 2.0)
                          + mu * inv_s[k + free] * 0.75 * kap[free] / np.sqrt(tot_f))
            try:
                step = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                diag += 1e-12 * (1.0 + np.abs(diag))
                step = np.linalg.solve(H, -grad)
            decrement = -0.5 * float(grad @ step)
            newton_steps += 1
            if not math.isfinite(decrement):
                break
            # loose centering early, the full tolerance once mu is small
            if decrement < max(_DECREMENT_TOL, 1e-3 * mu):
                break
            phi0 = val - mu * float(np.log(s).sum())
            slope = float(grad @ step)
            alpha = 1.0
            accepted = False
            while alpha > 1e-12:
                trial = x + alpha * step
                g_t, d_tot_t = g_values(trial)
                if g_t.max() < 0.0:
                    phi_t = f_value(trial[:nf]) - mu * float(np.log(-g_t).sum())
                    if phi_t <= phi0 + _ARMIJO_C * alpha * slope:
                        accepted = True
                        x, g, d_tot = trial, g_t, d_tot_t
                        break
                alpha *= _ARMIJO_SHRINK
            if not accepted:
                break
        if mu * m < _GAP_TOL or mu <= _MU_HARD_FLOOR:
            if mu <= _MU_NOMINAL_FLOOR or mu <= _MU_HARD_FLOOR:
                break
        mu *= _MU_SHRINK

    d = np.zeros(k)
    d[free] = np.maximum(x[:nf], 0.0)
    return DgenSolution(d, sub.objective(d), newton_steps)


def forced_zero_solution(sub: DgenSubproblem) -> DgenSolution:
    """The all-zero split as a solution, for schemes without data synthesis.

    Raises :class:`SynthesisInfeasibleError` when even d=0 is infeasible.
    """
    if _zero_point_status(sub) == "infeasible":
        raise SynthesisInfeasibleError("even zero synthetic data violates the limits")
    zero = np.zeros(sub.n_devices)
    return DgenSolution(zero, sub.objective(zero), 0)


def coordinate_improvement(sub: DgenSubproblem, d_gen: np.ndarray,
                           rel_step: float = 1e-3) -> float:
    """Stationarity certificate: best one-coordinate objective decrease.

    Tries to push each device's share up by a small feasible step; at an
    optimum no move should help beyond solver tolerance.
    """
    base = sub.objective(d_gen)
    step = rel_step * max(sub.budget_samples, 1.0)
    best = 0.0
    for i in range(sub.n_devices):
        if sub.locked_zero[i]:
            continue
        trial = np.array(d_gen, dtype=float)
        hi = step
        # shrink until feasible, then take the largest feasible push found
        for _ in range(40):
            trial[i] = d_gen[i] + hi
            if sub.max_violation(trial) <= 1e-10:
                break
            hi *= 0.5
        else:
            continue
        gain = base - sub.objective(trial)
        best = max(best, gain)
    return best
