"""Independent high-precision oracles for the frozen test constants.

Everything here recomputes a quantity along a route different from the
production code (mpmath arithmetic, closed-form root finding) so the two
can be compared.  The ``oracle`` CLI subcommand prints these values; the
unit tests freeze them as literals.
"""
from __future__ import annotations

import math

import mpmath as mp

mp.mp.dps = 50


def learning_error_mp(d_totals, rounds_n, alpha, beta, gamma, zeta) -> mp.mpf:
    """Error surrogate evaluated in 50-digit arithmetic."""
    k = len(d_totals)
    s = mp.fsum(mp.mpf(d) ** (-mp.mpf(beta)) for d in d_totals)
    expo = rounds_n * (mp.mpf(alpha) / k * s - mp.mpf(gamma) - 1) / mp.mpf(zeta)
    return mp.e ** expo


def broadcast_time_mp(h1, bs_power_w, bandwidth_hz, noise_psd, model_bits) -> mp.mpf:
    snr = mp.mpf(h1) * mp.mpf(bs_power_w) / (mp.mpf(noise_psd) * mp.mpf(bandwidth_hz))
    rate = mp.mpf(bandwidth_hz) * mp.log(1 + snr) / mp.log(2)
    return mp.mpf(model_bits) / rate


def downlink_root_mp(h, d_gen, bs_power_w, bandwidth_hz, noise_power_w):
    """Closed-form route to the downlink max-min rate-per-sample point.

    Expresses the total spent power as a function of the rate-per-sample
    target and root-finds it against the power budget, instead of
    bisecting a feasibility predicate.  Returns (eta, powers).
    """
    h = [mp.mpf(x) for x in h]
    d = [mp.mpf(x) for x in d_gen]
    n0 = mp.mpf(noise_power_w)
    b = mp.mpf(bandwidth_hz)
    budget = mp.mpf(bs_power_w)
    k = len(h)

    def powers(eta):
        p = [mp.mpf(0)] * k
        tail = mp.mpf(0)
        for i in range(k - 1, -1, -1):
            if d[i] > 0:
                p[i] = (2 ** (eta * d[i] / b) - 1) * (n0 / h[i] + tail)
            tail += p[i]
        return p

    def total(eta):
        return mp.fsum(powers(eta)) - budget

    # bracket by doubling, then root-find
    hi = mp.mpf(1)
    while total(hi) < 0:
        hi *= 2
    eta = mp.findroot(total, (hi / 2, hi), solver="anderson")
    return eta, powers(eta)


def uplink_theta_two_device_mp(gq_first, gq_last, bandwidth_hz, noise_power_w):
    """Closed-form max-min uplink rate for two devices.

    ``gq_first`` is gain*power-cap of the device decoded first (the larger
    one under the descending rule), ``gq_last`` the other.  The last-decoded
    device caps the rate at its clean capacity; the first-decoded one at the
    root of x^2 - x = gq_first/noise with x = 2^(theta/B).
    """
    n0 = mp.mpf(noise_power_w)
    b = mp.mpf(bandwidth_hz)
    x_last = 1 + mp.mpf(gq_last) / n0
    x_first = (1 + mp.sqrt(1 + 4 * mp.mpf(gq_first) / n0)) / 2
    x = min(x_last, x_first)
    return b * mp.log(x) / mp.log(2)


def fdma_downlink_root_mp(h, d_gen, bs_power_w, bandwidth_hz, noise_power_w):
    """Root of the interference-free shared-power downlink point.

    Each device has its own 1/K band slice, so the per-device power at a
    rate-per-sample target is closed form; the sum is root-found against
    the power budget.  Returns (eta, powers).
    """
    h = [mp.mpf(x) for x in h]
    d = [mp.mpf(x) for x in d_gen]
    k = len(h)
    n0k = mp.mpf(noise_power_w) / k
    bk = mp.mpf(bandwidth_hz) / k
    budget = mp.mpf(bs_power_w)

    def powers(eta):
        return [(2 ** (eta * d[i] / bk) - 1) * n0k / h[i] if d[i] > 0 else mp.mpf(0)
                for i in range(k)]

    def total(eta):
        return mp.fsum(powers(eta)) - budget

    hi = mp.mpf(1)
    while total(hi) < 0:
        hi *= 2
    eta = mp.findroot(total, (hi / 2, hi), solver="anderson")
    return eta, powers(eta)


def slotted_energy_cap_mp(g, energy_budget_j, model_bits, bandwidth_hz,
                          noise_power_w):
    """Largest transmit power whose own-slot upload fits an energy budget.

    Slot length is model_bits over the single-user rate, so the spent
    energy q*slot(q) is increasing in q; root-find it against the budget.
    """
    g = mp.mpf(g)
    n0 = mp.mpf(noise_power_w)
    b = mp.mpf(bandwidth_hz)
    bits = mp.mpf(model_bits)
    budget = mp.mpf(energy_budget_j)

    def spent(q):
        rate = b * mp.log(1 + g * q / n0) / mp.log(2)
        return q * bits / rate - budget

    hi = mp.mpf(1)
    while spent(hi) < 0:
        hi *= 2
    return mp.findroot(spent, (hi / 2, hi), solver="anderson")


def pathloss_db(distance_m) -> float:
    """Urban-macro distance attenuation in dB (distance entered in km)."""
    return 128.1 + 37.6 * math.log10(distance_m / 1000.0)


def mean_gain(distance_m) -> float:
    return 10.0 ** (-pathloss_db(distance_m) / 10.0)
