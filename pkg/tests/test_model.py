"""Core types, link formulas and the feasibility validator."""
from __future__ import annotations

import math

import numpy as np
import pytest

from nomafl.errors import InvalidInstanceError
from nomafl.model import (
    Allocation,
    ChannelState,
    DeviceProfile,
    SystemParams,
    broadcast_time,
    canonicalize,
    check_feasible,
    dbm_to_watts,
    downlink_rates,
    equivalent_objective,
    learning_error,
    local_energy,
    local_time,
    synthesis_time,
    uplink_rates,
    upload_energy,
)

# frozen via the mpmath oracle (50-digit arithmetic)
GOLDEN_ERR_K1_D400 = 0.87829929460569935
GOLDEN_ERR_K3 = 0.66961845935358911      # D = [350, 420, 4000]
GOLDEN_T_BR = 0.18135900193154066        # h1=6.6e-11, P=3.162, B=1e6, psd=1e-19, Dmod=2e6

SURVEY = dict(rounds_n=100, t_max_s=900.0, tau_epochs=1.0, zeta=50.0, alpha=3.819,
              beta=0.198, gamma=0.231, synth_rate_s_per_sample=0.0646)


def make_params(**over) -> SystemParams:
    base = dict(bandwidth_hz=1e6, noise_psd_w_per_hz=1e-19, bs_power_w=dbm_to_watts(35.0),
                sample_size_bits=20e3, model_size_bits=2e6, dgen_total_samples=4000.0,
                **SURVEY)
    base.update(over)
    return SystemParams(**base)


def make_profile(**over) -> DeviceProfile:
    base = dict(d_loc_samples=400.0, f_max_hz=1.5e9, q_max_w=0.1, e_max_j=1.2,
                varpi=1e-27, w_cycles_per_sample=1.5e6, distance_m=200.0)
    base.update(over)
    return DeviceProfile(**base)


def unit_params(**over) -> SystemParams:
    """Dimensionless setup: B=1, noise power 1."""
    base = dict(bandwidth_hz=1.0, noise_psd_w_per_hz=1.0, rounds_n=10, t_max_s=100.0,
                tau_epochs=1.0, zeta=50.0, alpha=3.819, beta=0.198, gamma=0.231,
                bs_power_w=2.0, synth_rate_s_per_sample=0.1, sample_size_bits=1.0,
                model_size_bits=4.0, dgen_total_samples=10.0)
    base.update(over)
    return SystemParams(**base)


class TestCanonicalize:
    def test_sorts_and_maps(self):
        params = unit_params()
        profs = [make_profile(d_loc_samples=300.0), make_profile(d_loc_samples=500.0)]
        inst = canonicalize(params, profs, ChannelState(h=np.array([2.0, 1.0]),
                                                        g=np.array([5.0, 7.0])))
        assert inst.h.tolist() == [1.0, 2.0]
        assert inst.g.tolist() == [7.0, 5.0]
        assert inst.orig_index.tolist() == [1, 0]
        assert inst.d_loc.tolist() == [500.0, 300.0]

    def test_tie_break_perturbs_later_duplicate(self):
        inst = canonicalize(unit_params(), [make_profile()] * 3,
                            ChannelState(h=np.array([3.0, 3.0, 3.0]), g=np.ones(3)))
        h = inst.h
        assert h[0] == 3.0
        assert h[1] == pytest.approx(3.0 * (1 + 1e-12), rel=0, abs=0)
        assert h[2] > h[1] > h[0]
        assert inst.orig_index.tolist() == [0, 1, 2]

    def test_empty_instance_rejected(self):
        with pytest.raises(InvalidInstanceError):
            canonicalize(unit_params(), [], ChannelState(h=np.array([]), g=np.array([])))

    def test_arrays_immutable(self):
        inst = canonicalize(unit_params(), [make_profile()],
                            ChannelState(h=np.array([1.0]), g=np.array([1.0])))
        with pytest.raises(ValueError):
            inst.h[0] = 2.0


class TestRates:
    def test_downlink_interference_ordering(self):
        # weakest device sees the power of all stronger ones as interference
        params = unit_params()
        h = np.array([1.0, 2.0])
        p = np.array([1.5, 0.5])
        r = downlink_rates(h, p, params)
        assert r[0] == pytest.approx(math.log2(1 + 1.5 / (1 + 0.5)))
        assert r[1] == pytest.approx(math.log2(1 + 2 * 0.5))

    def test_downlink_zero_power_zero_rate(self):
        r = downlink_rates(np.array([1.0, 2.0]), np.zeros(2), unit_params())
        assert r.tolist() == [0.0, 0.0]

    def test_uplink_spec_case(self):
        # two unit devices, identity decode order
        params = unit_params()
        r = uplink_rates(np.array([1.0, 1.0]), np.array([1.0, 1.0]),
                         np.array([0, 1]), params)
        assert r[0] == pytest.approx(math.log2(1.5), rel=1e-12)
        assert r[1] == pytest.approx(1.0, rel=1e-12)

    def test_uplink_order_swap_swaps_rates(self):
        params = unit_params()
        g = np.array([1.0, 1.0])
        q = np.array([1.0, 1.0])
        r_fwd = uplink_rates(g, q, np.array([0, 1]), params)
        r_rev = uplink_rates(g, q, np.array([1, 0]), params)
        assert r_fwd.tolist() == pytest.approx(r_rev[::-1].tolist())

    def test_broadcast_golden(self):
        params = make_params(bs_power_w=3.162)
        assert broadcast_time(6.6e-11, params) == pytest.approx(GOLDEN_T_BR, rel=1e-12)


class TestLearningError:
    def test_golden_single_device(self):
        params = make_params(rounds_n=100)
        assert learning_error(np.array([400.0]), params) == pytest.approx(
            GOLDEN_ERR_K1_D400, rel=1e-12)

    def test_golden_three_devices(self):
        params = make_params(rounds_n=100)
        err = learning_error(np.array([350.0, 420.0, 4000.0]), params)
        assert err == pytest.approx(GOLDEN_ERR_K3, rel=1e-12)

    def test_monotone_in_data(self):
        params = make_params()
        rng = np.random.default_rng(7)
        for _ in range(50):
            d = rng.uniform(300, 5000, size=4)
            bumped = d + rng.uniform(1, 100, size=4)
            assert learning_error(bumped, params) < learning_error(d, params)

    def test_consistency_with_equivalent_objective(self):
        params = make_params()
        rng = np.random.default_rng(11)
        for _ in range(200):
            d = rng.uniform(10.0, 1e4, size=rng.integers(1, 9))
            via_obj = math.exp(params.rounds_n * (
                params.alpha / len(d) * equivalent_objective(d, params)
                - params.gamma - 1.0) / params.zeta)
            assert learning_error(d, params) == pytest.approx(via_obj, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInstanceError):
            learning_error(np.array([0.0]), make_params())


class TestLocalCompute:
    def test_local_time_energy(self):
        params = unit_params(tau_epochs=2.0)
        assert local_time(10.0, 4.0, 3.0, params) == pytest.approx(15.0)
        assert local_energy(10.0, 4.0, 3.0, 0.5, params) == pytest.approx(
            0.5 * 3.0 * 2.0 * 16.0 * 10.0)

    def test_zero_frequency_guard(self):
        params = unit_params()
        assert local_time(0.0, 0.0, 3.0, params) == 0.0
        with pytest.raises(InvalidInstanceError):
            local_time(5.0, 0.0, 3.0, params)

    def test_upload_and_synthesis(self):
        assert upload_energy(2.0, 0.25) == 0.5
        assert synthesis_time(np.array([1.0, 2.0]), unit_params()) == pytest.approx(0.3)


def zero_alloc(k: int) -> Allocation:
    return Allocation(d_gen=np.zeros(k), t_down_s=0.0, t_br_s=0.0, t_loc_s=0.0,
                      t_up_s=0.0, p_down_w=np.zeros(k), q_up_w=np.zeros(k),
                      sic_order=np.arange(k), freq_hz=np.zeros(k))


class TestCheckFeasible:
    def test_all_zero_alloc_no_rounds(self):
        # with no training rounds only the two model-transfer deadlines can fail
        params = unit_params(rounds_n=0)
        inst = canonicalize(params, [make_profile(), make_profile()],
                            ChannelState(h=np.array([1.0, 2.0]), g=np.array([1.0, 1.0])))
        names = sorted({v.constraint for v in check_feasible(inst, zero_alloc(2))})
        assert names == ["broadcast-deadline", "upload-deadline"]

    def test_uplink_cap_flagged_exactly(self):
        params = unit_params()
        inst = canonicalize(params, [make_profile(q_max_w=0.1), make_profile(q_max_w=0.1)],
                            ChannelState(h=np.array([1.0, 2.0]), g=np.array([1.0, 1.0])))
        good = Allocation(d_gen=np.zeros(2), t_down_s=0.0, t_br_s=5.0, t_loc_s=1.0,
                          t_up_s=50.0, p_down_w=np.zeros(2),
                          q_up_w=np.array([0.1, 0.2]), sic_order=np.array([0, 1]),
                          freq_hz=np.full(2, 1.5e9))
        v = check_feasible(inst, good)
        capped = [x for x in v if x.constraint == "uplink-power-cap"]
        assert len(capped) == 1 and capped[0].device == 1

    def test_validator_never_throws_on_garbage(self):
        params = unit_params()
        inst = canonicalize(params, [make_profile()],
                            ChannelState(h=np.array([1.0]), g=np.array([1.0])))
        bad = Allocation(d_gen=np.array([-5.0]), t_down_s=-1.0, t_br_s=0.0,
                         t_loc_s=0.0, t_up_s=0.0, p_down_w=np.array([-2.0]),
                         q_up_w=np.array([-1.0]), sic_order=np.array([5]),
                         freq_hz=np.array([0.0]))
        v = check_feasible(inst, bad)
        names = {x.constraint for x in v}
        assert "dgen-nonneg" in names and "sic-permutation" in names
        assert "time-nonneg" in names

    def test_relative_tolerance(self):
        # 1e-7 relative overshoot is inside the 1e-6 default margin
        params = unit_params()
        inst = canonicalize(params, [make_profile()],
                            ChannelState(h=np.array([1.0]), g=np.array([1.0])))
        alloc = Allocation(d_gen=np.array([10.0 * (1 + 1e-7)]), t_down_s=100.0,
                           t_br_s=5.0, t_loc_s=1.0, t_up_s=50.0,
                           p_down_w=np.array([1.0]), q_up_w=np.array([0.1]),
                           sic_order=np.array([0]), freq_hz=np.array([1.5e9]))
        assert not any(v.constraint == "data-budget" for v in check_feasible(inst, alloc))


class TestUnits:
    def test_dbm_round_trip(self):
        assert dbm_to_watts(35.0) == pytest.approx(3.1622776601683795, rel=1e-12)
        assert dbm_to_watts(-160.0) == pytest.approx(1e-19, rel=1e-9)
        assert dbm_to_watts(20.0) == pytest.approx(0.1, rel=1e-12)
