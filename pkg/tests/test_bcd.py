"""Alternating-solver tests: convergence, invariants, frozen regressions."""
import numpy as np
import pytest

from nomafl.bcd import bcd_solve, infeasible_report, initialize
from nomafl.model import check_feasible, learning_error
from nomafl.schemes import NomaLink, SchemeId, check_report, run_scheme

from .instances import golden_instance, random_instance

# frozen from the first recorded run on the literal golden instance
GOLDEN_TRACE = (
    0.7238812893264617, 0.7199982505562965, 0.7190174488163735,
    0.7187790923400548, 0.7187215599045872, 0.718706361039813,
    0.7187007457152075, 0.7186979368181308, 0.7186962315059986,
    0.7186950909529903, 0.7186942909890368, 0.7186933065990495,
    0.7186927845107141)
GOLDEN_ERROR = 0.5314170449393579
GOLDEN_D_GEN = (774.0890436879224, 1080.9974296913433, 1080.9974770812528)

# 50-digit oracle: exp(N*(alpha/K * sum(D_loc^-beta) - gamma - 1)/zeta)
ORACLE_NOAIGC_ERROR = 0.881610234417718


def test_golden_trace_regression():
    rep = run_scheme(golden_instance(), SchemeId.NomaAigc)
    assert rep.feasible
    assert rep.iterations == len(GOLDEN_TRACE)
    np.testing.assert_allclose(rep.objective_trace, GOLDEN_TRACE, rtol=1e-12)
    np.testing.assert_allclose(rep.learning_error, GOLDEN_ERROR, rtol=1e-12)
    np.testing.assert_allclose(rep.allocation.d_gen, GOLDEN_D_GEN, rtol=1e-12)


def test_forced_zero_matches_closed_form_and_stops_fast():
    rep = run_scheme(golden_instance(), SchemeId.NomaNoAigc)
    assert rep.feasible
    assert rep.iterations <= 2
    assert np.all(rep.allocation.d_gen == 0.0)
    np.testing.assert_allclose(rep.learning_error, ORACLE_NOAIGC_ERROR, rtol=1e-12)


def test_zero_budget_stays_at_zero():
    rep = run_scheme(golden_instance(dgen_total_samples=0.0), SchemeId.NomaAigc)
    assert rep.feasible
    assert rep.iterations <= 2
    assert np.all(rep.allocation.d_gen == 0.0)
    np.testing.assert_allclose(rep.learning_error, ORACLE_NOAIGC_ERROR, rtol=1e-12)


def test_trace_non_increasing_everywhere():
    for seed in range(12):
        inst = random_instance(seed, k=2 + seed % 5)
        for scheme in SchemeId:
            rep = run_scheme(inst, scheme)
            tr = np.array(rep.objective_trace)
            if tr.size > 1:
                assert np.all(np.diff(tr) <= 1e-9 * np.abs(tr[:-1])), (seed, scheme)


def test_feasible_reports_validate_clean():
    for seed in range(12):
        inst = random_instance(100 + seed, k=2 + seed % 4)
        for scheme in SchemeId:
            rep = run_scheme(inst, scheme)
            if rep.feasible:
                assert check_report(inst, rep, scheme) == [], (seed, scheme)


def test_optimality_identities_hold_exactly():
    # every inequality that should bind at the optimum, within float error
    for seed in range(8):
        inst = random_instance(200 + seed, k=3)
        p = inst.params
        rep = run_scheme(inst, SchemeId.NomaAigc)
        assert rep.feasible
        a = rep.allocation
        d_tot = inst.d_loc + a.d_gen

        # CPU speed exactly exhausts the training window
        np.testing.assert_allclose(
            inst.w_cycles * p.tau_epochs * d_tot / a.freq_hz,
            a.t_loc_s, rtol=1e-9)
        # the slowest upload exactly fills the upload window
        from nomafl.model import uplink_rates
        r_up = uplink_rates(inst.g, a.q_up_w, a.sic_order, p)
        np.testing.assert_allclose(a.t_up_s * np.min(r_up), p.model_size_bits,
                                   rtol=1e-9)
        # the tightest download exactly fills the download window
        from nomafl.model import downlink_rates
        r_dn = downlink_rates(inst.h, a.p_down_w, p)
        act = a.d_gen > 0
        if np.any(act):
            need = p.sample_size_bits * a.d_gen[act] / r_dn[act]
            np.testing.assert_allclose(np.max(need), a.t_down_s, rtol=1e-9)
        # the whole wall-clock budget is used
        total = (p.synth_rate_s_per_sample * np.sum(a.d_gen) + a.t_down_s
                 + p.rounds_n * (a.t_br_s + a.t_loc_s + a.t_up_s))
        np.testing.assert_allclose(total, p.t_max_s, rtol=1e-9)


def test_budget_respected():
    for seed in range(8):
        inst = random_instance(300 + seed, k=4)
        rep = run_scheme(inst, SchemeId.NomaAigc)
        assert float(np.sum(rep.allocation.d_gen)) <= \
            inst.params.dgen_total_samples * (1 + 1e-9)


def test_synthesis_never_hurts_per_instance():
    for seed in range(10):
        inst = random_instance(400 + seed, k=3)
        with_d = run_scheme(inst, SchemeId.NomaAigc)
        without = run_scheme(inst, SchemeId.NomaNoAigc)
        assert with_d.learning_error <= without.learning_error + 1e-12


def test_deterministic_reruns_bitwise():
    inst = random_instance(500, k=5)
    a = run_scheme(inst, SchemeId.NomaAigc)
    b = run_scheme(inst, SchemeId.NomaAigc)
    assert a.objective_trace == b.objective_trace
    assert a.learning_error == b.learning_error
    assert np.array_equal(a.allocation.d_gen, b.allocation.d_gen)
    assert np.array_equal(a.allocation.q_up_w, b.allocation.q_up_w)


def test_round_budget_below_broadcast_time_is_infeasible():
    inst = golden_instance(t_max_s=0.5)   # N * T_br alone exceeds this
    for scheme in SchemeId:
        rep = run_scheme(inst, scheme)
        assert not rep.feasible
        assert rep.learning_error == 1.0
        assert rep.objective_trace == ()
        assert rep.iterations == 0
        assert np.all(rep.allocation.d_gen == 0.0)
        assert np.all(rep.allocation.q_up_w == 0.0)


def test_infeasible_report_shape():
    inst = golden_instance()
    rep = infeasible_report(inst, scheme="X")
    assert not rep.feasible and rep.learning_error == 1.0
    assert rep.allocation.sic_order.tolist() == [0, 1, 2]


def test_initialize_passes_validator():
    link = NomaLink()
    for seed in range(6):
        inst = random_instance(600 + seed, k=3)
        init = initialize(inst, link)
        from nomafl.model import Allocation
        from nomafl.schedule import optimal_frequencies
        freq = optimal_frequencies(init.d_gen, init.times.t_loc_s, inst)
        alloc = Allocation(
            d_gen=init.d_gen, t_down_s=init.times.t_down_s,
            t_br_s=init.times.t_br_s, t_loc_s=init.times.t_loc_s,
            t_up_s=init.times.t_up_s, p_down_w=init.down.p_w,
            q_up_w=init.up.q_w, sic_order=init.up.sic_order, freq_hz=freq)
        assert check_feasible(inst, alloc) == [], seed


def test_initialize_deterministic():
    inst = random_instance(700, k=4)
    link = NomaLink()
    a = initialize(inst, link)
    b = initialize(inst, link)
    assert np.array_equal(a.d_gen, b.d_gen)
    assert np.array_equal(a.up.q_w, b.up.q_w)
    assert a.times == b.times


def test_final_error_consistent_with_trace():
    # reported error must be the surrogate evaluated at the last objective
    inst = random_instance(800, k=4)
    rep = run_scheme(inst, SchemeId.NomaAigc)
    p = inst.params
    k = inst.n_devices
    obj = rep.objective_trace[-1]
    expected = float(np.exp(p.rounds_n * (p.alpha / k * obj - p.gamma - 1.0)
                            / p.zeta))
    np.testing.assert_allclose(rep.learning_error, expected, rtol=1e-12)
    np.testing.assert_allclose(
        rep.learning_error, learning_error(inst.d_loc + rep.allocation.d_gen, p),
        rtol=1e-12)
