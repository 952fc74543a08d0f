import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from ptfsynth import registry
from ptfsynth.core import TernaryMask, accuracy, mask_table
from ptfsynth.enumeration import enumerate_op
from ptfsynth.synth import (RANDOM_TERNARY, WHT_THRESHOLD, McmcConfig, ParallelTempering, QuantizationConfig,
                            format_summary, mcmc_refine, quantize_coefficients, random_init, synthesize,
                            synthesize_op, warmstart_experiment)
from ptfsynth.transform import SpectralVector, exact_coefficients


def sampler(name="majority_4", n=4, seed=0, init=None, **kw):
    t = registry.table(name, n)
    init = init if init is not None else random_init(n, seed)
    return ParallelTempering(t, init, McmcConfig(seed=seed, **kw))


def check_consistent(pt):
    assert np.array_equal(pt.dots, pt.masks @ pt.H.T)
    assert pt.errors.tolist() == np.count_nonzero((pt.dots < 0) != pt.target_neg, axis=1).tolist()


class TestQuantize:
    def test_threshold(self):
        s = SpectralVector(2, np.array([0.5, -0.5, 0.3, -0.31]))
        assert quantize_coefficients(s).coeffs.tolist() == [1, -1, 0, -1]

    def test_xor_4(self):
        m = quantize_coefficients(exact_coefficients(registry.table("xor_4", 4)))
        assert m.terms() == {"abcd": 1}

    @settings(max_examples=30)
    @given(st.lists(st.floats(-1, 1), min_size=8, max_size=8), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
    def test_support_shrinks_with_tau(self, c, t1, t2):
        s = SpectralVector(3, np.array(c))
        lo, hi = sorted((t1, t2))
        assert quantize_coefficients(s, QuantizationConfig(hi)).support <= \
            quantize_coefficients(s, QuantizationConfig(lo)).support

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.1])
    def test_tau_range(self, tau):
        with pytest.raises(ValueError):
            QuantizationConfig(tau)

    @pytest.mark.parametrize("name", list(O.INITIAL_ACC_TAU01))
    def test_threshold_functions_at_small_tau(self, name):
        t = registry.table(name, 4)
        init = quantize_coefficients(exact_coefficients(t), QuantizationConfig(0.1))
        assert accuracy(init, t) == float(O.INITIAL_ACC_TAU01[name])
        assert accuracy(quantize_coefficients(exact_coefficients(t), QuantizationConfig(0.3)), t) == 1.0


class TestConfig:
    @pytest.mark.parametrize("temps", [(), (0.1, 0.1), (1.0, 0.5), (0.0, 1.0)])
    def test_bad_temperatures(self, temps):
        with pytest.raises(ValueError):
            McmcConfig(temperatures=temps)

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            McmcConfig(max_sweeps=-1)

    def test_with_seed(self):
        assert McmcConfig(max_sweeps=7).with_seed(3) == McmcConfig(max_sweeps=7, seed=3)


class TestSampler:
    def test_gibbs_changes_only_one_coordinate(self):
        pt = sampler()
        for coord in (0, 5, 15):
            before = pt.masks.copy()
            pt.gibbs_update(coord)
            changed = np.flatnonzero(np.any(before != pt.masks, axis=0))
            assert set(changed.tolist()) <= {coord}
            check_consistent(pt)

    def test_sweeps_keep_caches_consistent(self):
        pt = sampler(name="or_ab_xor_cd", seed=3)
        for _ in range(20):
            pt.sweep()
            check_consistent(pt)
            assert set(np.unique(pt.masks)) <= {-1, 0, 1}

    def test_swap_preserves_multiset(self):
        pt = sampler(seed=1)
        for _ in range(5):
            pt.sweep()
        states = sorted(map(tuple, pt.masks.tolist()))
        for i in range(3):
            pt.swap(i)
            check_consistent(pt)
        assert sorted(map(tuple, pt.masks.tolist())) == states

    def test_swap_probability(self):
        pt = sampler()
        pt.errors[:] = [4, 2, 2, 2]
        e_i, e_j = 4 / 16, 2 / 16
        want = min(1.0, math.exp((e_i - e_j) * (1 / 0.01 - 1 / 0.1)))
        assert pt.swap_probability(0) == pytest.approx(want)
        pt.errors[:] = [1, 4, 2, 2]
        want = math.exp((1 / 16 - 4 / 16) * (1 / 0.01 - 1 / 0.1))
        assert pt.swap_probability(0) == pytest.approx(want)

    def test_best_so_far_is_monotone(self):
        steps, _, history = sampler(name="xor_4", seed=2, max_sweeps=300).run()
        assert all(b <= a for a, b in zip(history, history[1:]))
        if steps is not None:
            assert history[-1] == 0

    def test_perfect_start_returns_immediately(self):
        t = registry.table("xor_4", 4)
        init = quantize_coefficients(exact_coefficients(t))
        steps, sweeps, history = ParallelTempering(t, init, McmcConfig()).run()
        assert (steps, sweeps, history) == (0, 0, [0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ParallelTempering(registry.table("and", 2), random_init(3, 0), McmcConfig())


class TestRefine:
    def test_deterministic(self):
        t = registry.table("exactly_2of4", 4)
        a = mcmc_refine(random_init(4, 5), t, McmcConfig(seed=5))
        b = mcmc_refine(random_init(4, 5), t, McmcConfig(seed=5))
        assert a[0] == b[0] and a[1] == b[1]

    def test_result_is_exact_when_converged(self):
        t = registry.table("or_ab_xor_cd", 4)
        mask, trace = mcmc_refine(random_init(4, 1), t, McmcConfig(seed=1), "or_ab_xor_cd", RANDOM_TERNARY)
        assert trace.steps_to_perfect is not None and trace.final_accuracy == 1.0
        assert mask_table(mask) == t

    def test_trace_record(self):
        _, trace = synthesize_op(registry.get_op("and_4", 4))
        rec = trace.record()
        assert rec["op_name"] == "and_4" and rec["init_strategy"] == WHT_THRESHOLD
        assert "best_history" not in rec
        assert 0 <= rec["initial_accuracy"] <= rec["final_accuracy"] <= 1

    def test_zero_budget_reports_unconverged(self):
        t = registry.table("xor_4", 4)
        _, trace = mcmc_refine(TernaryMask(4, np.zeros(16)), t, McmcConfig(max_sweeps=0))
        assert trace.steps_to_perfect is None and trace.final_accuracy == 0.5


class TestSynthesize:
    @pytest.mark.parametrize("name", registry.names(4))
    def test_every_four_variable_op(self, name):
        mask, trace = synthesize_op(registry.get_op(name, 4))
        assert trace.final_accuracy == 1.0
        assert mask_table(mask) == registry.table(name, 4)

    @pytest.mark.parametrize("name", registry.names(3))
    def test_agrees_with_enumeration(self, name):
        mask, _ = synthesize_op(registry.get_op(name, 3))
        assert mask_table(mask) == registry.table(name, 3)
        assert any(mask == m for m in enumerate_op(registry.get_op(name, 3)).perfect_masks)

    def test_size_bound(self):
        from ptfsynth.core import TruthTable
        with pytest.raises(ValueError):
            ParallelTempering(TruthTable(13, np.ones(1 << 13, dtype=int)), random_init(13, 0), McmcConfig())


class TestWarmstart:
    def test_small_experiment(self):
        ops = [registry.get_op(k, 4) for k in ("majority_4", "or_ab_xor_cd")]
        res = warmstart_experiment(ops, [0, 1], m=McmcConfig(max_sweeps=5000))
        assert len(res.traces) == 8
        rows = {r["strategy"]: r for r in res.summary()}
        assert rows[RANDOM_TERNARY]["runs"] == rows[WHT_THRESHOLD]["runs"] == 4
        assert rows[WHT_THRESHOLD]["converged"] == 4
        assert "strategy" in format_summary(res.summary())

    def test_workers_give_identical_traces(self):
        ops = [registry.get_op("exactly_2of4", 4)]
        a = warmstart_experiment(ops, [0, 1], m=McmcConfig(max_sweeps=3000), workers=1)
        b = warmstart_experiment(ops, [0, 1], m=McmcConfig(max_sweeps=3000), workers=2)
        assert [t.record() for t in a.traces] == [t.record() for t in b.traces]

    def test_needs_seeds(self):
        with pytest.raises(ValueError):
            warmstart_experiment([registry.get_op("and_4", 4)], [])
