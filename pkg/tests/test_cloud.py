"""Vapor cloud model: step dynamics, lab-pattern calibration, rate search."""

import io
import math
from fractions import Fraction

import numpy as np
import pytest

from optosim.cloud import (CloudParams, CloudState, OrderingError,
                           max_sustainable_rate, required_padding,
                           simulate_train, gate_stream, step)
from optosim.codec import Scheme, SchemeSpec, SlotStream, encode_values

LAB = CloudParams(t_v_s=0.0625)  # the measured 16 Hz maximum rate


def repeat_train(pattern: str, rate_hz, repeats: int) -> SlotStream:
    chips = np.tile(SlotStream.from_string(pattern).chips, repeats)
    return SlotStream(chips, 1 / Fraction(rate_hz))


class TestStep:
    def test_single_pulse_from_fresh_state(self):
        emitted, state = step(CloudState.fresh(), LAB, 0.0)
        assert emitted
        assert state.level == 1

    def test_sixteen_hz_returns_to_zero_each_gap(self):
        state = CloudState.fresh()
        for i in range(200):
            emitted, state = step(state, LAB, Fraction(i, 16))
            assert emitted
        assert state.level == 1  # post-pulse; pre-pulse level was 0

    def test_forty_hz_third_pulse_suppressed_at_1_2(self):
        state = CloudState.fresh()
        levels = []
        emissions = []
        for i in range(3):
            t = Fraction(i, 40)
            pre = state.level
            if state.last_pulse_time_s is not None:
                pre = max(Fraction(0),
                          state.level - (t - state.last_pulse_time_s) / Fraction(1, 16))
            emitted, state = step(state, LAB, t)
            emissions.append(emitted)
            levels.append(pre)
        assert emissions == [True, True, False]
        assert levels[2] == Fraction(6, 5)  # exactly 1.2 >= threshold

    def test_time_must_increase(self):
        _, state = step(CloudState.fresh(), LAB, 1.0)
        with pytest.raises(OrderingError):
            step(state, LAB, 1.0)

    def test_relaxation_gate(self):
        params = CloudParams(t_v_s=0.0625, t_relax_s=1e-3)
        _, state = step(CloudState.fresh(), params, 0.0)
        emitted, _ = step(state, params, 5e-4)
        assert not emitted


class TestLabCalibration:
    """The six repetition-rate scenarios observed in the tank."""

    def test_continuous_16hz_all_emitted(self):
        trace = simulate_train(repeat_train("1", 16, 10_000), LAB)
        assert trace.n_pulses == 10_000
        assert trace.n_suppressed == 0

    def test_continuous_20hz_four_to_one_cadence(self):
        trace = simulate_train(repeat_train("1", 20, 100), LAB)
        suppressed = [i for i, r in enumerate(trace.records) if not r.emitted]
        assert trace.first_suppression_index == 5
        # one suppression per five pulses once the bucket saturates
        assert suppressed == list(range(5, 100, 5))

    def test_01_at_32hz_all_emitted(self):
        trace = simulate_train(repeat_train("01", 32, 500), LAB)
        assert trace.n_suppressed == 0

    def test_11000_at_40hz_all_emitted_levels_cycle(self):
        trace = simulate_train(repeat_train("11000", 40, 200), LAB)
        assert trace.n_suppressed == 0
        pre = [float(r.pre_level) for r in trace.records[:6]]
        assert pre == [0.0, 0.6, 0.0, 0.6, 0.0, 0.6]

    def test_001_at_40hz_all_emitted(self):
        trace = simulate_train(repeat_train("001", 40, 500), LAB)
        assert trace.n_suppressed == 0

    def test_111_at_40hz_third_suppressed(self):
        trace = simulate_train(repeat_train("111", 40, 1), LAB)
        assert [r.emitted for r in trace.records] == [True, True, False]

    def test_continuous_40hz_has_misses(self):
        trace = simulate_train(repeat_train("1", 40, 50), LAB)
        assert trace.n_suppressed > 0


class TestInvariants:
    def test_level_never_negative_random_trains(self):
        rng = np.random.default_rng(5)
        state = CloudState.fresh()
        t = Fraction(0)
        for _ in range(500):
            t += Fraction(int(rng.integers(1, 80)), 1000)
            _, state = step(state, LAB, t)
            assert state.level >= 0

    def test_gaps_at_least_tv_never_suppress(self):
        rng = np.random.default_rng(6)
        state = CloudState.fresh()
        t = Fraction(0)
        for _ in range(1000):
            t += Fraction(1, 16) + Fraction(int(rng.integers(0, 50)), 1000)
            emitted, state = step(state, LAB, t)
            assert emitted

    @pytest.mark.parametrize("rate", [16, 40, 100, 999, 10_000])
    def test_padded_streams_never_suppress(self, rate):
        n0 = required_padding(rate, LAB)
        assert (n0 + 1) * Fraction(1, rate) >= Fraction(1, 16)
        spec = SchemeSpec(Scheme.VCD_DPPM, 3, n0)
        rng = np.random.default_rng(rate)
        values = rng.integers(0, spec.n_values, 300)
        stream = encode_values(spec, values, Fraction(1, rate))
        trace = simulate_train(stream, LAB)
        assert trace.n_suppressed == 0

    def test_scale_invariance(self):
        c = Fraction(37, 10)
        scaled = CloudParams(t_v_s=Fraction(1, 16) * c,
                             t_relax_s=Fraction(1, 1000) * c)
        base_stream = repeat_train("1", 20, 60)
        scaled_stream = SlotStream(base_stream.chips,
                                   Fraction(1, 20) * c)
        base = simulate_train(base_stream, LAB).emitted_mask()
        other = simulate_train(scaled_stream, scaled).emitted_mask()
        assert np.array_equal(base, other)


class TestPadding:
    def test_lab_values(self):
        assert required_padding(40, LAB) == 2
        assert required_padding(16, LAB) == 0
        assert required_padding(10_000, LAB) == 624

    def test_below_r_max_is_zero(self):
        assert required_padding(3, LAB) == 0

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            required_padding(0, LAB)


class TestMaxSustainableRate:
    def test_continuous_pattern_is_r_max(self):
        res = max_sustainable_rate("1", LAB)
        assert res.rate_hz == pytest.approx(16.0, abs=0.01)
        assert res.analytic_bound_hz == pytest.approx(16.0, abs=1e-9)

    def test_alternating_doubles_r_max(self):
        res = max_sustainable_rate("01", LAB)
        assert res.rate_hz == pytest.approx(32.0, abs=0.01)

    def test_ppm_lab_pattern(self):
        res = max_sustainable_rate("11000", LAB)
        assert res.rate_hz == pytest.approx(40.0, abs=0.01)
        # steady state: 2 pulses drained over 5 chips => T_c >= 25 ms
        assert res.analytic_bound_hz == pytest.approx(40.0, abs=1e-9)

    def test_transient_buildup_can_bind_below_steady_state(self):
        res = max_sustainable_rate("111000000", LAB)
        assert res.rate_hz < res.analytic_bound_hz - 0.5

    def test_relax_time_reported(self):
        res = max_sustainable_rate("1", LAB)
        assert res.relax_bound_hz == pytest.approx(1000.0)

    def test_requires_pulses_and_horizon(self):
        with pytest.raises(ValueError):
            max_sustainable_rate("000", LAB)
        with pytest.raises(ValueError):
            max_sustainable_rate("1", LAB, horizon=10)


class TestTraceExport:
    def test_csv_columns(self):
        trace = simulate_train(repeat_train("111", 40, 1), LAB)
        buf = io.StringIO()
        trace.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "time_s,emitted,pre_level"
        assert lines[1] == "0,1,0"
        assert lines[3] == "0.05,0,1.2"

    def test_gate_stream_clears_suppressed_chips(self):
        stream = repeat_train("1", 40, 3)
        gated, trace = gate_stream(stream, LAB)
        assert trace.n_suppressed == 1
        assert gated.chips.sum() == 2
        assert len(gated) == len(stream)


def test_params_validation():
    with pytest.raises(ValueError):
        CloudParams(t_v_s=0.0)
    with pytest.raises(ValueError):
        CloudParams(t_v_s=1e-4, t_relax_s=1e-3)  # must exceed relax time
    with pytest.raises(ValueError):
        CloudParams(t_v_s=0.0625, delta=0)
    assert float(CloudParams(t_v_s=0.0625).r_max_hz) == 16.0
