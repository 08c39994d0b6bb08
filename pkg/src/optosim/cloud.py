"""Leaky-bucket model of vapor-cloud buildup at the laser focus.

Every emitted pulse deposits ``delta`` of vapor; the cloud drains linearly at
rate 1/T_v.  A pulse is suppressed (no acoustic transient) when the drained
level has not dropped below ``threshold`` by the time the pulse arrives, or
when the inter-pulse gap is shorter than the relaxation time.  Suppressed
pulses deposit nothing: the beam is blocked before it reaches the focus.

Times and levels are exact rationals (see :mod:`optosim.rational`), so
boundary cases such as pulsing at exactly 1/T_v behave like the algebra says
instead of drifting with float rounding.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .codec import SlotStream
from .rational import as_fraction

__all__ = [
    "CloudParams",
    "CloudState",
    "PulseRecord",
    "EmissionTrace",
    "OrderingError",
    "MaxRateResult",
    "step",
    "simulate_train",
    "gate_stream",
    "required_padding",
    "max_sustainable_rate",
]

_ZERO = Fraction(0)


class OrderingError(ValueError):
    """Pulse times must be strictly increasing."""


@dataclass(frozen=True)
class CloudParams:
    """Physical parameters: cloud delay T_v, relaxation time, and bucket shape."""

    t_v_s: float | Fraction
    t_relax_s: float | Fraction = 1e-3
    delta: float | Fraction = 1.0
    threshold: float | Fraction = 1.0

    def __post_init__(self):
        tv = as_fraction(self.t_v_s)
        trelax = as_fraction(self.t_relax_s)
        delta = as_fraction(self.delta)
        threshold = as_fraction(self.threshold)
        if tv <= 0:
            raise ValueError(f"t_v_s must be positive, got {self.t_v_s}")
        if trelax < 0:
            raise ValueError(f"t_relax_s must be >= 0, got {self.t_relax_s}")
        if tv <= trelax:
            raise ValueError(f"t_v_s ({self.t_v_s}) must exceed t_relax_s "
                             f"({self.t_relax_s})")
        if delta <= 0 or threshold <= 0:
            raise ValueError("delta and threshold must be positive")
        object.__setattr__(self, "_tv", tv)
        object.__setattr__(self, "_trelax", trelax)
        object.__setattr__(self, "_delta", delta)
        object.__setattr__(self, "_threshold", threshold)

    @property
    def r_max_hz(self) -> Fraction:
        """Highest rate sustaining continuous pulses: 1/T_v."""
        return 1 / self._tv


@dataclass(frozen=True)
class CloudState:
    level: Fraction = _ZERO
    last_pulse_time_s: Fraction | None = None

    @classmethod
    def fresh(cls) -> "CloudState":
        return cls()


@dataclass
class PulseRecord:
    time_s: Fraction
    emitted: bool
    pre_level: Fraction


@dataclass
class EmissionTrace:
    """Per-pulse outcome of a simulated train."""

    records: list

    def __post_init__(self):
        times = [r.time_s for r in self.records]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise OrderingError("trace times must be strictly increasing")

    @property
    def n_pulses(self) -> int:
        return len(self.records)

    @property
    def n_suppressed(self) -> int:
        return sum(1 for r in self.records if not r.emitted)

    @property
    def first_suppression_index(self) -> int | None:
        for i, r in enumerate(self.records):
            if not r.emitted:
                return i
        return None

    def emitted_mask(self) -> np.ndarray:
        return np.array([r.emitted for r in self.records], dtype=bool)

    def to_csv(self, path_or_file) -> None:
        """Write columns time_s, emitted (0/1), pre_level."""
        def _write(fh):
            w = csv.writer(fh)
            w.writerow(["time_s", "emitted", "pre_level"])
            for r in self.records:
                w.writerow([f"{float(r.time_s):.9g}", int(r.emitted),
                            f"{float(r.pre_level):.9g}"])
        if isinstance(path_or_file, (str, Path)):
            with open(path_or_file, "w", newline="") as fh:
                _write(fh)
        else:
            _write(path_or_file)


def _advance(state: CloudState, params: CloudParams, t: Fraction):
    """One pulse against the bucket; returns (emitted, new_state, pre_level)."""
    if state.last_pulse_time_s is not None:
        if t <= state.last_pulse_time_s:
            raise OrderingError(f"pulse at t={t} does not follow "
                                f"t={state.last_pulse_time_s}")
        gap = t - state.last_pulse_time_s
        level = state.level - gap / params._tv
        if level < 0:
            level = _ZERO
        relax_blocked = gap < params._trelax
    else:
        level = state.level
        relax_blocked = False
    suppressed = relax_blocked or level >= params._threshold
    new_level = level if suppressed else level + params._delta
    return (not suppressed), CloudState(new_level, t), level


def step(state: CloudState, params: CloudParams, t_pulse_s) -> tuple:
    """Apply one laser pulse at time ``t_pulse_s``; returns (emitted, new state)."""
    emitted, new_state, _ = _advance(state, params, as_fraction(t_pulse_s))
    return emitted, new_state


def simulate_train(stream: SlotStream, params: CloudParams) -> EmissionTrace:
    """Run every true chip of a stream through the cloud; false chips are inert."""
    tc = as_fraction(stream.slot_duration_s)
    state = CloudState.fresh()
    records = []
    for i in stream.pulse_indices():
        t = int(i) * tc
        emitted, state, pre = _advance(state, params, t)
        records.append(PulseRecord(t, emitted, pre))
    return EmissionTrace(records)


def gate_stream(stream: SlotStream, params: CloudParams):
    """Suppress cloud-blocked pulses; returns (gated stream, trace).

    The gated stream has the same length with suppressed pulse chips cleared,
    which is what the water actually hears.
    """
    trace = simulate_train(stream, params)
    idx = stream.pulse_indices()
    chips = stream.chips.copy()
    if len(idx):
        chips[idx[~trace.emitted_mask()]] = False
    return SlotStream(chips, stream.slot_duration_s), trace


def required_padding(r_l_hz, params: CloudParams) -> int:
    """Padding zeros N0 = ceil(R_L * T_v - 1), floored at 0.

    With this padding every inter-pulse gap spans at least T_v, so the cloud
    never gates a padded stream regardless of the laser rate.
    """
    r = as_fraction(r_l_hz)
    if r <= 0:
        raise ValueError(f"rate must be positive, got {r_l_hz}")
    return max(0, math.ceil(r * params._tv - 1))


@dataclass
class MaxRateResult:
    """Outcome of the sustainable-rate search for a repeating pattern."""

    rate_hz: float                # largest clean rate found, 0.01 Hz resolution
    analytic_bound_hz: float      # steady state: pulses*delta <= period/T_v
    relax_bound_hz: float         # min gap must exceed the relaxation time
    horizon_pulses: int


def _train_clean(offsets: np.ndarray, n_chips: int, rate_hz: float,
                 params: CloudParams, horizon: int) -> bool:
    # Float fast path for the rate search; the exact semantics live in
    # _advance and the two are pinned together by the calibration tests.
    tc = 1.0 / rate_hz
    tv = float(params._tv)
    trelax = float(params._trelax)
    delta = float(params._delta)
    threshold = float(params._threshold)
    level = 0.0
    last_chip = None
    count = 0
    period = 0
    while count < horizon:
        base = period * n_chips
        for off in offsets:
            chip = base + int(off)
            if last_chip is not None:
                gap = (chip - last_chip) * tc
                level = max(0.0, level - gap / tv)
                if gap < trelax or level >= threshold:
                    return False
            elif level >= threshold:
                return False
            level += delta
            last_chip = chip
            count += 1
            if count >= horizon:
                break
        period += 1
    return True


def max_sustainable_rate(pattern, params: CloudParams,
                         horizon: int = 10000) -> MaxRateResult:
    """Largest chip rate at which a repeating pattern never suppresses.

    Binary search to 0.01 Hz over ``horizon`` pulses.  The analytic
    steady-state bound (vapor added per period must not exceed what a period
    can drain) is reported alongside; transient buildup can make the searched
    rate fall below it.
    """
    if isinstance(pattern, str):
        pattern = SlotStream.from_string(pattern).chips
    chips = np.asarray(pattern, dtype=bool)
    offsets = np.flatnonzero(chips)
    if offsets.size == 0:
        raise ValueError("pattern contains no pulses")
    if horizon < 1000:
        raise ValueError(f"horizon must be >= 1000 pulses, got {horizon}")
    n_chips = len(chips)
    n_pulses = int(offsets.size)
    analytic = n_chips / (n_pulses * float(params._delta) * float(params._tv))
    gaps = np.diff(offsets, append=int(offsets[0]) + n_chips)
    g_min = int(gaps.min())
    trelax = float(params._trelax)
    relax_bound = g_min / trelax if trelax > 0 else math.inf
    hi = min(analytic, relax_bound) * 1.02 + 0.02
    while _train_clean(offsets, n_chips, hi, params, horizon):
        hi *= 2.0
    lo = 0.0
    while hi - lo > 0.005:
        mid = 0.5 * (lo + hi)
        if _train_clean(offsets, n_chips, mid, params, horizon):
            lo = mid
        else:
            hi = mid
    return MaxRateResult(rate_hz=round(lo, 2), analytic_bound_hz=analytic,
                         relax_bound_hz=relax_bound, horizon_pulses=horizon)
