"""Analytical bit-rate, rate-limit and power-efficiency calculators.

All formulas are evaluated in exact rational arithmetic and converted to
float only at the reporting boundary, so comparisons against simulation
oracles are not confounded by rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cloud import CloudParams, max_sustainable_rate, required_padding
from .codec import MappingTable, Scheme, SchemeSpec
from .rational import as_fraction

__all__ = [
    "LaserParams",
    "RateLimitReport",
    "SweepRow",
    "average_symbol_chips",
    "average_symbol_duration_s",
    "bit_rate",
    "max_allowed_rate",
    "power_efficiency_vs_ook",
    "empirical_pulse_ratio",
    "rate_sweep",
]

# Two worst-case repeating patterns for PPM: adjacent pulses from a
# last-slot symbol followed by a first-slot symbol, and the two-leading-ones
# pattern observed to be the binding case in lab tests.  They disagree for
# M >= 2, so max_allowed_rate evaluates both and reports the minimum.
PPM_LAB_WORST_PATTERN = "11000"


@dataclass(frozen=True)
class LaserParams:
    r_l_hz: float
    pulse_energy_mj: float = 50.0

    def __post_init__(self):
        if not self.r_l_hz > 0:
            raise ValueError(f"r_l_hz must be positive, got {self.r_l_hz}")
        if not self.pulse_energy_mj > 0:
            raise ValueError(f"pulse_energy_mj must be positive, "
                             f"got {self.pulse_energy_mj}")

    @property
    def chip_duration_s(self) -> Fraction:
        return 1 / as_fraction(self.r_l_hz)


def average_symbol_chips(spec: SchemeSpec) -> Fraction:
    """Mean chips per symbol over uniformly distributed values."""
    L = spec.n_values
    if spec.scheme is Scheme.OOK:
        return Fraction(spec.order_m)
    if spec.scheme is Scheme.PPM:
        return Fraction(L)
    if spec.scheme is Scheme.DPPM:
        return Fraction(L + 1, 2)
    if spec.scheme is Scheme.IDPPM:
        return Fraction(L + 3, 2)
    return Fraction(2 * spec.padding_n0 + L + 1, 2)


def bit_rate(spec: SchemeSpec, r_l_hz) -> Fraction:
    """Bits per second at laser repetition rate R_L.

    OOK: R_L.  PPM: M*R_L/2^M.  DPPM: 2*M*R_L/(2^M+1).
    IDPPM: 2*M*R_L/(2^M+3).  VCD-DPPM: 2*M*R_L/(2*N0+2^M+1).
    """
    r = as_fraction(r_l_hz)
    if r <= 0:
        raise ValueError(f"r_l_hz must be positive, got {r_l_hz}")
    m = spec.order_m
    L = spec.n_values
    if spec.scheme is Scheme.OOK:
        return r
    if spec.scheme is Scheme.PPM:
        return Fraction(m) * r / L
    if spec.scheme is Scheme.DPPM:
        return 2 * m * r / (L + 1)
    if spec.scheme is Scheme.IDPPM:
        return 2 * m * r / (L + 3)
    return 2 * m * r / (2 * spec.padding_n0 + L + 1)


def power_efficiency_vs_ook(order_m: int) -> Fraction:
    """Efficiency of one-pulse-per-symbol schemes relative to OOK, percent.

    (1 + (M-2)/M) * 100, assuming equiprobable 0/1 bits in the OOK stream.
    Identical for PPM, DPPM, IDPPM and VCD-DPPM since each sends exactly one
    pulse per M-bit symbol.
    """
    if order_m < 1:
        raise ValueError(f"order_m must be >= 1, got {order_m}")
    return (1 + Fraction(order_m - 2, order_m)) * 100


@dataclass
class RateLimitReport:
    """Cloud-imposed ceiling on the laser repetition rate for a scheme."""

    scheme: Scheme
    order_m: int | None
    max_hz: float
    binding: str
    candidates: dict


def ppm_worst_patterns(order_m: int) -> dict:
    """The candidate worst-case repeating chip patterns for L-slot PPM."""
    L = 1 << order_m
    adjacent = "0" * (L - 1) + "1" + "1" + "0" * (L - 1)
    return {"adjacent_pair": adjacent, "lab_worst": PPM_LAB_WORST_PATTERN}


def max_allowed_rate(scheme: Scheme, params: CloudParams,
                     order_m: int | None = None,
                     horizon: int = 10000) -> RateLimitReport:
    """Maximum R_L before the vapor cloud starts eating pulses.

    OOK and DPPM can emit back-to-back pulses, so they are capped at
    R_max = 1/T_v.  IDPPM guarantees one empty chip between pulses: 2/T_v.
    PPM is searched over its worst-case repeating patterns.  VCD-DPPM is
    uncapped because its padding is recomputed from the rate.
    """
    r_max = float(1 / params._tv)
    if scheme in (Scheme.OOK, Scheme.DPPM):
        return RateLimitReport(scheme, order_m, r_max,
                               "vapor cloud (consecutive pulses)", {})
    if scheme is Scheme.IDPPM:
        return RateLimitReport(scheme, order_m, 2 * r_max,
                               "vapor cloud (alternating '01')", {})
    if scheme is Scheme.VCD_DPPM:
        return RateLimitReport(scheme, order_m, math.inf,
                               "none (padding grows with the rate)", {})
    if order_m is None:
        raise ValueError("PPM rate limit depends on order_m")
    candidates = {}
    for name, pattern in ppm_worst_patterns(order_m).items():
        candidates[name] = max_sustainable_rate(pattern, params, horizon)
    worst_name = min(candidates, key=lambda k: candidates[k].rate_hz)
    binding = f"vapor cloud (pattern {worst_name!r})"
    if len({round(c.rate_hz, 2) for c in candidates.values()}) > 1:
        binding += " [candidates disagree; minimum reported]"
    return RateLimitReport(Scheme.PPM, order_m,
                           candidates[worst_name].rate_hz, binding, candidates)


def empirical_pulse_ratio(text: str, table: MappingTable,
                          ook_spec: SchemeSpec | None = None,
                          vcd_spec: SchemeSpec | None = None) -> float:
    """Measured pulse-count ratio of 8-bit OOK over one-pulse-per-symbol, percent.

    Returns ``math.inf`` for the degenerate all-zero-byte text (OOK sends no
    pulses at all).
    """
    if not text:
        raise ValueError("text is empty")
    if ook_spec is not None and ook_spec.scheme is not Scheme.OOK:
        raise ValueError("ook_spec must be an OOK spec")
    if vcd_spec is not None and vcd_spec.scheme is Scheme.OOK:
        raise ValueError("vcd_spec must be a one-pulse-per-symbol spec")
    missing = set(text) - set(table.value_of)
    if missing:
        raise ValueError(f"characters not in mapping table: "
                         f"{sorted(missing)!r}")
    if any(ord(c) > 255 for c in text):
        raise ValueError("OOK comparison needs 8-bit character codes")
    ook_pulses = sum(ord(c).bit_count() for c in text)
    if ook_pulses == 0:
        return math.inf
    return 100.0 * ook_pulses / len(text)


def average_symbol_duration_s(spec: SchemeSpec, r_l_hz) -> Fraction:
    """Mean airtime of one symbol at rate R_L."""
    return average_symbol_chips(spec) / as_fraction(r_l_hz)


@dataclass
class SweepRow:
    scheme: Scheme
    order_m: int
    r_l_hz: float
    padding_n0: int
    bit_rate_bps: float
    power_efficiency_pct: float
    max_allowed_hz: float
    feasible: bool
    avg_symbol_duration_s: float


def rate_sweep(m_values, r_l_values, params: CloudParams,
               horizon: int = 4000) -> list:
    """One row per (scheme, M, R_L): the input contract of the plot layer."""
    limits = {}
    rows = []
    for scheme in Scheme:
        for m in m_values:
            key = (scheme, m if scheme is Scheme.PPM else None)
            if key not in limits:
                limits[key] = max_allowed_rate(scheme, params,
                                               order_m=m, horizon=horizon)
            limit = limits[key]
            # OOK is the reference of the efficiency comparison: 100% vs itself.
            eff = 100.0 if scheme is Scheme.OOK \
                else float(power_efficiency_vs_ook(m))
            for r in r_l_values:
                n0 = required_padding(r, params) \
                    if scheme is Scheme.VCD_DPPM else 0
                spec = SchemeSpec(scheme, m, n0)
                rows.append(SweepRow(
                    scheme=scheme,
                    order_m=m,
                    r_l_hz=float(r),
                    padding_n0=n0,
                    bit_rate_bps=float(bit_rate(spec, r)),
                    power_efficiency_pct=eff,
                    max_allowed_hz=limit.max_hz,
                    feasible=float(r) <= limit.max_hz + 1e-9,
                    avg_symbol_duration_s=float(
                        average_symbol_duration_s(spec, r)),
                ))
    return rows
