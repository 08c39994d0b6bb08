"""Underwater acoustic propagation and detection.

The link budget is SL - TL - NL: a calibrated source level, spreading plus
Thorp absorption, and the classical four-component ambient noise model
(turbulence, shipping, wind, thermal) integrated over the receiver band.
Detection is a per-slot amplitude threshold against unit-variance Gaussian
noise.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "SourceLevelTable",
    "ChannelParams",
    "thorp_absorption",
    "turbulence_psd_db",
    "shipping_psd_db",
    "wind_psd_db",
    "thermal_psd_db",
    "total_noise_psd_db",
    "ambient_noise_level",
    "transmission_loss",
    "slot_snr",
    "slot_detection_probs",
    "source_level_from_vpp",
]

VALID_ANGLES_DEG = (0.0, 45.0, 90.0)

# Frequency ranges (Hz) where each empirical noise component dominates; the
# union is where the overall model is considered meaningful.
NOISE_MODEL_RANGE_HZ = (1.0, 1e6)


def thorp_absorption(f_khz: float) -> float:
    """Thorp absorption coefficient, dB per km, frequency in kHz."""
    if f_khz <= 0:
        raise ValueError(f"frequency must be positive, got {f_khz}")
    f2 = f_khz * f_khz
    return 0.11 * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + 2.75e-4 * f2 + 0.003


def turbulence_psd_db(f_khz):
    return 17 - 30 * np.log10(f_khz)


def shipping_psd_db(f_khz, shipping_activity_s: float):
    return (40 + 20 * (shipping_activity_s - 0.5) + 26 * np.log10(f_khz)
            - 60 * np.log10(f_khz + 0.03))


def wind_psd_db(f_khz, wind_speed_mps: float):
    return (50 + 7.5 * math.sqrt(wind_speed_mps) + 20 * np.log10(f_khz)
            - 40 * np.log10(f_khz + 0.4))


def thermal_psd_db(f_khz):
    return -15 + 20 * np.log10(f_khz)


def total_noise_psd_db(f_khz, shipping_activity_s: float,
                       wind_speed_mps: float):
    """Power sum of the four ambient components, dB re 1 uPa^2/Hz."""
    linear = (10 ** (turbulence_psd_db(f_khz) / 10)
              + 10 ** (shipping_psd_db(f_khz, shipping_activity_s) / 10)
              + 10 ** (wind_psd_db(f_khz, wind_speed_mps) / 10)
              + 10 ** (thermal_psd_db(f_khz) / 10))
    return 10 * np.log10(linear)


@dataclass(frozen=True)
class ChannelParams:
    """Geometry, spreading, noise environment and receiver band of one link."""

    distance_m: float
    angle_deg: float = 0.0
    spreading_factor_k: float = 1.5
    shipping_activity_s: float = 0.5
    wind_speed_mps: float = 0.0
    band_hz: tuple = (9000.0, 11000.0)
    center_freq_khz: float = 10.0

    def __post_init__(self):
        if self.distance_m < 1.0:
            raise ValueError(f"distance_m must be >= 1 (the SL reference "
                             f"distance), got {self.distance_m}")
        if not 1.0 <= self.spreading_factor_k <= 2.0:
            raise ValueError(f"spreading_factor_k must be in [1, 2], "
                             f"got {self.spreading_factor_k}")
        if not 0.0 <= self.shipping_activity_s <= 1.0:
            raise ValueError(f"shipping_activity_s must be in [0, 1], "
                             f"got {self.shipping_activity_s}")
        if self.wind_speed_mps < 0:
            raise ValueError(f"wind_speed_mps must be >= 0, "
                             f"got {self.wind_speed_mps}")
        lo, hi = self.band_hz
        if not 0 < lo < hi:
            raise ValueError(f"band_hz must satisfy 0 < f_low < f_high, "
                             f"got {self.band_hz}")
        if self.center_freq_khz <= 0:
            raise ValueError(f"center_freq_khz must be positive, "
                             f"got {self.center_freq_khz}")


def transmission_loss(params: ChannelParams) -> float:
    """TL = k*10*log10(D/1m) + alpha(f_center)*D/1000, in dB."""
    spreading = params.spreading_factor_k * 10 * math.log10(params.distance_m)
    absorption = thorp_absorption(params.center_freq_khz) * params.distance_m / 1000.0
    return spreading + absorption


def ambient_noise_level(params: ChannelParams, n_points: int = 2001) -> float:
    """Band-integrated ambient noise, dB re 1 uPa.

    The linear PSD is integrated over ``band_hz`` with a composite Simpson
    rule (>= 1001 points).  Bands reaching outside the empirical model's
    stated range trigger a UserWarning, not a failure.
    """
    lo, hi = params.band_hz
    if lo < NOISE_MODEL_RANGE_HZ[0] or hi > NOISE_MODEL_RANGE_HZ[1]:
        warnings.warn(
            f"band {params.band_hz} Hz extends outside the ambient noise "
            f"model's stated range {NOISE_MODEL_RANGE_HZ} Hz",
            UserWarning, stacklevel=2)
    n = max(1001, int(n_points))
    if n % 2 == 0:
        n += 1
    f_hz = np.linspace(lo, hi, n)
    psd_db = total_noise_psd_db(f_hz / 1000.0, params.shipping_activity_s,
                                params.wind_speed_mps)
    linear = 10 ** (psd_db / 10)
    total = simpson(linear, x=f_hz)
    return 10 * math.log10(total)


def source_level_from_vpp(vpp_volts: float, sensitivity_db: float,
                          distance_m: float = 1.0) -> float:
    """SL re 1 uPa at 1 m from a hydrophone peak-to-peak voltage.

    SL = 20*log10(Vpp/2) - sensitivity + 20*log10(d); sensitivity in
    dB re 1 V/uPa (a large negative number for real hydrophones).
    """
    if vpp_volts <= 0:
        raise ValueError(f"vpp_volts must be positive, got {vpp_volts}")
    if distance_m <= 0:
        raise ValueError(f"distance_m must be positive, got {distance_m}")
    return (20 * math.log10(vpp_volts / 2.0) - sensitivity_db
            + 20 * math.log10(distance_m))


@dataclass
class SourceLevelTable:
    """Measured source levels keyed by (pulse energy mJ, receiver angle deg)."""

    rows: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for (energy, angle), sl in self.rows.items():
            angle = float(angle)
            if angle not in VALID_ANGLES_DEG:
                raise ValueError(f"angle {angle} not in {VALID_ANGLES_DEG}")
            cleaned[(float(energy), angle)] = float(sl)
        self.rows = cleaned
        for angle in sorted({a for _, a in self.rows}):
            pairs = sorted((e, sl) for (e, a), sl in self.rows.items()
                           if a == angle)
            for (e1, s1), (e2, s2) in zip(pairs, pairs[1:]):
                if s2 < s1:
                    raise ValueError(
                        f"source level must be non-decreasing in energy at "
                        f"{angle} deg: {e1} mJ -> {s1} dB but {e2} mJ -> {s2} dB")

    def energies_mj(self) -> list:
        return sorted({e for e, _ in self.rows})

    def angles_deg(self) -> list:
        return sorted({a for _, a in self.rows})

    def source_level_db(self, pulse_energy_mj: float, angle_deg: float,
                        interpolate: bool = False) -> float:
        """Look up SL; exact match by default, log-linear in energy on request."""
        key = (float(pulse_energy_mj), float(angle_deg))
        if key in self.rows:
            return self.rows[key]
        if not interpolate:
            raise KeyError(f"no source level measured for {pulse_energy_mj} mJ "
                           f"at {angle_deg} deg (interpolation is off)")
        energies = sorted(e for (e, a) in self.rows if a == float(angle_deg))
        if not energies:
            raise KeyError(f"no measurements at angle {angle_deg} deg")
        e = float(pulse_energy_mj)
        if not energies[0] <= e <= energies[-1]:
            raise KeyError(f"{e} mJ is outside the measured range "
                           f"[{energies[0]}, {energies[-1]}] mJ")
        hi = next(x for x in energies if x >= e)
        lo = max(x for x in energies if x <= e)
        if lo == hi:
            return self.rows[(lo, float(angle_deg))]
        s_lo = self.rows[(lo, float(angle_deg))]
        s_hi = self.rows[(hi, float(angle_deg))]
        w = (math.log10(e) - math.log10(lo)) / (math.log10(hi) - math.log10(lo))
        return s_lo + w * (s_hi - s_lo)

    @classmethod
    def from_csv(cls, path, sensitivity_db: float | None = None,
                 measurement_distance_m: float = 1.0) -> "SourceLevelTable":
        """Ingest a lab CSV; mode picked from the header.

        ``energy_mj, angle_deg, sl_db`` rows are used directly;
        ``energy_mj, angle_deg, vpp_volts`` rows are converted with
        :func:`source_level_from_vpp` and require ``sensitivity_db``.
        """
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            fields = [f.strip() for f in (reader.fieldnames or [])]
            if {"energy_mj", "angle_deg", "sl_db"} <= set(fields):
                mode = "sl"
            elif {"energy_mj", "angle_deg", "vpp_volts"} <= set(fields):
                mode = "vpp"
                if sensitivity_db is None:
                    raise ValueError(f"{path}: raw voltage table needs "
                                     f"sensitivity_db to convert to SL")
            else:
                raise ValueError(
                    f"{path}: header must contain energy_mj, angle_deg and "
                    f"one of sl_db / vpp_volts; got {fields}")
            rows = {}
            for rec in reader:
                energy = float(rec["energy_mj"])
                angle = float(rec["angle_deg"])
                if mode == "sl":
                    sl = float(rec["sl_db"])
                else:
                    sl = source_level_from_vpp(float(rec["vpp_volts"]),
                                               sensitivity_db,
                                               measurement_distance_m)
                rows[(energy, angle)] = sl
        return cls(rows)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["energy_mj", "angle_deg", "sl_db"])
            for (energy, angle) in sorted(self.rows):
                w.writerow([f"{energy:.9g}", f"{angle:.9g}",
                            f"{self.rows[(energy, angle)]:.9g}"])


def slot_snr(table: SourceLevelTable, pulse_energy_mj: float,
             params: ChannelParams, interpolate: bool = False) -> float:
    """Received SNR in dB: SL(energy, angle) - TL - NL."""
    sl = table.source_level_db(pulse_energy_mj, params.angle_deg,
                               interpolate=interpolate)
    return sl - transmission_loss(params) - ambient_noise_level(params)


def _phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def slot_detection_probs(snr_db: float, threshold_normalized: float) -> tuple:
    """Per-slot (p_miss, p_false_alarm) for the Gaussian amplitude detector.

    Pulse slots carry amplitude mu = 10^(SNR/20) in units of the noise sigma;
    empty slots carry 0.  The decision threshold is
    ``threshold_normalized * mu`` with the normalized threshold in (0, 1).
    """
    if not 0.0 < threshold_normalized < 1.0:
        raise ValueError(f"threshold_normalized must be in (0, 1), "
                         f"got {threshold_normalized}")
    mu = 10 ** (snr_db / 20.0)
    theta = threshold_normalized * mu
    p_miss = _phi(theta - mu)
    p_false = 1.0 - _phi(theta)
    return p_miss, p_false
