"""Config-file handling for the CLI.

Configs are YAML with nested sections.  Every key is checked against the
known schema so a typo fails loudly with the offending key named instead of
being silently ignored.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import yaml

from .channel import ChannelParams, SourceLevelTable
from .cloud import CloudParams
from .codec import Scheme, SchemeSpec
from .linksim import ExperimentConfig
from .rates import LaserParams

__all__ = [
    "ConfigError",
    "load_config_file",
    "build_cloud",
    "expand_ber_runs",
    "textsim_settings",
    "rates_settings",
]


class ConfigError(ValueError):
    """A config file problem, carrying the offending key."""


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _check_keys(section: dict, allowed: set, context: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown config key "
                          f"{context}.{sorted(unknown)[0]}")


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


_CLOUD_KEYS = {"t_v_s", "t_relax_s", "delta", "threshold", "gating"}
_LASER_KEYS = {"r_l_hz", "pulse_energy_mj"}
_CHANNEL_KEYS = {"distance_m", "angle_deg", "spreading_factor_k",
                 "shipping_activity_s", "wind_speed_mps", "band_hz",
                 "center_freq_khz"}
_BER_KEYS = {"n_data_bits", "n_control_bits", "seeds"}
_TOP_KEYS = {"scheme", "order_m", "padding_n0", "cloud", "laser", "channel",
             "source_levels_csv", "snr_db", "noiseless", "ber", "textsim",
             "rates"}
_TEXTSIM_KEYS = {"corpus", "rates", "ook_baseline"}
_RATES_KEYS = {"m_values", "r_l_values", "horizon"}


def build_cloud(cfg: dict) -> tuple:
    """(CloudParams, gating flag) from the ``cloud`` section."""
    section = cfg.get("cloud", {}) or {}
    _check_keys(section, _CLOUD_KEYS, "cloud")
    params = CloudParams(
        t_v_s=section.get("t_v_s", 0.0625),
        t_relax_s=section.get("t_relax_s", 1e-3),
        delta=section.get("delta", 1.0),
        threshold=section.get("threshold", 1.0),
    )
    return params, bool(section.get("gating", True))


def _build_channel(section: dict, distance_m, angle_deg) -> ChannelParams:
    band = section.get("band_hz", [9000.0, 11000.0])
    return ChannelParams(
        distance_m=float(distance_m),
        angle_deg=float(angle_deg),
        spreading_factor_k=float(section.get("spreading_factor_k", 1.5)),
        shipping_activity_s=float(section.get("shipping_activity_s", 0.5)),
        wind_speed_mps=float(section.get("wind_speed_mps", 0.0)),
        band_hz=(float(band[0]), float(band[1])),
        center_freq_khz=float(section.get("center_freq_khz", 10.0)),
    )


def expand_ber_runs(cfg: dict, seed_override: int | None = None) -> list:
    """Cartesian sweep of scheme x energy x distance x angle x seed.

    Returns (axes, ExperimentConfig) pairs in a deterministic order; axes is
    the flat dict of swept values used to label output rows.
    """
    _check_keys(cfg, _TOP_KEYS, "<top>")
    cloud, gating = build_cloud(cfg)
    laser_sec = cfg.get("laser", {}) or {}
    _check_keys(laser_sec, _LASER_KEYS, "laser")
    chan_sec = cfg.get("channel", {}) or {}
    _check_keys(chan_sec, _CHANNEL_KEYS, "channel")
    ber_sec = cfg.get("ber", {}) or {}
    _check_keys(ber_sec, _BER_KEYS, "ber")

    schemes = [Scheme.parse(str(s)) for s in _as_list(cfg.get("scheme", "OOK"))]
    order_m = int(cfg.get("order_m", 2))
    r_l_hz = float(laser_sec.get("r_l_hz", 40.0))
    energies = [float(e) for e in _as_list(laser_sec.get("pulse_energy_mj", 50.0))]
    seeds = [int(s) for s in _as_list(ber_sec.get("seeds", [0]))]
    if seed_override is not None:
        seeds = [int(seed_override)]

    noiseless = bool(cfg.get("noiseless", False))
    snr_db = cfg.get("snr_db")
    table = None
    if cfg.get("source_levels_csv"):
        table = SourceLevelTable.from_csv(cfg["source_levels_csv"])

    use_channel = not noiseless and snr_db is None
    distances = [float(d) for d in _as_list(chan_sec.get("distance_m", 500.0))]
    angles = [float(a) for a in _as_list(chan_sec.get("angle_deg", 0.0))]
    if not use_channel:
        distances, angles = [None], [None]

    runs = []
    for scheme, energy, distance, angle, seed in itertools.product(
            schemes, energies, distances, angles, seeds):
        n0 = 0
        if scheme is Scheme.VCD_DPPM:
            if "padding_n0" in cfg:
                n0 = int(cfg["padding_n0"])
            else:
                from .cloud import required_padding
                n0 = required_padding(r_l_hz, cloud)
        channel = None
        if use_channel:
            channel = _build_channel(chan_sec, distance, angle)
        config = ExperimentConfig(
            spec=SchemeSpec(scheme, order_m, n0),
            laser=LaserParams(r_l_hz=r_l_hz, pulse_energy_mj=energy),
            cloud=cloud,
            channel=channel,
            source_levels=table,
            rng_seed=seed,
            n_data_bits=int(ber_sec.get("n_data_bits", 100_000)),
            n_control_bits=int(ber_sec.get("n_control_bits", 64)),
            snr_db=None if snr_db is None else float(snr_db),
            noiseless=noiseless,
            cloud_gating=gating,
        )
        axes = {"scheme": scheme.value, "pulse_energy_mj": energy,
                "distance_m": distance, "angle_deg": angle, "seed": seed}
        runs.append((axes, config))
    return runs


def textsim_settings(cfg: dict) -> dict:
    _check_keys(cfg, _TOP_KEYS, "<top>")
    section = cfg.get("textsim", {}) or {}
    _check_keys(section, _TEXTSIM_KEYS, "textsim")
    return {
        "corpus": section.get("corpus"),
        "rates": [float(r) for r in _as_list(section.get("rates", [40.0, 10000.0]))],
        "ook_baseline": str(section.get("ook_baseline", "rmax")),
    }


def rates_settings(cfg: dict) -> dict:
    _check_keys(cfg, _TOP_KEYS, "<top>")
    section = cfg.get("rates", {}) or {}
    _check_keys(section, _RATES_KEYS, "rates")
    return {
        "m_values": [int(m) for m in section.get("m_values", list(range(1, 9)))],
        "r_l_values": [float(r) for r in section.get("r_l_values",
                                                     [16.0, 32.0, 40.0, 300.0])],
        "horizon": int(section.get("horizon", 4000)),
    }
