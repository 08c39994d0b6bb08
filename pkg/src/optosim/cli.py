"""Experiment-runner CLI.

Subcommands: rates, cloud, textsim, ber, calibrate-sl.  Every run writes its
primary outputs (CSV/JSON, header row, floats at 9 significant digits) plus a
manifest echoing the fully resolved configuration, so any figure can be
regenerated from its manifest alone.  Timestamps live only in the manifest;
the data files are byte-stable for a given config and seed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .channel import SourceLevelTable
from .cloud import simulate_train
from .codec import Scheme, SchemeSpec, SlotStream
from .config import ConfigError
from .linksim import ExperimentConfig, run_ber, run_text_sim
from .rates import LaserParams, rate_sweep

_DEFAULT_CORPUS = Path(__file__).parent / "data" / "corpus.txt"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(out_dir: Path, subcommand: str, resolved: dict,
                    outputs: list) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": resolved,
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _atomic_write(out_dir / "manifest.json", _json_text(manifest))


def _n_workers(n_jobs: int) -> int:
    cap = os.environ.get("OPTOSIM_THREADS")
    if cap:
        return max(1, min(n_jobs, int(cap)))
    return max(1, min(n_jobs, os.cpu_count() or 1))


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        return cfgmod.load_config_file(args.config)
    return {}


def cmd_rates(args) -> int:
    cfg = _load_config(args)
    settings = cfgmod.rates_settings(cfg)
    cloud, _ = cfgmod.build_cloud(cfg)
    if args.m_values:
        settings["m_values"] = [int(m) for m in args.m_values.split(",")]
    if args.rates:
        settings["r_l_values"] = [float(r) for r in args.rates.split(",")]
    rows = rate_sweep(settings["m_values"], settings["r_l_values"], cloud,
                      horizon=settings["horizon"])
    out_dir = Path(args.out)
    header = ["scheme", "M", "R_L", "N0", "bit_rate_bps",
              "power_efficiency_pct", "max_allowed_hz", "feasible",
              "avg_symbol_duration_s"]
    table = [[r.scheme.value, r.order_m, r.r_l_hz, r.padding_n0,
              r.bit_rate_bps, r.power_efficiency_pct, r.max_allowed_hz,
              r.feasible, r.avg_symbol_duration_s] for r in rows]
    outputs = []
    if args.format == "json":
        path = out_dir / "rates.json"
        _atomic_write(path, _json_text(
            [dict(zip(header, row)) for row in table]))
    else:
        path = out_dir / "rates.csv"
        _atomic_write(path, _csv_text(header, table))
    outputs.append(path)
    resolved = {"rates": settings,
                "cloud": {"t_v_s": float(cloud.t_v_s),
                          "t_relax_s": float(cloud.t_relax_s),
                          "delta": float(cloud.delta),
                          "threshold": float(cloud.threshold)}}
    _write_manifest(out_dir, "rates", resolved, outputs)
    print(f"wrote {len(rows)} sweep rows to {path}")
    return 0


def cmd_cloud(args) -> int:
    cfg = _load_config(args)
    cloud, _ = cfgmod.build_cloud(cfg)
    if args.tv is not None:
        cloud = type(cloud)(t_v_s=args.tv, t_relax_s=float(cloud.t_relax_s),
                            delta=float(cloud.delta),
                            threshold=float(cloud.threshold))
    try:
        pattern = SlotStream.from_string(args.pattern)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    chips = np.tile(pattern.chips, args.repeat)
    stream = SlotStream(chips, 1.0 / args.rate)
    trace = simulate_train(stream, cloud)
    out_dir = Path(args.out)
    buf = io.StringIO()
    trace.to_csv(buf)
    path = out_dir / "cloud_trace.csv"
    _atomic_write(path, buf.getvalue())
    first = trace.first_suppression_index
    summary = (f"pattern={args.pattern!r} rate={_fmt(args.rate)} Hz "
               f"pulses={trace.n_pulses} suppressions={trace.n_suppressed} "
               f"first_suppression_index={'-' if first is None else first}")
    print(summary)
    resolved = {"pattern": args.pattern, "rate_hz": args.rate,
                "repeat": args.repeat,
                "cloud": {"t_v_s": float(cloud.t_v_s),
                          "t_relax_s": float(cloud.t_relax_s),
                          "delta": float(cloud.delta),
                          "threshold": float(cloud.threshold)}}
    _write_manifest(out_dir, "cloud", resolved, [path])
    return 0


def cmd_textsim(args) -> int:
    cfg = _load_config(args)
    settings = cfgmod.textsim_settings(cfg)
    if args.corpus:
        settings["corpus"] = args.corpus
    if args.rates:
        settings["rates"] = [float(r) for r in args.rates.split(",")]
    corpus_path = Path(settings["corpus"] or _DEFAULT_CORPUS)
    if not corpus_path.exists():
        print(f"error: corpus file not found: {corpus_path}", file=sys.stderr)
        return 1
    # byte-oriented: every byte is one symbol, keeping the OOK 8-bit
    # comparison meaningful for any input file
    corpus = corpus_path.read_bytes().decode("latin-1")
    cloud, gating = cfgmod.build_cloud(cfg)
    results = []
    for r in settings["rates"]:
        config = ExperimentConfig(
            spec=SchemeSpec(Scheme.VCD_DPPM, 1, 0),  # M is auto-selected
            laser=LaserParams(r_l_hz=r),
            cloud=cloud,
            rng_seed=args.seed or 0,
            noiseless=True,
            cloud_gating=gating,
            ook_baseline=settings["ook_baseline"],
        )
        results.append(run_text_sim(config, corpus))

    out_dir = Path(args.out)
    json_path = out_dir / "textsim.json"
    _atomic_write(json_path, _json_text({
        "schema_version": 1,
        "corpus": str(corpus_path),
        "results": [r.to_dict() for r in results],
    }))
    header = ["r_l_hz", "order_m", "padding_n0", "alphabet_size",
              "corpus_chars", "mean_symbol_value", "vcd_chars_per_s",
              "ook_chars_per_s", "symbol_rate_ratio_vs_ook",
              "vcd_pulses_per_char", "ook_pulses_per_char",
              "pulse_ratio_vs_ook_pct"]
    rows = [[getattr(r, k) for k in header] for r in results]
    csv_path = out_dir / "textsim.csv"
    _atomic_write(csv_path, _csv_text(header, rows))
    resolved = {"textsim": {**settings, "corpus": str(corpus_path)},
                "cloud": {"t_v_s": float(cloud.t_v_s)}}
    _write_manifest(out_dir, "textsim", resolved, [json_path, csv_path])
    for r in results:
        print(f"R_L={_fmt(r.r_l_hz)} Hz: VCD-DPPM {r.vcd_chars_per_s:.3f} "
              f"chars/s vs OOK {r.ook_chars_per_s:.3f} chars/s "
              f"(ratio {r.symbol_rate_ratio_vs_ook:.3f}, "
              f"pulse ratio {r.pulse_ratio_vs_ook_pct:.1f}%)")
    return 0


BER_CSV_HEADER = ["scheme", "order_m", "padding_n0", "r_l_hz", "distance_m",
                  "angle_deg", "energy_mj", "seed", "snr_db",
                  "theta_normalized", "calibration_failed", "n_bits",
                  "n_errors", "ber", "n_suppressed", "n_resync"]


def cmd_ber(args) -> int:
    cfg = _load_config(args)
    try:
        runs = cfgmod.expand_ber_runs(cfg, seed_override=args.seed)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    workers = _n_workers(len(runs))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_ber, [c for _, c in runs]))
    else:
        results = [run_ber(c) for _, c in runs]

    out_dir = Path(args.out)
    records = []
    rows = []
    for (axes, _), res in zip(runs, results):
        rec = {"axes": axes, "result": res.to_dict()}
        records.append(rec)
        rows.append([res.scheme, res.order_m, res.padding_n0, res.r_l_hz,
                     "" if axes["distance_m"] is None else axes["distance_m"],
                     "" if axes["angle_deg"] is None else axes["angle_deg"],
                     axes["pulse_energy_mj"], res.rng_seed,
                     "" if res.snr_db is None else res.snr_db,
                     res.theta_normalized, res.calibration_failed,
                     res.n_bits, res.n_errors, res.ber, res.n_suppressed,
                     res.n_resync])
    json_path = out_dir / "ber.json"
    _atomic_write(json_path, _json_text({"schema_version": 1,
                                         "results": records}))
    csv_path = out_dir / "ber.csv"
    _atomic_write(csv_path, _csv_text(BER_CSV_HEADER, rows))
    _write_manifest(out_dir, "ber", cfg, [json_path, csv_path])
    for row in rows:
        print(f"{row[0]} seed={row[7]} ber={_fmt(row[13])}")
    return 0


def cmd_calibrate_sl(args) -> int:
    path = Path(args.input)
    if not path.exists():
        print(f"error: input file not found: {path}", file=sys.stderr)
        return 1
    try:
        table = SourceLevelTable.from_csv(
            path, sensitivity_db=args.sensitivity_db,
            measurement_distance_m=args.distance_m)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_path = out_dir / "source_levels.csv"
    rows = [[energy, angle, table.rows[(energy, angle)]]
            for (energy, angle) in sorted(table.rows)]
    _atomic_write(out_path, _csv_text(["energy_mj", "angle_deg", "sl_db"], rows))
    resolved = {"input": str(path), "sensitivity_db": args.sensitivity_db,
                "distance_m": args.distance_m}
    _write_manifest(out_dir, "calibrate-sl", resolved, [out_path])
    print(f"wrote {len(table.rows)} source levels to {out_path}")
    return 0


def _add_common(parser) -> None:
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--seed", type=int, help="override the RNG seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="primary output format where a choice exists")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optosim",
        description="Optoacoustic air-to-water link simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="analytic bit-rate / efficiency sweep")
    _add_common(p)
    p.add_argument("--m-values", help="comma-separated M list (default 1..8)")
    p.add_argument("--rates", help="comma-separated R_L list in Hz")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("cloud", help="run a chip pattern through the vapor "
                                     "cloud model")
    _add_common(p)
    p.add_argument("--pattern", required=True, help="0/1 chip pattern")
    p.add_argument("--rate", type=float, required=True, help="chip rate in Hz")
    p.add_argument("--repeat", type=int, default=1000,
                   help="pattern repetitions to simulate")
    p.add_argument("--tv", type=float, help="vapor cloud delay T_v in seconds")
    p.set_defaults(func=cmd_cloud)

    p = sub.add_parser("textsim", help="text-throughput comparison vs OOK")
    _add_common(p)
    p.add_argument("--corpus", help="corpus text file (default: bundled)")
    p.add_argument("--rates", help="comma-separated laser rates in Hz")
    p.set_defaults(func=cmd_textsim)

    p = sub.add_parser("ber", help="Monte Carlo bit-error-rate runs")
    _add_common(p)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("calibrate-sl", help="convert a lab CSV into a source "
                                            "level table")
    _add_common(p)
    p.add_argument("--input", required=True, help="raw measurement CSV")
    p.add_argument("--sensitivity-db", type=float,
                   help="hydrophone sensitivity, dB re 1 V/uPa")
    p.add_argument("--distance-m", type=float, default=1.0,
                   help="measurement distance in meters")
    p.set_defaults(func=cmd_calibrate_sl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
