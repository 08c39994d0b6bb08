"""CLI subcommands: outputs, manifests, idempotence, error handling."""

import json
import os
from pathlib import Path

import pytest

from optosim.cli import main

DATA = Path(__file__).resolve().parents[1] / "src" / "optosim" / "data"


def read_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]


class TestRates:
    def test_default_sweep(self, tmp_path, capsys):
        assert main(["rates", "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "rates.csv")
        assert header == ["scheme", "M", "R_L", "N0", "bit_rate_bps",
                          "power_efficiency_pct", "max_allowed_hz", "feasible",
                          "avg_symbol_duration_s"]
        assert len(rows) == 5 * 8 * 4
        vcd = next(r for r in rows if r["scheme"] == "VCD_DPPM"
                   and r["M"] == "3" and r["R_L"] == "300")
        assert vcd["N0"] == "18"
        assert float(vcd["bit_rate_bps"]) == pytest.approx(40.0)
        ook_fast = [r for r in rows if r["scheme"] == "OOK"
                    and float(r["R_L"]) > 16]
        assert all(r["feasible"] == "0" for r in ook_fast)

    def test_m2_efficiency_rows(self, tmp_path):
        assert main(["rates", "--out", str(tmp_path), "--m-values", "2",
                     "--rates", "16"]) == 0
        _, rows = read_csv(tmp_path / "rates.csv")
        assert {float(r["power_efficiency_pct"]) for r in rows} == {100.0}

    def test_json_format(self, tmp_path):
        assert main(["rates", "--out", str(tmp_path), "--format", "json",
                     "--m-values", "1,2", "--rates", "16"]) == 0
        data = json.loads((tmp_path / "rates.json").read_text())
        assert len(data) == 10

    def test_manifest_lists_outputs(self, tmp_path):
        main(["rates", "--out", str(tmp_path), "--m-values", "1",
              "--rates", "16"])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["subcommand"] == "rates"
        assert any(p.endswith("rates.csv") for p in manifest["outputs"])
        assert manifest["config"]["rates"]["m_values"] == [1]


class TestCloud:
    @pytest.mark.parametrize("pattern,rate,clean", [
        ("1", 16.0, True),
        ("001", 40.0, True),
        ("1", 20.0, False),
    ])
    def test_lab_scenarios(self, tmp_path, capsys, pattern, rate, clean):
        assert main(["cloud", "--pattern", pattern, "--rate", str(rate),
                     "--repeat", "200", "--out", str(tmp_path)]) == 0
        summary = capsys.readouterr().out
        if clean:
            assert "suppressions=0" in summary
        else:
            assert "suppressions=0" not in summary
        header, rows = read_csv(tmp_path / "cloud_trace.csv")
        assert header == ["time_s", "emitted", "pre_level"]
        assert len(rows) == 200 * pattern.count("1")

    def test_bad_pattern_usage_error(self, tmp_path, capsys):
        assert main(["cloud", "--pattern", "012", "--rate", "40",
                     "--out", str(tmp_path)]) == 2


class TestTextsim:
    def test_bundled_corpus_two_rates(self, tmp_path):
        assert main(["textsim", "--rates", "40,10000",
                     "--out", str(tmp_path)]) == 0
        data = json.loads((tmp_path / "textsim.json").read_text())
        assert len(data["results"]) == 2
        by_rate = {r["r_l_hz"]: r for r in data["results"]}
        assert by_rate[40.0]["symbol_rate_ratio_vs_ook"] > 1.0
        assert by_rate[10000.0]["symbol_rate_ratio_vs_ook"] > \
            by_rate[40.0]["symbol_rate_ratio_vs_ook"]
        header, rows = read_csv(tmp_path / "textsim.csv")
        assert len(rows) == 2

    def test_missing_corpus_errors_with_path(self, tmp_path, capsys):
        assert main(["textsim", "--corpus", "/no/such/corpus.txt",
                     "--out", str(tmp_path)]) == 1
        assert "/no/such/corpus.txt" in capsys.readouterr().err


class TestBer:
    def write_config(self, tmp_path, text):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text(text)
        return cfg

    def test_noiseless_override(self, tmp_path):
        cfg = self.write_config(tmp_path, (
            "scheme: VCD_DPPM\n"
            "order_m: 2\n"
            "laser: {r_l_hz: 40}\n"
            "noiseless: true\n"
            "ber: {n_data_bits: 5000, seeds: [7]}\n"))
        assert main(["ber", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        data = json.loads((tmp_path / "ber.json").read_text())
        assert data["results"][0]["result"]["ber"] == 0.0

    def test_nine_cell_sweep(self, tmp_path, sample_sl_csv):
        cfg = self.write_config(tmp_path, (
            "scheme: OOK\n"
            "order_m: 2\n"
            "laser: {r_l_hz: 16, pulse_energy_mj: 60}\n"
            "channel:\n"
            "  distance_m: [100, 250, 500]\n"
            "  angle_deg: [0, 45, 90]\n"
            f"source_levels_csv: {sample_sl_csv}\n"
            "ber: {n_data_bits: 2000, seeds: [1]}\n"))
        assert main(["ber", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "ber.csv")
        assert len(rows) == 9
        assert {(r["distance_m"], r["angle_deg"]) for r in rows} == {
            (d, a) for d in ("100", "250", "500") for a in ("0", "45", "90")}

    def test_unknown_key_is_named(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, "laser: {r_l_hz: 16, warp: 9}\n"
                                          "noiseless: true\n")
        assert main(["ber", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        assert "laser.warp" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["ber", "--config", "/no/such.yaml",
                     "--out", str(tmp_path)]) == 1
        assert "/no/such.yaml" in capsys.readouterr().err

    def test_thread_cap_respected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OPTOSIM_THREADS", "2")
        cfg = self.write_config(tmp_path, (
            "scheme: [OOK, VCD_DPPM]\n"
            "laser: {r_l_hz: 40}\n"
            "noiseless: true\n"
            "ber: {n_data_bits: 2000, seeds: [1, 2]}\n"))
        assert main(["ber", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        _, rows = read_csv(tmp_path / "ber.csv")
        assert len(rows) == 4


class TestCalibrateSl:
    def test_raw_to_sl_round_trip(self, tmp_path, sample_hydrophone_csv,
                                  sample_sl_csv):
        assert main(["calibrate-sl", "--input", str(sample_hydrophone_csv),
                     "--sensitivity-db", "-206", "--distance-m", "1",
                     "--out", str(tmp_path)]) == 0
        produced = (tmp_path / "source_levels.csv").read_text()
        assert produced == sample_sl_csv.read_text()

    def test_missing_input(self, tmp_path, capsys):
        assert main(["calibrate-sl", "--input", "/no/file.csv",
                     "--out", str(tmp_path)]) == 1


class TestIdempotence:
    def test_outputs_byte_identical_across_reruns(self, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("scheme: VCD_DPPM\nlaser: {r_l_hz: 40}\n"
                       "snr_db: 15\nber: {n_data_bits: 5000, seeds: [3]}\n")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["ber", "--config", str(cfg), "--out", str(out)]) == 0
            assert main(["rates", "--out", str(out), "--m-values", "1,2",
                         "--rates", "16,40"]) == 0
            assert main(["textsim", "--rates", "40", "--out", str(out)]) == 0
            assert main(["cloud", "--pattern", "11000", "--rate", "40",
                         "--repeat", "50", "--out", str(out)]) == 0
            outs.append(out)
        for fname in ("ber.json", "ber.csv", "rates.csv", "textsim.json",
                      "textsim.csv", "cloud_trace.csv"):
            assert (outs[0] / fname).read_bytes() == \
                (outs[1] / fname).read_bytes(), fname
