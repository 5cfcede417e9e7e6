import json

import pytest

from satkit import cli

FAST_CONFIGS = {
    "channel-report": {"n_beams": 7, "n_u": 1, "n_mc": 5},
    "caching-threshold": {"alphas": [1.2], "n_stations": 20,
                          "library_size": 10},
    "carrier-assign": {"n_carriers": 3, "n_terminals": 4, "n_stations": 5,
                       "area_km": 50.0},
    "rate-region": {"p_values": [1.0, 10.0], "lam_points": 3,
                    "strategies": ["ian", "hk"]},
}


def run(tmp_path, sub, cfg, name, extra=()):
    out = tmp_path / name
    cfg_path = tmp_path / f"{name}.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = cli.main([sub, "--config", str(cfg_path), "--out", str(out), *extra])
    assert rc == 0
    return out


def csv_bytes(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.glob("*.csv"))}


class TestManifestRoundTrip:
    @pytest.mark.parametrize("sub", sorted(FAST_CONFIGS))
    def test_rerun_from_manifest_is_byte_identical(self, tmp_path, sub):
        first = run(tmp_path, sub, FAST_CONFIGS[sub], "a")
        second = tmp_path / "b"
        rc = cli.main([sub, "--config", str(first / "manifest.json"),
                       "--out", str(second)])
        assert rc == 0
        assert csv_bytes(first) == csv_bytes(second)
        assert ((first / "manifest.json").read_bytes()
                == (second / "manifest.json").read_bytes())

    def test_manifest_records_resolved_config(self, tmp_path):
        out = run(tmp_path, "caching-threshold",
                  FAST_CONFIGS["caching-threshold"], "m")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "caching-threshold"
        assert manifest["config"]["alphas"] == [1.2]
        # defaults not overridden are recorded too
        assert manifest["config"]["rate_ratio"] == 3.0

    def test_wrong_subcommand_manifest_rejected(self, tmp_path, capsys):
        out = run(tmp_path, "caching-threshold",
                  FAST_CONFIGS["caching-threshold"], "w")
        rc = cli.main(["carrier-assign",
                       "--config", str(out / "manifest.json"),
                       "--out", str(tmp_path / "x")])
        assert rc == 1
        assert "manifest" in capsys.readouterr().err


class TestConfigResolution:
    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"n_beams": 7, "warp_factor": 9}))
        rc = cli.main(["channel-report", "--config", str(cfg),
                       "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "warp_factor" in capsys.readouterr().err

    def test_malformed_json_rejected(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        rc = cli.main(["caching-threshold", "--config", str(cfg),
                       "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_missing_config_file(self, tmp_path):
        rc = cli.main(["caching-threshold", "--config",
                       str(tmp_path / "nope.json"),
                       "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_env_seed_applies(self, tmp_path, monkeypatch):
        a = run(tmp_path, "carrier-assign", FAST_CONFIGS["carrier-assign"], "a")
        monkeypatch.setenv("SATKIT_SEED", "99")
        b = run(tmp_path, "carrier-assign", FAST_CONFIGS["carrier-assign"], "b")
        assert json.loads((b / "manifest.json").read_text())["config"]["seed"] == 99
        assert csv_bytes(a) != csv_bytes(b)

    def test_flag_seed_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SATKIT_SEED", "99")
        out = run(tmp_path, "carrier-assign", FAST_CONFIGS["carrier-assign"],
                  "c", extra=("--seed", "7"))
        assert json.loads((out / "manifest.json").read_text())["config"]["seed"] == 7

    def test_env_out_dir(self, tmp_path, monkeypatch):
        target = tmp_path / "envout"
        monkeypatch.setenv("SATKIT_OUT", str(target))
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(FAST_CONFIGS["caching-threshold"]))
        rc = cli.main(["caching-threshold", "--config", str(cfg)])
        assert rc == 0
        assert (target / "caching_threshold.csv").exists()


class TestCsvContracts:
    def test_crlf_and_headers_channel_report(self, tmp_path):
        out = run(tmp_path, "channel-report", FAST_CONFIGS["channel-report"],
                  "h")
        raw = (out / "channel_report.csv").read_bytes()
        assert raw.count(b"\r\n") == raw.count(b"\n")
        lines = raw.decode().split("\r\n")
        assert lines[0] == "reuse_factor,avg_cir_db,n_mc,seed"
        assert len([ln for ln in lines if ln]) == 5      # header + 4 factors

    def test_rate_region_files_per_strategy(self, tmp_path):
        out = run(tmp_path, "rate-region", FAST_CONFIGS["rate-region"], "r")
        for strat in ("ian", "hk"):
            path = out / f"rate_region_{strat}.csv"
            header = path.read_bytes().decode().split("\r\n")[0]
            assert header == "strategy,param1,param2,R1,R2,on_frontier"

    def test_caching_curve_files(self, tmp_path):
        out = run(tmp_path, "caching-threshold",
                  FAST_CONFIGS["caching-threshold"], "k")
        assert (out / "caching_curve_alpha1.2.csv").exists()
        body = (out / "caching_threshold.csv").read_bytes().decode()
        assert body.startswith("alpha,K,I,rate_ratio,i_hat,T_uc,T_bc,T_tot")

    def test_carrier_assign_summary(self, tmp_path):
        out = run(tmp_path, "carrier-assign", FAST_CONFIGS["carrier-assign"],
                  "s")
        lines = (out / "carrier_assign.csv").read_bytes().decode().strip().split("\r\n")
        assert lines[0] == "carrier,terminal,rate_bpshz"
        assert len(lines) - 1 == 3                        # one row per carrier
        summary = (out / "carrier_assign_summary.csv").read_bytes().decode()
        assert summary.startswith("sum_rate,exclusive_sum_rate,gain_factor")

    def test_float_formatting(self):
        assert cli._fmt(0.1) == "0.1"
        assert cli._fmt(float("nan")) == "nan"
        assert cli._fmt(float("inf")) == "inf"
        assert cli._fmt(float("-inf")) == "-inf"
        assert cli._fmt(True) == "1"
        assert cli._fmt(3) == "3"


class TestHeavySubcommandsSmallConfig:
    def test_precoding_bench(self, tmp_path):
        out = run(tmp_path, "precoding-bench",
                  {"cases": [[4, 4, 1]], "n_rep": 1}, "p")
        lines = (out / "precoding_bench.csv").read_bytes().decode().strip().split("\r\n")
        assert lines[0] == "K,N,Nu,sr_per_beam,cpu_ms"
        assert len(lines) == 2

    def test_detection_pd(self, tmp_path):
        cfg = {"detectors": ["ced"], "n_mc": 50, "n_mc_calib": 200,
               "isnr_grid_db": [0.0]}
        out = run(tmp_path, "detection-pd", cfg, "d")
        lines = (out / "detection_pd.csv").read_bytes().decode().strip().split("\r\n")
        assert lines[0].startswith("detector,eps_db,isnr_db,pd")
        assert len(lines) == 2
        assert lines[1].startswith("ced,2,0,")

    def test_spd_bench_with_lut(self, tmp_path):
        cfg = {"obo_grid_db": [4.0], "modes": ["none"], "n_symbols": 300,
               "lut_bins": 8}
        out = run(tmp_path, "spd-bench", cfg, "v")
        lines = (out / "spd_bench.csv").read_bytes().decode().strip().split("\r\n")
        assert lines[0] == "spd_location,jitter_aware,obo_db,sinr_db,seed"
        assert len(lines) == 2
        lut = (out / "spd_lut.csv").read_bytes().decode().strip().split("\r\n")
        assert lut[0] == "bin_lo,bin_hi,gain_re,gain_im"
        assert len(lut) == 9
