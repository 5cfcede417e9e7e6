"""Batch experiment runner with deterministic CSV outputs.

Each subcommand resolves its configuration (defaults, then --config
JSON, then flag/environment overrides), writes its result CSVs and a
``manifest.json`` capturing the fully resolved configuration. Re-running
a subcommand with ``--config manifest.json`` reproduces the CSVs
byte-for-byte, except for measured wall-clock columns.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import access, caching, cognitive, detection, precoding, predistortion
from .scenario import (ConfigurationError, average_cir, build_channel,
                       default_scenario, draw_users)

ENV_PREFIX = "SATKIT_"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if x != x:
            return "nan"
        if x in (float("inf"), float("-inf")):
            return "inf" if x > 0 else "-inf"
        return format(x, ".10g")
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\r\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\r\n")


def _resolve_config(defaults: dict, args, subcommand: str) -> dict:
    cfg = dict(defaults)
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        # accept a previous run's manifest directly
        if "config" in loaded and "subcommand" in loaded:
            if loaded["subcommand"] != subcommand:
                raise ConfigurationError(
                    f"manifest is for {loaded['subcommand']!r}, not {subcommand!r}")
            loaded = loaded["config"]
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    env_seed = os.environ.get(ENV_PREFIX + "SEED")
    if env_seed is not None:
        cfg["seed"] = int(env_seed)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _write_manifest(out: Path, subcommand: str, cfg: dict):
    with open(out / "manifest.json", "w") as fh:
        json.dump({"subcommand": subcommand, "config": cfg}, fh,
                  indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- subcommands

def cmd_channel_report(cfg: dict, out: Path, jobs: int):
    scn = default_scenario(n_beams=cfg["n_beams"], n_u=cfg["n_u"],
                           seed=cfg["seed"])
    rows = []
    for fr in (1, 2, 3, 4):
        rng = np.random.default_rng(cfg["seed"] + fr)
        cir = average_cir(scn, fr, n_mc=cfg["n_mc"], rng=rng)
        rows.append((fr, cir, cfg["n_mc"], cfg["seed"]))
    write_csv(out / "channel_report.csv",
              ["reuse_factor", "avg_cir_db", "n_mc", "seed"], rows)


def cmd_precoding_bench(cfg: dict, out: Path, jobs: int):
    rows = []
    for case_i, (k, n, nu) in enumerate(cfg["cases"]):
        if n != k:
            raise ConfigurationError("benchmark cases use N == K layouts")
        scn = default_scenario(n_beams=k, n_u=nu, seed=cfg["seed"] + case_i)
        rng = np.random.default_rng(cfg["seed"] + case_i)
        ch = build_channel(scn, draw_users(scn, rng), rng=rng)
        bench = precoding.benchmark_mmse(ch, cfg["power_w"], n_rep=cfg["n_rep"])
        rows.append((k, n, nu, bench["sr_per_beam"], bench["cpu_ms"]))
    write_csv(out / "precoding_bench.csv",
              ["K", "N", "Nu", "sr_per_beam", "cpu_ms"], rows)


def cmd_rate_region(cfg: dict, out: Path, jobs: int):
    direct = 10 ** (cfg["direct_db"] / 10)
    cross = 10 ** (cfg["cross_db"] / 10)
    template = access.TwoUserChannel(g11=direct, g21=cross, g12=cross,
                                     g22=direct, p1=1.0, p2=1.0)
    lam_grid = np.linspace(0.0, 1.0, cfg["lam_points"])
    regions = access.region_sweep(template, cfg["p_values"],
                                  strategies=tuple(cfg["strategies"]),
                                  lam_grid=lam_grid)
    for strat, region in regions.items():
        frontier = {(p.r1, p.r2) for p in region.frontier}
        rows = [(strat, p.params[0] if p.params else "",
                 p.params[1] if len(p.params) > 1 else "",
                 p.r1, p.r2, (p.r1, p.r2) in frontier)
                for p in region.points]
        write_csv(out / f"rate_region_{strat}.csv",
                  ["strategy", "param1", "param2", "R1", "R2", "on_frontier"],
                  rows)


def cmd_detection_pd(cfg: dict, out: Path, jobs: int):
    rows = []

    def one(kind):
        det = detection.DetectorConfig(kind=kind,
                                       noise_uncertainty_db=cfg["eps_db"])
        tau = detection.calibrate_threshold(
            det, cfg["pfa"], cfg["n_mc_calib"], cfg["eps_db"],
            snr_db=cfg["snr_db"], seed=cfg["seed"], fade_db=cfg["fade_db"])
        det = replace(det, threshold=tau)
        return detection.pd_curve(det, cfg["isnr_grid_db"],
                                  snr_db=cfg["snr_db"], eps_db=cfg["eps_db"],
                                  n_mc=cfg["n_mc"], seed=cfg["seed"],
                                  fade_db=cfg["fade_db"])

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(one, cfg["detectors"]))
    else:
        results = [one(kind) for kind in cfg["detectors"]]
    for curve in results:
        for r in curve:
            rows.append((r["detector"], r["eps_db"], r["isnr_db"], r["pd"],
                         r["pd_lo"], r["pd_hi"], r["n_mc"], cfg["pfa"],
                         cfg["seed"]))
    write_csv(out / "detection_pd.csv",
              ["detector", "eps_db", "isnr_db", "pd", "pd_lo", "pd_hi",
               "n_mc", "pfa_target", "seed"], rows)


def cmd_spd_bench(cfg: dict, out: Path, jobs: int):
    hpa = predistortion.HpaParams(alpha=complex(cfg["alpha_re"], cfg["alpha_im"]),
                                  beta=complex(cfg["beta_re"], cfg["beta_im"]))
    base = predistortion.ChainConfig(sigma_j=cfg["sigma_j"],
                                     snr_db=cfg["snr_db"])
    rows = predistortion.spd_benchmark(hpa, cfg["obo_grid_db"],
                                       modes=tuple(cfg["modes"]),
                                       base_config=base,
                                       n_symbols=cfg["n_symbols"],
                                       seed=cfg["seed"])
    write_csv(out / "spd_bench.csv",
              ["spd_location", "jitter_aware", "obo_db", "sinr_db", "seed"],
              [(r["spd_location"], r["jitter_aware"], r["obo_db"],
                r["sinr_db"], r["seed"]) for r in rows])
    if cfg["lut_bins"]:
        cfg_fit = replace(base, spd_location="onboard", drive=1.0)
        spd = predistortion._train_spd(cfg_fit, hpa)
        spd = predistortion.build_lut(spd, dynamic_range=hpa.r_sat,
                                      n_bins=cfg["lut_bins"])
        write_csv(out / "spd_lut.csv",
                  ["bin_lo", "bin_hi", "gain_re", "gain_im"],
                  [(float(lo.real), float(hi.real), float(g.real),
                    float(g.imag)) for lo, hi, g in spd.lut])


def cmd_carrier_assign(cfg: dict, out: Path, jobs: int):
    rng = np.random.default_rng(cfg["seed"])
    m, k = cfg["n_carriers"], cfg["n_terminals"]
    terminals = rng.uniform(-cfg["area_km"] / 2, cfg["area_km"] / 2, (k, 2))
    if cfg["rem_csv"]:
        stations = cognitive.load_rem(cfg["rem_csv"], m)
    else:
        stations = cognitive.synthetic_rem(cfg["n_stations"], m,
                                           cfg["area_km"], rng)
    interf = cognitive.interference_table(stations, terminals, m)
    p = np.full(k, 10 ** (cfg["rx_power_dbw"] / 10))
    sinr = cognitive.build_sinr_matrix(p, interf, i_co=cfg["i_co"],
                                       n0=cfg["n0"])
    rates = cognitive.rate_matrix(sinr, mapping=cfg["mapping"])
    assign = cognitive.assign_hungarian(rates)
    rows = [(mm, kk, rates[mm, kk]) for mm, kk in assign.pairs()]
    write_csv(out / "carrier_assign.csv",
              ["carrier", "terminal", "rate_bpshz"], rows)
    clean = np.nonzero(interf.sum(axis=1) == 0)[0]
    if len(clean):
        base = cognitive.assign_hungarian(rates[clean])
        gain = assign.objective / base.objective if base.objective > 0 else np.inf
    else:
        base, gain = None, np.inf
    write_csv(out / "carrier_assign_summary.csv",
              ["sum_rate", "exclusive_sum_rate", "gain_factor"],
              [(assign.objective,
                base.objective if base is not None else 0.0, gain)])


def cmd_caching_threshold(cfg: dict, out: Path, jobs: int):
    rows = []
    rate_bc = cfg["rate_bc"]
    rate_uc = rate_bc * cfg["rate_ratio"]
    for alpha in cfg["alphas"]:
        model = caching.PopularityModel(library_size=cfg["library_size"],
                                        alpha=alpha)
        i_hat = caching.optimal_threshold(model, cfg["file_size_bits"],
                                          cfg["n_stations"], rate_uc, rate_bc)
        plan = caching.delivery_times(i_hat, model, cfg["file_size_bits"],
                                      cfg["n_stations"], rate_uc, rate_bc)
        rows.append((alpha, cfg["n_stations"], cfg["library_size"],
                     cfg["rate_ratio"], i_hat, plan.t_uc, plan.t_bc,
                     plan.t_tot))
        curve = caching.total_time_curve(model, cfg["file_size_bits"],
                                         cfg["n_stations"], rate_uc, rate_bc)
        write_csv(out / f"caching_curve_alpha{_fmt(float(alpha))}.csv",
                  ["threshold", "t_tot"],
                  [(i + 1, float(t)) for i, t in enumerate(curve)])
    write_csv(out / "caching_threshold.csv",
              ["alpha", "K", "I", "rate_ratio", "i_hat", "T_uc", "T_bc",
               "T_tot"], rows)


SUBCOMMANDS = {
    "channel-report": (cmd_channel_report, {
        "n_beams": 71, "n_u": 2, "n_mc": 200, "seed": 0}),
    "precoding-bench": (cmd_precoding_bench, {
        "cases": [[16, 16, 2], [32, 32, 2], [32, 32, 4]],
        "power_w": 55.0, "n_rep": 3, "seed": 0}),
    "rate-region": (cmd_rate_region, {
        "direct_db": 0.0, "cross_db": -2.0,
        "p_values": [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        "lam_points": 21, "strategies": ["ian", "scd", "snd", "fdm", "hk"],
        "seed": 0}),
    "detection-pd": (cmd_detection_pd, {
        "detectors": ["ced", "edscp", "edscd"], "eps_db": 2.0, "snr_db": 6.0,
        "pfa": 0.01, "n_mc": 2000, "n_mc_calib": 20000, "fade_db": 4.0,
        "isnr_grid_db": [float(v) for v in range(-14, 7)], "seed": 0}),
    "spd-bench": (cmd_spd_bench, {
        "obo_grid_db": [2.0, 4.0, 6.0, 8.0], "modes": ["none", "onboard",
                                                       "onground"],
        "alpha_re": 1.0, "alpha_im": 0.0, "beta_re": -0.15, "beta_im": 0.05,
        "sigma_j": 0.005, "snr_db": 40.0, "n_symbols": 4000, "lut_bins": 0,
        "seed": 0}),
    "carrier-assign": (cmd_carrier_assign, {
        "n_carriers": 6, "n_terminals": 8, "n_stations": 12, "area_km": 200.0,
        "rx_power_dbw": 12.0, "i_co": 0.5, "n0": 1.0, "mapping": "shannon",
        "rem_csv": None, "seed": 0}),
    "caching-threshold": (cmd_caching_threshold, {
        "alphas": [0.8, 1.2, 1.6], "n_stations": 500, "library_size": 100,
        "rate_ratio": 3.0, "rate_bc": 1.0, "file_size_bits": 1.0, "seed": 0}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satkit", description="multibeam satellite experiment runner")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config or a previous run's manifest.json")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--jobs", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, defaults = SUBCOMMANDS[args.subcommand]
    try:
        cfg = _resolve_config(defaults, args, args.subcommand)
        out = Path(args.out or os.environ.get(ENV_PREFIX + "OUT", "."))
        jobs = args.jobs or int(os.environ.get(ENV_PREFIX + "JOBS", "1"))
        out.mkdir(parents=True, exist_ok=True)
        func(cfg, out, jobs)
        _write_manifest(out, args.subcommand, cfg)
    except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
