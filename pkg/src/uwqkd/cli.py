"""Command-line entry point: ``uwqkd <subcommand> --config FILE ...``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .bb84 import BracketError, achievable_distance, direct_link_report
from .channel import TURBULENCE_PRESETS, wave_structure_closed, wave_structure_numeric
from .config import ConfigError, Scenario, parse_config, preset_names
from .decoy import decoy_cutoff, decoy_report, ideal_bb84_cutoff, ideal_bb84_rate_at
from .mc import gate_curve, run_simulation
from .numerics import ConvergenceError, DomainError
from .relay import optimal_relay_count, relay_achievable_distance, relay_qber, relay_skr_lower
from .tables import ResultTable, emit

log = logging.getLogger("uwqkd")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_BRACKET = 4


def _threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("UWQKD_THREADS", "").strip()
        value = int(env) if env else 1
    return max(1, value)


def _ordered_map(fn, items, threads: int):
    """Map preserving input order, optionally across threads."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _table(columns, scenario: Scenario, command: str, seed=None, **extra) -> ResultTable:
    meta = {
        "command": command,
        "scenario": scenario.name,
        "scenario_hash": scenario.hash,
        "tool_version": __version__,
        "seed": seed,
    }
    meta.update(extra)
    return ResultTable(columns=list(columns), metadata=meta)


def cmd_qber_sweep(sc: Scenario, args) -> ResultTable:
    setup = sc.link_setup()
    t = _table(
        [("distance", "m"), ("qber_upper", "1"), ("mu", "1"), ("mu0", "1"), ("path_loss", "1"), ("noise", "photons")],
        sc, "qber-sweep",
    )
    for r in _ordered_map(lambda L: direct_link_report(setup, L), sc.sweep_grid(), args.threads):
        t.add(r.distance, r.qber_upper, r.mu, r.mu0, r.path_loss, r.noise)
    return t


def cmd_skr_sweep(sc: Scenario, args) -> ResultTable:
    setup = sc.link_setup()
    t = _table([("distance", "m"), ("qber_upper", "1"), ("skr_lower", "bit/sifted bit")], sc, "skr-sweep")
    for r in _ordered_map(lambda L: direct_link_report(setup, L), sc.sweep_grid(), args.threads):
        t.add(r.distance, r.qber_upper, r.skr_lower)
    return t


def cmd_decoy_rate(sc: Scenario, args) -> ResultTable:
    setup = sc.link_setup()
    cols = [
        ("distance", "m"), ("Q_mu_U", "1"), ("Q_mu_L", "1"), ("Q_nu_L", "1"), ("E_mu_U", "1"),
        ("Y1_L", "1"), ("Q1_L", "1"), ("e1_U", "1"), ("rate_lower", "bit/pulse"),
        ("ideal_bb84_rate", "bit/pulse"), ("flags", ""),
    ]
    t = _table(cols, sc, "decoy-rate")

    def row(L):
        r = decoy_report(setup, L, sc.decoy)
        return (r.distance, r.Q_mu_U, r.Q_mu_L, r.Q_nu_L, r.E_mu_U, r.Y1_L, r.Q1_L, r.e1_U,
                r.rate_lower, ideal_bb84_rate_at(setup, L, sc.decoy), ";".join(r.flags))

    for values in _ordered_map(row, sc.sweep_grid(), args.threads):
        t.add(*values)
    return t


def cmd_distance(sc: Scenario, args) -> ResultTable:
    setup = sc.link_setup()
    lo, hi = sc.search_range()
    t = _table([("criterion", ""), ("relay_count", "1"), ("distance", "m")], sc, "distance")
    if sc.protocol == "decoy":
        t.add("decoy_rate>0", 0, decoy_cutoff(setup, sc.decoy, (lo, hi)))
        t.add("ideal_bb84_rate>0", 0, ideal_bb84_cutoff(setup, sc.decoy, (lo, hi)))
        return t
    crit = args.criterion or sc.values["search"]["criterion"]
    crits = ["qber", "skr"] if crit == "both" else [crit]
    K = sc.geometry.relay_count
    for c in crits:
        label = "qber<=limit" if c == "qber" else "skr>0"
        if sc.protocol == "relay":
            t.add(label, K, relay_achievable_distance(K, c, setup, (lo, hi)))
        else:
            t.add(label, 0, achievable_distance(c, setup, (lo, hi)))
    return t


def cmd_relay_scan(sc: Scenario, args) -> ResultTable:
    setup = sc.link_setup()
    lo, hi = sc.search_range()
    crit = args.criterion if args.criterion in ("qber", "skr") else sc.values["search"]["criterion"]
    best, best_d, reach = optimal_relay_count(setup, sc.k_max, crit, (lo, hi))
    t = _table(
        [("relay_count", "1"), ("distance", "m"), ("qber_upper", "1"), ("skr_lower", "bit/sifted bit"),
         ("max_distance", "m"), ("optimal", "1")],
        sc, "relay-scan", optimal_relay_count=best, optimal_distance=best_d,
    )
    grid = sc.sweep_grid()
    jobs = [(K, L) for K in range(sc.k_max + 1) for L in grid]
    qbers = _ordered_map(lambda job: relay_qber(setup, job[1], job[0]), jobs, args.threads)
    for (K, L), q in zip(jobs, qbers):
        t.add(K, L, q, relay_skr_lower(q, sc.bb84), reach[K], K == best)
    return t


def _mc_result(sc: Scenario, args, open_gate: bool):
    ms = sc.mc_settings()
    cfg = ms.config
    if open_gate:
        cfg = replace(cfg, detector=replace(cfg.detector, gate_time=math.inf))
    n = args.photons if args.photons is not None else ms.photons
    return run_simulation(n, cfg, args.seed, partitions=ms.partitions, threads=args.threads), ms


def cmd_mc_run(sc: Scenario, args) -> ResultTable:
    res, ms = _mc_result(sc, args, open_gate=False)
    edges, counts, weights = res.toa_histogram() if args.histogram == "toa" else res.aoa_histogram()
    unit = "s" if args.histogram == "toa" else "rad"
    gamma, err = res.gamma()
    t = _table(
        [("bin_low", unit), ("bin_high", unit), ("count", "1"), ("weight", "1")],
        sc, "mc-run", seed=args.seed, partitions=res.partitions, photons=res.launched,
        histogram=args.histogram, received=res.received, received_weight=res.received_weight,
        gamma=gamma, gamma_stderr=err, **{f"diag_{k}": v for k, v in res.diagnostics.items()},
    )
    for i in range(len(counts)):
        t.add(float(edges[i]), float(edges[i + 1]), int(counts[i]), float(weights[i]))
    return t


def cmd_gate_opt(sc: Scenario, args) -> ResultTable:
    res, ms = _mc_result(sc, args, open_gate=True)
    rx = sc.mc_receiver()
    curve = gate_curve(res, ms.gate_grid, sc.environment, rx, ms.wavelength, sc.bb84.mean_photon_number)
    t = _table(
        [("gate", "s"), ("gamma", "1"), ("noise", "photons"), ("qber", "1"), ("optimal", "1")],
        sc, "gate-opt", seed=args.seed, partitions=res.partitions, photons=res.launched,
        optimal_gate=curve.best_gate, optimal_qber=curve.best_qber,
    )
    best = curve.best_index
    for i in range(curve.gates.size):
        t.add(float(curve.gates[i]), float(curve.gamma[i]), float(curve.noise[i]), float(curve.qber[i]), i == best)
    return t


def cmd_validate_wsf(sc: Scenario, args) -> ResultTable:
    v = sc.values["wsf"]
    regimes = [r.strip() for r in v["regimes"].split(",") if r.strip()]
    d_r = sc.values["turbulence"]["d_r"]
    rhos = np.geomspace(v["rho_min"], v["rho_max"], v["points"])
    lam = sc.geometry.wavelength
    t = _table(
        [("regime", ""), ("rho", "m"), ("closed", "1"), ("numeric", "1"), ("rel_error", "1")],
        sc, "validate-wsf", length=v["length"],
    )
    for name in regimes:
        if name not in TURBULENCE_PRESETS:
            raise ConfigError(f"wsf.regimes: unknown regime {name!r}")
        turb = TURBULENCE_PRESETS[name].with_d_r(d_r)
        for rho in rhos:
            closed = wave_structure_closed(float(rho), v["length"], turb, lam)
            numeric = wave_structure_numeric(float(rho), v["length"], turb, lam)
            t.add(name, float(rho), closed, numeric, abs(closed - numeric) / numeric)
    return t


COMMANDS = {
    "qber-sweep": (cmd_qber_sweep, "QBER bound over the sweep distances"),
    "skr-sweep": (cmd_skr_sweep, "secret key rate bound over the sweep distances"),
    "decoy-rate": (cmd_decoy_rate, "decoy-state bounds over the sweep distances"),
    "distance": (cmd_distance, "longest distance meeting the search criterion"),
    "relay-scan": (cmd_relay_scan, "relay count x distance grid and the best relay count"),
    "mc-run": (cmd_mc_run, "photon transport; ToA or AoA histogram"),
    "gate-opt": (cmd_gate_opt, "QBER against receiver gate time from one simulation"),
    "validate-wsf": (cmd_validate_wsf, "closed-form vs numeric structure function"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwqkd", description=__doc__)
    parser.add_argument("--version", action="version", version=f"uwqkd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help=f"scenario file or preset ({', '.join(preset_names())})")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $UWQKD_THREADS or 1)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("distance", "relay-scan"):
            p.add_argument("--criterion", choices=("qber", "skr", "both"), default=None)
        if name in ("mc-run", "gate-opt"):
            p.add_argument("--photons", type=int, default=None, help="override mc.photons")
        if name == "mc-run":
            p.add_argument("--histogram", choices=("toa", "aoa"), default="toa")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.threads = _threads(args.threads)
    fn, _ = COMMANDS[args.command]
    try:
        scenario = parse_config(args.config, args.overrides)
        table = fn(scenario, args)
        text = emit(table, args.format, args.out)
    except (ConfigError, DomainError) as exc:
        print(f"uwqkd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"uwqkd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BracketError as exc:
        print(f"uwqkd: search failed: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except OSError as exc:
        print(f"uwqkd: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
