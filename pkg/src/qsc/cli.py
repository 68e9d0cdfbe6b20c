"""``qsc`` command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical or physicality
error, 4 oracle verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Iterable, Sequence

from .config import AppConfig, load_config
from .errors import ConfigError, ValidityWarning
from .monitor import coincidence_rate, f_estimator_stddev, required_measurement_time, singles_rates, singles_snr_db
from .optimize import (Configuration, cvqkd_bits_per_mode, distance_sweep, optimize_operating_point,
                       tgw_bound_bits_per_mode)
from ._parallel import ordered_map
from .verify import run_verification

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ORACLE = 0, 2, 3, 4

RATE_COLUMNS = ["L_km", "kappa_S", "N_S_opt", "R_opt", "Pr_e", "I_AB_bps", "chi_ub_bps",
                "delta_I_lb_bps", "bits_per_mode"]
MONITOR_COLUMNS = ["L_km", "S_A", "S_B", "C_AB", "delta_f_at_1s", "T_M_required", "SNR_A_db", "SNR_B_db"]
BOUNDS_COLUMNS = ["one_way_loss_db", "kappa_S", "tgw_bits_per_mode", "cvqkd_bits_per_mode",
                  "protocol_bits_per_mode"]


def fmt(x: float) -> str:
    """Round-trip decimal (17 significant digits); infinities as ``inf``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _require_grid(grid) -> None:
    if not grid:
        raise ConfigError("empty sweep")


def rate_sweep_rows(cfg: AppConfig) -> list[list[float]]:
    _require_grid(cfg.sweep.L_grid)
    points = distance_sweep(cfg.system, cfg.sweep.configuration, cfg.sweep.L_grid, cfg.optimizer)
    return [[r.L_km, r.kappa_S, r.best.N_S, r.best.R, r.best.Pr_e, r.best.I_AB_bps, r.best.chi_ub_bps,
             r.best.delta_I_lb_bps, r.bits_per_mode] for r in points]


def monitor_rows(cfg: AppConfig) -> list[list[float]]:
    """Monitor statistics at the active-attack operating point chosen for each distance."""
    m = cfg.monitor
    _require_grid(m.L_grid)

    def row(L: float) -> list[float]:
        q = cfg.system.replace(L_km=L)
        best = optimize_operating_point(q, Configuration.ACTIVE, cfg.optimizer)
        q = q.replace(N_S=best.N_S, R=best.R)
        S_A, S_B = singles_rates(q)
        return [L, S_A, S_B, coincidence_rate(q), f_estimator_stddev(q, 1.0, m.variance_model),
                required_measurement_time(q, m.target_delta_f, m.variance_model),
                singles_snr_db(S_A, m.snr_time_s), singles_snr_db(S_B, m.snr_time_s)]

    return ordered_map(row, m.L_grid)


def bounds_rows(cfg: AppConfig) -> list[list[float]]:
    b = cfg.bounds
    _require_grid(b.loss_db_grid)
    alpha = cfg.system.alpha_db_per_km
    L_grid = [db / alpha for db in b.loss_db_grid]
    points = distance_sweep(cfg.system, b.configuration, L_grid, cfg.optimizer)
    return [[db, r.kappa_S, tgw_bound_bits_per_mode(r.kappa_S), cvqkd_bits_per_mode(r.kappa_S), r.bits_per_mode]
            for db, r in zip(b.loss_db_grid, points)]


def verification_report(cfg: AppConfig) -> dict:
    mc = cfg.mc
    return run_verification(mc.seed, mc.homodyne_trials, mc.coincidence_gates, mc.opa_sets, mc.shards,
                            mc.homodyne_config)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "rate-sweep": "optimized secure rate versus distance",
        "monitor-time": "channel-monitoring time versus distance (active attack)",
        "bounds": "bits/mode against the TGW bound and ideal CV-QKD versus loss",
        "mc-verify": "compare closed forms with the Monte Carlo and covariance oracles",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--preset", help="bundled preset name (passive, active)")
        p.add_argument("--out", required=True, help="output CSV (JSON for mc-verify)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a setting, e.g. system.N_S=0.01 or sweep.L_grid=0:60:5")
        if name == "mc-verify":
            p.add_argument("--seed", type=int, help="64-bit RNG seed (overrides mc.seed)")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    overrides = list(args.overrides)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"mc.seed={args.seed}")
    try:
        cfg = load_config(args.config, overrides, args.preset)
        if args.command == "mc-verify":
            report = verification_report(cfg)
            write_atomic(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
            for c in report["comparisons"]:
                print(f"{c['name']}: {c['status']}")
            return EXIT_OK if report["passed"] else EXIT_ORACLE
        builders = {"rate-sweep": (RATE_COLUMNS, rate_sweep_rows),
                    "monitor-time": (MONITOR_COLUMNS, monitor_rows),
                    "bounds": (BOUNDS_COLUMNS, bounds_rows)}
        columns, build = builders[args.command]
        write_atomic(args.out, csv_text(columns, build(cfg)))
        return EXIT_OK
    except ConfigError as exc:
        print(f"qsc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"qsc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Sequence[str] | None = None) -> None:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ValidityWarning)
        code = run(argv)
    flagged = [w for w in caught if issubclass(w.category, ValidityWarning)]
    if flagged:
        print(f"qsc: {len(flagged)} validity warning(s); first: {flagged[0].message}", file=sys.stderr)
    for w in caught:
        if not issubclass(w.category, ValidityWarning):
            warnings.showwarning(w.message, w.category, w.filename, w.lineno)
    sys.exit(code)


if __name__ == "__main__":
    main()
