"""Bits per mode against the two-way capacity bound and ideal CV-QKD versus one-way loss."""

import argparse
from pathlib import Path

from qsc.cli import BOUNDS_COLUMNS, bounds_rows, csv_text, write_atomic
from qsc.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--configuration", default="active", choices=["passive_ase", "passive_opa", "active"])
    args = ap.parse_args()
    cfg = load_config(preset="active", overrides=[f"bounds.configuration={args.configuration}"])
    rows = bounds_rows(cfg)
    path = Path(args.out_dir) / f"bounds_{args.configuration}.csv"
    write_atomic(path, csv_text(BOUNDS_COLUMNS, rows))
    print(f"wrote {path}\n")
    print(f"{'loss (dB)':>9} {'TGW':>10} {'CV-QKD':>10} {'protocol':>10}")
    for db, _, tgw, cv, proto in rows:
        if db % 2 == 0:
            print(f"{db:9.1f} {tgw:10.4g} {cv:10.4g} {proto:10.3g}")


if __name__ == "__main__":
    main()
