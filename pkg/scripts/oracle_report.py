"""Run the oracle comparisons and print a one-line verdict per check."""

import argparse
import json
from pathlib import Path

from qsc.cli import write_atomic
from qsc.verify import run_verification


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--trials", type=int, default=100_000, help="homodyne trials per desk point")
    ap.add_argument("--gates", type=int, default=2_000_000, help="coincidence gates")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    report = run_verification(args.seed, args.trials, args.gates)
    path = Path(args.out_dir) / f"oracle_{args.seed}.json"
    write_atomic(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
    for c in report["comparisons"]:
        extra = ""
        if c["name"] == "coincidence_counting":
            t = c["var_C_truncated"]
            extra = (f" C_AB z={c['C_AB']['z']:+.2f}, Var z={c['var_C']['z']:+.2f};"
                     f" truncated closed form off by {t['relative_error']:+.1%}")
        elif "max_abs_z" in c:
            extra = f" max |z| = {c['max_abs_z']:.2f}"
        elif "max_relative_error" in c:
            extra = f" max relative error {c['max_relative_error']:.1e}"
        print(f"{c['name']}: {c['status']}{extra}")


if __name__ == "__main__":
    main()
