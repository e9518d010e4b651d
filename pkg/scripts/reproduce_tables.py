#!/usr/bin/env python3
"""Regenerate the reference power-loss and variance tables and the loss curves.

Writes table1.csv, table2.csv, figure1_laplace.csv and figure1_gaussian.csv
into --outdir (default: ./artifacts).
"""

import argparse
import pathlib
import sys

from privfit.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="artifacts")
    args = parser.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    jobs = [
        (["table1", "--out", str(outdir / "table1.csv")], "table1.csv"),
        (["table2", "--out", str(outdir / "table2.csv")], "table2.csv"),
        (["figure1", "--kind", "laplace",
          "--out", str(outdir / "figure1_laplace.csv")], "figure1_laplace.csv"),
        (["figure1", "--kind", "gaussian",
          "--out", str(outdir / "figure1_gaussian.csv")], "figure1_gaussian.csv"),
    ]
    for argv, name in jobs:
        code = cli_main(argv)
        if code != 0:
            print(f"failed: {name} (exit {code})", file=sys.stderr)
            return code
        print(f"wrote {outdir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
