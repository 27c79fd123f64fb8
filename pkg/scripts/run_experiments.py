#!/usr/bin/env python3
"""Regenerate the desk-scale verification artifacts into results/.

Four experiment groups: planar cross-operator convergence with fitted
exponents, univariate truncation rates, exact diagonal width tables for two
smoothness levels, and the inequality-constant probes.  Everything goes
through the CLI so the artifacts carry full parameter headers and are
byte-reproducible.
"""

import pathlib
import sys

from freudhc.cli import main

RESULTS = pathlib.Path(__file__).resolve().parent.parent / "results"


def run(*argv):
    code = main([str(a) for a in argv])
    if code != 0:
        sys.exit(code)


def main_():
    RESULTS.mkdir(exist_ok=True)

    run(
        "approx", "--lambda", "2", "--a", "0.5", "--dim", "2", "--r", "2",
        "--family", "vp", "--xi-list", "2..9",
        "--out", RESULTS / "vp_cross_errors_d2.csv",
    )
    run(
        "rates", "--table", RESULTS / "vp_cross_errors_d2.csv",
        "--out", RESULTS / "vp_cross_rates_d2.json",
    )

    run(
        "approx", "--lambda", "2", "--a", "0.5", "--dim", "1", "--r", "2",
        "--family", "trunc", "--xi-list", "4,8,16,32,64,128",
        "--out", RESULTS / "trunc_errors_d1.csv",
    )
    run(
        "rates", "--table", RESULTS / "trunc_errors_d1.csv",
        "--out", RESULTS / "trunc_rates_d1.json",
    )

    for r_lambda in ("1.0", "1.5"):
        run(
            "widths", "--dim", "2", "--r-lambda", r_lambda, "--n-max", "4096",
            "--out", RESULTS / f"widths_d2_rl{r_lambda}.csv",
        )

    run(
        "probe", "--kind", "bernstein", "--lambda", "2", "--a", "0.5", "--p", "2",
        "--degrees", "8,16,32,64,128,256", "--trials", "8", "--seed", "11",
        "--out", RESULTS / "probe_bernstein.csv",
    )
    for q, tag in (("inf", "sup"), ("1", "l1")):
        run(
            "probe", "--kind", "nikolskii", "--lambda", "2", "--a", "0.5",
            "--p", "2", "--q", q,
            "--degrees", "8,16,32,64,128,256", "--trials", "8", "--seed", "11",
            "--out", RESULTS / f"probe_nikolskii_{tag}.csv",
        )
    print(f"artifacts written to {RESULTS}")


if __name__ == "__main__":
    main_()
