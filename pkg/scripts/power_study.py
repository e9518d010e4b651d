#!/usr/bin/env python3
"""Monte Carlo power and power-exponent study across sample sizes.

For a two-cell test of p0 against p1 under a chosen noise kernel, estimates
the rejection power and the exponent -(1/n) log(1 - power) over a grid of n,
and prints the plug-in exponent prediction for comparison.
"""

import argparse
import sys

import privfit as pf
from privfit.gof import Model, chi2_quantile


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p0", type=float, default=0.5)
    parser.add_argument("--p1", type=float, default=0.45)
    parser.add_argument("--kind", choices=("laplace", "gaussian"), default="laplace")
    parser.add_argument("--eps", type=float, default=0.5)
    parser.add_argument("--m", type=int, default=3)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", default="200,400,600,1000",
                        help="comma-separated sample sizes")
    args = parser.parse_args()

    kernel = pf.make_kernel(args.kind, args.eps, args.m)
    p0 = pf.SimplexPoint((args.p0,))
    p1 = pf.SimplexPoint((args.p1,))
    pair = pf.HypothesisPair(p0, p1)
    crit = chi2_quantile(1 - args.alpha, 1)

    print(f"kernel: {args.kind}(eps={args.eps}, m={args.m})  "
          f"KL = {pf.kl_multinomial(pair):.6f}  "
          f"loss = {pf.power_loss(pair, kernel).loss:.4f}")
    print(f"{'n':>6} {'power':>8} {'stderr':>8} {'exponent':>10} {'predicted':>10}")
    for n in (int(v) for v in args.n.split(",")):
        plan = pf.SimPlan(trials=args.trials, seed=args.seed, n=n, truth=p1,
                          kernel=kernel, model=Model.TRUE, p0=p0, alpha=args.alpha)
        s = pf.estimate_exponent(plan, crit)
        predicted = pf.predicted_power_exponent(pair, kernel, n)["value"]
        exp_txt = "saturated" if s.saturated else f"{s.exponent_hat:.6f}"
        print(f"{n:>6} {s.power_hat:>8.4f} {s.stderr:>8.4f} {exp_txt:>10} "
              f"{predicted:>10.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
