"""Fit the GGP model along a t-ladder and print estimates with 95% intervals.

Usage: python scripts/fit_ladder.py [--sigma0 0.5] [--tau0 1.0] [--seed 0] [--t 200 400 800]
"""

import argparse

from ggpgraph.inference import laplace_posterior
from ggpgraph.levy import GGPParams
from ggpgraph.samplers import sample_ggp_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma0", type=float, default=0.5)
    ap.add_argument("--tau0", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t", type=float, nargs="+", default=[200.0, 400.0, 800.0])
    args = ap.parse_args()
    print(f"{'t':>6} {'N':>7} {'D*':>9} {'sigma':>22} {'tau':>22} {'s/t':>8}")
    for t in args.t:
        g = sample_ggp_graph(GGPParams(args.sigma0, args.tau0, t), args.seed).summary
        post = laplace_posterior(g).to_dict(0.95)
        ci = post["ci"]
        print(
            f"{t:6.0f} {g.n:7d} {g.d_star:9d} "
            f"{post['sigma_hat']:.3f} [{ci['sigma'][0]:.3f},{ci['sigma'][1]:.3f}] "
            f"{post['tau_hat']:.3f} [{ci['tau'][0]:.3f},{ci['tau'][1]:.3f}] "
            f"{post['s_hat'] / t:8.3f}"
        )


if __name__ == "__main__":
    main()
