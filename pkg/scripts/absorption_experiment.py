#!/usr/bin/env python3
"""Absorption experiment: burn an ensemble in, then track the localized
second-order norm and check that it stops growing.

Example:
    python scripts/absorption_experiment.py --members 8 --n 1024 --burn-in 100
"""

import argparse

import numpy as np

from entroscope.dynamics import ModelParams, evolve_many, generate_ensemble
from entroscope.field import Grid
from entroscope.functionals import sobolev_norm


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--members", type=int, default=8)
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--eta", type=float, default=0.1)
    ap.add_argument("--burn-in", type=float, default=100.0)
    ap.add_argument("--observe", type=float, default=100.0,
                    help="post-burn-in observation span")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    grid = Grid(-40.0, 40.0, args.n)
    p = ModelParams(eta=args.eta, scheme="finite_difference")
    print(f"burning in {args.members} members to t={args.burn_in} ...")
    ens = generate_ensemble(args.members, p, args.burn_in, args.seed, grid)

    obs = lambda s: sobolev_norm("loc2", s, p.alpha, p.eta,
                                 scheme="finite_difference")
    res = evolve_many(ens.members, p, args.observe,
                      sample_every=args.observe / 40.0, observable=obs)
    norms = np.asarray(res.observables)
    for t, row in zip(res.times, norms):
        print(f"t = {args.burn_in + t:8.2f}   max loc2 = {row.max():.6f}   "
              f"mean = {row.mean():.6f}")
    half = norms.shape[0] // 2
    ratio = norms[half:].max() / norms[:half].max()
    print(f"late/early max ratio: {ratio:.4f} (absorbed when ~1)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
