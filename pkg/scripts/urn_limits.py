#!/usr/bin/env python3
"""Demonstrate the urn limit laws and the sqrt-n triangular scaling.

Runs the KS checks against the Beta / Dirichlet-marginal limits for a few
initial states and prints the triangular-urn stability report.
"""

import argparse
import sys

import numpy as np

from netinfer.graphcore import RngStream
from netinfer.urns import UrnState, limit_law_check, triangular_urn_scaling


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-final", type=int, default=10_000)
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    rng = RngStream(args.seed)
    cases = [
        ("Beta(1,1) = Uniform", UrnState.classic(1, 1), "beta"),
        ("Beta(3,2)", UrnState.classic(3, 2), "beta"),
        ("Dir(1,1,1) marginals Beta(1,2)", UrnState.classic(1, 1, 1), "dirichlet"),
        ("Dir(1,1) from 2-per-step (2,2)", UrnState.k_per_step([2, 2], 2),
         "dirichlet_scaled"),
    ]
    for i, (label, state, law) in enumerate(cases):
        check = limit_law_check(state, law, args.n_final, args.runs,
                                rng.substream(i))
        print(f"{label:<36} max marginal KS = {check.ks:.4f}")

    scaling = triangular_urn_scaling(
        UrnState.triangular(1, 1), [1000, 10_000], args.runs,
        rng.substream(len(cases)))
    print(f"triangular urn: totals={scaling.totals} "
          f"means={np.round(scaling.means, 3).tolist()} "
          f"KS(consecutive)={np.round(scaling.ks_consecutive, 4).tolist()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
