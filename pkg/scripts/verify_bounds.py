#!/usr/bin/env python3
"""Check the composition bounds against brute-force enumeration and sampling.

Runs the built-in tiny-instance matrix: for every instance and epsilon the
exact mechanism divergence must stay below the theorem bound. With --trials
a Monte-Carlo estimate is compared against the exact value as well.

Usage:
    python scripts/verify_bounds.py [--trials 100000] [--seed 0]
"""

import argparse
import sys

from spacct import composition_delta, exact_mechanism_law, mc_distinguish
from spacct.oracle import MATRIX_EPSILONS, verification_matrix


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    worst_margin = float("inf")
    worst_name = ""
    violations = 0
    rows = 0
    for instance in verification_matrix():
        law = exact_mechanism_law(instance.scenario, instance.spec)
        for eps in MATRIX_EPSILONS:
            exact = law.delta(eps)
            bound = composition_delta(instance.scenario, instance.spec, eps).total_delta
            margin = bound - exact
            rows += 1
            if margin < worst_margin:
                worst_margin, worst_name = margin, f"{instance.name} eps={eps}"
            status = "ok" if margin >= -1e-9 else "VIOLATED"
            violations += status == "VIOLATED"
            line = f"{instance.name:32s} eps={eps:<4} exact={exact:.6f} bound={bound:.6f} {status}"
            if args.trials:
                mc = mc_distinguish(instance.scenario, instance.spec, eps,
                                    trials=args.trials, seed=args.seed)
                dev = abs(mc.estimate - exact)
                consistent = dev <= 3 * mc.half_width + 1e-12
                violations += not consistent
                line += (f" mc={mc.estimate:.6f}+-{mc.half_width:.6f}"
                         f" {'ok' if consistent else 'INCONSISTENT'}")
            print(line)
    print(f"\n{rows} checks, {violations} violations; "
          f"smallest margin {worst_margin:.3e} at {worst_name}")
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())
