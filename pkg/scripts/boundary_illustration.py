"""Show how the boundary clamp reshapes erratic word-level policies.

Draws random non-decreasing policies, clamps them into [i-1+B, i-1+T] and
prints both next to the wait-B and wait-T diagonals, plus AL before and after.

    python scripts/boundary_illustration.py -B 1 -T 3 --samples 5
"""

import argparse
import random

from simulmt.core import BoundaryConfig
from simulmt.metrics import average_lagging
from simulmt.policy import apply_boundary


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-B", type=int, default=1)
    ap.add_argument("-T", type=int, default=3)
    ap.add_argument("--samples", type=int, default=5)
    ap.add_argument("--length", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    cfg = BoundaryConfig(B=args.B, T=args.T)
    rng = random.Random(args.seed)
    J = I = args.length
    lo = [min(i - 1 + cfg.B, J) for i in range(1, I + 1)]
    hi = [min(i - 1 + cfg.T, J) for i in range(1, I + 1)]
    print(f"lower  {lo}")
    print(f"upper  {hi}")
    for _ in range(args.samples):
        g = sorted(rng.randint(1, J) for _ in range(I))
        clamped = apply_boundary(g, cfg, J).g
        print(f"raw    {g}  AL={average_lagging(g, J):.2f}")
        print(f"clamp  {list(clamped)}  AL={average_lagging(clamped, J):.2f}")


if __name__ == "__main__":
    main()
