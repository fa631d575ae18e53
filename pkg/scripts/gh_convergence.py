"""GH epsilon bounds for the pointed square torus along the flow.

Usage: python scripts/gh_convergence.py [r] [grid step]
"""

import sys
import time
from pathlib import Path

from strebel import load_surface, parse_scalar
from strebel.limitsurf import gh_epsilon_check

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def main(r="1/2", h="1/64"):
    t = load_surface(FIX / "torus.json")
    print(f"{'lambda':>7} {'model':>6} {'samples':>8} {'max dev':>10} {'epsilon':>10} {'secs':>6}")
    for k in range(1, 6):
        start = time.perf_counter()
        w = gh_epsilon_check(t, 2 ** k, parse_scalar(r), parse_scalar(h))
        print(f"{2 ** k:>7} {str(w.model_lambda):>6} {w.samples:>8} {w.max_deviation:>10.6f} "
              f"{w.epsilon:>10.6f} {time.perf_counter() - start:>6.2f}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
