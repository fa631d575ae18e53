"""Print the Walsh sandwich for the horizontal core on the shipped fixtures.

Usage: python scripts/walsh_table.py [max_k]
"""

import sys
from pathlib import Path

from strebel import load_surface
from strebel.extremal import Curve, walsh_limit_check

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def main(max_k=10):
    lams = [2 ** k for k in range(max_k + 1)]
    for name in ("torus", "l_origami"):
        out = walsh_limit_check(load_surface(FIX / f"{name}.json"), Curve.parse("horizontal-core:0"), lams)
        print(f"{name}: E^2 = {out['E2']}")
        print(f"{'lambda':>8} {'lower/lam':>12} {'upper/lam':>16} {'rel. width':>12}")
        for r in out["rows"]:
            print(f"{r['lambda']:>8} {r['lower']:>12} {r['upper']:>16} {r['relativeWidth']:>12.6f}")
        print()


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 10)
