"""Birkhoff-average deviation for the golden and silver rotations.

Prints n * sup-deviation, which stays bounded for a badly approximable angle.
"""

from pathlib import Path

from strebel import load_surface
from strebel.foliation import decompose_vertical
from strebel.iet import birkhoff_deviation, certify

FIX = Path(__file__).resolve().parent.parent / "fixtures"
NS = [10, 100, 1000, 10_000]


def main():
    for name in ("golden_torus", "silver_torus"):
        (m,) = decompose_vertical(load_surface(FIX / f"{name}.json")).minimal
        iet = m.first_return
        cert = certify(iet)
        print(f"{name}: status {cert.status}, period {cert.period_length}, matrix {cert.expansion_matrix}")
        for row in birkhoff_deviation(iet, cert, iet.lengths, NS):
            print(f"  n = {row['n']:>6}  sup = {row['sup']:.3e}  n * sup = {row['n'] * row['sup']:.3f}")


if __name__ == "__main__":
    main()
