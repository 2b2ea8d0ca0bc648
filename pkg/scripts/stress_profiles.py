"""Tabulate T00(x) across a segment for each boundary condition.

Prints conformal and nonconformal parts side by side; the nonconformal
column grows like 1/x^2 near the walls except in the periodic case.
"""

import argparse

import numpy as np

from zetavac import observables as O
from zetavac import spectrum as S


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--points", type=int, default=9)
    args = p.parse_args()
    xs = np.linspace(0, args.a, args.points + 2)[1:-1]
    for bc in S.BOUNDARY_CONDITIONS:
        print(f"# {bc}, a = {args.a}")
        print(f"{'x':>8} {'T00 conformal':>16} {'T00 nonconformal':>18}")
        for x in xs:
            v = O.stress_energy(O.ObservableRequest(S.segment(args.a, bc)), x)
            print(f"{x:8.4f} {v.conformal_part[0, 0]:16.10f} {v.nonconformal_part[0, 0]:18.10f}")
        print()


if __name__ == "__main__":
    main()
