"""Closed-form ball energies versus the quadrature engine.

For a ball B_R(0) the weighted perimeter with density a(x) = |x|^p is
exact:

    P_a(B_R) = d omega_d R^(d-1+p),

and for two exponents the Riesz self-energy has a classical closed
form,

    V(B_1) = 16 pi / 3          (d = 2, alpha = 1),
    V(B_1) = 32 pi^2 / 15       (d = 3, alpha = 1),

with the general radius obtained from homogeneity, V(B_R) =
R^(2d-alpha) V(B_1).  This script tabulates both energy terms from the
quadrature engine against the closed forms, which is the quickest way
to see the discretization error of a given grid size.

Run:  python3 demos/ball_energies.py [--n 96]
"""

import argparse
import math

from isoshape.energy import total_energy
from isoshape.geometry import (Configuration, EnergyParams, make_ball,
                               make_grid, unit_ball_volume)


def ball_config(d, R, n):
    grid = make_grid(d, n)
    return Configuration([make_ball(R, [0.0] * d, grid)])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=96, help="grid size (d=2)")
    args = ap.parse_args(argv)

    print("weighted perimeter P_a(B_R), density a(x) = |x|^p")
    print(f"{'d':>2} {'R':>5} {'p':>4} {'quadrature':>14} {'exact':>14} {'rel err':>10}")
    for d in (2, 3):
        n = args.n if d == 2 else max(args.n // 6, 12)
        for R in (0.5, 1.0, 2.0):
            for p in (0.0, 1.0, 2.0):
                config = ball_config(d, R, n)
                params = EnergyParams(d=d, p=p, alpha=1.0)
                bd = total_energy(config, params)
                exact = d * unit_ball_volume(d) * R ** (d - 1 + p)
                rel = abs(bd.weighted_perimeter - exact) / exact
                print(f"{d:>2} {R:>5.2f} {p:>4.1f} {bd.weighted_perimeter:>14.8f}"
                      f" {exact:>14.8f} {rel:>10.2e}")

    print()
    print("Riesz self-energy V(B_R), alpha = 1")
    exact1 = {2: 16.0 * math.pi / 3.0, 3: 32.0 * math.pi ** 2 / 15.0}
    print(f"{'d':>2} {'R':>5} {'quadrature':>14} {'exact':>14} {'rel err':>10}"
          f" {'err estimate':>13}")
    for d in (2, 3):
        n = args.n if d == 2 else max(args.n // 4, 16)
        for R in (0.5, 1.0, 2.0):
            config = ball_config(d, R, n)
            params = EnergyParams(d=d, p=0.0, alpha=1.0, gamma=1.0)
            bd = total_energy(config, params)
            exact = R ** (2 * d - 1.0) * exact1[d]
            rel = abs(bd.riesz - exact) / exact
            print(f"{d:>2} {R:>5.2f} {bd.riesz:>14.8f} {exact:>14.8f}"
                  f" {rel:>10.2e} {bd.riesz_error_estimate:>13.2e}")


if __name__ == "__main__":
    main()
