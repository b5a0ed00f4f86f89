"""Homogeneous control: p = q = 2, where the spectrum starts at lambda_1 > 0.

Scans lambda below the discrete principal eigenvalue (expect trivial outcomes)
and solves at lambda_1 itself (expect the discrete sine).

    python scripts/homogeneous_control.py --cells 256
"""
import argparse
import math

import numpy as np

from orlicz_spectra.discretization import Grid
from orlicz_spectra.orlicz_core import ExponentField, PurePower, YoungFunction
from orlicz_spectra.solver import (
    EigenPair,
    EnergyContext,
    ball_minimize,
    default_start,
    descent_bump,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=256)
    args = ap.parse_args()

    g = Grid((1.0,), (args.cells,))
    ctx = EnergyContext.build(YoungFunction(PurePower(2.0)), ExponentField(g, 2.0))
    h = g.h
    lam1 = 4 / h**2 * math.tan(math.pi * h / 2) ** 2
    print(f"discrete lambda_1 = {lam1:.10g} (pi^2 = {math.pi**2:.10g})")
    for lam in list(np.linspace(1.0, 0.95 * lam1, 6)) + [lam1]:
        start = default_start(ctx, lam, 0.9) if lam < lam1 else 0.1 * descent_bump(ctx)
        out = ball_minimize(ctx, lam, 0.9, start)
        tag = (f"eigenpair, lambda_rec = {out.lambda_recovered:.10g}"
               if isinstance(out, EigenPair) else type(out).__name__)
        print(f"lambda = {lam:10.6g}: {tag}")


if __name__ == "__main__":
    main()
