"""Embedding constant, lambda* and the Theorem 1 eigenpair under mesh refinement.

    python scripts/mesh_study.py --cells 64,128,256,512
"""
import argparse
import time

from orlicz_spectra.discretization import Grid
from orlicz_spectra.orlicz_core import ExponentField, PowerLog, YoungFunction
from orlicz_spectra.solver import (
    EigenPair,
    EnergyContext,
    ball_minimize,
    default_rho,
    default_start,
    estimate_embedding_constant,
    lambda_star,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", default="64,128,256,512")
    ap.add_argument("--lam", type=float, default=0.5)
    args = ap.parse_args()

    yf = YoungFunction(PowerLog(2.5, 1.5))
    print(f"{'cells':>6} {'c1':>9} {'lambda*':>9} {'energy':>12} {'norm':>9} {'time':>6}")
    for n in (int(v) for v in args.cells.split(",")):
        t0 = time.perf_counter()
        g = Grid((1.0,), (n,))
        ctx = EnergyContext.build(yf, ExponentField(g, 1.5 + 0.4 * g.node_coords[0]))
        c1 = estimate_embedding_constant(ctx)
        rho = default_rho(c1)
        ls = lambda_star(rho, c1, ctx.q.q_minus, ctx.indices.p0_sup)
        out = ball_minimize(ctx, args.lam, rho, default_start(ctx, args.lam, rho))
        e, nrm = (out.energy, out.sobolev_norm) if isinstance(out, EigenPair) else (float("nan"),) * 2
        print(f"{n:6d} {c1:9.5f} {ls:9.5f} {e:12.6e} {nrm:9.5f} {time.perf_counter() - t0:6.2f}")


if __name__ == "__main__":
    main()
