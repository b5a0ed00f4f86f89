"""Ball minimisation below lambda* for the power-log problem in configs/example1.json.

Solves at several fractions of lambda* and prints one row per solve.

    python scripts/theorem1_pipeline.py --config configs/example1.json --fractions 0.1,0.5,0.9
"""
import argparse

from orlicz_spectra.config import load_config
from orlicz_spectra.solver import (
    EigenPair,
    EnergyContext,
    ball_minimize,
    check_mountain_geometry,
    default_rho,
    default_start,
    estimate_embedding_constant,
    lambda_star,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/example1.json")
    ap.add_argument("--fractions", default="0.1,0.25,0.5,0.75,0.9")
    args = ap.parse_args()

    cfg = load_config(args.config)
    ctx = EnergyContext.build(cfg.young(), cfg.exponent_field())
    c1 = estimate_embedding_constant(ctx, cfg.solver.c1_samples, cfg.seed)
    rho = default_rho(c1)
    ls = lambda_star(rho, c1, ctx.q.q_minus, ctx.indices.p0_sup)
    print(f"p0 = {ctx.indices.p0:.6g}, p0_sup = {ctx.indices.p0_sup:.6g}, "
          f"q- = {ctx.q.q_minus:.6g}, c1 = {c1:.6g}, rho = {rho:.6g}, lambda* = {ls:.6g}")
    print(f"{'frac':>6} {'lambda':>10} {'sphere inf':>11} {'energy':>12} {'residual':>10} "
          f"{'lam_rec/lam-1':>14} {'norm':>9}")
    for frac in (float(f) for f in args.fractions.split(",")):
        lam = frac * ls
        geo = check_mountain_geometry(ctx, lam, rho, c1)
        out = ball_minimize(ctx, lam, rho, default_start(ctx, lam, rho))
        if isinstance(out, EigenPair):
            print(f"{frac:6.2f} {lam:10.4g} {geo.sphere_inf_estimate:11.4g} {out.energy:12.4e} "
                  f"{out.residual:10.2e} {out.lambda_recovered / lam - 1:14.2e} {out.sobolev_norm:9.4g}")
        else:
            print(f"{frac:6.2f} {lam:10.4g} {geo.sphere_inf_estimate:11.4g}  {type(out).__name__}")


if __name__ == "__main__":
    main()
