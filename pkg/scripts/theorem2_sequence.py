"""Genus-seeded eigenpair sequences for the power-over-log problem in configs/example2.json.

For each lambda, runs the sequence solver up to k_max and prints the norms of
the distinct eigenpairs found (largest first).

    python scripts/theorem2_sequence.py --lambdas 0.5,1,5,10 --k-max 4
"""
import argparse
import time

from orlicz_spectra.config import load_config
from orlicz_spectra.solver import EnergyContext, genus_sequence_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/example2.json")
    ap.add_argument("--lambdas", default="0.5,1,5,10")
    ap.add_argument("--k-max", type=int, default=3)
    args = ap.parse_args()

    cfg = load_config(args.config)
    ctx = EnergyContext.build(cfg.young(), cfg.exponent_field())
    for lam in (float(v) for v in args.lambdas.split(",")):
        t0 = time.perf_counter()
        run = genus_sequence_solve(ctx, lam, args.k_max, seed=cfg.seed)
        norms = ", ".join(f"{p.sobolev_norm:.4g}" for p in run.pairs)
        worst = max((p.residual for p in run.pairs), default=float("nan"))
        print(f"lambda = {lam:g}: {len(run.pairs)} pairs, norms [{norms}], "
              f"max residual {worst:.1e}, seeds negative {run.seeds_negative} "
              f"({time.perf_counter() - t0:.1f} s)")
        for lv in run.levels:
            print(f"    k={lv.k}: t_k={lv.t_k:.4g} m={lv.m:.4g} new={lv.found} omitted={lv.omitted} {lv.note}")


if __name__ == "__main__":
    main()
