"""``orlicz-spectra`` command line: audits, single solves, lambda sweeps, sequences, lambda*."""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ProblemConfig, load_config
from .discretization import write_field_csv
from .errors import ConvergenceError, NumericError, OrliczError
from .orlicz_core import (
    check_delta2,
    condition_6biss_probe,
    log_growth_liminf,
    sobolev_conjugate_audit,
)
from .solver import (
    EigenPair,
    EnergyContext,
    TrivialOutcome,
    ball_minimize,
    default_rho,
    default_start,
    estimate_embedding_constant,
    genus_sequence_solve,
    lambda_star,
)

log = logging.getLogger("orlicz_spectra")

PAIR_COLUMNS = ("lambda", "energy", "residual", "lambda_recovered", "sobolev_norm",
                "field_file", "status")


# --------------------------------------------------------------------------
# bit-stable emission
# --------------------------------------------------------------------------

def fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written at 17 significant digits; non-finite floats become null."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return {True: "true", False: "false", None: "null"}[None if obj is None else bool(obj)]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    s = str(obj).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def _write(path: Path, text: str):
    path.write_text(text if text.endswith("\n") else text + "\n")


# --------------------------------------------------------------------------
# audit
# --------------------------------------------------------------------------

def build_context(cfg: ProblemConfig) -> EnergyContext:
    return EnergyContext.build(cfg.young(), cfg.exponent_field())


def run_audit(cfg: ProblemConfig, ctx: EnergyContext) -> dict:
    yf, idx = ctx.yf, ctx.indices
    N = cfg.embedding_dimension
    q_minus, q_plus = ctx.q.q_minus, ctx.q.q_plus
    d2 = check_delta2(yf)
    sc = sobolev_conjugate_audit(yf, N)
    eq2 = bool(sc.near_zero_finite and sc.at_infinity_divergent)
    try:
        biss = condition_6biss_probe(yf, q_plus, N=N)
        biss_note = ""
    except NumericError as exc:
        biss, biss_note = False, str(exc)
    lg = log_growth_liminf(yf)
    eq66 = bool(N < idx.p0 < lg)
    eq6 = bool(1 < q_minus < idx.p0)
    stea2 = bool(q_plus < idx.p0)
    homogeneous = bool(ctx.q.is_constant and abs(q_minus - idx.p0) <= 1e-9
                       and abs(idx.p0_sup - idx.p0) <= 1e-9)
    embedding = bool(eq2 and d2.passed and (biss or eq66))
    thm1 = bool(embedding and eq6)
    thm2 = bool(embedding and stea2)
    failed1 = [n for n, ok in (("Eq2", eq2), ("Delta2", d2.passed), ("Eq6", eq6),
                               ("Eq6biss_or_Eq66", biss or eq66)) if not ok]
    failed2 = [n for n, ok in (("Eq2", eq2), ("Delta2", d2.passed), ("stea2", stea2),
                               ("Eq6biss_or_Eq66", biss or eq66)) if not ok]
    return {
        "config_digest": cfg.digest(),
        "name": cfg.name,
        "nonlinearity": cfg.nonlinearity,
        "exponent": cfg.exponent,
        "embedding_dimension": N,
        "indices": {"p0": idx.p0, "p0_sup": idx.p0_sup, "grid": list(idx.grid_used)},
        "q_minus": q_minus,
        "q_plus": q_plus,
        "delta2": {"liminf_est": d2.liminf_est, "limsup_est": d2.limsup_est,
                   "passed": d2.passed},
        "eq2": {"near_zero_finite": sc.near_zero_finite,
                "at_infinity_divergent": sc.at_infinity_divergent, "holds": eq2},
        "eq6": {"holds": eq6, "detail": f"1 < q- = {fmt(q_minus)} < p0 = {fmt(idx.p0)}"},
        "eq6biss": {"holds": biss, "note": biss_note},
        "stea2": {"holds": stea2, "detail": f"q+ = {fmt(q_plus)} < p0 = {fmt(idx.p0)}"},
        "eq66": {"holds": eq66, "log_growth_liminf": lg},
        "homogeneous": homogeneous,
        "theorem1": {"satisfied": thm1, "failed": failed1},
        "theorem2": {"satisfied": thm2, "failed": failed2},
        "remark2": eq66,
    }


def _audit_lines(a: dict) -> list[str]:
    def yn(v):
        return "yes" if v else ("inconclusive" if v is None else "no")

    lines = [
        f"config {a['name'] or '-'} digest {a['config_digest']}",
        f"indices: p0 = {a['indices']['p0']:.6g}, p0_sup = {a['indices']['p0_sup']:.6g}",
        f"exponent: q- = {a['q_minus']:.6g}, q+ = {a['q_plus']:.6g}",
        f"Delta2: {yn(a['delta2']['passed'])} (tail ratio >= {a['delta2']['liminf_est']:.6g})",
        f"Eq2 (N={a['embedding_dimension']}): near zero finite {yn(a['eq2']['near_zero_finite'])}, "
        f"divergent at infinity {yn(a['eq2']['at_infinity_divergent'])}",
        f"Eq6: {yn(a['eq6']['holds'])} ({a['eq6']['detail']})",
        f"Eq6biss: {yn(a['eq6biss']['holds'])}" + (f" ({a['eq6biss']['note']})" if a['eq6biss']['note'] else ""),
        f"stea2: {yn(a['stea2']['holds'])} ({a['stea2']['detail']})",
        f"Eq66: {yn(a['eq66']['holds'])} (liminf log Phi/log t ~ {a['eq66']['log_growth_liminf']:.6g})",
    ]
    for key, label in (("theorem1", "Theorem 1"), ("theorem2", "Theorem 2")):
        t = a[key]
        lines.append(f"{label}: " + ("satisfied" if t["satisfied"]
                                     else "not satisfied (" + ", ".join(t["failed"]) + ")"))
    lines.append(f"Remark 2 (Eq66 in place of Eq6biss): {yn(a['remark2'])}")
    if a["homogeneous"]:
        lines.append("homogeneous case: q is constant and equal to p0 = p0_sup")
    return lines


class Refused(Exception):
    pass


def _gate(audit: dict, need: tuple[str, ...], force: bool):
    if any(audit[k]["satisfied"] for k in need) or force:
        return
    parts = [f"{k} fails {', '.join(audit[k]['failed'])}" for k in need]
    raise Refused("hypotheses not met: " + "; ".join(parts) + " (use --force to run anyway)")


# --------------------------------------------------------------------------
# solving
# --------------------------------------------------------------------------

def _theorem1_setup(cfg: ProblemConfig, ctx: EnergyContext) -> dict:
    c1 = estimate_embedding_constant(ctx, cfg.solver.c1_samples, cfg.seed)
    rho = cfg.solver.rho if cfg.solver.rho is not None else default_rho(c1)
    try:
        ls = lambda_star(rho, c1, ctx.q.q_minus, ctx.indices.p0_sup)
    except OrliczError:
        ls = math.nan
    return {"c1": c1, "rho": rho, "lambda_star": ls}


def solve_one(cfg: ProblemConfig, ctx: EnergyContext, lam: float, setup: dict):
    """Ball minimisation for lambda < lambda*, else unconstrained descent when sup q < p0.

    Configurations in neither regime (only reachable with --force) use the ball.
    """
    s = cfg.solver
    below = lam < setup["lambda_star"]  # False when lambda* is nan
    if ctx.q.q_plus < ctx.indices.p0 and not below:
        run = genus_sequence_solve(ctx, lam, 1, tol=s.tol, stop=s.stop, max_iter=s.max_iter,
                                   seed=cfg.seed)
        if run.pairs:
            return run.pairs[0]
        return ConvergenceError("no seed converged", reason="genus")
    try:
        return ball_minimize(ctx, lam, setup["rho"], default_start(ctx, lam, setup["rho"]),
                             tol=s.tol, stop=s.stop, max_iter=s.max_iter)
    except ConvergenceError as exc:
        return exc


def _pair_rows(results, out: Path, ctx: EnergyContext):
    rows = []
    for i, (lam, r) in enumerate(results):
        if isinstance(r, EigenPair):
            name = f"field_{i:03d}.csv"
            write_field_csv(r.u, out / name)
            rows.append([fmt(lam), fmt(r.energy), fmt(r.residual), fmt(r.lambda_recovered),
                         fmt(r.sobolev_norm), name, "converged"])
        elif isinstance(r, TrivialOutcome):
            rows.append([fmt(lam), fmt(0.0), "", "", fmt(r.final_norm), "", "trivial"])
        else:
            name = ""
            if r.iterate is not None:
                name = f"field_{i:03d}.csv"
                write_field_csv(r.iterate, out / name)
            res = "" if r.residual is None else fmt(r.residual)
            rows.append([fmt(lam), "", res, "", "", name, f"failed:{r.reason}"])
    text = ",".join(PAIR_COLUMNS) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    (out / "eigenpairs.csv").write_text(text)
    return rows


def _describe(lam, r) -> str:
    if isinstance(r, EigenPair):
        return (f"lambda={lam:.6g}: eigenpair energy={r.energy:.6g} residual={r.residual:.3g} "
                f"lambda_recovered={r.lambda_recovered:.10g} norm={r.sobolev_norm:.6g}")
    if isinstance(r, TrivialOutcome):
        return f"lambda={lam:.6g}: trivial outcome (iterate collapsed to 0)"
    return f"lambda={lam:.6g}: no convergence ({r})"


def _record(result) -> dict:
    if isinstance(result, EigenPair):
        return {"status": "converged", "energy": result.energy, "residual": result.residual,
                "lambda_recovered": result.lambda_recovered, "sobolev_norm": result.sobolev_norm,
                "iterations": result.iterations}
    if isinstance(result, TrivialOutcome):
        return {"status": "trivial", "iterations": result.iterations,
                "final_norm": result.final_norm}
    return {"status": "failed", "reason": result.reason, "residual": result.residual,
            "message": str(result)}


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def execute(command: str, cfg: ProblemConfig, out: Path, *, force: bool = False,
            lam: float | None = None, lambdas=None, k_max: int | None = None) -> list[str]:
    """Run one command, write artifacts into ``out`` and return the stdout summary lines."""
    out.mkdir(parents=True, exist_ok=True)
    ctx = build_context(cfg)
    audit = run_audit(cfg, ctx)
    _write(out / "audit.json", to_json(audit))
    record = {"command": command, "config_digest": cfg.digest(), "seed": cfg.seed,
              "config": cfg.to_dict()}
    lines = _audit_lines(audit) if command == "audit" else []

    if command == "lambda-star":
        _gate(audit, ("theorem1",), force)
        setup = _theorem1_setup(cfg, ctx)
        record["outputs"] = setup
        lines.append(f"c1 = {setup['c1']:.10g} (probe estimate x1.25), rho = {setup['rho']:.10g}")
        lines.append(f"lambda_star = {setup['lambda_star']:.10g}")

    elif command in ("solve", "sweep"):
        _gate(audit, ("theorem1", "theorem2"), force)
        if command == "solve":
            lam = cfg.lam if lam is None else lam
            if lam is None:
                raise Refused("solve needs --lambda or a 'lambda' config field")
            lam_list = [lam]
        else:
            lam_list = list(cfg.lambdas if lambdas is None else lambdas)
            if not lam_list:
                raise Refused("sweep needs --lambdas or a 'lambdas' config field")
        setup = _theorem1_setup(cfg, ctx)
        lines.append(f"ball radius rho = {setup['rho']:.10g}, c1 = {setup['c1']:.10g}, "
                     f"lambda_star = {setup['lambda_star']:.10g}")
        results = []
        for lv in lam_list:
            r = solve_one(cfg, ctx, float(lv), setup)
            results.append((float(lv), r))
            lines.append(_describe(lv, r))
        _pair_rows(results, out, ctx)
        record["outputs"] = {"setup": setup, "results": [
            dict(**{"lambda": lv}, **_record(r)) for lv, r in results]}

    elif command == "sequence":
        _gate(audit, ("theorem2",), force)
        lam = cfg.lam if lam is None else lam
        if lam is None:
            raise Refused("sequence needs --lambda or a 'lambda' config field")
        k_max = cfg.k_max if k_max is None else k_max
        run = genus_sequence_solve(ctx, lam, k_max, tol=cfg.solver.tol, stop=cfg.solver.stop,
                                   max_iter=cfg.solver.max_iter, seed=cfg.seed)
        _pair_rows([(lam, p) for p in run.pairs], out, ctx)
        levels = [{"k": lv.k, "t_k": lv.t_k, "m": lv.m, "seed_energies": lv.seed_energies,
                   "seeds_negative": all(e < 0 for e in lv.seed_energies), "found": lv.found,
                   "omitted": lv.omitted, "note": lv.note} for lv in run.levels]
        record["outputs"] = {"levels": levels, "pairs": [_record(p) for p in run.pairs]}
        for lv in run.levels:
            lines.append(f"k={lv.k}: t_k={lv.t_k:.6g}, max seed energy {max(lv.seed_energies):.6g}, "
                         f"new pairs {lv.found}, omitted seeds {lv.omitted}")
        lines.extend(_describe(lam, p) for p in run.pairs)

    elif command == "audit":
        record["outputs"] = {"theorem1": audit["theorem1"]["satisfied"],
                             "theorem2": audit["theorem2"]["satisfied"]}
    else:
        raise Refused(f"unknown command {command!r}")

    _write(out / "run.json", to_json(record))
    return lines


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orlicz-spectra", description=__doc__)
    ap.add_argument("command", choices=["audit", "solve", "sweep", "sequence", "lambda-star"])
    ap.add_argument("--config", required=True, help="JSON problem description")
    ap.add_argument("--lambda", dest="lam", type=float, help="eigenvalue parameter")
    ap.add_argument("--lambdas", help="comma separated lambda list for sweep")
    ap.add_argument("--k-max", type=int, help="largest genus level for sequence")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--out", default="results", help="output directory (default: results)")
    ap.add_argument("--force", action="store_true", help="run even if the audit fails")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        lambdas = None
        if args.lambdas is not None:
            try:
                lambdas = [float(v) for v in args.lambdas.split(",") if v.strip()]
            except ValueError:
                raise Refused(f"--lambdas: cannot parse {args.lambdas!r}") from None
        lines = execute(args.command, cfg, Path(args.out), force=args.force, lam=args.lam,
                        lambdas=lambdas, k_max=args.k_max)
    except Refused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except OrliczError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    print(f"wall time {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
