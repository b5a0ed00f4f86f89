"""Energy functional, its exact discrete gradient, and the eigenpair searches.

The discrete energy is

    J(u) = V * sum_c Phi(|G_c u|) - lam * V * sum_c |A_c u|^q_c / q_c

with ``G`` the cell gradient, ``A`` the node-to-cell average and ``V`` the
cell volume. A critical point with ``u != 0`` is a discrete eigenpair.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import (
    Grid,
    ScalarField,
    build_bump,
    build_disjoint_bumps,
    bump_layout,
)
from .errors import CapacityError, ConvergenceError, DomainError
from .orlicz_core import (
    ExponentField,
    GrowthIndices,
    YoungFunction,
    estimate_indices,
    sobolev_norm,
    variable_exponent_modular,
    variable_exponent_norm,
)

log = logging.getLogger(__name__)

TRIVIAL_NORM = 1e-7


@dataclass(frozen=True, eq=False)
class EnergyContext:
    yf: YoungFunction
    q: ExponentField
    indices: GrowthIndices
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, yf: YoungFunction, q: ExponentField) -> "EnergyContext":
        return cls(yf, q, estimate_indices(yf))

    @property
    def grid(self) -> Grid:
        return self.q.grid

    def discrete(self, pinned: tuple[int, ...] = ()) -> "_Discrete":
        """Operators on the interior nodes, minus any pinned first-axis node columns."""
        key = tuple(sorted(pinned))
        if key not in self._cache:
            self._cache[key] = _Discrete(self, key)
        return self._cache[key]


class _Discrete:
    """Energy, gradient and Hessian as functions of the free node values."""

    def __init__(self, ctx: EnergyContext, pinned: tuple[int, ...]):
        grid = ctx.grid
        self.ctx = ctx
        self.grid = grid
        free_mask = ~grid.boundary_mask.copy()
        for i in pinned:
            free_mask[i, ...] = False
        self.free = np.flatnonzero(free_mask.ravel())
        ops = grid.operators
        self.G = [ops[k][:, self.free].tocsr() for k in ("dx", "dy")[: grid.dim]]
        self.GT = [g.T.tocsr() for g in self.G]
        self.A = ops["avg"][:, self.free].tocsr()
        self.AT = self.A.T.tocsr()
        self.V = grid.cell_volume
        self.qc = ctx.q.cell_values
        self.yf = ctx.yf

    def field(self, x) -> ScalarField:
        vals = np.zeros(self.grid.n_nodes)
        vals[self.free] = x
        return ScalarField(self.grid, vals.reshape(self.grid.nodes_shape))

    def restrict(self, u: ScalarField) -> np.ndarray:
        return u.values.ravel()[self.free]

    def _grads(self, x):
        comps = [g @ x for g in self.G]
        mag = np.abs(comps[0]) if len(comps) == 1 else np.hypot(*comps)
        return comps, mag

    def energy(self, x, lam) -> float:
        _, mag = self._grads(x)
        ubar = np.abs(self.A @ x)
        return float(self.V * (np.sum(self.yf.Phi(mag)) - lam * np.sum(ubar**self.qc / self.qc)))

    def _flux(self, comps, mag):
        if len(comps) == 1:
            return [self.yf.phi(comps[0])]
        w = np.zeros_like(mag)
        nz = mag > 0
        w[nz] = self.yf.phi(mag[nz]) / mag[nz]
        return [w * c for c in comps]

    def _source(self, x):
        ubar = self.A @ x
        a = np.abs(ubar)
        out = np.zeros_like(ubar)
        nz = a > 0
        out[nz] = a[nz] ** (self.qc[nz] - 2) * ubar[nz]
        return ubar, out

    def gradient(self, x, lam) -> np.ndarray:
        comps, mag = self._grads(x)
        flux = self._flux(comps, mag)
        _, src = self._source(x)
        g = sum(gt @ f for gt, f in zip(self.GT, flux))
        return self.V * (g - lam * (self.AT @ src))

    def hessian(self, x, lam) -> sp.csr_matrix:
        comps, mag = self._grads(x)
        V = self.V
        if len(comps) == 1:
            d = self.yf.dphi(mag)
            H = self.GT[0] @ sp.diags(V * d) @ self.G[0]
        else:
            s = np.maximum(mag, 1e-300)
            a = self.yf.phi(s) / s
            dp = self.yf.dphi(s)
            nx, ny = comps[0] / s, comps[1] / s
            bxx = a + (dp - a) * nx * nx
            byy = a + (dp - a) * ny * ny
            bxy = (dp - a) * nx * ny
            Gx, Gy = self.G
            H = (Gx.T @ sp.diags(V * bxx) @ Gx + Gy.T @ sp.diags(V * byy) @ Gy
                 + Gx.T @ sp.diags(V * bxy) @ Gy + Gy.T @ sp.diags(V * bxy) @ Gx)
        ubar = np.abs(self.A @ x)
        floor = 1e-12 * max(ubar.max(), 1e-300)
        w = (self.qc - 1) * np.maximum(ubar, floor) ** (self.qc - 2)
        H = H - lam * V * (self.AT @ sp.diags(w) @ self.A)
        return sp.csc_matrix(H)

    def picard(self, x) -> sp.csc_matrix:
        """Weighted stiffness matrix sum_c V a(|G_c|) G_c^T G_c (a = phi(t)/t), regularised."""
        _, mag = self._grads(x)
        w = np.zeros_like(mag)
        nz = mag > 0
        w[nz] = self.yf.phi(mag[nz]) / mag[nz]
        top = w.max() if w.size and w.max() > 0 else 1.0
        w = np.maximum(w, 1e-6 * top)
        P = sum(gt @ sp.diags(self.V * w) @ g for gt, g in zip(self.GT, self.G))
        return sp.csc_matrix(P)

    def residual(self, x, lam) -> float:
        """Sup-norm of the nodal weak-form residual divided by the cell volume."""
        g = self.gradient(x, lam)
        return float(np.max(np.abs(g)) / self.V) if g.size else 0.0


def _full(ctx: EnergyContext) -> _Discrete:
    return ctx.discrete()


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------

def _check_lambda(lam):
    if lam < 0:
        raise DomainError("lambda must be nonnegative")


def energy(ctx: EnergyContext, u: ScalarField, lam: float) -> float:
    _check_lambda(lam)
    d = _full(ctx)
    return d.energy(d.restrict(u), lam)


def energy_gradient(ctx: EnergyContext, u: ScalarField, lam: float) -> ScalarField:
    _check_lambda(lam)
    d = _full(ctx)
    return d.field(d.gradient(d.restrict(u), lam))


def weak_residual(ctx: EnergyContext, u: ScalarField, lam: float) -> float:
    d = _full(ctx)
    return d.residual(d.restrict(u), lam)


def recovered_lambda(ctx: EnergyContext, u: ScalarField) -> float:
    """int a(|grad u|)|grad u|^2 / int |u|^q, i.e. the weak form tested with v = u."""
    d = _full(ctx)
    x = d.restrict(u)
    comps, mag = d._grads(x)
    num = np.sum(ctx.yf.phi(mag) * mag)
    den = np.sum(np.abs(d.A @ x) ** d.qc)
    if den == 0:
        raise DomainError("zero field has no recovered eigenvalue")
    return float(num / den)


def rayleigh_quotient(ctx: EnergyContext, u: ScalarField) -> float:
    d = _full(ctx)
    x = d.restrict(u)
    _, mag = d._grads(x)
    den = np.sum(np.abs(d.A @ x) ** d.qc)
    if den == 0:
        raise DomainError("quotient undefined for the zero field")
    return float(np.sum(ctx.yf.Phi(mag)) / den)


def quotient_scaling_sweep(ctx: EnergyContext, bump: ScalarField, t_list) -> list[float]:
    return [rayleigh_quotient(ctx, t * bump) for t in t_list]


# --------------------------------------------------------------------------
# eigenpair records
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    u: ScalarField
    energy: float
    residual: float
    lambda_recovered: float
    sobolev_norm: float
    iterations: int = 0


@dataclass(frozen=True)
class TrivialOutcome:
    lam: float
    iterations: int
    final_norm: float


def make_pair(ctx: EnergyContext, lam: float, u: ScalarField, iterations: int = 0) -> EigenPair:
    return EigenPair(
        lam=float(lam),
        u=u,
        energy=energy(ctx, u, lam),
        residual=weak_residual(ctx, u, lam),
        lambda_recovered=recovered_lambda(ctx, u),
        sobolev_norm=sobolev_norm(ctx.yf, u),
        iterations=iterations,
    )


# --------------------------------------------------------------------------
# embedding constant, lambda*, geometry
# --------------------------------------------------------------------------

def probe_fields(grid: Grid, n_samples: int, seed: int = 0) -> list[ScalarField]:
    """Deterministic probe family: principal sine, ramps/tents, bumps, random smooth fields."""
    rng = np.random.default_rng(seed)
    X = [c / L for c, L in zip(grid.node_coords, grid.extents)]

    def clamp(vals):
        return ScalarField(grid, np.where(grid.boundary_mask, 0.0, vals))

    fields = [clamp(np.prod([np.sin(np.pi * x) for x in X], axis=0))]
    for a in (0.25, 0.5, 0.75):
        fields.append(clamp(np.prod([np.minimum(x / a, (1 - x) / (1 - a)) for x in X], axis=0)))
    r = 0.2 * min(grid.extents)
    for frac in (0.3, 0.5, 0.7):
        c = [frac * L for L in grid.extents]
        fields.append(build_bump(grid, c, 0.5 * r, r))
    modes = 6
    while len(fields) < n_samples:
        vals = np.zeros(grid.nodes_shape)
        for ks in product(range(1, modes + 1), repeat=grid.dim):
            amp = rng.normal() / float(np.sum(np.square(ks)))
            vals += amp * np.prod([np.sin(k * np.pi * x) for k, x in zip(ks, X)], axis=0)
        fields.append(clamp(vals))
    return fields[:n_samples]


def estimate_embedding_constant(ctx: EnergyContext, n_samples: int = 64, seed: int = 0,
                                safety: float = 1.25) -> float:
    """safety * max over probes of |u|_q(x) / ||u||."""
    if n_samples < 32:
        raise DomainError("need at least 32 probe fields")
    best = 0.0
    for u in probe_fields(ctx.grid, n_samples, seed):
        s = sobolev_norm(ctx.yf, u)
        if s == 0:
            continue
        best = max(best, variable_exponent_norm(u, ctx.q) / s)
    return safety * best


def default_rho(c1: float) -> float:
    return 0.9 * min(1.0, 1.0 / c1)


def lambda_star(rho: float, c1: float, q_minus: float, p0_sup: float) -> float:
    """rho^(p0_sup - q-) / 2 * q- / c1^q-.

    The radius may reach min(1, 1/c1): the sphere estimate only needs
    ``|u|_q(x) <= 1`` and ``||u|| <= 1`` there.
    """
    if not (c1 > 0 and 0 < rho <= min(1.0, 1.0 / c1)):
        raise DomainError("rho must satisfy 0 < rho <= min(1, 1/c1)")
    if not q_minus < p0_sup:
        raise DomainError("need q_minus < p0_sup")
    return rho ** (p0_sup - q_minus) / 2 * q_minus / c1**q_minus


def descent_bump(ctx: EnergyContext) -> ScalarField:
    """Bump equal to 1 near the minimum of q, standing in for the set {q < q- + eps0}.

    The ball has radius R = min(extents)/4 and is centred at the node of
    smallest q among nodes whose ball fits in the box. Containment of the ball
    in the sublevel set is not enforced; a continuous q makes it hold once R is
    small relative to the modulus of continuity.
    """
    grid = ctx.grid
    R = 0.25 * min(grid.extents)
    coords = [c.ravel() for c in grid.node_coords]
    ok = np.ones(grid.n_nodes, dtype=bool)
    for c, L in zip(coords, grid.extents):
        ok &= (c >= R) & (c <= L - R)
    qv = ctx.q.values.ravel()
    idx = np.flatnonzero(ok)
    j = idx[np.argmin(qv[idx])]
    center = [c[j] for c in coords]
    return build_bump(grid, center, 0.5 * R, R)


@dataclass(frozen=True)
class GeometryReport:
    rho: float
    sphere_inf_estimate: float
    descent_direction_found: bool
    lambda_star: float
    alpha: float
    c1: float
    sphere_lower_bound: float


def sphere_lower_bound(rho, lam, c1, q_minus, p0_sup) -> float:
    return rho**q_minus * (rho ** (p0_sup - q_minus) - lam * c1**q_minus / q_minus)


def check_mountain_geometry(ctx: EnergyContext, lam: float, rho: float, c1: float | None = None,
                            n_samples: int = 48, seed: int = 0) -> GeometryReport:
    _check_lambda(lam)
    if c1 is None:
        c1 = estimate_embedding_constant(ctx, seed=seed)
    if not (0 < rho <= min(1.0, 1.0 / c1)):
        raise DomainError("rho must satisfy 0 < rho <= min(1, 1/c1)")
    q_minus, p_sup = ctx.q.q_minus, ctx.indices.p0_sup
    try:
        lstar = lambda_star(rho, c1, q_minus, p_sup)
    except DomainError:
        lstar = math.nan
    inf_val = math.inf
    for u in probe_fields(ctx.grid, n_samples, seed):
        s = sobolev_norm(ctx.yf, u)
        if s > 0:
            inf_val = min(inf_val, energy(ctx, (rho / s) * u, lam))
    bump = descent_bump(ctx)
    found = lam > 0 and any(energy(ctx, 10.0**-j * bump, lam) < 0 for j in range(1, 7))
    return GeometryReport(rho, inf_val, bool(found), lstar, rho**p_sup / 2, c1,
                          sphere_lower_bound(rho, lam, c1, q_minus, p_sup))


# --------------------------------------------------------------------------
# descent
# --------------------------------------------------------------------------

@dataclass
class _DescentState:
    x: np.ndarray
    status: str
    iterations: int
    residual: float


def _direction(disc: _Discrete, x, g, lam, use_newton: bool):
    P = disc.picard(x)
    dP = -spla.spsolve(P, g)
    if use_newton:
        try:
            with np.errstate(all="ignore"):
                dN = -spla.spsolve(disc.hessian(x, lam), g)
        except RuntimeError:
            dN = None
        if dN is not None and np.all(np.isfinite(dN)):
            gd = g @ dN
            if gd < 0 and np.linalg.norm(dN) <= 10 * np.linalg.norm(dP):
                return dN
    return dP


def _descend(disc: _Discrete, lam: float, x0: np.ndarray, *, rho: float | None = None,
             stop: float = 1e-8, max_iter: int = 50000, armijo: float = 1e-4,
             backtrack: float = 0.5, use_newton: bool = True) -> _DescentState:
    """Variable-metric projected gradient descent with Armijo backtracking.

    The search direction is the gradient taken in the metric of the Hessian
    when that gives a descent direction of reasonable size, otherwise in the
    metric of the weighted stiffness matrix. Iterates leaving the ball of
    Orlicz-Sobolev radius ``rho`` are scaled back onto its sphere.
    """
    yf = disc.yf
    x = np.array(x0, dtype=float)
    J = disc.energy(x, lam)
    flat = 0
    for it in range(max_iter):
        g = disc.gradient(x, lam)
        res = float(np.max(np.abs(g)) / disc.V) if g.size else 0.0
        if res <= stop:
            return _DescentState(x, "converged", it, res)
        d = _direction(disc, x, g, lam, use_newton)
        step = 1.0
        while True:
            xn = x + step * d
            projected = False
            if rho is not None:
                nrm = sobolev_norm(yf, disc.field(xn))
                if nrm > rho:
                    xn = xn * (rho / nrm)
                    projected = True
            Jn = disc.energy(xn, lam)
            if Jn <= J + armijo * (g @ (xn - x)):
                break
            step *= backtrack
            if step < 1e-16:
                return _DescentState(x, "stalled", it, res)
        if projected and abs(J - Jn) <= 1e-14 * max(abs(J), 1e-300):
            flat += 1
            if flat >= 25:
                return _DescentState(xn, "boundary", it + 1, res)
        else:
            flat = 0
        x, J = xn, Jn
    g = disc.gradient(x, lam)
    return _DescentState(x, "maxiter", max_iter, float(np.max(np.abs(g)) / disc.V))


def _newton_polish(disc: _Discrete, lam: float, x: np.ndarray, *, stop: float = 1e-10,
                   max_iter: int = 40) -> np.ndarray:
    """Damped Newton on grad J = 0 with the residual as merit; finds saddles as well as minima."""
    x = np.array(x, dtype=float)
    res = disc.residual(x, lam)
    for _ in range(max_iter):
        if res <= stop:
            break
        g = disc.gradient(x, lam)
        try:
            with np.errstate(all="ignore"):
                d = -spla.spsolve(disc.hessian(x, lam), g)
        except RuntimeError:
            break
        if not np.all(np.isfinite(d)):
            break
        step = 1.0
        while step > 1e-6:
            xn = x + step * d
            rn = disc.residual(xn, lam)
            if rn < res:
                break
            step *= 0.5
        else:
            break
        x, res = xn, rn
    return x


def ball_minimize(ctx: EnergyContext, lam: float, rho: float | None, start: ScalarField, *,
                  tol: float = 1e-6, stop: float = 1e-8,
                  max_iter: int = 50000) -> EigenPair | TrivialOutcome:
    """Minimise J over the closed Orlicz-Sobolev ball of radius ``rho`` from ``start``.

    ``rho=None`` removes the constraint. Returns an :class:`EigenPair` for an
    interior critical point with residual <= ``tol``, a :class:`TrivialOutcome`
    when the iterate collapses to zero, and raises :class:`ConvergenceError`
    otherwise (iteration cap, stalled line search, or a minimiser stuck on the
    sphere).
    """
    _check_lambda(lam)
    disc = _full(ctx)
    norm0 = sobolev_norm(ctx.yf, start)
    if norm0 == 0:
        return TrivialOutcome(lam, 0, 0.0)
    if rho is not None and norm0 > rho * (1 + 1e-9):
        raise DomainError(f"start has norm {norm0:.6g} outside the ball of radius {rho:.6g}")
    st = _descend(disc, lam, disc.restrict(start), rho=rho, stop=stop, max_iter=max_iter)
    u = disc.field(st.x)
    nrm = sobolev_norm(ctx.yf, u)
    if nrm < TRIVIAL_NORM:
        return TrivialOutcome(lam, st.iterations, nrm)
    res = disc.residual(st.x, lam)
    if rho is not None and nrm >= rho * (1 - 1e-9):
        raise ConvergenceError("iterate pinned on the sphere of the ball", iterate=u, residual=res,
                               iterations=st.iterations, reason="boundary")
    if res > tol:
        raise ConvergenceError(f"descent ended ({st.status}) with residual {res:.3g} > {tol:.3g}",
                               iterate=u, residual=res, iterations=st.iterations, reason=st.status)
    return make_pair(ctx, lam, u, st.iterations)


def default_start(ctx: EnergyContext, lam: float, rho: float | None = None) -> ScalarField:
    """Largest t in {1e-1, ..., 1e-6} with J(t * bump) < 0 inside the ball; else 1e-6."""
    bump = descent_bump(ctx)
    for j in range(1, 7):
        u = 10.0**-j * bump
        if rho is not None and sobolev_norm(ctx.yf, u) >= rho:
            continue
        if energy(ctx, u, lam) < 0:
            return u
    return 1e-6 * bump


# --------------------------------------------------------------------------
# coercivity (Theorem 2 regime)
# --------------------------------------------------------------------------

def alpha_lower(t, p0, p0_sup):
    """Lower bound for int Phi(|grad u|) in terms of ||u|| = t: t^p0_sup for t <= 1, t^p0 above."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 1, t**p0_sup, t**p0)


def ray_is_coercive(radii, values) -> bool:
    """Energy along a ray grows over the last decade of radii: positive and strictly increasing."""
    radii, values = np.asarray(radii), np.asarray(values)
    tail = radii >= radii.max() / 10
    v = values[tail]
    return bool(v.size >= 2 and np.all(v > 0) and np.all(np.diff(v) > 0))


@dataclass(frozen=True)
class CoercivityReport:
    d1: float
    d2: float
    bound_holds: bool
    eventually_increasing: bool
    worst_margin: float
    rays: list = field(repr=False, default_factory=list)

    @property
    def passed(self) -> bool:
        return self.bound_holds and self.eventually_increasing


def _modular_ratio(u: ScalarField, q_const: float, norm: float) -> float:
    ubar = np.abs(u.grid.operators["avg"] @ u.values.ravel())
    return float(np.sum(ubar**q_const) * u.grid.cell_volume) / norm**q_const


def coercivity_probe(ctx: EnergyContext, lam: float, directions, radii,
                     slack: float = 1e-9) -> CoercivityReport:
    q_minus, q_plus = ctx.q.q_minus, ctx.q.q_plus
    p0, p_sup = ctx.indices.p0, ctx.indices.p0_sup
    if not q_plus < p0:
        raise DomainError(f"coercivity needs sup q < p0 (got {q_plus:.6g} >= {p0:.6g})")
    _check_lambda(lam)
    radii = np.sort(np.asarray(radii, dtype=float))
    norms = [sobolev_norm(ctx.yf, v) for v in directions]
    probes = list(directions) + probe_fields(ctx.grid, 32)
    pn = norms + [sobolev_norm(ctx.yf, v) for v in probes[len(directions):]]
    d1 = max(_modular_ratio(v, q_plus, n) for v, n in zip(probes, pn) if n > 0)
    d2 = max(_modular_ratio(v, q_minus, n) for v, n in zip(probes, pn) if n > 0)
    holds, increasing, worst, rays = True, True, math.inf, []
    for v, n in zip(directions, norms):
        vals = np.array([energy(ctx, r * v, lam) for r in radii])
        t = radii * n
        bound = alpha_lower(t, p0, p_sup) - d1 * lam / q_minus * t**q_plus - d2 * lam / q_minus * t**q_minus
        margin = vals - bound
        scale = np.maximum(np.abs(vals), np.abs(bound)) + 1e-300
        ok = np.all(margin >= -slack * scale)
        inc = ray_is_coercive(radii, vals)
        holds &= bool(ok)
        increasing &= inc
        worst = min(worst, float(np.min(margin / scale)))
        rays.append({"norm": n, "energies": vals, "bound": bound, "coercive": inc})
    return CoercivityReport(d1, d2, bool(holds), bool(increasing), worst, rays)


# --------------------------------------------------------------------------
# genus-seeded sequence (Theorem 2 regime)
# --------------------------------------------------------------------------

@dataclass
class GenusLevel:
    k: int
    t_k: float
    m: float
    seed_energies: list[float]
    found: int = 0
    omitted: int = 0
    note: str = ""


@dataclass
class SequenceRun:
    lam: float
    pairs: list[EigenPair]
    levels: list[GenusLevel]

    @property
    def seeds_negative(self) -> bool:
        return all(e < 0 for lv in self.levels for e in lv.seed_energies)


def _sphere_samples(ctx: EnergyContext, bumps: list[ScalarField], n_random: int = 24,
                    seed: int = 0):
    """Unit-norm elements of span(bumps): 8 structured seeds plus random mixtures for m."""
    k = len(bumps)
    patterns = []
    alt = [(-1.0) ** i for i in range(k)]
    plus = [1.0] * k
    vertex_first = [1.0] + [0.0] * (k - 1)
    vertex_last = [0.0] * (k - 1) + [1.0]
    for pat in (alt, plus, vertex_first, vertex_last):
        for sgn in (1.0, -1.0):
            c = tuple(sgn * a for a in pat)
            if c not in patterns:
                patterns.append(c)
    rng = np.random.default_rng(seed + k)
    extra = [tuple(rng.normal(size=k)) for _ in range(n_random)]

    def unit(coeffs):
        u = sum((c * b for c, b in zip(coeffs, bumps) if c != 0), ScalarField.zeros(ctx.grid))
        return u * (1.0 / sobolev_norm(ctx.yf, u))

    return [unit(c) for c in patterns], [unit(c) for c in extra], patterns


def genus_seeds(ctx: EnergyContext, lam: float, k: int, seed: int = 0):
    """Seeds t_k * theta with theta on the unit sphere of span{theta_1..theta_k}.

    t_k is half the largest t in (0, 1) with 1 - lam/q+ * m / t^(p0 - q+) < 0,
    m being the smallest int |theta|^q(x) found over the sphere samples.
    """
    q_plus, p0 = ctx.q.q_plus, ctx.indices.p0
    if not q_plus < p0:
        raise DomainError(f"genus construction needs sup q < p0 (got {q_plus:.6g} >= {p0:.6g})")
    bumps = build_disjoint_bumps(ctx.grid, k)
    seeds, extra, patterns = _sphere_samples(ctx, bumps, seed=seed)
    m = min(variable_exponent_modular(u, ctx.q) for u in seeds + extra)
    t_bound = (lam * m / q_plus) ** (1.0 / (p0 - q_plus))
    t_k = 0.5 * min(1.0, t_bound)
    return t_k, m, [t_k * u for u in seeds], patterns


def _same_pair(a: EigenPair, b: EigenPair, rtol: float = 1e-6) -> bool:
    ua, ub = a.u.values, b.u.values
    scale = max(np.max(np.abs(ua)), np.max(np.abs(ub)))
    return bool(min(np.max(np.abs(ua - ub)), np.max(np.abs(ua + ub))) <= rtol * scale)


def _slot_masses(u: ScalarField, interfaces: list[int]) -> list[float]:
    edges = [0] + list(interfaces) + [u.grid.cells[0]]
    return [float(np.max(np.abs(u.values[a:b + 1, ...]))) for a, b in zip(edges[:-1], edges[1:])]


def genus_sequence_solve(ctx: EnergyContext, lam: float, k_max: int, *, tol: float = 1e-6,
                         stop: float = 1e-8, max_iter: int = 50000, seed: int = 0) -> SequenceRun:
    """Critical points of J seeded from the sets A_k(t_k), k = 1..k_max.

    Each seed is first descended with the k-1 slot interfaces held at zero,
    which keeps the sign pattern of the seed; when every slot carries mass the
    result is Newton-polished on the full problem (this is what reaches the
    sign-changing critical points). Otherwise, or if polishing fails, descent
    continues without the interfaces. Only pairs with residual <= ``tol``,
    negative energy and nontrivial norm are kept; the list is deduplicated up
    to sign and sorted by decreasing Orlicz-Sobolev norm.
    """
    _check_lambda(lam)
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    full = _full(ctx)
    pairs: list[EigenPair] = []
    levels: list[GenusLevel] = []
    for k in range(1, k_max + 1):
        try:
            lay = bump_layout(ctx.grid, k)
        except CapacityError as exc:
            log.warning("stopping at k=%d: %s", k - 1, exc)
            if levels:
                levels[-1].note = f"truncated: {exc}"
            break
        t_k, m, seeds, patterns = genus_seeds(ctx, lam, k, seed)
        level = GenusLevel(k, t_k, m, [energy(ctx, s, lam) for s in seeds])
        pinned = ctx.discrete(tuple(lay.interface_nodes))
        for s, pat in zip(seeds, patterns):
            st = _descend(pinned, lam, pinned.restrict(s), stop=stop, max_iter=max_iter)
            u = pinned.field(st.x)
            x = full.restrict(u)
            if k > 1 and all(v > 0 for v in _slot_masses(u, lay.interface_nodes)):
                x = _newton_polish(full, lam, x)
            if full.residual(x, lam) > tol:
                st = _descend(full, lam, x, stop=stop, max_iter=max_iter)
                x = st.x
            u = full.field(x)
            nrm = sobolev_norm(ctx.yf, u)
            res = full.residual(x, lam)
            if nrm < TRIVIAL_NORM or res > tol or energy(ctx, u, lam) >= 0:
                level.omitted += 1
                log.info("k=%d seed %s omitted (norm %.3g, residual %.3g)", k, pat, nrm, res)
                continue
            pair = make_pair(ctx, lam, u, st.iterations)
            if not any(_same_pair(pair, p) for p in pairs):
                pairs.append(pair)
                level.found += 1
        levels.append(level)
    pairs.sort(key=lambda p: -p.sobolev_norm)
    return SequenceRun(float(lam), pairs, levels)
