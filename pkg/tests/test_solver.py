import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from orlicz_spectra.discretization import Grid, ScalarField, build_disjoint_bumps
from orlicz_spectra.errors import ConvergenceError, DomainError
from orlicz_spectra.orlicz_core import (
    ExponentField,
    PowerLog,
    PowerOverLog,
    PurePower,
    Tabulated,
    YoungFunction,
    sobolev_norm,
    variable_exponent_norm,
)
from orlicz_spectra.solver import (
    EigenPair,
    EnergyContext,
    TrivialOutcome,
    alpha_lower,
    ball_minimize,
    check_mountain_geometry,
    coercivity_probe,
    default_rho,
    default_start,
    descent_bump,
    energy,
    energy_gradient,
    estimate_embedding_constant,
    genus_seeds,
    genus_sequence_solve,
    lambda_star,
    make_pair,
    probe_fields,
    quotient_scaling_sweep,
    ray_is_coercive,
    rayleigh_quotient,
    recovered_lambda,
    sphere_lower_bound,
)

from conftest import discrete_principal_eigenvalue, random_field

FAMILIES = {
    "pure2": PurePower(2.0),
    "pure3.5": PurePower(3.5),
    "powerlog": PowerLog(2.5, 1.5),
    "overlog": PowerOverLog(4.0),
    "tabulated": Tabulated(tuple((t, t**1.5 + t) for t in np.linspace(0.1, 200.0, 60))),
}
YF = {k: YoungFunction(v) for k, v in FAMILIES.items()}


def _ctx(name, grid, q):
    return EnergyContext.build(YF[name], ExponentField(grid, q))


def _hat():
    g = Grid((1.0,), (2,))
    return g, ScalarField(g, np.array([0.0, 1.0, 0.0]))


# ------------------------------------------------------------- energy ------

def test_energy_hat_example():
    g, u = _hat()
    ctx = _ctx("pure2", g, 2.0)
    assert energy(ctx, u, 1.0) == pytest.approx(1.875, rel=1e-15)
    assert energy(ctx, ScalarField.zeros(g), 1.0) == 0.0


def test_negative_lambda_rejected(ctx_ex1):
    with pytest.raises(DomainError):
        energy(ctx_ex1, ScalarField.zeros(ctx_ex1.grid), -1.0)


@given(st.integers(0, 10_000), st.sampled_from(sorted(FAMILIES)), st.sampled_from([1, 2]))
def test_energy_even_and_gradient_odd(seed, name, dim):
    g = Grid((1.0,) * dim, (10,) * dim)
    ctx = _ctx(name, g, 1.7)
    u = random_field(g, np.random.default_rng(seed), 0.5)
    assert energy(ctx, -u, 2.0) == energy(ctx, u, 2.0)
    assert np.array_equal(energy_gradient(ctx, -u, 2.0).values, -energy_gradient(ctx, u, 2.0).values)


@pytest.mark.parametrize("q", [1.5, 3.0])
def test_gradient_of_zero_field(q):
    g = Grid((1.0,), (8,))
    ctx = _ctx("powerlog", g, q)
    assert np.all(energy_gradient(ctx, ScalarField.zeros(g), 1.0).values == 0)


def _fd_check(ctx, u, v, lam, eps=1e-5):
    g = energy_gradient(ctx, u, lam)
    analytic = float(np.sum(g.values * v.values))
    fd = (energy(ctx, u + eps * v, lam) - energy(ctx, u - eps * v, lam)) / (2 * eps)
    return analytic, fd


@given(st.integers(0, 10_000), st.sampled_from(sorted(FAMILIES)), st.sampled_from([1, 2]),
       st.floats(1.2, 3.5), st.floats(0.1, 20.0))
def test_gradient_matches_central_difference(seed, name, dim, q, lam):
    g = Grid((1.0,) * dim, (12,) * dim)
    rng = np.random.default_rng(seed)
    ctx = _ctx(name, g, q + 0.3 * g.node_coords[0])
    u = random_field(g, rng, 0.3)
    v = random_field(g, rng, 0.3)
    a, fd = _fd_check(ctx, u, v, lam)
    assert abs(a - fd) <= 1e-5 * max(abs(a), 1e-8)


def test_gradient_is_weighted_three_point_stencil():
    g = Grid((1.0,), (16,))
    ctx = _ctx("pure2", g, 2.0)
    u = random_field(g, np.random.default_rng(1))
    lam, h = 3.0, g.h
    x = u.values
    ref = np.zeros_like(x)
    i = np.arange(1, 16)
    ref[i] = h * ((2 * x[i] - x[i - 1] - x[i + 1]) / h**2
                  - lam * (x[i - 1] + 2 * x[i] + x[i + 1]) / 4)
    assert np.allclose(energy_gradient(ctx, u, lam).values, ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(FAMILIES))
@pytest.mark.parametrize("dim", [1, 2])
def test_hessian_matches_gradient_differences(name, dim):
    g = Grid((1.0,) * dim, (8,) * dim)
    ctx = _ctx(name, g, 2.6)
    disc = ctx.discrete()
    rng = np.random.default_rng(5)
    x = disc.restrict(random_field(g, rng, 0.4))
    d = disc.restrict(random_field(g, rng, 0.4))
    eps = 1e-6
    fd = (disc.gradient(x + eps * d, 1.3) - disc.gradient(x - eps * d, 1.3)) / (2 * eps)
    hv = disc.hessian(x, 1.3) @ d
    assert np.allclose(hv, fd, rtol=1e-5, atol=1e-7 * np.abs(fd).max())


def test_recovered_lambda_identity():
    g, u = _hat()
    ctx = _ctx("pure2", g, 2.0)
    # sum phi(G) G / sum ubar^2 = (2*2 + 2*2) / (0.25 + 0.25) = 16
    assert recovered_lambda(ctx, u) == pytest.approx(16.0)


# ------------------------------------------------- Rayleigh quotients ------

def test_rayleigh_examples():
    g, u = _hat()
    assert rayleigh_quotient(_ctx("pure2", g, 2.0), u) == pytest.approx(8.0)
    with pytest.raises(DomainError):
        rayleigh_quotient(_ctx("pure2", g, 2.0), ScalarField.zeros(g))


@given(st.integers(0, 1000), st.floats(1e-3, 1e3), st.sampled_from([1.5, 2.0, 3.5]))
def test_homogeneous_quotient_scale_invariant(seed, c, p):
    g = Grid((1.0,), (16,))
    ctx = EnergyContext.build(YoungFunction(PurePower(p)), ExponentField(g, p))
    u = random_field(g, np.random.default_rng(seed))
    assert rayleigh_quotient(ctx, c * u) == pytest.approx(rayleigh_quotient(ctx, u), rel=1e-12)


def test_quotient_decreases_when_q_below_p0(ctx_ex1):
    t = [10.0**-k for k in range(1, 7)]
    vals = quotient_scaling_sweep(ctx_ex1, descent_bump(ctx_ex1), t)
    assert np.all(np.diff(vals) < 0)


# ------------------------------------------------- embedding constant ------

def test_embedding_constant_oracle():
    g = Grid((1.0,), (256,))
    ctx = _ctx("pure2", g, 2.0)
    c1 = estimate_embedding_constant(ctx)
    assert 0.45 <= c1 <= 0.57
    # the sine probe alone is within discretisation error of sqrt(2)/pi
    sine = probe_fields(g, 32)[0]
    ratio = variable_exponent_norm(sine, ctx.q) / sobolev_norm(ctx.yf, sine)
    assert ratio == pytest.approx(math.sqrt(2) / math.pi, rel=1e-4)


def test_embedding_ratio_scale_invariant(ctx_ex1):
    for u in probe_fields(ctx_ex1.grid, 32)[:6]:
        r1 = variable_exponent_norm(u, ctx_ex1.q) / sobolev_norm(ctx_ex1.yf, u)
        r10 = variable_exponent_norm(10 * u, ctx_ex1.q) / sobolev_norm(ctx_ex1.yf, 10 * u)
        assert r10 == pytest.approx(r1, rel=1e-8)


def test_embedding_constant_refinement():
    est = []
    for n in (64, 128):
        g = Grid((1.0,), (n,))
        est.append(estimate_embedding_constant(_ctx("powerlog", g, 1.5 + 0.4 * g.node_coords[0])))
    assert est[1] >= est[0] - 1e-3


def test_embedding_constant_sample_floor(ctx_ex1):
    with pytest.raises(DomainError):
        estimate_embedding_constant(ctx_ex1, n_samples=10)


# --------------------------------------------------------- lambda star -----

def test_lambda_star_examples():
    assert lambda_star(0.5, 2.0, 1.5, 4.0) == pytest.approx(0.046875, rel=1e-15)
    assert lambda_star(0.5, 1.0, 2.0, 3.0) == pytest.approx(0.5, rel=1e-15)
    a, b = lambda_star(0.4, 1.2, 1.5, 4.0), lambda_star(0.2, 1.2, 1.5, 4.0)
    assert b / a == pytest.approx(0.5**2.5, rel=1e-12)


@pytest.mark.parametrize("args", [(1.2, 0.5, 1.5, 4.0), (0.6, 2.0, 1.5, 4.0), (0.5, 1.0, 4.0, 3.0), (0.0, 1.0, 1.5, 4.0)])
def test_lambda_star_preconditions(args):
    with pytest.raises(DomainError):
        lambda_star(*args)


def test_default_rho():
    assert default_rho(0.5) == 0.9
    assert default_rho(2.0) == pytest.approx(0.45)


def test_alpha_branches():
    assert alpha_lower(0.5, 2.5, 4.0) == 0.5**4.0
    assert alpha_lower(1.0, 2.5, 4.0) == 1.0
    assert alpha_lower(2.0, 2.5, 4.0) == 2.0**2.5


# ---------------------------------------------------- mountain geometry ----

@pytest.fixture(scope="module")
def ex1_setup(ctx_ex1):
    c1 = estimate_embedding_constant(ctx_ex1)
    rho = default_rho(c1)
    return c1, rho, lambda_star(rho, c1, ctx_ex1.q.q_minus, ctx_ex1.indices.p0_sup)


def test_geometry_below_lambda_star(ctx_ex1, ex1_setup):
    c1, rho, ls = ex1_setup
    rep = check_mountain_geometry(ctx_ex1, ls / 2, rho, c1)
    assert rep.sphere_inf_estimate > 0 and rep.descent_direction_found
    assert rep.alpha == pytest.approx(rho ** ctx_ex1.indices.p0_sup / 2)
    assert rep.lambda_star == pytest.approx(ls)


def test_sphere_bound_realised(ctx_ex1, ex1_setup):
    c1, rho, ls = ex1_setup
    lam = 0.8 * ls
    bound = sphere_lower_bound(rho, lam, c1, ctx_ex1.q.q_minus, ctx_ex1.indices.p0_sup)
    for u in probe_fields(ctx_ex1.grid, 40, seed=3):
        v = (rho / sobolev_norm(ctx_ex1.yf, u)) * u
        assert energy(ctx_ex1, v, lam) >= bound - 1e-9


def test_geometry_lambda_zero(ctx_ex1, ex1_setup):
    c1, rho, _ = ex1_setup
    assert not check_mountain_geometry(ctx_ex1, 0.0, rho, c1).descent_direction_found


def test_geometry_homogeneous_control(ctx_hom):
    c1 = estimate_embedding_constant(ctx_hom)
    rep = check_mountain_geometry(ctx_hom, 5.0, default_rho(c1), c1)
    assert not rep.descent_direction_found
    assert rep.sphere_inf_estimate > 0


def test_geometry_rho_precondition(ctx_ex1, ex1_setup):
    c1, _, _ = ex1_setup
    with pytest.raises(DomainError):
        check_mountain_geometry(ctx_ex1, 0.1, 1.5, c1)


# ------------------------------------------------------ ball minimise ------

def test_ball_minimize_start_zero(ctx_ex1):
    out = ball_minimize(ctx_ex1, 0.5, 0.9, ScalarField.zeros(ctx_ex1.grid))
    assert isinstance(out, TrivialOutcome) and out.iterations == 0


def test_ball_minimize_start_outside(ctx_ex1):
    big = 100.0 * descent_bump(ctx_ex1)
    with pytest.raises(DomainError):
        ball_minimize(ctx_ex1, 0.5, 0.9, big)


def test_ball_minimize_reports_non_convergence(ctx_ex1, ex1_setup):
    _, rho, ls = ex1_setup
    start = default_start(ctx_ex1, ls / 2, rho)
    with pytest.raises(ConvergenceError) as info:
        ball_minimize(ctx_ex1, ls / 2, rho, start, max_iter=1)
    assert info.value.residual > 1e-6 and info.value.iterate is not None


def test_ball_minimize_theorem1_pair(ctx_ex1, ex1_setup):
    _, rho, ls = ex1_setup
    lam = ls / 2
    out = ball_minimize(ctx_ex1, lam, rho, default_start(ctx_ex1, lam, rho))
    assert isinstance(out, EigenPair)
    assert out.energy < 0 and out.residual <= 1e-6
    assert abs(out.lambda_recovered / lam - 1) <= 1e-3
    assert out.sobolev_norm < rho


def test_ball_minimize_2d():
    g = Grid((1.0, 1.0), (24, 24))
    x, y = g.node_coords
    ctx = EnergyContext.build(YF["powerlog"], ExponentField(g, 1.5 + 0.2 * x + 0.2 * y))
    c1 = estimate_embedding_constant(ctx)
    rho = default_rho(c1)
    lam = lambda_star(rho, c1, ctx.q.q_minus, ctx.indices.p0_sup) / 2
    out = ball_minimize(ctx, lam, rho, default_start(ctx, lam, rho))
    assert isinstance(out, EigenPair)
    assert out.residual <= 1e-6 and abs(out.lambda_recovered / lam - 1) <= 1e-3


# ---------------------------------------------- homogeneous control --------

def test_discrete_principal_eigenvalue_oracle(ctx_hom):
    disc = ctx_hom.discrete()
    n = disc.free.size
    eye = np.eye(n)
    K = (disc.GT[0] @ disc.G[0]).toarray() * disc.V
    M = (disc.AT @ disc.A).toarray() * disc.V
    w, v = scipy.linalg.eigh(K, M, subset_by_index=[0, 0])
    # M is ill-conditioned, so the dense eigenvalue is good to ~1e-7; its
    # eigenvector's Rayleigh quotient is accurate to second order
    vec = v[:, 0]
    rq = (vec @ K @ vec) / (vec @ M @ vec)
    assert w[0] == pytest.approx(discrete_principal_eigenvalue(256), rel=1e-6)
    assert rq == pytest.approx(discrete_principal_eigenvalue(256), rel=1e-12)
    assert rq == pytest.approx(math.pi**2, rel=1e-4)
    assert np.allclose(disc.hessian(np.zeros(n), 0.0).toarray(), K + 0 * eye)


@pytest.mark.parametrize("lam", [5.0, 8.0, 0.9 * math.pi**2])
def test_homogeneous_trivial_below_spectrum(ctx_hom, lam):
    rho = default_rho(estimate_embedding_constant(ctx_hom))
    out = ball_minimize(ctx_hom, lam, rho, default_start(ctx_hom, lam, rho))
    assert isinstance(out, TrivialOutcome)


def test_homogeneous_pair_at_principal_eigenvalue(ctx_hom):
    lam = discrete_principal_eigenvalue(256)
    start = 0.1 * descent_bump(ctx_hom)
    out = ball_minimize(ctx_hom, lam, 0.9, start)
    assert isinstance(out, EigenPair)
    assert abs(out.lambda_recovered / lam - 1) <= 1e-3 and out.residual <= 1e-6
    # the eigenvector is the discrete sine
    x = ctx_hom.grid.node_coords[0]
    s = np.sin(np.pi * x)
    c = out.u.values @ s / (s @ s)
    assert np.allclose(out.u.values, c * s, atol=1e-8 * abs(c))


# ------------------------------------------------------ coercivity ---------

def test_coercivity_example2(ctx_ex2):
    bumps = build_disjoint_bumps(ctx_ex2.grid, 5)
    rep = coercivity_probe(ctx_ex2, 1.0, bumps, np.logspace(-3, 3, 25))
    assert rep.passed
    assert all(r["coercive"] for r in rep.rays)


def test_coercivity_lambda_zero(ctx_ex2):
    bumps = build_disjoint_bumps(ctx_ex2.grid, 3)
    rep = coercivity_probe(ctx_ex2, 0.0, bumps, np.logspace(-2, 2, 9))
    assert all(np.all(r["energies"] >= 0) for r in rep.rays)


def test_coercivity_regime(ctx_ex1, ctx_hom):
    with pytest.raises(DomainError):
        coercivity_probe(ctx_hom, 1.0, [descent_bump(ctx_hom)], [1.0, 10.0])


def test_ray_check_is_falsifiable():
    r = np.logspace(0, 3, 10)
    assert ray_is_coercive(r, r**2)
    assert not ray_is_coercive(r, -(r**2))
    assert not ray_is_coercive(r, np.r_[r[:-1] ** 2, 0.5])


# --------------------------------------------------------- genus -----------

def test_genus_seeds_negative(ctx_ex2):
    for k in (1, 2, 3):
        t_k, m, seeds, patterns = genus_seeds(ctx_ex2, 1.0, k)
        assert 0 < t_k < 1 and m > 0
        assert len(seeds) == (2 if k == 1 else 8)
        for s in seeds:
            assert sobolev_norm(ctx_ex2.yf, s) == pytest.approx(t_k, rel=1e-8)
            assert energy(ctx_ex2, s, 1.0) < 0


def test_genus_precondition(ctx_hom):
    with pytest.raises(DomainError):
        genus_sequence_solve(ctx_hom, 1.0, 2)


def test_genus_truncates_at_capacity():
    g = Grid((1.0,), (24,))
    ctx = EnergyContext.build(YF["overlog"], ExponentField(g, 2.0))
    run = genus_sequence_solve(ctx, 1.0, 40)
    assert 1 <= len(run.levels) < 40
    assert run.levels[-1].note.startswith("truncated")
    assert all(p.residual <= 1e-6 for p in run.pairs)


def test_genus_sequence_pairs(ctx_ex2):
    run = genus_sequence_solve(ctx_ex2, 1.0, 3)
    assert run.seeds_negative
    norms = [p.sobolev_norm for p in run.pairs]
    assert len(norms) >= 2 and np.all(np.diff(norms) < 0)
    for p in run.pairs:
        assert p.energy < 0 and p.residual <= 1e-6
        assert abs(p.lambda_recovered - 1.0) <= 1e-3
    for i, a in enumerate(run.pairs):
        for b in run.pairs[i + 1:]:
            assert min(np.abs(a.u.values - b.u.values).max(),
                       np.abs(a.u.values + b.u.values).max()) > 1e-6


@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0, 10.0])
def test_every_lambda_is_an_eigenvalue(ctx_ex2, lam):
    run = genus_sequence_solve(ctx_ex2, lam, 1)
    assert run.pairs and run.pairs[0].residual <= 1e-6


def test_make_pair_fields(ctx_ex2):
    run = genus_sequence_solve(ctx_ex2, 2.0, 1)
    p = run.pairs[0]
    again = make_pair(ctx_ex2, 2.0, p.u)
    assert again.energy == p.energy and again.residual == p.residual
    assert again.sobolev_norm == sobolev_norm(ctx_ex2.yf, p.u)
