"""Young functions, Luxemburg norms, growth indices and variable-exponent modulars.

A nonlinearity ``phi`` (odd, increasing, onto R) generates the N-function
``Phi(t) = int_0^t phi``. Everything downstream (norms, energies, audits)
goes through :class:`YoungFunction`, which evaluates ``Phi`` either in closed
form or from a cached composite Gauss-Legendre table on a geometric grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .discretization import CellField, Grid, ScalarField, cell_average, gradient_magnitude
from .errors import (
    ContractViolation,
    DomainError,
    ExtrapolationError,
    NumericError,
    QuadratureError,
    ShapeError,
)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X12, _GL_W12 = np.polynomial.legendre.leggauss(12)


# --------------------------------------------------------------------------
# nonlinearity families
# --------------------------------------------------------------------------

class NonlinearitySpec:
    """Base class; subclasses define ``phi`` on t >= 0 and its derivative."""

    #: (limit of t phi/Phi at 0+, limit at infinity) when known in closed form
    ratio_limits: tuple[float, float] | None = None
    t_max: float = math.inf

    def _phi_pos(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dphi_pos(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _Phi_closed(self, t: np.ndarray) -> np.ndarray | None:
        return None

    def _check_range(self, a: np.ndarray):
        if np.any(a > self.t_max):
            raise ExtrapolationError(f"argument {a.max():g} beyond tabulated range [0, {self.t_max:g}]")

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(np.atleast_1d(t))
        self._check_range(a)
        out = self._phi_or_zero(a)
        out = np.copysign(out, np.atleast_1d(t))
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def _phi_or_zero(self, a):
        a = np.asarray(a, dtype=float)
        out = np.zeros_like(a)
        nz = a > 0
        out[nz] = self._phi_pos(a[nz])
        return out

    def dphi(self, t):
        """Derivative of phi (an even function); may be inf or 0 at t = 0."""
        t = np.asarray(t, dtype=float)
        a = np.abs(np.atleast_1d(t))
        self._check_range(a)
        out = np.empty_like(a)
        nz = a > 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out[nz] = self._dphi_pos(a[nz])
            out[~nz] = self._dphi_zero()
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def _dphi_zero(self) -> float:
        return float(self._dphi_pos(np.array([1e-300]))[0])


@dataclass(frozen=True)
class PurePower(NonlinearitySpec):
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if not self.p > 1:
            raise DomainError("PurePower needs p > 1")

    @property
    def ratio_limits(self):
        return (self.p, self.p)

    def _phi_pos(self, t):
        return t ** (self.p - 1)

    def _dphi_pos(self, t):
        return (self.p - 1) * t ** (self.p - 2)

    def _Phi_closed(self, t):
        return t**self.p / self.p


@dataclass(frozen=True)
class PowerLog(NonlinearitySpec):
    """phi(t) = log(1 + |t|^r) |t|^(p-2) t."""

    p: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "r", float(self.r))
        if not (self.p > 1 and self.r > 0):
            raise DomainError("PowerLog needs p > 1 and r > 0")

    @property
    def ratio_limits(self):
        return (self.p + self.r, self.p)

    def _phi_pos(self, t):
        return np.log1p(t**self.r) * t ** (self.p - 1)

    def _dphi_pos(self, t):
        p, r = self.p, self.r
        tr = t**r
        return (p - 1) * t ** (p - 2) * np.log1p(tr) + r * t ** (p + r - 2) / (1 + tr)


@dataclass(frozen=True)
class PowerOverLog(NonlinearitySpec):
    """phi(t) = |t|^(p-2) t / log(1 + |t|)."""

    p: float
    _series_cut = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if not self.p > 2:
            raise DomainError("PowerOverLog needs p > 2")

    @property
    def ratio_limits(self):
        return (self.p - 1, self.p)

    def _phi_pos(self, t):
        out = np.empty_like(t)
        small = t < self._series_cut
        # t / log(1+t) = 1 + t/2 + O(t^2)
        out[small] = t[small] ** (self.p - 2) * (1 + t[small] / 2)
        tb = t[~small]
        out[~small] = tb ** (self.p - 1) / np.log1p(tb)
        return out

    def _dphi_pos(self, t):
        p = self.p
        out = np.empty_like(t)
        small = t < self._series_cut
        ts = t[small]
        out[small] = (p - 2) * ts ** (p - 3) + (p - 1) / 2 * ts ** (p - 2)
        tb = t[~small]
        L = np.log1p(tb)
        out[~small] = (p - 1) * tb ** (p - 2) / L - tb ** (p - 1) / ((1 + tb) * L**2)
        return out


@dataclass(frozen=True)
class Tabulated(NonlinearitySpec):
    """phi given by sorted (t, phi(t)) knots on t >= 0, monotone cubic in between."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = [(float(t), float(v)) for t, v in self.knots]
        if not pts or pts[0][0] < 0:
            raise DomainError("knots must be nonempty with t >= 0")
        if pts[0][0] > 0:
            pts.insert(0, (0.0, 0.0))
        ts = np.array([t for t, _ in pts])
        vs = np.array([v for _, v in pts])
        if vs[0] != 0.0:
            raise DomainError("phi(0) must be 0")
        if np.any(np.diff(ts) <= 0) or np.any(np.diff(vs) <= 0):
            raise DomainError("knots must be strictly increasing in t and phi")
        object.__setattr__(self, "knots", tuple(pts))

    @property
    def t_max(self):
        return self.knots[-1][0]

    @cached_property
    def _interp(self):
        ts, vs = zip(*self.knots)
        return PchipInterpolator(np.array(ts), np.array(vs), extrapolate=False)

    @cached_property
    def _antider(self):
        return self._interp.antiderivative()

    def _phi_pos(self, t):
        return self._interp(t)

    def _dphi_pos(self, t):
        return self._interp.derivative()(t)

    def _dphi_zero(self):
        return float(self._interp.derivative()(0.0))

    def _Phi_closed(self, t):
        return self._antider(t)


def eval_phi(spec: NonlinearitySpec, t):
    return spec.phi(t)


def check_phi(spec: NonlinearitySpec, n: int = 401) -> dict:
    """Sample phi on a sign-symmetric grid and check the homeomorphism properties."""
    top = min(1e6, spec.t_max)
    pos = np.geomspace(1e-6 * min(1.0, top), top, n)
    t = np.concatenate([-pos[::-1], [0.0], pos])
    v = spec.phi(t)
    odd = bool(np.array_equal(v, -v[::-1]))
    increasing = bool(np.all(np.diff(v) > 0))
    zero = spec.phi(0.0) == 0.0
    unbounded = bool(math.isinf(spec.t_max) and v[-1] > 1e3 * max(spec.phi(1.0), 1e-300))
    return {"odd": odd, "increasing": increasing, "zero_at_zero": zero, "unbounded": unbounded}


# --------------------------------------------------------------------------
# Young functions
# --------------------------------------------------------------------------

def _invert_increasing(f: Callable, y: np.ndarray, upper: float = math.inf) -> np.ndarray:
    """Solve f(x) = y for x >= 0, f increasing with f(0) = 0; vectorised bisection in log space."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    if not np.any(pos):
        return out
    yy = y[pos]
    start = min(1.0, upper)
    lo = np.full(yy.shape, start)
    hi = np.full(yy.shape, start)
    for _ in range(300):
        m = f(lo) > yy
        if not m.any():
            break
        lo[m] /= 16.0
    for _ in range(300):
        m = f(hi) < yy
        if not m.any():
            break
        if np.isfinite(upper) and np.any(hi[m] >= upper):
            raise ExtrapolationError("inverse requested beyond tabulated range")
        hi[m] = np.minimum(hi[m] * 16.0, upper)
    hi = np.maximum(hi, lo)
    for _ in range(80):
        mid = np.sqrt(lo * hi)
        up = f(mid) < yy
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    out[pos] = np.sqrt(lo * hi)
    return out


class YoungFunction:
    """The N-function Phi generated by a nonlinearity, with cached quadrature table.

    Phi is evaluated in closed form when the family provides an antiderivative;
    otherwise as ``T[j] + int_{t_j}^t phi`` where ``T`` holds the integral up
    to the geometric knots ``t_j`` (8 per octave) and the remainder is an
    8-point Gauss-Legendre rule on a panel with ratio at most 2**(1/8).
    """

    knots_per_octave = 8

    def __init__(self, spec: NonlinearitySpec, *, t_lo: float = 1e-20, t_hi: float = 1e20,
                 tol: float = 1e-10):
        self.spec = spec
        self.tol = tol
        probe = spec._Phi_closed(np.array([1.0]))
        self.closed_form = probe is not None
        if not self.closed_form:
            self._build_table(t_lo, t_hi)

    def __repr__(self):
        return f"YoungFunction({self.spec!r})"

    # -- table ---------------------------------------------------------------
    def _build_table(self, t_lo, t_hi):
        n_oct = math.log2(t_hi / t_lo)
        n = int(math.ceil(n_oct * self.knots_per_octave))
        knots = t_lo * 2.0 ** (np.arange(n + 1) / self.knots_per_octave)
        a, b = knots[:-1], knots[1:]
        seg8 = self._gl(a, b, _GL_X, _GL_W)
        seg12 = self._gl(a, b, _GL_X12, _GL_W12)
        with np.errstate(invalid="ignore"):
            rel = np.abs(seg8 - seg12) / np.maximum(np.abs(seg12), 1e-300)
        finite = np.isfinite(seg12)
        if not finite[0]:
            raise QuadratureError("Phi table could not start", {"t_lo": t_lo})
        stop = int(np.argmin(finite)) if not finite.all() else finite.size
        bad = np.flatnonzero(rel[:stop] > self.tol)
        if bad.size:
            j = int(bad[0])
            raise QuadratureError(
                "quadrature for Phi did not reach tolerance",
                {"interval": (float(a[j]), float(b[j])), "rel_diff": float(rel[j]), "tol": self.tol},
            )
        head = self._head(np.array([t_lo]))[0]
        table = head + np.concatenate([[0.0], np.cumsum(seg12[:stop])])
        if not np.all(np.isfinite(table)):
            stop = int(np.argmin(np.isfinite(table))) - 1
            table = table[: stop + 1]
        self._knots = knots[: table.size]
        self._table = table
        self._log_lo = math.log2(t_lo)

    def _gl(self, a, b, x, w):
        a = np.asarray(a)[..., None]
        b = np.asarray(b)[..., None]
        s = 0.5 * (b - a) * x + 0.5 * (b + a)
        return 0.5 * (b - a)[..., 0] * (self.spec._phi_pos(s) * w).sum(axis=-1)

    def _head(self, t):
        """Integral over [0, t] by geometric panels [t 2^-(j+1), t 2^-j], j < 64."""
        j = np.arange(64)
        a = t[:, None] * 2.0 ** -(j + 1)
        b = t[:, None] * 2.0 ** -j
        return self._gl(a, b, _GL_X12, _GL_W12).sum(axis=1)

    def _Phi_pos(self, a: np.ndarray) -> np.ndarray:
        if self.closed_form:
            return self.spec._Phi_closed(a)
        out = np.zeros_like(a)
        knots, table = self._knots, self._table
        inside = (a >= knots[0]) & (a <= knots[-1])
        if inside.any():
            ai = a[inside]
            j = np.floor((np.log2(ai) - self._log_lo) * self.knots_per_octave).astype(int)
            j = np.clip(j, 0, knots.size - 1)
            # guard against log2 rounding putting the knot above the argument
            j = np.where(knots[j] > ai, np.maximum(j - 1, 0), j)
            out[inside] = table[j] + self._gl(knots[j], ai, _GL_X, _GL_W)
        small = (a > 0) & (a < knots[0])
        if small.any():
            out[small] = self._head(a[small])
        big = a > knots[-1]
        if big.any():
            out[big] = [self._tail(v) for v in a[big]]
        return out

    def _tail(self, t: float) -> float:
        total, lo = self._table[-1], self._knots[-1]
        while lo < t:
            hi = min(2 * lo, t)
            total += self._gl(np.array([lo]), np.array([hi]), _GL_X12, _GL_W12)[0]
            lo = hi
        return float(total)

    # -- public evaluation ---------------------------------------------------
    def phi(self, t):
        return self.spec.phi(t)

    def dphi(self, t):
        return self.spec.dphi(t)

    def Phi(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(np.atleast_1d(t)).astype(float)
        if not np.all(np.isfinite(a)):
            raise DomainError("Phi needs finite arguments")
        self.spec._check_range(a)
        out = self._Phi_pos(a)
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def phi_inverse(self, y):
        y = np.asarray(y, dtype=float)
        if isinstance(self.spec, PurePower):
            return np.abs(y) ** (1 / (self.spec.p - 1))
        return _invert_increasing(self.spec._phi_or_zero, np.abs(y), self.spec.t_max)

    def Phi_inverse(self, s):
        s = np.asarray(s, dtype=float)
        if isinstance(self.spec, PurePower):
            return (self.spec.p * np.abs(s)) ** (1 / self.spec.p)
        return _invert_increasing(lambda x: self._Phi_pos(np.asarray(x, dtype=float)), np.abs(s),
                                  self.spec.t_max)

    def conjugate(self, t):
        """Phi*(t) = sup_s (s t - Phi(s)), attained at s = phi^{-1}(t)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("conjugate is defined for t >= 0")
        s = np.atleast_1d(self.phi_inverse(t))
        tt = np.atleast_1d(t)
        val = tt * s - self._Phi_pos(s)
        val = np.maximum(val, 0.0)
        return val.reshape(t.shape) if t.ndim else float(val[0])

    def index_ratio(self, t):
        """t phi(t) / Phi(t) for t > 0."""
        t = np.asarray(t, dtype=float)
        Phi = self.Phi(t)
        if np.any(np.asarray(Phi) <= 0):
            raise DomainError("Phi vanished at a sample point; cannot form t phi / Phi")
        return t * self.phi(t) / Phi


def eval_Phi(yf: YoungFunction, t):
    return yf.Phi(t)


def eval_Phi_conjugate(yf: YoungFunction, t):
    return yf.conjugate(t)


# --------------------------------------------------------------------------
# indices and audits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthIndices:
    p0: float
    p0_sup: float
    grid_used: tuple[float, float, int]
    limits_used: bool = False


def _index_grid(yf: YoungFunction, t_min: float, t_max: float, n: int) -> np.ndarray:
    t_max = min(t_max, yf.spec.t_max)
    if not 0 < t_min < t_max:
        raise DomainError("need 0 < t_min < t_max within the nonlinearity's range")
    return np.geomspace(t_min, t_max, n)


def estimate_indices(yf: YoungFunction, t_min: float = 1e-6, t_max: float = 1e6,
                     n: int = 2000) -> GrowthIndices:
    """Min and max of t phi(t) / Phi(t) over a log grid, refined by the family's end limits."""
    if n < 100:
        raise DomainError("need n >= 100 samples")
    t = _index_grid(yf, t_min, t_max, n)
    ratio = yf.index_ratio(t)
    lo, hi = float(ratio.min()), float(ratio.max())
    limits = yf.spec.ratio_limits
    if limits is not None:
        lo = min(lo, *limits)
        hi = max(hi, *limits)
    return GrowthIndices(lo, hi, (float(t[0]), float(t[-1]), n), limits is not None)


@dataclass(frozen=True)
class Delta2Report:
    liminf_est: float
    limsup_est: float
    passed: bool


def _tail_grid(yf: YoungFunction) -> np.ndarray:
    top = min(1e6, yf.spec.t_max)
    return np.geomspace(top * 1e-4, top, 200)


def check_delta2(yf: YoungFunction, cap: float = 1e6) -> Delta2Report:
    """Finite-probe Delta_2 check: tail liminf of t phi/Phi above 1, global sup finite."""
    tail = yf.index_ratio(_tail_grid(yf))
    liminf = float(tail.min())
    limsup = estimate_indices(yf).p0_sup
    return Delta2Report(liminf, limsup, bool(liminf > 1 and np.isfinite(limsup) and limsup < cap))


def log_growth_liminf(yf: YoungFunction) -> float:
    """Tail estimate of liminf log Phi(t) / log t."""
    t = _tail_grid(yf)
    t = t[t > 1]
    return float(np.min(np.log(yf.Phi(t)) / np.log(t)))


def _decade_integrals(yf: YoungFunction, N: int, exps: np.ndarray) -> np.ndarray:
    """int over [10^e, 10^(e+1)] of Phi^{-1}(s) s^{-(N+1)/N} ds, for each e in exps."""
    x, w = np.polynomial.legendre.leggauss(20)
    ln10 = math.log(10.0)
    a = exps[:, None] * ln10
    u = a + 0.5 * ln10 * (x + 1)  # s = e^u
    s = np.exp(u)
    f = yf.Phi_inverse(s.ravel()).reshape(s.shape) * np.exp(-u / N)
    return 0.5 * ln10 * (f * w).sum(axis=1)


def _trend(increments: np.ndarray, lo=0.95, hi=0.99):
    """'converging' if the last decade ratios all sit below lo, 'diverging' if all above hi."""
    r = increments[1:] / increments[:-1]
    last = r[-4:]
    if np.all(last <= lo):
        return True, r
    if np.all(last >= hi):
        return False, r
    return None, r


@dataclass(frozen=True)
class SobolevConjugateReport:
    near_zero_finite: bool | None
    at_infinity_divergent: bool | None
    near_zero_ratios: tuple = field(default=(), repr=False)
    at_infinity_ratios: tuple = field(default=(), repr=False)


def sobolev_conjugate_audit(yf: YoungFunction, N: int, decades: int = 16) -> SobolevConjugateReport:
    """Probe both integrals of the Orlicz-Sobolev conjugate condition decade by decade.

    ``None`` means the decade-ratio trend was inconclusive.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    near_exps = -np.arange(1, decades + 1, dtype=float)  # [1e-1,1], [1e-2,1e-1], ...
    near = _decade_integrals(yf, N, near_exps)
    near_ok, near_r = _trend(near)
    try:
        far_exps = np.arange(0, decades, dtype=float)
        far = _decade_integrals(yf, N, far_exps)
        conv, far_r = _trend(far)
        far_div = None if conv is None else (not conv)
    except ExtrapolationError:
        far_div, far_r = None, np.array([])
    return SobolevConjugateReport(near_ok, far_div, tuple(near_r), tuple(far_r))


class SobolevConjugate:
    """Phi_star built from its inverse G(t) = int_0^t Phi^{-1}(s) s^{-(N+1)/N} ds."""

    def __init__(self, yf: YoungFunction, N: int, decades: int = 30, per_decade: int = 4):
        self.N = N
        exps = np.arange(-decades, decades, 1.0 / per_decade)
        x, w = np.polynomial.legendre.leggauss(12)
        step = math.log(10.0) / per_decade
        a = exps * math.log(10.0)
        u = a[:, None] + 0.5 * step * (x + 1)
        f = yf.Phi_inverse(np.exp(u).ravel()).reshape(u.shape) * np.exp(-u / N)
        pieces = 0.5 * step * (f * w).sum(axis=1)
        # local power law for the part below the first node
        beta = math.log(pieces[per_decade] / pieces[0]) / math.log(10.0)  # exponent of s * integrand
        if not beta > 0:
            raise NumericError("Phi_star inverse diverges at 0; Sobolev conjugate undefined")
        head = pieces[0] / (10 ** (beta / per_decade) - 1)
        G = head + np.concatenate([[0.0], np.cumsum(pieces)])
        self.log_s = np.concatenate([a, [a[-1] + step]])
        self.log_G = np.log(G)
        if np.any(np.diff(self.log_G) <= 0):
            raise NumericError("Phi_star inverse is not increasing on the probe grid")
        r = self.log_G[-per_decade:] - self.log_G[-per_decade - 1:-1]
        self.bounded = bool(np.all(r[1:] <= r[:-1]) and r[-1] < 1e-3)

    @property
    def G_max(self) -> float:
        return float(np.exp(self.log_G[-1]))

    def __call__(self, y):
        """Phi_star(y); log-log extrapolation off the table, +inf past a saturated G."""
        ly = np.log(np.asarray(y, dtype=float))
        lg, ls = self.log_G, self.log_s
        out = np.interp(ly, lg, ls)
        lo_slope = (ls[1] - ls[0]) / (lg[1] - lg[0])
        hi_slope = (ls[-1] - ls[-2]) / (lg[-1] - lg[-2])
        under = ly < lg[0]
        over = ly > lg[-1]
        out = np.where(under, ls[0] + lo_slope * (ly - lg[0]), out)
        out = np.where(over, ls[-1] + hi_slope * (ly - lg[-1]), out)
        with np.errstate(over="ignore"):
            res = np.exp(out)
        if self.bounded:
            res = np.where(over, np.inf, res)
        return res


def condition_6biss_probe(yf: YoungFunction, q_plus: float, k_list=(0.1, 1.0, 10.0),
                          N: int = 3) -> bool:
    """True when |t|^q+ / Phi_star(k t) decreases over the three largest probe decades for every k."""
    if not q_plus > 1:
        raise DomainError("q_plus must exceed 1")
    conj = SobolevConjugate(yf, N)
    t = conj.G_max / max(k_list) * 10.0 ** np.arange(-3.0, 1.0)
    for k in k_list:
        with np.errstate(divide="ignore", over="ignore"):
            ratio = t**q_plus / conj(k * t)
        if not np.all(np.diff(ratio) < 0) and not np.all(ratio[1:] == 0):
            return False
    return True


# --------------------------------------------------------------------------
# Luxemburg norms
# --------------------------------------------------------------------------

def luxemburg_norm(modular_eval: Callable[[float], float], rtol: float = 1e-10) -> float:
    """inf{k > 0 : modular_eval(k) <= 1} by doubling/halving from k = 1, then bisection."""
    m1 = modular_eval(1.0)
    if m1 == 0.0:
        return 0.0
    lo = hi = 1.0
    if m1 > 1:
        prev = m1
        for _ in range(2000):
            hi *= 2.0
            m = modular_eval(hi)
            if m > prev:
                raise ContractViolation("modular increased with k")
            prev = m
            if m <= 1:
                break
        else:
            raise ContractViolation("modular did not drop below 1")
        lo = hi / 2
    else:
        prev = m1
        for _ in range(2000):
            lo /= 2.0
            m = modular_eval(lo)
            if m < prev:
                raise ContractViolation("modular decreased as k shrank")
            prev = m
            if m > 1:
                break
        else:
            raise ContractViolation("modular did not exceed 1")
        hi = lo * 2
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if modular_eval(mid) > 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def orlicz_modular(yf: YoungFunction, f: CellField, k: float = 1.0) -> float:
    return float(np.sum(yf.Phi(f.values / k)) * f.grid.cell_volume)


def orlicz_norm(yf: YoungFunction, f: CellField) -> float:
    vals, vol = np.abs(f.values), f.grid.cell_volume
    vals = vals[vals > 0]
    if vals.size == 0:
        return 0.0
    return luxemburg_norm(lambda k: float(np.sum(yf.Phi(vals / k)) * vol))


def sobolev_norm(yf: YoungFunction, u: ScalarField) -> float:
    """Orlicz-Sobolev norm: Luxemburg norm of |grad u|."""
    return orlicz_norm(yf, gradient_magnitude(u))


# --------------------------------------------------------------------------
# variable exponents
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExponentField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 0:
            vals = np.full(self.grid.nodes_shape, float(vals))
        if vals.shape != self.grid.nodes_shape:
            raise ShapeError(f"exponent must have node shape {self.grid.nodes_shape}")
        if not np.all(np.isfinite(vals)) or vals.min() <= 1:
            raise DomainError("variable exponent must exceed 1 at every node")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def q_minus(self) -> float:
        return float(self.values.min())

    @property
    def q_plus(self) -> float:
        return float(self.values.max())

    @cached_property
    def cell_values(self) -> np.ndarray:
        return self.grid.operators["avg"] @ self.values.ravel()

    @property
    def is_constant(self) -> bool:
        return self.q_minus == self.q_plus


def _aligned(u: ScalarField, q: ExponentField):
    if u.grid != q.grid:
        raise ShapeError("field and exponent live on different grids")


def variable_exponent_modular(u: ScalarField, q: ExponentField) -> float:
    _aligned(u, q)
    ubar = np.abs(cell_average(u).values)
    return float(np.sum(ubar**q.cell_values) * u.grid.cell_volume)


def variable_exponent_norm(u: ScalarField, q: ExponentField) -> float:
    _aligned(u, q)
    ubar = np.abs(cell_average(u).values)
    qc = q.cell_values
    nz = ubar > 0
    ubar, qc = ubar[nz], qc[nz]
    vol = u.grid.cell_volume
    return luxemburg_norm(lambda mu: float(np.sum((ubar / mu) ** qc) * vol))
