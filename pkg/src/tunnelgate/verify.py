"""Independent numerical cross-checks for the closed-form results.

Three oracles, each deliberately computed by a different route than the
formula it validates:

* adaptive Gauss-Kronrod quadrature of the WKB action integral
  2 sqrt(c) * Integral_K^{S_r} sqrt(1/S^2 - lambda) dS, whose integrand has a
  square-root zero (infinite slope) at the exit price S_r,
* Runge-Kutta integration of the spatial equation
  -(1/2) sigma^2 S^2 phi'' - r S phi' + r phi = lambda phi, and
* a finite-difference residual of the full pricing PDE applied to the
  product solution w(S,t) = phi(S) exp(+lambda t), with a grid-refinement
  study of the residual's convergence order.

Gauss-Kronrod nodes are strictly interior, so the vanishing-integrand
endpoint is never evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .barrier import wkb_exponent_closed_form, coupling_constant
from .errors import (
    AboveBarrierError,
    DomainError,
    GridMismatchError,
    InvalidParameterError,
    StepFailureError,
    ToleranceNotMetError,
)
from .model import MarketParams, RangeBound, compute_lambda

__all__ = [
    "QuadratureResult",
    "ResidualReport",
    "integrate_adaptive",
    "wkb_exponent_quadrature",
    "solve_spatial_ode",
    "pde_residual",
    "residual_convergence_study",
]

# 15-point Kronrod abscissae on [-1, 1] with the embedded 7-point Gauss rule.
_XK = (
    0.991455371120812639207,
    0.949107912342758524526,
    0.864864423359769072789,
    0.741531185599394439864,
    0.586087235467691130295,
    0.405845151377397166907,
    0.207784955007898467601,
    0.0,
)
_WK = (
    0.022935322010529224964,
    0.063092092629978553291,
    0.104790010322250183840,
    0.140653259715525918745,
    0.169004726639267902827,
    0.190350578064785409913,
    0.204432940075298892414,
    0.209482141084727828013,
)
# Gauss weights for the even-indexed Kronrod nodes (0.9491..., 0.7415..., ...).
_WG = (
    0.129484966168869693271,
    0.279705391489276667901,
    0.381830050505118944950,
    0.417959183673469387755,
)

_EPS = math.ulp(1.0)


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value, an estimate of its absolute error, and the number of
    integrand evaluations spent."""

    value: float
    abs_error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class ResidualReport:
    """PDE residual magnitudes per grid spacing.

    convergence_order is a least-squares slope of log(residual) against
    log(h) and is only filled by studies run on >= 3 grid levels.
    """

    grid_spacings: tuple[float, ...]
    max_abs_residual: float
    l2_residual: float
    convergence_order: float | None = None


def _gauss_kronrod(f, a: float, b: float) -> tuple[float, float, float]:
    """One G7/K15 panel on [a, b]: (integral, error estimate, integral of |f|).

    The error estimate follows the QUADPACK recipe: the raw G7/K15 gap is
    sharpened by (200 gap / resasc)^1.5 when the panel is smooth, then
    floored at the float64 roundoff level of the |f| integral.
    """
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    # vals[j] holds f at the +/- pair for abscissa j (single entry for x=0).
    vals = []
    for x in _XK:
        if x == 0.0:
            vals.append((f(center),))
        else:
            vals.append((f(center - half * x), f(center + half * x)))
    resk = sum(w * sum(v) for w, v in zip(_WK, vals))
    resg = sum(wg * sum(vals[2 * i + 1]) for i, wg in enumerate(_WG[:3]))
    resg += _WG[3] * vals[7][0]
    resabs = sum(w * sum(abs(u) for u in v) for w, v in zip(_WK, vals))
    mean = resk * 0.5
    resasc = sum(w * sum(abs(u - mean) for u in v) for w, v in zip(_WK, vals))
    integral = resk * half
    err = abs(resk - resg) * half
    resasc *= half
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    resabs *= half
    err = max(err, 50.0 * _EPS * resabs)
    return integral, err, resabs


def integrate_adaptive(f, a: float, b: float, tol: float, limit: int = 2000) -> QuadratureResult:
    """Adaptively bisected Gauss-Kronrod quadrature of f over [a, b].

    Refines the interval with the largest error estimate until the summed
    estimate is <= tol (absolute) or the subdivision limit is reached, in
    which case ToleranceNotMetError is raised.  Endpoints are never
    evaluated.  The error estimate is floored at the float64 roundoff
    level of the integral of |f|, so tolerances below ~50 eps * |I| are
    unreachable by construction.
    """
    if not (math.isfinite(tol) and tol > 0.0):
        raise InvalidParameterError(f"tol must be finite and > 0, got {tol}")
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise InvalidParameterError(f"bad interval [{a}, {b}]")
    integral, err, _ = _gauss_kronrod(f, a, b)
    intervals = [(err, a, b, integral)]
    evaluations = 15
    while True:
        total_err = sum(e for e, *_ in intervals)
        if total_err <= tol:
            return QuadratureResult(
                value=math.fsum(i for *_, i in intervals),
                abs_error_estimate=total_err,
                evaluations=evaluations,
            )
        if len(intervals) >= limit:
            raise ToleranceNotMetError(
                f"error estimate {total_err:.3e} > tol {tol:.3e} "
                f"after {len(intervals)} subdivisions"
            )
        worst = max(range(len(intervals)), key=lambda i: intervals[i][0])
        _, lo, hi, _ = intervals.pop(worst)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise ToleranceNotMetError(
                f"interval [{lo}, {hi}] cannot be subdivided further at float64"
            )
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            integral, err, _ = _gauss_kronrod(f, sub_lo, sub_hi)
            intervals.append((err, sub_lo, sub_hi, integral))
            evaluations += 15


def wkb_exponent_quadrature(
    params: MarketParams, bounds: RangeBound, tol: float = 1e-10
) -> QuadratureResult:
    """WKB action by adaptive quadrature, independent of the closed form.

    Integrates 2 sqrt(c) * sqrt(1/S^2 - lambda) from the strike K to the
    exit price S_r = sqrt(1/lambda) where the integrand vanishes.  tol is
    absolute, applied to the final (prefactor-scaled) value.
    """
    lam = compute_lambda(params).value
    k = bounds.width_k
    if lam * k * k >= 1.0:
        raise AboveBarrierError(
            f"lambda*K^2={lam * k * k} >= 1: trending regime, empty barrier"
        )
    s_r = math.sqrt(1.0 / lam)
    prefactor = 2.0 * math.sqrt(coupling_constant(params))

    def integrand(s: float) -> float:
        # 1/S^2 - lambda dips negative by rounding within a few ulps of S_r.
        return math.sqrt(max(0.0, 1.0 / (s * s) - lam))

    raw = integrate_adaptive(integrand, k, s_r, tol=tol / prefactor)
    return QuadratureResult(
        value=prefactor * raw.value,
        abs_error_estimate=prefactor * raw.abs_error_estimate,
        evaluations=raw.evaluations,
    )


def _phi_rhs(params: MarketParams, lam_value: float):
    r = params.r
    sig2 = params.sigma * params.sigma

    def rhs(s, y):
        phi, dphi = y
        return (dphi, 2.0 * ((r - lam_value) * phi - r * s * dphi) / (sig2 * s * s))

    return rhs


def solve_spatial_ode(
    params: MarketParams,
    lam_value: float,
    s0: float,
    phi0: float,
    dphi0: float,
    grid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> np.ndarray:
    """Integrate the spatial equation from (phi0, dphi0) at s0 onto grid.

    The equation is -(1/2) sigma^2 S^2 phi'' - r S phi' + r phi = lambda phi,
    integrated with an 8th-order Runge-Kutta scheme under local error
    control.  Grid points may lie on either side of s0; integration runs
    outward in both directions.  Raises DomainError for non-positive
    prices and StepFailureError if the integrator gives up.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidParameterError("grid must be a non-empty 1-d price array")
    if np.any(np.diff(grid) <= 0.0):
        raise InvalidParameterError("grid must be strictly increasing")
    if grid[0] <= 0.0 or s0 <= 0.0:
        raise DomainError("prices must be > 0")

    out = np.empty_like(grid)
    rhs = _phi_rhs(params, lam_value)
    for forward in (False, True):
        mask = grid > s0 if forward else grid < s0
        pts = grid[mask]
        if pts.size == 0:
            continue
        t_eval = pts if forward else pts[::-1]
        sol = solve_ivp(
            rhs,
            (s0, t_eval[-1]),
            (phi0, dphi0),
            method="DOP853",
            t_eval=t_eval,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise StepFailureError(f"ODE integration failed: {sol.message}")
        out[mask] = sol.y[0] if forward else sol.y[0][::-1]
    out[grid == s0] = phi0
    return out


def pde_residual(
    params: MarketParams,
    lam_value: float,
    s_grid,
    phi_on_grid,
    t_grid,
    time_rate: float | None = None,
) -> ResidualReport:
    """Residual of the pricing PDE on the product solution phi(S) e^(rate t).

    Builds w(S,t) = phi(S) * exp(rate * t) with rate defaulting to +lambda,
    then evaluates dw/dt + (1/2) sigma^2 S^2 w_SS + r S w_S - r w using
    centered differences in S and one-sided (forward) differences in t.
    Passing a deliberately wrong rate (e.g. 2*lambda) is the negative
    control: the residual then stalls at O(1) instead of shrinking.
    """
    s = np.asarray(s_grid, dtype=float)
    phi = np.asarray(phi_on_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if s.shape != phi.shape or s.ndim != 1:
        raise GridMismatchError(
            f"price grid ({s.shape}) and phi values ({phi.shape}) must be equal-length 1-d arrays"
        )
    if s.size < 3 or t.size < 2:
        raise GridMismatchError("need >= 3 price nodes and >= 2 time nodes")
    h_all = np.diff(s)
    h = h_all[0]
    if np.any(np.abs(h_all - h) > 1e-9 * abs(h)):
        raise GridMismatchError("price grid must be uniform")
    if np.any(np.diff(t) <= 0.0):
        raise GridMismatchError("time grid must be strictly increasing")

    rate = lam_value if time_rate is None else time_rate
    w = phi[:, None] * np.exp(rate * t[None, :])
    w_t = (w[:, 1:] - w[:, :-1]) / np.diff(t)[None, :]
    w_s = (w[2:, :-1] - w[:-2, :-1]) / (2.0 * h)
    w_ss = (w[2:, :-1] - 2.0 * w[1:-1, :-1] + w[:-2, :-1]) / (h * h)
    s_in = s[1:-1, None]
    sig2 = params.sigma * params.sigma
    residual = (
        w_t[1:-1, :]
        + 0.5 * sig2 * s_in * s_in * w_ss
        + params.r * s_in * w_s
        - params.r * w[1:-1, :-1]
    )
    return ResidualReport(
        grid_spacings=(float(h),),
        max_abs_residual=float(np.max(np.abs(residual))),
        l2_residual=float(np.sqrt(np.mean(residual * residual))),
    )


def residual_convergence_study(
    params: MarketParams,
    lam_value: float,
    s_lo: float = 1.0,
    s_hi: float = 3.4,
    levels: tuple[int, ...] = (64, 128, 256),
    t_scale: float = 0.25,
    time_rate: float | None = None,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> ResidualReport:
    """Grid-refinement study of the PDE residual.

    For each level n the price grid has spacing h = (s_hi-s_lo)/n and the
    forward time step is tied to h^2 (t_scale * (h/span)^2 years) so both
    discretization errors shrink at the same order; the reported
    convergence order is then ~2 for a consistent product solution.  phi
    is integrated tightly so solver error stays below the residual floor.
    """
    if len(levels) < 3:
        raise InvalidParameterError("a convergence study needs >= 3 grid levels")
    span = s_hi - s_lo
    spacings: list[float] = []
    max_abs: list[float] = []
    l2: list[float] = []
    for n in levels:
        grid = np.linspace(s_lo, s_hi, n + 1)
        h = span / n
        phi = solve_spatial_ode(
            params, lam_value, s_lo, 1.0, 0.0, grid, rtol=rtol, atol=atol
        )
        dt = t_scale * (h / span) ** 2
        t_grid = np.arange(4) * dt
        report = pde_residual(params, lam_value, grid, phi, t_grid, time_rate=time_rate)
        spacings.append(h)
        max_abs.append(report.max_abs_residual)
        l2.append(report.l2_residual)
    log_h = np.log(spacings)
    log_res = np.log(np.maximum(max_abs, 1e-300))
    order = float(np.polyfit(log_h, log_res, 1)[0])
    return ResidualReport(
        grid_spacings=tuple(spacings),
        max_abs_residual=max_abs[-1],
        l2_residual=l2[-1],
        convergence_order=order,
    )
