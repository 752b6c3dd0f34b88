"""Breakout (tunneling) probabilities through the support/resistance wall.

Three transmission coefficients are computed for a box of width K in the
range-bound regime (lambda < V0 = 1/K^2):

  exact      rectangular wall of height V0 and width d = sqrt(sigma/r) - K:
             T = (V0^2 / (4 lambda (V0-lambda)) sinh^2(q d) + 1)^-1
  thick      the qd >> 1 limit of the exact form, T = exp(-2 q d)
  wkb        semiclassical integral of the decaying potential 1/S^2 from K
             to the exit price S_r, which evaluates in closed form to
             T = exp(-2 sqrt(c) (artanh(u) - u)),  u = sqrt(1 - lambda K^2)

with the shared prefactor c = r (sigma^2 + r) / sigma^4 and local rates
k = sqrt(c lambda), q = sqrt(c (V - lambda)).

The wkb closed form is the one that reproduces published transmission
tables; the exact rectangular form bounds it from above for thin walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AboveBarrierError, InvalidParameterError
from .model import MarketParams, RangeBound, barrier_geometry, compute_lambda

__all__ = [
    "WaveNumbers",
    "TransmissionResult",
    "coupling_constant",
    "wave_numbers",
    "amplitude_ratio",
    "transmission_exact",
    "transmission_thick",
    "transmission_wkb",
    "wkb_exponent_closed_form",
]


@dataclass(frozen=True)
class WaveNumbers:
    """Oscillation rate k inside the box, decay rate q inside the wall,
    and the shared prefactor c = r (sigma^2 + r) / sigma^4."""

    k: float
    q: float
    c: float


@dataclass(frozen=True)
class TransmissionResult:
    """Exact, WKB, and thick-wall transmission probabilities.

    t_wkb == exp(-wkb_exponent) by construction.
    """

    t_exact: float
    t_wkb: float
    t_thick: float
    wkb_exponent: float


def coupling_constant(params: MarketParams) -> float:
    """Shared prefactor c = r (sigma^2 + r) / sigma^4."""
    sig2 = params.sigma * params.sigma
    return params.r * (sig2 + params.r) / (sig2 * sig2)


def wave_numbers(params: MarketParams, lam_value: float, v: float) -> WaveNumbers:
    """Local wavenumbers for energy lambda against a potential value V.

    Requires V > lambda (a real decay rate inside the wall); raises
    AboveBarrierError otherwise.
    """
    if not (math.isfinite(lam_value) and lam_value > 0.0):
        raise InvalidParameterError(f"lambda must be finite and > 0, got {lam_value}")
    if not math.isfinite(v):
        raise InvalidParameterError(f"potential must be finite, got {v}")
    if v <= lam_value:
        raise AboveBarrierError(
            f"V={v} <= lambda={lam_value}: no wall to tunnel through (trending regime)"
        )
    c = coupling_constant(params)
    return WaveNumbers(k=math.sqrt(c * lam_value), q=math.sqrt(c * (v - lam_value)), c=c)


def amplitude_ratio(k: float, q: float, d: float) -> float:
    """|A|^2/|F|^2 from matching the wavefunction at both wall faces.

    Returns ((k^2+q^2)^2 / (4 k^2 q^2)) sinh^2(q d) + 1, always >= 1.
    """
    if not (k > 0.0 and q > 0.0):
        raise InvalidParameterError(f"k and q must be > 0, got k={k}, q={q}")
    if d < 0.0:
        raise InvalidParameterError(f"wall width must be >= 0, got {d}")
    k2, q2 = k * k, q * q
    s = math.sinh(q * d)
    return (k2 + q2) ** 2 / (4.0 * k2 * q2) * s * s + 1.0


def transmission_exact(params: MarketParams, bounds: RangeBound) -> float:
    """Exact transmission through a rectangular wall of height V0, width d.

    T = (V0^2 / (4 lambda (V0-lambda)) sinh^2(q d) + 1)^-1 with q evaluated
    at V = V0 and d = sqrt(sigma/r) - K.  Requires the range-bound regime.
    """
    lam = compute_lambda(params).value
    geom = barrier_geometry(params, bounds)
    if lam >= geom.v0:
        raise AboveBarrierError(
            f"lambda={lam} >= V0={geom.v0}: trending regime, no transmission defined"
        )
    q = math.sqrt(coupling_constant(params) * (geom.v0 - lam))
    s = math.sinh(q * geom.d)
    prefactor = geom.v0 * geom.v0 / (4.0 * lam * (geom.v0 - lam))
    return 1.0 / (prefactor * s * s + 1.0)


def transmission_thick(q: float, d: float) -> float:
    """Thick-wall limit T = exp(-2 q d), accurate only for qd >> 1."""
    if q < 0.0 or d < 0.0:
        raise InvalidParameterError(f"q and d must be >= 0, got q={q}, d={d}")
    return math.exp(-2.0 * q * d)


def _atanh_minus_u(u: float) -> float:
    # artanh(u) - u loses all significant digits for small u; switch to the
    # odd series u^3/3 + u^5/5 + ... below a threshold where its tail is
    # under 1 ulp.
    if u < 0.125:
        u2 = u * u
        term = u * u2
        total = 0.0
        n = 3
        while n <= 17:
            total += term / n
            term *= u2
            n += 2
        return total
    return math.atanh(u) - u


def wkb_exponent_closed_form(params: MarketParams, bounds: RangeBound) -> float:
    """Closed form of the WKB action 2 sqrt(c) * Integral_K^{S_r} sqrt(1/S^2 - lambda) dS.

    The antiderivative of sqrt(1-lambda S^2)/S is u - artanh(u) in
    u(S) = sqrt(1 - lambda S^2); u vanishes at the exit price S_r, so the
    action is 2 sqrt(c) (artanh(u_K) - u_K) with u_K = sqrt(1 - lambda K^2).
    Requires lambda K^2 < 1 (range-bound regime).
    """
    lam = compute_lambda(params).value
    k = bounds.width_k
    lk2 = lam * k * k
    if lk2 >= 1.0:
        raise AboveBarrierError(
            f"lambda*K^2={lk2} >= 1: trending regime, no tunneling exponent"
        )
    u = math.sqrt(1.0 - lk2)
    return 2.0 * math.sqrt(coupling_constant(params)) * _atanh_minus_u(u)


def transmission_wkb(params: MarketParams, bounds: RangeBound) -> TransmissionResult:
    """WKB transmission, with the exact and thick-wall values for comparison.

    Requires the range-bound regime (lambda K^2 < 1).
    """
    exponent = wkb_exponent_closed_form(params, bounds)
    lam = compute_lambda(params).value
    geom = barrier_geometry(params, bounds)
    q = math.sqrt(coupling_constant(params) * (geom.v0 - lam))
    return TransmissionResult(
        t_exact=transmission_exact(params, bounds),
        t_wkb=math.exp(-exponent),
        t_thick=transmission_thick(q, geom.d),
        wkb_exponent=exponent,
    )
