"""Closed-form scalars of the range-bound market model.

A stock pinned between a support and a resistance level behaves like a
particle in a box of width K (the call strike, measured from the support
placed at the origin).  Everything here is an elementary function of the
two market parameters r (risk-free rate) and sigma (volatility), both
annualized decimal fractions, and of the box width K in price units:

    lambda = r / sigma            separation constant
    decay(t) = exp(-lambda * t)   option time decay over t years
    V0 = 1 / K^2                  barrier potential at the strike
    S_r = sqrt(1 / lambda)        exit price where the potential falls to lambda
    d = S_r - K                   penetration distance of a breakout

All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError


@dataclass(frozen=True)
class MarketParams:
    """Annualized risk-free rate and volatility, the model's only inputs."""

    r: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise InvalidParameterError(f"r must be finite and > 0, got {self.r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise InvalidParameterError(f"sigma must be finite and > 0, got {self.sigma}")


@dataclass(frozen=True)
class Lambda:
    """Separation constant r/sigma (units 1/price^2 in the spatial equation)."""

    value: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise InvalidParameterError(f"lambda must be finite and > 0, got {self.value}")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class RangeBound:
    """Support/resistance prices; the box width K is their difference."""

    support: float
    resistance: float
    width_k: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.support) and math.isfinite(self.resistance)):
            raise InvalidParameterError("support and resistance must be finite")
        if self.resistance <= self.support:
            raise InvalidParameterError(
                f"resistance ({self.resistance}) must exceed support ({self.support})"
            )
        object.__setattr__(self, "width_k", self.resistance - self.support)

    @classmethod
    def from_width(cls, width_k: float) -> "RangeBound":
        """Box of width K with the support shifted to the origin."""
        return cls(support=0.0, resistance=width_k)


@dataclass(frozen=True)
class BarrierGeometry:
    """Barrier potential V0 = 1/K^2, exit price S_r, and penetration distance d.

    d <= 0 signals a trending instrument; callers consult the regime
    instead of treating that as an error.
    """

    v0: float
    s_r: float
    d: float


class Regime(enum.Enum):
    RANGE_BOUND = "range-bound"
    CRITICAL = "critical"
    TRENDING = "trending"


def compute_lambda(params: MarketParams) -> Lambda:
    """Separation constant lambda = r/sigma."""
    return Lambda(params.r / params.sigma)


def time_decay(params: MarketParams, t: float) -> float:
    """Option time-decay factor exp(-(r/sigma) * t) after t years.

    Raises InvalidParameterError for negative t; the value lies in (0, 1]
    for t >= 0.
    """
    if not math.isfinite(t) or t < 0.0:
        raise InvalidParameterError(f"t must be finite and >= 0, got {t}")
    return math.exp(-(params.r / params.sigma) * t)


def barrier_geometry(params: MarketParams, bounds: RangeBound) -> BarrierGeometry:
    """Barrier geometry for a box of width K = resistance - support.

    v0 = 1/K^2, s_r = sqrt(sigma/r), d = s_r - K.  d may be non-positive
    (trending regime); classification is left to classify_regime.
    """
    k = bounds.width_k
    s_r = math.sqrt(params.sigma / params.r)
    return BarrierGeometry(v0=1.0 / (k * k), s_r=s_r, d=s_r - k)


def classify_regime(lam: Lambda, geometry: BarrierGeometry, tolerance: float = 1e-9) -> Regime:
    """Classify the market by comparing lambda against the barrier height V0.

    Trending if lambda > V0*(1+tolerance), range-bound if
    lambda < V0*(1-tolerance), critical otherwise.  tolerance is relative
    and must be >= 0.
    """
    if not math.isfinite(tolerance) or tolerance < 0.0:
        raise InvalidParameterError(f"tolerance must be finite and >= 0, got {tolerance}")
    v0 = geometry.v0
    if lam.value > v0 * (1.0 + tolerance):
        return Regime.TRENDING
    if lam.value < v0 * (1.0 - tolerance):
        return Regime.RANGE_BOUND
    return Regime.CRITICAL


def strike_bound(lam: Lambda) -> float:
    """Largest strike K = sqrt(1/lambda) still admitting a range-bound box.

    Strikes below this bound satisfy lambda < V0; at the bound the barrier
    width vanishes.
    """
    return math.sqrt(1.0 / lam.value)
