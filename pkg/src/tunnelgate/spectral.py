"""Change of variables and stationary box modes of the spatial equation.

The substitution ln(phi) = ln(psi) - (r/sigma^2) ln(S) removes the
first-derivative term from the spatial equation, i.e.
phi(S) = psi(S) * S^(-r/sigma^2).  Inside the box the potential is dropped
and the stationary solutions are the familiar sine modes

    psi_n(S) = sqrt(2/K) sin(n pi S / K),   0 <= S <= K,

vanishing at the support (S=0) and the resistance (S=K).  Their
eigenvalues under the zero-potential box operator
-(sigma^4 / (r (sigma^2 + r))) d^2/dS^2 are

    lambda_n = (sigma^4 / (r (sigma^2 + r))) * (n pi / K)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidParameterError
from .model import MarketParams


@dataclass(frozen=True)
class StationaryMode:
    """Box mode with index n >= 1 on a box of width K."""

    n: int
    width_k: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidParameterError(f"mode index must be an integer >= 1, got {self.n}")
        if not (math.isfinite(self.width_k) and self.width_k > 0.0):
            raise InvalidParameterError(f"box width must be finite and > 0, got {self.width_k}")

    @property
    def amplitude(self) -> float:
        """Normalization amplitude sqrt(2/K)."""
        return math.sqrt(2.0 / self.width_k)


def transform_exponent(params: MarketParams) -> float:
    """Power r/sigma^2 used in the phi <-> psi similarity transform."""
    return params.r / (params.sigma * params.sigma)


def phi_from_psi(params: MarketParams, psi_value: float, s: float) -> float:
    """Map a psi value at price S back to phi: phi = psi * S^(-r/sigma^2)."""
    if not (math.isfinite(s) and s > 0.0):
        raise DomainError(f"price must be finite and > 0, got {s}")
    return psi_value * s ** (-transform_exponent(params))


def psi_from_phi(params: MarketParams, phi_value: float, s: float) -> float:
    """Inverse of phi_from_psi: psi = phi * S^(r/sigma^2)."""
    if not (math.isfinite(s) and s > 0.0):
        raise DomainError(f"price must be finite and > 0, got {s}")
    return phi_value * s ** transform_exponent(params)


def mode_value(mode: StationaryMode, s: float) -> float:
    """Evaluate sqrt(2/K) sin(n pi S / K) at price offset S from the support.

    S must lie in the closed box [0, K].
    """
    k = mode.width_k
    if not math.isfinite(s) or s < 0.0 or s > k:
        raise DomainError(f"S={s} outside the box [0, {k}]")
    return mode.amplitude * math.sin(mode.n * math.pi * s / k)


def mode_eigenvalue(params: MarketParams, mode: StationaryMode) -> float:
    """Eigenvalue of mode n under the zero-potential box operator.

    Returns (sigma^4 / (r (sigma^2 + r))) * (n pi / K)^2, the value for
    which -(sigma^4/(r(sigma^2+r))) psi'' = lambda_n psi holds exactly.
    """
    sig2 = params.sigma * params.sigma
    prefactor = sig2 * sig2 / (params.r * (sig2 + params.r))
    wavenumber = mode.n * math.pi / mode.width_k
    return prefactor * wavenumber * wavenumber
