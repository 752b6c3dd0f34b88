"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: parameter/usage problems
exit 2, above-barrier (trending regime) problems exit 3, verification
failures exit 1.
"""


class TunnelgateError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TunnelgateError, ValueError):
    """A market parameter or argument violates its precondition."""


class DomainError(TunnelgateError, ValueError):
    """An evaluation point lies outside the function's domain."""


class AboveBarrierError(TunnelgateError, ValueError):
    """lambda >= V0 (equivalently lambda*K^2 >= 1): the market is trending
    and no tunneling quantity is defined."""


class ToleranceNotMetError(TunnelgateError, RuntimeError):
    """Adaptive refinement hit its limit before reaching the requested
    error tolerance."""


class StepFailureError(TunnelgateError, RuntimeError):
    """The ODE integrator could not complete a step within tolerance."""


class GridMismatchError(TunnelgateError, ValueError):
    """Arrays passed to a residual check do not describe the same grid."""


class CsvParseError(TunnelgateError, ValueError):
    """A market-data CSV file could not be parsed; message carries the
    offending line number."""


class BarInvariantError(TunnelgateError, ValueError):
    """An OHLC bar violates its low/high ordering invariants; message
    names the bar."""


class EmptySeriesError(TunnelgateError, ValueError):
    """A price series contains no bars."""


class InsufficientDataError(TunnelgateError, ValueError):
    """A rolling-window analytic was asked for more history than the
    series contains."""


class ConfigError(TunnelgateError, ValueError):
    """A run-configuration file is malformed or violates a precondition."""
