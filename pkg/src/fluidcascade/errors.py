"""Exception types shared across the package."""


class FluidCascadeError(Exception):
    """Base class for all package errors."""


class ConfigError(FluidCascadeError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class NumericalError(FluidCascadeError, RuntimeError):
    """Runtime numerical failure such as NaN/overflow (CLI exit code 3)."""


class InfeasibleError(FluidCascadeError, RuntimeError):
    """A requested computation exceeds the configured memory/work budget."""


class InfeasibleShellError(InfeasibleError):
    """A Littlewood-Paley shell cannot be evaluated at the requested metric."""

    def __init__(self, q, message=""):
        self.q = q
        super().__init__(message or f"shell q={q} is infeasible at the configured budget")


class AliasingError(FluidCascadeError, ValueError):
    """Grid resolution too small to represent a spectral field without aliasing."""


class BandError(ConfigError):
    """Initial datum has modes outside the dealiased band of the solver grid (exit code 2)."""

    def __init__(self, offending, limit):
        self.offending = offending
        self.limit = limit
        shown = ", ".join(str(tuple(int(c) for c in k)) for k in offending[:8])
        more = "" if len(offending) <= 8 else f" (+{len(offending) - 8} more)"
        super().__init__(f"modes outside dealiased band |k_i| <= {limit}: {shown}{more}")
