"""Exception types.  Each maps to one CLI exit code."""


class SurfaceError(Exception):
    exit_code = 4


class InputError(SurfaceError, ValueError):
    """Bad selector, parameters, file contents or preconditions on input data."""
    exit_code = 2


class DomainError(InputError):
    """Parameter point (or a stencil around it) outside the surface domain."""


class ImmersionError(SurfaceError):
    """Degenerate jet: z_u and z_v (numerically) dependent."""


class DegeneratePointError(SurfaceError):
    """Quantity undefined at a flat, minimal or otherwise special point."""


class ThresholdError(SurfaceError):
    """A tolerance or threshold check failed (residuals, holonomy, constancy)."""
    exit_code = 3
