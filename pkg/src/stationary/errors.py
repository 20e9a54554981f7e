"""Exception hierarchy shared by every module of the package."""


class GeometryError(Exception):
    """Base class for all errors raised by :mod:`stationary`."""


class DomainError(GeometryError):
    """A point, or a finite-difference stencil around it, left the chart domain."""


class OrderError(GeometryError):
    """Requested derivative order exceeds what the :class:`FDPolicy` allows."""


class SingularMetricError(GeometryError):
    """Metric data is degenerate (det g <= 1e-12 or u <= 1e-8)."""


class DimensionError(GeometryError):
    """Operation requires a different spatial dimension."""


class NotStaticError(GeometryError):
    """Operation requires a static spacetime but the twist does not vanish."""


class NotClosedError(GeometryError):
    """The twist one-form is not closed, so no twist potential exists."""


class ValenceError(GeometryError):
    """Tensor valence outside the supported range."""


class ParameterError(GeometryError, ValueError):
    """Catalog parameters outside their admissible range."""


class StepUnderflow(GeometryError):
    """Adaptive integrator step size fell below the representable floor."""
