"""Numerical geometry of stationary metrics ``-u^2 (dt + theta)^2 + g``.

Submodules: :mod:`fields`, :mod:`geometry`, :mod:`oracle`, :mod:`reduction4d`,
:mod:`geodesics`, :mod:`estimates`, :mod:`catalog` and :mod:`cli`.
"""

from .errors import (DimensionError, DomainError, GeometryError, NotClosedError, NotStaticError,
                     OrderError, ParameterError, SingularMetricError, StepUnderflow, ValenceError)
from .fields import ChartDomain, FDPolicy, Field, partial
from .geometry import StationarySpacetime, hat_metric, rescale

__version__ = "0.1.0"
