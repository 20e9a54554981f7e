"""Chart fields and the differentiation engine.

A :class:`Field` is an array-valued function of the spatial chart coordinates
``x = (x^1, ..., x^n)``.  Catalog fields carry exact gradients and Hessians;
anything of order three or four is obtained by Richardson-extrapolated central
differences applied to the exact Hessian.  Fields built without analytic
derivatives fall back to pure finite differences.

Derivative arrays put the derivative indices first: for a field of shape ``S``
the gradient has shape ``(n,) + S`` and the Hessian ``(n, n) + S``.

Time independence is structural: no field accepts a time argument.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, OrderError, SingularMetricError
from . import tensors

__all__ = [
    "FDPolicy",
    "ChartDomain",
    "Field",
    "Jet",
    "richardson_derivative",
    "fd_jacobian",
    "partial",
    "jet",
    "third_derivatives",
    "covariant_derivative_1form",
    "DEFAULT_POLICY",
]


@dataclass(frozen=True)
class FDPolicy:
    """Finite-difference settings.

    ``step`` is the base step; along axis ``a`` the actual step is
    ``max(step, step * |x^a|)``.  ``levels`` Richardson levels halve the step
    each time.
    """

    step: float = 1e-3
    levels: int = 2
    max_order: int = 4

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"FD step must be positive, got {self.step}")
        if self.levels < 1:
            raise ValueError("need at least one Richardson level")
        if not 0 <= self.max_order <= 4:
            raise ValueError("max_order must lie in [0, 4]")

    def step_at(self, coord):
        return max(self.step, self.step * abs(coord))


DEFAULT_POLICY = FDPolicy()


class ChartDomain:
    """Chart-domain predicate with a safety margin.

    ``predicate(x, margin)`` must return True when ``x`` lies inside the chart
    at distance at least ``margin`` (in coordinate units) from its boundary.
    """

    def __init__(self, predicate: Callable[[np.ndarray, float], bool], description: str = ""):
        self._predicate = predicate
        self.description = description

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.isfinite(x))) and bool(self._predicate(x, margin))

    def require(self, x, margin: float = 0.0):
        if not self.contains(x, margin):
            raise DomainError(f"point {np.asarray(x).tolist()} outside chart domain"
                              f" ({self.description or 'unnamed'}, margin={margin})")

    @classmethod
    def everywhere(cls):
        return cls(lambda x, margin: True, "R^n")

    def __repr__(self):
        return f"ChartDomain({self.description!r})"


def _stencil_points(p, axis, h):
    e = np.zeros_like(p)
    e[axis] = h
    return p + e, p - e


def richardson_derivative(func, p, axis, policy=DEFAULT_POLICY, domain=None):
    """Central-difference derivative of ``func`` along ``axis`` at ``p``.

    ``func`` may return a scalar or an array.  The outermost stencil points are
    checked against ``domain`` and a :class:`DomainError` is raised rather than
    extrapolating across a chart boundary.
    """
    p = np.asarray(p, dtype=float)
    h = policy.step_at(p[axis])
    if domain is not None:
        for q in _stencil_points(p, axis, h):
            domain.require(q)
    estimates = []
    for level in range(policy.levels):
        hk = h / 2 ** level
        qp, qm = _stencil_points(p, axis, hk)
        estimates.append((np.asarray(func(qp), dtype=float)
                          - np.asarray(func(qm), dtype=float)) / (2 * hk))
    # Richardson tableau for an even error expansion in h
    for k in range(1, policy.levels):
        factor = 4.0 ** k
        estimates = [(factor * estimates[i + 1] - estimates[i]) / (factor - 1)
                     for i in range(len(estimates) - 1)]
    return estimates[0]


def fd_jacobian(func, p, policy=DEFAULT_POLICY, domain=None):
    """Stack :func:`richardson_derivative` over all axes (derivative index first)."""
    p = np.asarray(p, dtype=float)
    return np.stack([richardson_derivative(func, p, a, policy, domain)
                     for a in range(p.size)])


@dataclass(frozen=True)
class Field:
    """Array-valued chart field with optional analytic first/second derivatives.

    ``shape`` is the value shape: ``()`` for scalars such as the lapse, ``(n,)``
    for the shift covector, ``(n, n)`` for the horizontal metric.
    """

    value: Callable[[np.ndarray], object]
    grad: Optional[Callable[[np.ndarray], object]] = None
    hess: Optional[Callable[[np.ndarray], object]] = None
    shape: tuple = ()
    name: str = ""

    def __call__(self, p):
        return np.asarray(self.value(np.asarray(p, dtype=float)), dtype=float).reshape(self.shape)

    @property
    def analytic(self):
        return self.grad is not None and self.hess is not None

    def gradient(self, p, policy=DEFAULT_POLICY, domain=None):
        p = np.asarray(p, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(p), dtype=float).reshape((p.size,) + self.shape)
        return fd_jacobian(self, p, policy, domain)

    def hessian(self, p, policy=DEFAULT_POLICY, domain=None):
        p = np.asarray(p, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(p), dtype=float).reshape((p.size, p.size) + self.shape)
        if self.grad is not None:
            d2 = fd_jacobian(lambda q: self.gradient(q), p, policy, domain)
        else:
            d2 = fd_jacobian(lambda q: fd_jacobian(self, q, policy), p, policy, domain)
        # symmetrize the FD estimate in its two derivative slots
        return 0.5 * (d2 + np.swapaxes(d2, 0, 1))

    def value_only(self):
        """Same field with analytic derivatives stripped (pure-FD path)."""
        return Field(self.value, None, None, self.shape, self.name + "[fd]")

    def component(self, index):
        """Scalar field extracted from one component of an array field."""
        index = tuple(np.atleast_1d(index))
        sl = (Ellipsis,) + index

        def val(p):
            return self(p)[index]

        grad = (lambda p: self.gradient(p)[sl]) if self.grad is not None else None
        hess = (lambda p: self.hessian(p)[sl]) if self.hess is not None else None
        return Field(val, grad, hess, (), f"{self.name}{list(index)}")


@dataclass(frozen=True)
class Jet:
    """Value and first two derivatives of a field at one point."""

    val: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def jet(fld: Field, p, policy=DEFAULT_POLICY, domain=None) -> Jet:
    p = np.asarray(p, dtype=float)
    return Jet(fld(p), fld.gradient(p, policy, domain), fld.hessian(p, policy, domain))


def third_derivatives(fld: Field, p, policy=DEFAULT_POLICY, domain=None):
    """``d3[a, b, c, ...] = d_a d_b d_c f`` by differencing the Hessian, symmetrized."""
    p = np.asarray(p, dtype=float)
    d3 = fd_jacobian(lambda q: fld.hessian(q, policy), p, policy, domain)
    return (d3 + np.swapaxes(d3, 0, 1) + np.swapaxes(d3, 0, 2)) / 3.0


def partial(fld: Field, p, multi_index: Sequence[int], policy=DEFAULT_POLICY, domain=None):
    """Coordinate partial derivative of ``fld`` selected by ``multi_index``.

    Axis indices are zero-based.  Orders up to two use the analytic gradient and
    Hessian; orders three and four difference the analytic Hessian.
    """
    p = np.asarray(p, dtype=float)
    idx = list(multi_index)
    order = len(idx)
    if order > policy.max_order:
        raise OrderError(f"derivative order {order} exceeds policy maximum {policy.max_order}")
    if any(not 0 <= a < p.size for a in idx):
        raise IndexError(f"axis index out of range in {idx}")
    if domain is not None:
        domain.require(p)
    if order == 0:
        return fld(p)
    if order == 1:
        return fld.gradient(p, policy, domain)[idx[0]]
    idx = sorted(idx)
    if order == 2:
        return fld.hessian(p, policy, domain)[idx[0], idx[1]]
    if order == 3:
        return richardson_derivative(lambda q: fld.hessian(q, policy)[idx[1], idx[2]],
                                     p, idx[0], policy, domain)

    def third(q):
        return richardson_derivative(lambda r: fld.hessian(r, policy)[idx[2], idx[3]],
                                     q, idx[1], policy)

    return richardson_derivative(third, p, idx[0], policy, domain)


def covariant_derivative_1form(theta: Field, g: Field, p, policy=DEFAULT_POLICY, domain=None):
    r"""Matrix ``D[i, j]`` = :math:`\nabla_i\theta_j = \partial_i\theta_j - \Gamma^k_{ij}\theta_k`."""
    p = np.asarray(p, dtype=float)
    if domain is not None:
        domain.require(p)
    gm = g(p)
    if np.linalg.det(gm) <= 1e-12 or np.any(np.linalg.eigvalsh(gm) <= 0):
        raise SingularMetricError(f"horizontal metric not positive definite at {p.tolist()}")
    G = tensors.christoffel(np.linalg.inv(gm), g.gradient(p, policy, domain))
    return theta.gradient(p, policy, domain) - np.einsum("kij,k->ij", G, theta(p))
