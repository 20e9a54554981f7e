"""Brute-force curvature of any coordinate metric by finite differences.

The oracle sees nothing but a function returning the coordinate components of
a metric.  It differentiates those components with Richardson-extrapolated
central differences and feeds the result through the textbook Levi-Civita
formulas.  Nothing here reads the canonical ``(u, theta, g)`` derivatives, so
comparisons against :mod:`stationary.geometry` are genuinely independent.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import tensors
from .errors import SingularMetricError, ValenceError
from .fields import ChartDomain, FDPolicy, richardson_derivative

__all__ = [
    "CoordinateMetric",
    "ORACLE_POLICY",
    "metric_derivatives",
    "coordinate_christoffels",
    "coordinate_riemann",
    "coordinate_ricci",
    "kretschmann",
    "einstein_divergence",
    "frame_matrix",
    "frame_transform",
    "inverse_frame_transform",
    "vector_to_frame",
    "vector_from_frame",
    "oracle_frame_connection",
    "assembled_metric",
    "conformal_metric",
    "horizontal_metric",
]

ORACLE_POLICY = FDPolicy(step=1e-3, levels=2, max_order=2)


@dataclass(frozen=True)
class CoordinateMetric:
    """Metric given only through its coordinate components.

    ``components(X)`` returns the symmetric ``dim x dim`` matrix at the full
    coordinate point ``X``.  ``signature`` is the number of negative
    eigenvalues expected (1 for Lorentzian, 0 for Riemannian).  ``domain`` is
    tested on ``X[offset:]`` so that a spacetime metric can reuse the spatial
    chart predicate.
    """

    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    signature: int = 0
    domain: ChartDomain = ChartDomain.everywhere()
    offset: int = 0
    name: str = ""

    def __call__(self, X):
        return np.asarray(self.components(np.asarray(X, dtype=float)), dtype=float)

    def contains(self, X, margin=0.0):
        return self.domain.contains(np.asarray(X, dtype=float)[self.offset:], margin)

    def require(self, X, margin=0.0):
        self.domain.require(np.asarray(X, dtype=float)[self.offset:], margin)


class _DomainView(ChartDomain):
    def __init__(self, metric: CoordinateMetric):
        self._metric = metric
        self.description = metric.domain.description

    def contains(self, x, margin=0.0):
        return self._metric.contains(x, margin)


def _second_partial(func, X, a, b, policy, check):
    ha = policy.step_at(X[a])
    hb = policy.step_at(X[b])
    ea = np.zeros_like(X)
    eb = np.zeros_like(X)
    if a == b:
        ea[a] = ha
        for q in (X + ea, X - ea):
            check(q)
        f0 = func(X)
        ests = []
        for k in range(policy.levels):
            s = 2.0 ** -k
            ests.append((func(X + s * ea) - 2 * f0 + func(X - s * ea)) / (s * ha) ** 2)
    else:
        ea[a] = ha
        eb[b] = hb
        for q in (X + ea + eb, X + ea - eb, X - ea + eb, X - ea - eb):
            check(q)
        ests = []
        for k in range(policy.levels):
            s = 2.0 ** -k
            ests.append((func(X + s * (ea + eb)) - func(X + s * (ea - eb))
                         - func(X + s * (eb - ea)) + func(X - s * (ea + eb)))
                        / (4 * s * s * ha * hb))
    for k in range(1, policy.levels):
        fac = 4.0 ** k
        ests = [(fac * ests[i + 1] - ests[i]) / (fac - 1) for i in range(len(ests) - 1)]
    return ests[0]


def metric_derivatives(m: CoordinateMetric, X, policy: FDPolicy = ORACLE_POLICY, order: int = 2):
    """Return ``(g, dg, ddg)`` at ``X``; ``ddg`` is ``None`` when ``order == 1``."""
    X = np.asarray(X, dtype=float)
    m.require(X)
    g = m(X)
    dim = m.dim
    view = _DomainView(m)
    dg = np.stack([richardson_derivative(m, X, a, policy, view) for a in range(dim)])
    if order < 2:
        return g, dg, None
    ddg = np.empty((dim, dim, dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            ddg[a, b] = ddg[b, a] = _second_partial(m, X, a, b, policy, view.require)
    return g, dg, ddg


def _inverse(g):
    if abs(np.linalg.det(g)) <= 1e-14:
        raise SingularMetricError("coordinate metric is degenerate")
    return np.linalg.inv(g)


def coordinate_christoffels(m: CoordinateMetric, X, policy: FDPolicy = ORACLE_POLICY):
    r"""``G[c, a, b]`` = :math:`\Gamma^c_{ab}` from first differences of the metric."""
    g, dg, _ = metric_derivatives(m, X, policy, order=1)
    return tensors.christoffel(_inverse(g), dg)


def coordinate_riemann(m: CoordinateMetric, X, policy: FDPolicy = ORACLE_POLICY):
    """Fully covariant Riemann tensor with the sphere-positive sign."""
    g, dg, ddg = metric_derivatives(m, X, policy)
    gi = _inverse(g)
    G = tensors.christoffel(gi, dg)
    dG = tensors.christoffel_deriv(gi, dg, ddg)
    return tensors.riemann_lower(g, G, dG)


def coordinate_ricci(m: CoordinateMetric, X, policy: FDPolicy = ORACLE_POLICY):
    X = np.asarray(X, dtype=float)
    return tensors.ricci(_inverse(m(X)), coordinate_riemann(m, X, policy))


def kretschmann(m: CoordinateMetric, X, policy: FDPolicy = ORACLE_POLICY):
    X = np.asarray(X, dtype=float)
    R = coordinate_riemann(m, X, policy)
    gi = _inverse(m(X))
    R_up = np.einsum("ae,bf,cg,dh,efgh->abcd", gi, gi, gi, gi, R)
    return float(np.einsum("abcd,abcd->", R, R_up))


def einstein_divergence(m: CoordinateMetric, X, policy: Optional[FDPolicy] = None):
    r"""Max-norm of :math:`\nabla^a G_{ab}` (contracted second Bianchi identity).

    Differentiates the FD Ricci tensor once more, so it is a loose check.
    """
    policy = policy or FDPolicy(step=1e-2, levels=2)
    X = np.asarray(X, dtype=float)
    inner = FDPolicy(step=1e-3, levels=2)

    def einstein(Y):
        ric = coordinate_ricci(m, Y, inner)
        gi = _inverse(m(Y))
        return ric - 0.5 * tensors.scalar(gi, ric) * m(Y)

    view = _DomainView(m)
    dE = np.stack([richardson_derivative(einstein, X, a, policy, view) for a in range(m.dim)])
    E = einstein(X)
    gi = _inverse(m(X))
    G = coordinate_christoffels(m, X)
    # nabla_c E_ab = d_c E_ab - G^d_ca E_db - G^d_cb E_ad
    nabla = dE - np.einsum("dca,db->cab", G, E) - np.einsum("dcb,ad->cab", G, E)
    return float(np.max(np.abs(np.einsum("ca,cab->b", gi, nabla))))


# ------------------------------------------------------------ frame conversion

def frame_matrix(theta):
    r"""``E[a, mu]``: coordinate components of :math:`e_0 = \partial_t`,
    :math:`e_i = \partial_i - \theta_i\partial_t`."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    E = np.eye(n + 1)
    E[1:, 0] = -theta
    return E


def _theta_at(S_or_theta, p):
    if hasattr(S_or_theta, "theta"):
        return S_or_theta.theta(p)
    return np.asarray(S_or_theta, dtype=float)


def _apply(tensor, M, upper, Mup):
    out = np.asarray(tensor, dtype=float)
    for axis in range(out.ndim):
        mat = Mup if axis < upper else M
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out


def frame_transform(tensor, S, p=None, upper: int = 0):
    """Convert coordinate components to adapted-frame components.

    ``S`` is a :class:`~stationary.geometry.StationarySpacetime` (its shift is
    evaluated at ``p``) or directly the shift covector.  The first ``upper``
    indices are contravariant, the rest covariant.  Valence up to 4.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim > 4 or not 0 <= upper <= tensor.ndim:
        raise ValenceError(f"unsupported valence: rank {tensor.ndim}, {upper} upper")
    E = frame_matrix(_theta_at(S, p))
    Einv = np.linalg.inv(E)
    # covariant: T(e_a, ...) = E[a, mu] T_mu ; contravariant: V^a = Einv[mu, a] V^mu
    return _apply(tensor, E, upper, Einv.T)


def inverse_frame_transform(tensor, S, p=None, upper: int = 0):
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim > 4 or not 0 <= upper <= tensor.ndim:
        raise ValenceError(f"unsupported valence: rank {tensor.ndim}, {upper} upper")
    E = frame_matrix(_theta_at(S, p))
    Einv = np.linalg.inv(E)
    return _apply(tensor, Einv, upper, E.T)


def vector_to_frame(V, theta):
    """Frame components of a tangent vector: ``T^0 = V^t + theta_i V^i``, ``T^i = V^i``."""
    return frame_transform(V, theta, upper=1)


def vector_from_frame(T, theta):
    return inverse_frame_transform(T, theta, upper=1)


def oracle_frame_connection(m: CoordinateMetric, S, p, t: float = 0.0,
                            policy: FDPolicy = ORACLE_POLICY):
    r"""``C[a, b, c]`` with :math:`D_{e_a}e_b = C_{ab}{}^c e_c`, from coordinate
    Christoffels and finite differences of the frame vector fields."""
    p = np.asarray(p, dtype=float)
    X = np.concatenate([[t], p])
    G = coordinate_christoffels(m, X, policy)
    E = frame_matrix(S.theta(p))
    n = p.size
    dE = np.zeros((n + 1, n + 1, n + 1))  # dE[mu, a, nu] = d_mu E[a, nu]
    dE[1:] = np.stack([richardson_derivative(lambda q: frame_matrix(S.theta(q)), p, i, policy, S.domain)
                       for i in range(n)])
    # coordinate components of D_{e_a} e_b
    V = (np.einsum("am,mbn->abn", E, dE) + np.einsum("am,nmr,br->abn", E, G, E))
    return np.einsum("abn,nc->abc", V, np.linalg.inv(E))


# ------------------------------------------------- metrics built from canonical data

def assembled_metric(S) -> CoordinateMetric:
    """Full-coordinate metric assembled from the values of ``(u, theta, g)`` only."""
    sign = S.sign

    def comps(X):
        x = X[1:]
        w = sign * float(S.u(x)) ** 2
        th = S.theta(x)
        out = np.empty((S.n + 1, S.n + 1))
        out[0, 0] = w
        out[0, 1:] = out[1:, 0] = w * th
        out[1:, 1:] = S.g(x) + w * np.outer(th, th)
        return out

    return CoordinateMetric(S.n + 1, comps, 1 if sign < 0 else 0, S.domain, 1, S.name)


def horizontal_metric(S) -> CoordinateMetric:
    return CoordinateMetric(S.n, lambda x: S.g(x), 0, S.domain, 0, S.name + ":g")


def conformal_metric(S) -> CoordinateMetric:
    """:math:`\\tilde g = u^{2/(n-2)} g` as a coordinate metric on the spatial chart."""
    e = 2.0 / (S.n - 2)
    return CoordinateMetric(S.n, lambda x: float(S.u(x)) ** e * S.g(x), 0, S.domain, 0,
                            S.name + ":gtil")
