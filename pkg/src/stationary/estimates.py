r"""Numerical monitors for the gradient and curvature estimates.

A ball :math:`\hat B(x_0, a)` is sampled by shooting radial geodesics of the
Riemannian partner metric from ``x_0``.  The radial arclength is only an upper
bound for the true distance, so every supremum reported here is taken over a
subset of the true ball; the reports say so in their metadata.  No universal
constant is asserted; reports give the ratio ``sup / bound_form``.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__
from .errors import DimensionError, DomainError, NotStaticError
from .fields import Field
from .geodesics import GeodesicState, integrate_geodesic
from .geometry import (STATIC_TOL, StationarySpacetime, curvature_blocks, hat_metric,
                       hessian_laplacian, local_data)
from .reduction4d import h_monitor

__all__ = [
    "BallSample",
    "EstimateReport",
    "sample_ball",
    "gradient_estimate_ratio",
    "curvature_estimate_ratio",
    "hat_riemann_norm",
    "scaling_diagnostic",
    "static_bochner_terms",
    "static_bochner_residual",
]

SAMPLING_NOTE = ("sup taken over radial hat-geodesic samples; radial arclength bounds the "
                 "true distance from above, so the sup is over a subset of the ball")


@dataclass
class BallSample:
    center: np.ndarray
    a: float
    points: List[np.ndarray]
    distances: np.ndarray
    times: np.ndarray
    rays: int
    per_ray: int

    def within(self, radius):
        return [p for p, d in zip(self.points, self.distances) if d <= radius + 1e-12]


def _hat_orthonormal(S, center):
    """Columns: hat-orthonormal frame components (``e_0/u`` and a g-orthonormal basis)."""
    n = S.n
    u = float(S.u(center))
    B = np.zeros((n + 1, n + 1))
    B[0, 0] = 1.0 / u
    L = np.linalg.cholesky(S.g(center))
    B[1:, 1:] = np.linalg.inv(L).T
    return B


def sample_ball(S: StationarySpacetime, center, a: float, ray_count: int = 64, per_ray: int = 16,
                seed: int = 0, tol: float = 1e-9) -> BallSample:
    """Sample ``ray_count * per_ray`` points on radial hat-geodesics of length ``a``.

    Directions are uniform on the unit sphere of the tangent space (including
    the Killing direction).  Raises :class:`DomainError` if a ray leaves the
    chart before reaching length ``a``.
    """
    center = S.check(center)
    if a < 0:
        raise ValueError("radius must be non-negative")
    if a == 0:
        return BallSample(center, 0.0, [center.copy()], np.zeros(1), np.zeros(1), 0, 0)
    rng = np.random.default_rng(seed)
    B = _hat_orthonormal(S, center)
    s_eval = a * np.arange(1, per_ray + 1) / per_ray
    s_eval[-1] = a  # a * k / k can round above a
    pts, dists, times = [center.copy()], [0.0], [0.0]
    for k in range(ray_count):
        d = rng.standard_normal(S.n + 1)
        d /= np.linalg.norm(d)
        tr = integrate_geodesic(S, "hat", GeodesicState(0.0, center, B @ d), a, tol, s_eval=s_eval)
        if tr.exit != "reached_smax" or tr.s.size != per_ray + 1:
            raise DomainError(f"ray {k} stopped at s = {tr.s_exit:.4g} ({tr.exit}) before a = {a}")
        pts.extend(tr.x[1:])
        dists.extend(tr.s[1:])
        times.extend(tr.t[1:])
    return BallSample(center, float(a), pts, np.array(dists), np.array(times), ray_count, per_ray)


@dataclass
class EstimateReport:
    entry: str
    center: list
    a: float
    monitor: str
    sup: float
    bound_form: float
    implied_constant: float
    samples: int
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _report(S, sample, monitor, values, bound, extra=None):
    sup = float(max(values)) if values else 0.0
    if not np.isfinite(bound) or bound <= 0:
        raise ValueError("bound form must be positive and finite")
    meta = {"version": __version__, "lambda": S.lam, "n": S.n, "rays": sample.rays,
            "per_ray": sample.per_ray, "note": SAMPLING_NOTE}
    meta.update(extra or {})
    return EstimateReport(S.name, [float(v) for v in sample.center], sample.a, monitor, sup,
                          float(bound), sup / bound, len(values), meta)


def _lam(S):
    return 0.0 if S.lam is None else float(S.lam)


def gradient_estimate_ratio(S: StationarySpacetime, center, a: float,
                            sample: Optional[BallSample] = None, **kw) -> EstimateReport:
    r"""Sup of :math:`|\hat\nabla\log u^2|_{\hat g} = 2|\nabla\log u|_g` over the half ball,
    against :math:`\sqrt{n}\,a^{-1} + \sqrt{\max(-\lambda, 0)}`."""
    d0 = local_data(S, center)
    if np.max(np.abs(d0.Lambda)) > STATIC_TOL:
        raise NotStaticError("gradient estimate monitor needs a static metric")
    sample = sample or sample_ball(S, center, a, **kw)
    vals = []
    for q in sample.within(0.5 * a):
        u = float(S.u(q))
        du = S.u.gradient(q, S.policy, S.domain)
        vals.append(2 * np.sqrt(max(float(du @ np.linalg.solve(S.g(q), du)), 0.0)) / u)
    bound = np.sqrt(S.n) / a + np.sqrt(max(-_lam(S), 0.0))
    return _report(S, sample, "grad_log_u2", vals, bound)


def hat_riemann_norm(S: StationarySpacetime, p) -> float:
    """Full contraction of the Lorentzian Riemann tensor with the hat inverse metric."""
    lor = S if S.branch == "lorentzian" else hat_metric(S)
    d = local_data(lor, p)
    R = curvature_blocks(lor, p, d).full()
    hinv = np.zeros((S.n + 1, S.n + 1))
    hinv[0, 0] = 1.0 / d.u ** 2
    hinv[1:, 1:] = d.ginv
    R_up = np.einsum("ae,bf,cg,dh,efgh->abcd", hinv, hinv, hinv, hinv, R)
    return float(np.sqrt(max(np.einsum("abcd,abcd->", R, R_up), 0.0)))


def curvature_estimate_ratio(S: StationarySpacetime, center, a: float,
                             sample: Optional[BallSample] = None, **kw):
    """Two reports: ``|Rm|`` in the hat norm against ``a^-2 + max(-lam, 0)`` and
    the monitor ``h`` against ``a^-2``."""
    if S.n != 3:
        raise DimensionError("curvature monitors are four-dimensional (n = 3)")
    sample = sample or sample_ball(S, center, a, **kw)
    pts = sample.within(0.5 * a)
    rm = [hat_riemann_norm(S, q) for q in pts]
    hv = [h_monitor(S, q).value for q in pts]
    r1 = _report(S, sample, "riemann_hat_norm", rm, a ** -2 + max(-_lam(S), 0.0))
    r2 = _report(S, sample, "h_monitor", hv, a ** -2)
    return r1, r2


def scaling_diagnostic(S: StationarySpacetime, center, a: float, **kw):
    """``sup |Rm|_hat * a^2`` for radii ``a`` and ``a/2``."""
    out = {}
    for rad in (a, 0.5 * a):
        rep = curvature_estimate_ratio(S, center, rad, **kw)[0]
        out[rad] = rep.sup * rad ** 2
    return out


# ----------------------------------------------------------- static Bochner

@dataclass(frozen=True)
class StaticBochner:
    lhs: float
    rhs: float

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    @property
    def relative(self):
        return self.residual / (1.0 + abs(self.rhs))


def static_bochner_terms(S: StationarySpacetime, p) -> StaticBochner:
    r""":math:`\hat\Delta|\nabla\log u|^2` against
    :math:`2|\nabla^2\log u|^2 + 2|\nabla\log u|^4 + 2\lambda|\nabla\log u|^2`."""
    lor = S if S.branch == "lorentzian" else hat_metric(S)
    d = local_data(lor, p)
    if np.max(np.abs(d.Lambda)) > STATIC_TOL:
        raise NotStaticError("static Bochner identity needs a static metric")
    if lor.lam is None:
        raise ValueError("static Bochner identity needs an Einstein constant")

    def grad_sq(q):
        du = lor.u.gradient(q, lor.policy, lor.domain)
        return float(du @ np.linalg.solve(lor.g(q), du)) / float(lor.u(q)) ** 2

    lhs = hessian_laplacian(hat_metric(lor), Field(grad_sq, name="|dlog u|^2"), d.p).laplacian
    dlogu = d.du / d.u
    hess = d.hess_u / d.u - np.outer(dlogu, dlogu)
    gs = d.dot(dlogu, dlogu)
    rhs = (2 * float(np.einsum("ij,kl,ik,jl->", hess, hess, d.ginv, d.ginv))
           + 2 * gs ** 2 + 2 * lor.lam * gs)
    return StaticBochner(float(lhs), float(rhs))


def static_bochner_residual(S: StationarySpacetime, p) -> float:
    return static_bochner_terms(S, p).residual
