r"""Twist reduction of four-dimensional stationary metrics (``n = 3``).

The twist one-form is :math:`\omega = u^3 \ast d\theta`, with the Hodge star of
the horizontal metric and orientation :math:`\varepsilon_{123} = +\sqrt{\det g}`.
For Einstein metrics it is closed, :math:`\omega = d\psi` locally, and
:math:`\Phi = (\psi, u^2)` maps into the hyperbolic upper half plane
:math:`y^{-2}(dx^2 + dy^2)`.

Two-form norms use :math:`|e^1\wedge e^2| = 1` for orthonormal ``e``; a 2-form
with components ``F[i, j]`` therefore has :math:`|F|^2 = \tfrac12 F_{ij}F^{ij}`.
"""

from dataclasses import dataclass
from itertools import permutations
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from . import tensors
from .errors import DimensionError, DomainError, NotClosedError, SingularMetricError
from .fields import ChartDomain, Field, fd_jacobian
from .geometry import (StationarySpacetime, conformal_reduction, hat_metric, hessian_laplacian,
                       local_data, ricci_blocks)
from .oracle import CoordinateMetric, coordinate_riemann

__all__ = [
    "CURL_SIGN",
    "CLOSED_TOL",
    "HyperbolicTarget",
    "TwistData",
    "TwistIdentities",
    "levi_civita",
    "hodge_star1",
    "hodge_star2",
    "twist_one_form",
    "twist_field",
    "twist_derivative",
    "twist_identities",
    "twist_potential",
    "potential_field",
    "pullback_hyperbolic",
    "energy_density",
    "tension_field",
    "bochner_terms",
    "bochner_residual",
    "h_monitor",
    "twist_data",
]

# Sign in (*d omega)_j = CURL_SIGN * 2 u Ric(X, e_j); fixed once on a non-Einstein
# fixture with the orientation eps_123 = +sqrt(det g) (see tests/test_reduction4d.py).
CURL_SIGN = -1.0

# curl residual above which no twist potential is attempted
CLOSED_TOL = 1e-4


def _require3(S):
    if S.n != 3:
        raise DimensionError(f"twist reduction needs n = 3, got n = {S.n}")


def _lorentzian(S):
    return S if S.branch == "lorentzian" else hat_metric(S)


# ------------------------------------------------------------- Hodge star

_PERM = np.zeros((3, 3, 3))
for _p in permutations(range(3)):
    _PERM[_p] = np.linalg.det(np.eye(3)[list(_p)])


def levi_civita(g):
    """Covariant volume form ``eps[i, j, k]`` with ``eps[0, 1, 2] = +sqrt(det g)``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (3, 3):
        raise DimensionError("the Hodge star here is three-dimensional")
    det = np.linalg.det(g)
    if det <= 0:
        raise SingularMetricError("metric is not positive definite")
    return np.sqrt(det) * _PERM


def _metric_at(g, p):
    if isinstance(g, Field):
        return g(p)
    return np.asarray(g, dtype=float)


def hodge_star2(g, p, two_form):
    r"""One-form :math:`(\ast\beta)_i = \tfrac12\varepsilon_i{}^{jk}\beta_{jk}`.

    ``g`` is a metric matrix or a matrix :class:`Field` evaluated at ``p``;
    ``two_form`` holds the antisymmetric components ``beta[j, k]``.
    """
    gm = _metric_at(g, p)
    eps = levi_civita(gm)
    gi = np.linalg.inv(gm)
    return 0.5 * np.einsum("ilm,lj,mk,jk->i", eps, gi, gi, np.asarray(two_form, dtype=float))


def hodge_star1(g, p, one_form):
    r"""Two-form :math:`(\ast\alpha)_{jk} = \varepsilon_{ljk}\alpha^l`."""
    gm = _metric_at(g, p)
    eps = levi_civita(gm)
    return np.einsum("ljk,l->jk", eps, np.linalg.solve(gm, np.asarray(one_form, dtype=float)))


# ------------------------------------------------------------ twist one-form

def twist_one_form(S: StationarySpacetime, p):
    r""":math:`\omega_i = u^3 (\ast d\theta)_i` at ``p``."""
    _require3(S)
    p = S.check(p)
    dth = S.theta.gradient(p, S.policy, S.domain)
    Lam = dth - dth.T
    return float(S.u(p)) ** 3 * hodge_star2(S.g, p, Lam)


def twist_field(S: StationarySpacetime) -> Field:
    """``omega`` as a covector field; its derivatives are finite differences."""
    _require3(S)
    return Field(lambda q: twist_one_form(S, q), shape=(3,), name="omega")


def twist_derivative(S: StationarySpacetime, p):
    """``d_omega[a, i]`` = partial_a omega_i by Richardson differences of the exact omega."""
    p = S.check(p)
    return fd_jacobian(lambda q: twist_one_form(S, q), p, S.policy, S.domain)


@dataclass(frozen=True)
class TwistIdentities:
    """Residuals of the norm, divergence and curl identities at one point."""

    omega: np.ndarray
    norm: float
    divergence: float
    curl: float
    d_omega: float


def twist_identities(S: StationarySpacetime, p) -> TwistIdentities:
    r"""Check :math:`|\omega|^2 = \tfrac{u^6}{2}|\Lambda|^2`,
    :math:`g^{kl}\nabla_k\omega_l = 3\langle\omega, \nabla\log u\rangle` and
    :math:`(\ast d\omega)_j = \pm 2u\,\bar{Ric}(X, e_j)`.

    ``d_omega`` is the largest component of the exterior derivative
    :math:`\partial_i\omega_j - \partial_j\omega_i`.
    """
    _require3(S)
    S = _lorentzian(S)
    d = local_data(S, p)
    om = twist_one_form(S, d.p)
    dom_ = twist_derivative(S, d.p)
    norm_res = abs(d.dot(om, om) - 0.5 * d.u ** 6 * d.Lambda_sq)
    nabla_om = dom_ - np.einsum("kij,k->ij", d.Gamma, om)
    div_res = abs(float(np.einsum("ij,ij->", d.ginv, nabla_om)) - 3 * d.dot(om, d.du / d.u))
    curl_form = dom_ - dom_.T
    star = hodge_star2(d.g, d.p, curl_form)
    r0j = ricci_blocks(S, d.p, d).r0j
    curl_res = float(np.max(np.abs(star - CURL_SIGN * 2 * d.u * r0j)))
    return TwistIdentities(om, float(norm_res), float(div_res), curl_res,
                           float(np.max(np.abs(curl_form))))


# ------------------------------------------------------------ twist potential

def _check_closed(S, pts):
    for q in pts:
        res = twist_identities(S, q)
        # closedness of omega: the curl itself must vanish, not only the identity
        if res.d_omega > CLOSED_TOL:
            raise NotClosedError(f"d omega = {res.d_omega:.2e} at {np.asarray(q).tolist()};"
                                 " no twist potential")


def twist_potential(S: StationarySpacetime, base, target, path: Optional[Sequence] = None,
                    epsabs: float = 1e-8, check: bool = True) -> float:
    """Line integral of ``omega`` from ``base`` to ``target`` along a polyline.

    ``path`` lists intermediate vertices (the straight segment if omitted).
    The potential vanishes at ``base`` by convention.
    """
    _require3(S)
    verts = [np.asarray(base, dtype=float)]
    verts += [np.asarray(v, dtype=float) for v in (path or [])]
    verts.append(np.asarray(target, dtype=float))
    for v in verts:
        S.check(v)
    if check:
        mids = [0.5 * (a + b) for a, b in zip(verts[:-1], verts[1:])]
        _check_closed(S, verts + mids)
    total = 0.0
    for a, b in zip(verts[:-1], verts[1:]):
        seg = b - a
        if not np.any(seg):
            continue

        def integrand(s, a=a, seg=seg):
            return float(twist_one_form(S, a + s * seg) @ seg)

        val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=1e-10, limit=200)
        total += val
    return total


def potential_field(S: StationarySpacetime, base) -> Field:
    """``psi`` as a scalar field (straight-segment integral from ``base``).

    Gradient is ``omega`` exactly; the Hessian differences ``omega``.
    """
    base = np.asarray(base, dtype=float)

    def hess(q):
        d2 = fd_jacobian(lambda r: twist_one_form(S, r), q, S.policy, S.domain)
        return 0.5 * (d2 + d2.T)

    return Field(lambda q: twist_potential(S, base, q, check=False),
                 lambda q: twist_one_form(S, q), hess, (), "psi")


# ---------------------------------------------------------- hyperbolic target

class HyperbolicTarget:
    """Upper half plane with :math:`y^{-2}(dx^2 + dy^2)`."""

    domain = ChartDomain(lambda z, margin: z[1] > margin, "y > 0")

    @staticmethod
    def metric(z):
        y = float(z[1])
        if y <= 0:
            raise DomainError("hyperbolic target needs y > 0")
        return np.eye(2) / (y * y)

    @staticmethod
    def christoffels(z):
        """``G[a, b, c]`` = Gamma^a_bc; only ``-G^1_12 = -G^2_22 = G^2_11 = 1/y`` are nonzero."""
        y = float(z[1])
        G = np.zeros((2, 2, 2))
        G[0, 0, 1] = G[0, 1, 0] = -1.0 / y
        G[1, 1, 1] = -1.0 / y
        G[1, 0, 0] = 1.0 / y
        return G

    @classmethod
    def coordinate_metric(cls):
        return CoordinateMetric(2, cls.metric, 0, cls.domain, 0, "hyperbolic")

    @classmethod
    def sectional_curvature(cls, z):
        """Sectional curvature from the finite-difference oracle."""
        m = cls.coordinate_metric()
        R = coordinate_riemann(m, np.asarray(z, dtype=float))
        return float(R[0, 1, 0, 1] / np.linalg.det(m(z)))


# ---------------------------------------------------------------- the map Phi

def _frame_embed(n, spatial):
    out = np.zeros((n + 1, n + 1))
    out[1:, 1:] = spatial
    return out


def pullback_hyperbolic(S: StationarySpacetime, p):
    r"""Frame components of :math:`\Phi^* g_{-1} = u^{-4}\omega\otimes\omega + 4\,d\log u\otimes d\log u`.

    The ``e_0`` row and column vanish because ``psi`` and ``u`` are time independent.
    """
    _require3(S)
    d = local_data(_lorentzian(S), p)
    om = twist_one_form(S, d.p)
    dlogu = d.du / d.u
    return _frame_embed(3, np.outer(om, om) / d.u ** 4 + 4 * np.outer(dlogu, dlogu))


@dataclass(frozen=True)
class EnergyDensity:
    r"""``e(Phi)`` three ways: trace of the pullback against :math:`\hat g`, the
    closed form :math:`u^{-4}|\omega|^2 + 4|\nabla\log u|^2`, and through the
    scalar curvature of :math:`\tilde g`."""

    trace: float
    closed: float
    conformal: float

    @property
    def value(self):
        return self.closed


def energy_density(S: StationarySpacetime, p) -> EnergyDensity:
    _require3(S)
    S = _lorentzian(S)
    d = local_data(S, p)
    om = twist_one_form(S, d.p)
    dlogu = d.du / d.u
    P = pullback_hyperbolic(S, d.p)
    hat_inv = np.zeros((4, 4))
    hat_inv[0, 0] = 1.0 / d.u ** 2
    hat_inv[1:, 1:] = d.ginv
    trace = float(np.einsum("ab,ab->", hat_inv, P))
    closed = d.dot(om, om) / d.u ** 4 + 4 * d.dot(dlogu, dlogu)
    # e = 2 u^2 R~ - 2 (Rbar - 2 u^-2 Ric(X, X))
    bar = ricci_blocks(S, d.p, d)
    R_bar = bar.r00 / d.w + float(np.einsum("ij,ij->", d.ginv, bar.rij))
    R_til = conformal_reduction(S, d.p, d).scalar_til
    conformal = 2 * d.u ** 2 * R_til - 2 * (R_bar - 2 * bar.r00 / d.u ** 2)
    return EnergyDensity(trace, float(closed), float(conformal))


@dataclass(frozen=True)
class TensionField:
    """Components of the harmonic-map Laplacian of ``Phi`` and the expected y-part."""

    x: float
    y: float
    expected_y: float

    @property
    def residual(self):
        return max(abs(self.x), abs(self.y - self.expected_y))


def _log_u_field(S):
    u = S.u

    def grad(q):
        return u.gradient(q, S.policy, S.domain) / float(u(q))

    def hess(q):
        uu = float(u(q))
        du = u.gradient(q, S.policy, S.domain)
        return u.hessian(q, S.policy, S.domain) / uu - np.outer(du, du) / uu ** 2

    return Field(lambda q: np.log(float(u(q))), grad, hess, (), "log u")


def tension_field(S: StationarySpacetime, p) -> TensionField:
    r""":math:`(\hat\Delta\Phi)^a = \hat\Delta\Phi^a
    + \hat g^{\alpha\beta}\Gamma^a_{bc}\Phi^b_\alpha\Phi^c_\beta`.

    Built from the target Christoffels and the frame Laplacian, independently of
    the traced component formulas.  ``expected_y`` is ``2 Ric(X, X)``.
    Raises :class:`NotClosedError` when ``omega`` is not closed at ``p``.
    """
    _require3(S)
    S = _lorentzian(S)
    p = S.check(p)
    _check_closed(S, [p])
    H = hat_metric(S)
    d = local_data(S, p)

    def hess_psi(q):
        d2 = fd_jacobian(lambda r: twist_one_form(S, r), q, S.policy, S.domain)
        return 0.5 * (d2 + d2.T)

    psi = Field(lambda q: np.nan, lambda q: twist_one_form(S, q), hess_psi, (), "psi")
    u2 = Field(lambda q: float(S.u(q)) ** 2,
               lambda q: 2 * float(S.u(q)) * S.u.gradient(q, S.policy, S.domain),
               lambda q: 2 * (np.outer(S.u.gradient(q, S.policy, S.domain),
                                       S.u.gradient(q, S.policy, S.domain))
                              + float(S.u(q)) * S.u.hessian(q, S.policy, S.domain)),
               (), "u^2")
    lap = np.array([hessian_laplacian(H, f, p).laplacian for f in (psi, u2)])
    dPhi = np.stack([psi.gradient(p), u2.gradient(p)])  # dPhi[a, i]
    G = HyperbolicTarget.christoffels((0.0, d.u ** 2))
    tau = lap + np.einsum("abc,bi,cj,ij->a", G, dPhi, dPhi, d.ginv)
    r00 = ricci_blocks(S, p, d).r00
    return TensionField(float(tau[0]), float(tau[1]), float(2 * r00))


# ------------------------------------------------------------------ Bochner

@dataclass(frozen=True)
class BochnerTerms:
    lhs: float
    squares: dict
    I2: float
    I3: float

    @property
    def rhs(self):
        return float(sum(self.squares.values()) + self.I2 + self.I3)

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    @property
    def relative(self):
        return self.residual / (1.0 + abs(self.rhs))


def _half_energy(S, q):
    u = float(S.u(q))
    du = S.u.gradient(q, S.policy, S.domain)
    ginv = np.linalg.inv(S.g(q))
    om = twist_one_form(S, q)
    return 0.5 * float(om @ ginv @ om) / u ** 4 + 2 * float(du @ ginv @ du) / u ** 2


def bochner_terms(S: StationarySpacetime, p) -> BochnerTerms:
    r"""Both sides of the Bochner identity for :math:`\tfrac12 e(\Phi)`.

    Left: :math:`\hat\Delta(\tfrac12 e)` by the frame Laplacian with a
    finite-difference Hessian of the exactly evaluated energy.  Right: the
    explicit squares plus ``I2`` and ``I3``.
    """
    _require3(S)
    S = _lorentzian(S)
    d = local_data(S, p)
    p = d.p
    half_e = Field(lambda q: _half_energy(S, q), name="e/2")
    lhs = hessian_laplacian(hat_metric(S), half_e, p).laplacian

    u, gi = d.u, d.ginv
    om = twist_one_form(S, p)
    dlogu = d.du / u
    hess_logu = d.hess_u / u - np.outer(dlogu, dlogu)
    nabla_om = twist_derivative(S, p) - np.einsum("kij,k->ij", d.Gamma, om)

    def norm2(T):
        return float(np.einsum("ij,kl,ik,jl->", T, T, gi, gi))

    grad_sq = d.dot(dlogu, dlogu)
    om_sq = d.dot(om, om)
    cross = d.dot(dlogu, om)
    squares = {
        "grad4": 4 * grad_sq ** 2,
        "mixed": (cross / u ** 2) ** 2,
        "hessian": norm2(2 * hess_logu + np.outer(om, om) / u ** 4),
        "nabla_omega": norm2(nabla_om - 2 * np.outer(om, dlogu) - 2 * np.outer(dlogu, om)) / u ** 4,
        # |a ^ b|^2 = |a|^2 |b|^2 - <a, b>^2 with |e1 ^ e2| = 1
        "wedge": 6 * (om_sq * grad_sq - cross ** 2) / u ** 4,
    }
    bar = ricci_blocks(S, p, d)
    ric_xx = bar.r00
    A = bar.rij - 2 * ric_xx / u ** 2 * d.g
    B = np.outer(om, om) / u ** 4 + 4 * np.outer(dlogu, dlogu)
    I2 = float(np.einsum("kl,ik,jl,ij->", A, gi, gi, B))
    if S.lam is not None:
        grad_ric_xx = -2 * S.lam * u * d.du  # Ric(X, X) = -lam u^2
    else:
        grad_ric_xx = fd_jacobian(lambda q: ricci_blocks(S, q).r00, p, S.policy, S.domain)
    I3 = 4 / u ** 2 * d.dot(grad_ric_xx, dlogu)
    return BochnerTerms(float(lhs), squares, I2, float(I3))


def bochner_residual(S: StationarySpacetime, p) -> float:
    """``|LHS - RHS|`` of the Bochner identity for ``e(Phi)/2``."""
    return bochner_terms(S, p).residual


@dataclass(frozen=True)
class HMonitor:
    value: float
    gradient_term: float
    twist_term: float


def h_monitor(S: StationarySpacetime, p) -> HMonitor:
    r""":math:`h = 2|\nabla\log u|^2 + \tfrac12 u^{-4}|\omega|^2`, which is ``e(Phi)/2``."""
    _require3(S)
    d = local_data(_lorentzian(S), p)
    om = twist_one_form(S, d.p)
    dlogu = d.du / d.u
    a = 2 * d.dot(dlogu, dlogu)
    b = 0.5 * d.dot(om, om) / d.u ** 4
    return HMonitor(a + b, a, b)


@dataclass(frozen=True)
class TwistData:
    Lambda: np.ndarray
    omega: np.ndarray
    psi: Optional[float]
    phi: Optional[tuple]
    e_phi: float
    tension: Optional[TensionField]
    bochner_residual: float


def twist_data(S: StationarySpacetime, p, base=None) -> TwistData:
    """Collect the per-point twist quantities; ``psi`` needs a ``base`` point and
    a closed twist, otherwise it (and the tension) is ``None``."""
    _require3(S)
    S = _lorentzian(S)
    d = local_data(S, p)
    om = twist_one_form(S, d.p)
    psi = phi = tension = None
    if base is not None:
        try:
            psi = twist_potential(S, base, d.p)
            phi = (psi, d.u ** 2)
            tension = tension_field(S, d.p)
        except NotClosedError:
            pass
    return TwistData(d.Lambda, om, psi, phi, energy_density(S, d.p).closed, tension,
                     bochner_residual(S, d.p))
