r"""Adapted-frame geometry of stationary metrics.

A stationary metric in canonical form is

.. math::

    \bar g = w\,(dt + \theta)^2 + g, \qquad w = \mp u^2,

with ``u``, ``theta`` and ``g`` independent of ``t``.  The Lorentzian branch
has ``w = -u^2``; the Riemannian branch ``w = +u^2`` is the associated metric
:math:`\hat g`.  All decomposed quantities live in the adapted frame

.. math::

    e_0 = \partial_t, \qquad e_i = \partial_i - \theta_i\,\partial_t,

in which the metric is block diagonal ``diag(w, g_ij)``.  Frame index ``0`` is
the Killing direction; frame indices ``1..n`` are stored at array positions
``1..n``.

Curvature sign convention: :math:`R_{ijij} > 0` on round spheres (see
:mod:`stationary.tensors`).
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import tensors
from .errors import DimensionError, DomainError, NotStaticError, SingularMetricError
from .fields import ChartDomain, DEFAULT_POLICY, FDPolicy, Field, fd_jacobian

__all__ = [
    "StationarySpacetime",
    "HorizontalData",
    "CurvatureBlocks",
    "RicciBlocks",
    "FrameGeometry",
    "FrameHessian",
    "ConformalData",
    "local_data",
    "metric_components",
    "inverse_metric_components",
    "hat_metric",
    "rescale",
    "frame_metric",
    "frame_connection",
    "connection_residuals",
    "curvature_blocks",
    "ricci_blocks",
    "hat_ricci_blocks",
    "frame_geometry",
    "hessian_laplacian",
    "conformal_reduction",
    "laplacian_relation_residual",
    "static_system_residual",
    "U_MIN",
    "DET_MIN",
    "STATIC_TOL",
]

U_MIN = 1e-8
DET_MIN = 1e-12
STATIC_TOL = 1e-10

BRANCHES = ("lorentzian", "riemannian")


@dataclass(frozen=True)
class StationarySpacetime:
    """Canonical data ``(u, theta, g)`` of a stationary metric on a spatial chart.

    ``u`` is a scalar :class:`Field`, ``theta`` a covector field of shape
    ``(n,)`` and ``g`` a symmetric matrix field of shape ``(n, n)``.  ``lam`` is
    the Einstein constant when the metric is Einstein, ``None`` otherwise.
    """

    n: int
    u: Field
    theta: Field
    g: Field
    lam: Optional[float] = None
    domain: ChartDomain = ChartDomain.everywhere()
    branch: str = "lorentzian"
    name: str = ""
    coords: tuple = ()
    policy: FDPolicy = DEFAULT_POLICY

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}, got {self.branch!r}")
        if self.n < 2:
            raise DimensionError("spatial dimension must be at least 2")

    @property
    def sign(self):
        """Sign of ``w``: -1 on the Lorentzian branch, +1 on the Riemannian one."""
        return -1.0 if self.branch == "lorentzian" else 1.0

    def check(self, p, margin=0.0):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise DimensionError(f"expected a point with {self.n} coordinates, got shape {p.shape}")
        self.domain.require(p, margin)
        return p

    def w(self, p):
        return self.sign * float(self.u(p)) ** 2


@dataclass(frozen=True)
class HorizontalData:
    r"""Everything the frame formulas need at one point.

    Derivative indices come first.  ``Lambda[i, j]`` is
    :math:`\partial_i\theta_j - \partial_j\theta_i`, which equals the
    antisymmetrized covariant derivative because the Christoffels are symmetric.
    """

    p: np.ndarray
    sign: float
    u: float
    du: np.ndarray
    ddu: np.ndarray
    w: float
    dw: np.ndarray
    ddw: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    ddtheta: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    ginv: np.ndarray
    Gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    Lambda: np.ndarray
    dLambda: np.ndarray
    nabla_Lambda: np.ndarray
    hess_w: np.ndarray
    hess_u: np.ndarray

    @property
    def n(self):
        return self.p.size

    @property
    def lap_w(self):
        return float(np.einsum("ij,ij->", self.ginv, self.hess_w))

    @property
    def lap_u(self):
        return float(np.einsum("ij,ij->", self.ginv, self.hess_u))

    @property
    def Lambda_sq(self):
        r"""Full contraction :math:`|\Lambda|^2 = \Lambda_{ij}\Lambda_{kl}g^{ik}g^{jl}`."""
        return float(np.einsum("ij,kl,ik,jl->", self.Lambda, self.Lambda, self.ginv, self.ginv))

    def raise_(self, v):
        return self.ginv @ v

    def dot(self, a, b):
        return float(a @ self.ginv @ b)


def local_data(S: StationarySpacetime, p) -> HorizontalData:
    """Evaluate the jets of ``u``, ``theta`` and ``g`` and derived horizontal tensors."""
    p = S.check(p)
    pol, dom = S.policy, S.domain
    u = float(S.u(p))
    if not u > U_MIN:
        raise SingularMetricError(f"lapse u = {u:.3e} <= {U_MIN} at {p.tolist()}")
    gm = S.g(p)
    if np.linalg.det(gm) <= DET_MIN or np.any(np.linalg.eigvalsh(0.5 * (gm + gm.T)) <= 0):
        raise SingularMetricError(f"horizontal metric degenerate at {p.tolist()}")
    du = S.u.gradient(p, pol, dom)
    ddu = S.u.hessian(p, pol, dom)
    s = S.sign
    w = s * u * u
    dw = 2 * s * u * du
    ddw = 2 * s * (np.outer(du, du) + u * ddu)
    th = S.theta(p)
    dth = S.theta.gradient(p, pol, dom)
    ddth = S.theta.hessian(p, pol, dom)
    dg = S.g.gradient(p, pol, dom)
    ddg = S.g.hessian(p, pol, dom)
    ginv = np.linalg.inv(gm)
    G = tensors.christoffel(ginv, dg)
    dG = tensors.christoffel_deriv(ginv, dg, ddg)
    riem = tensors.riemann_lower(gm, G, dG)
    ric = tensors.ricci(ginv, riem)
    Lam = dth - dth.T
    dLam = ddth - np.swapaxes(ddth, 1, 2)
    nabla_Lam = (dLam - np.einsum("mki,mj->kij", G, Lam) - np.einsum("mkj,im->kij", G, Lam))
    return HorizontalData(
        p=p, sign=s, u=u, du=du, ddu=ddu, w=w, dw=dw, ddw=ddw,
        theta=th, dtheta=dth, ddtheta=ddth, g=gm, dg=dg, ddg=ddg, ginv=ginv,
        Gamma=G, riemann=riem, ricci=ric, Lambda=Lam, dLambda=dLam,
        nabla_Lambda=nabla_Lam,
        hess_w=tensors.covariant_hessian(G, dw, ddw),
        hess_u=tensors.covariant_hessian(G, du, ddu),
    )


# ---------------------------------------------------------------- metric assembly

def metric_components(S: StationarySpacetime, p):
    """Coordinate components of the full metric in ``(t, x^1, ..., x^n)``."""
    p = S.check(p)
    w = S.w(p)
    th = S.theta(p)
    gm = S.g(p)
    n = S.n
    out = np.empty((n + 1, n + 1))
    out[0, 0] = w
    out[0, 1:] = out[1:, 0] = w * th
    out[1:, 1:] = gm + w * np.outer(th, th)
    return out


def inverse_metric_components(S: StationarySpacetime, p):
    r"""Closed-form inverse: :math:`\bar g^{00} = w^{-1} + |\theta|^2`,
    :math:`\bar g^{0i} = -\theta^i`, :math:`\bar g^{ij} = g^{ij}`."""
    p = S.check(p)
    u = float(S.u(p))
    gm = S.g(p)
    if u <= U_MIN or np.linalg.det(gm) <= DET_MIN:
        raise SingularMetricError(f"cannot invert metric at {p.tolist()}")
    w = S.sign * u * u
    ginv = np.linalg.inv(gm)
    th_up = ginv @ S.theta(p)
    n = S.n
    out = np.empty((n + 1, n + 1))
    out[0, 0] = 1.0 / w + float(S.theta(p) @ th_up)
    out[0, 1:] = out[1:, 0] = -th_up
    out[1:, 1:] = ginv
    return out


def hat_metric(S: StationarySpacetime) -> StationarySpacetime:
    """Flip the sign of the Killing block: ``w -> -w`` with identical ``u, theta, g``.

    Applied to a Lorentzian spacetime this gives the associated Riemannian
    metric; applied twice it returns the original branch.
    """
    branch = "riemannian" if S.branch == "lorentzian" else "lorentzian"
    suffix = "^" if branch == "riemannian" else ""
    name = S.name[:-1] if S.name.endswith("^") and branch == "lorentzian" else S.name + suffix
    return replace(S, branch=branch, name=name)


def rescale(S: StationarySpacetime, k: float) -> StationarySpacetime:
    r"""Spacetime with metric :math:`k^2\bar g` on the same spatial chart.

    With ``t -> k t`` the canonical data become ``(u, k theta, k^2 g)`` and the
    Einstein constant scales as ``lam / k^2``.
    """
    if not k > 0:
        raise ValueError("scale factor must be positive")
    th, gf = S.theta, S.g

    def scaled(f, c):
        return Field(lambda p: c * f(p),
                     None if f.grad is None else (lambda p: c * f.gradient(p)),
                     None if f.hess is None else (lambda p: c * f.hessian(p)),
                     f.shape, f"{c:g}*{f.name}")

    lam = None if S.lam is None else S.lam / k ** 2
    return replace(S, theta=scaled(th, k), g=scaled(gf, k * k), lam=lam,
                   name=f"{S.name}*{k:g}^2")


def frame_metric(S: StationarySpacetime, p):
    """Frame components ``diag(w, g_ij)``."""
    p = S.check(p)
    n = S.n
    out = np.zeros((n + 1, n + 1))
    out[0, 0] = S.w(p)
    out[1:, 1:] = S.g(p)
    return out


def _frame_metric_from(d: HorizontalData):
    n = d.n
    eta = np.zeros((n + 1, n + 1))
    eta[0, 0] = d.w
    eta[1:, 1:] = d.g
    eta_inv = np.zeros_like(eta)
    eta_inv[0, 0] = 1.0 / d.w
    eta_inv[1:, 1:] = d.ginv
    return eta, eta_inv


# ------------------------------------------------------------------- connection

def frame_connection(S: StationarySpacetime, p, data: Optional[HorizontalData] = None):
    r"""Connection coefficients ``C[a, b, c]`` with :math:`D_{e_a} e_b = C_{ab}{}^c e_c`.

    .. math::

        D_{e_i}e_j &= \Gamma^k_{ij} e_k - \tfrac12\Lambda_{ij} e_0 \\
        D_{e_0}e_i = D_{e_i}e_0 &= \tfrac12 w \Lambda_{ik} g^{kl} e_l
            + \tfrac12 \nabla_i \log|w|\, e_0 \\
        D_{e_0}e_0 &= -\tfrac12 g^{ij}\nabla_i w\, e_j
    """
    d = data if data is not None else local_data(S, p)
    n = d.n
    C = np.zeros((n + 1, n + 1, n + 1))
    C[1:, 1:, 1:] = np.einsum("kij->ijk", d.Gamma)
    C[1:, 1:, 0] = -0.5 * d.Lambda
    mixed = 0.5 * d.w * d.Lambda @ d.ginv
    dlogw = d.dw / d.w
    C[0, 1:, 1:] = mixed
    C[1:, 0, 1:] = mixed
    C[0, 1:, 0] = 0.5 * dlogw
    C[1:, 0, 0] = 0.5 * dlogw
    C[0, 0, 1:] = -0.5 * d.ginv @ d.dw
    return C


def connection_residuals(S: StationarySpacetime, p, data: Optional[HorizontalData] = None):
    """Metric-compatibility and torsion residuals of :func:`frame_connection`.

    Returns ``(compat, torsion)`` maxima.  Compatibility is
    ``e_a<e_b, e_c> - <D_a e_b, e_c> - <e_b, D_a e_c>``; torsion compares
    ``D_a e_b - D_b e_a`` with the bracket ``[e_i, e_j] = -Lambda_ij e_0``.
    """
    d = data if data is not None else local_data(S, p)
    n = d.n
    C = frame_connection(S, p, d)
    eta, _ = _frame_metric_from(d)
    deta = np.zeros((n + 1, n + 1, n + 1))
    deta[1:, 0, 0] = d.dw
    deta[1:, 1:, 1:] = d.dg
    compat = deta - np.einsum("abd,dc->abc", C, eta) - np.einsum("acd,bd->abc", C, eta)
    bracket = np.zeros((n + 1, n + 1, n + 1))
    bracket[1:, 1:, 0] = -d.Lambda
    torsion = C - np.swapaxes(C, 0, 1) - bracket
    return float(np.max(np.abs(compat))), float(np.max(np.abs(torsion)))


# -------------------------------------------------------------------- curvature

@dataclass(frozen=True)
class CurvatureBlocks:
    """Independent blocks of the frame Riemann tensor.

    ``spatial[i, j, k, l]`` is ``R(e_i, e_j, e_k, e_l)``, ``mixed[i, j, k]`` is
    ``R(e_i, e_j, e_k, e_0)`` and ``electric[i, j]`` is ``R(e_i, e_0, e_j, e_0)``.
    """

    spatial: np.ndarray
    mixed: np.ndarray
    electric: np.ndarray

    def full(self):
        """All ``(n+1)^4`` frame components, filled by the Riemann symmetries."""
        n = self.electric.shape[0]
        R = np.zeros((n + 1,) * 4)
        R[1:, 1:, 1:, 1:] = self.spatial
        B = self.mixed
        R[1:, 1:, 1:, 0] = B
        R[1:, 1:, 0, 1:] = -B
        R[1:, 0, 1:, 1:] = np.einsum("ijk->kij", B)
        R[0, 1:, 1:, 1:] = -np.einsum("ijk->kij", B)
        E = self.electric
        R[1:, 0, 1:, 0] = E
        R[0, 1:, 0, 1:] = E
        R[1:, 0, 0, 1:] = -E
        R[0, 1:, 1:, 0] = -E
        return R


@dataclass(frozen=True)
class RicciBlocks:
    r"""``Ric(e_0, e_0)``, ``Ric(e_0, e_j)`` and ``Ric(e_i, e_j)``."""

    r00: float
    r0j: np.ndarray
    rij: np.ndarray

    def full(self):
        n = self.r0j.size
        out = np.empty((n + 1, n + 1))
        out[0, 0] = self.r00
        out[0, 1:] = out[1:, 0] = self.r0j
        out[1:, 1:] = self.rij
        return out

    def max_abs(self):
        return float(np.max(np.abs(self.full())))


def curvature_blocks(S: StationarySpacetime, p, data: Optional[HorizontalData] = None) -> CurvatureBlocks:
    r"""Frame curvature from the horizontal data.

    .. math::

        \bar R(e_i,e_j,e_k,e_l) &= R_{ijkl}
            + \tfrac{w}{4}(\Lambda_{il}\Lambda_{jk} - \Lambda_{ik}\Lambda_{jl})
            - \tfrac{w}{2}\Lambda_{ij}\Lambda_{kl} \\
        \bar R(e_i,e_j,e_k,e_0) &= -\tfrac12(w\nabla_k\Lambda_{ij} + \nabla_k w\,\Lambda_{ij})
            + \tfrac14(\nabla_i w\,\Lambda_{jk} - \nabla_j w\,\Lambda_{ik}) \\
        \bar R(e_i,e_0,e_j,e_0) &= -\tfrac12\nabla_{ij}w
            + \tfrac14 w^{-1}\nabla_i w\nabla_j w
            + \tfrac{w^2}{4}\Lambda_{ik}\Lambda_{jl}g^{kl}
    """
    d = data if data is not None else local_data(S, p)
    w, L, dw = d.w, d.Lambda, d.dw
    spatial = (d.riemann
               + 0.25 * w * (np.einsum("il,jk->ijkl", L, L) - np.einsum("ik,jl->ijkl", L, L))
               - 0.5 * w * np.einsum("ij,kl->ijkl", L, L))
    mixed = (-0.5 * (w * np.einsum("kij->ijk", d.nabla_Lambda) + np.einsum("k,ij->ijk", dw, L))
             + 0.25 * (np.einsum("i,jk->ijk", dw, L) - np.einsum("j,ik->ijk", dw, L)))
    electric = (-0.5 * d.hess_w + 0.25 / w * np.outer(dw, dw)
                + 0.25 * w * w * np.einsum("ik,jl,kl->ij", L, L, d.ginv))
    return CurvatureBlocks(spatial, mixed, electric)


def ricci_blocks(S: StationarySpacetime, p, data: Optional[HorizontalData] = None) -> RicciBlocks:
    r"""Ricci curvature from the closed-form block formulas.

    .. math::

        \bar{Ric}(e_0,e_0) &= -\tfrac12\Delta w + \tfrac{|\nabla w|^2}{4w}
            + \tfrac{w^2}{4}|\Lambda|^2 \\
        \bar{Ric}(e_0,e_j) &= \tfrac{w}{2}g^{kl}\big(\nabla_k\Lambda_{jl}
            + \tfrac32\Lambda_{jk}\nabla_l\log|w|\big) \\
        \bar{Ric}(e_i,e_j) &= R_{ij} - \tfrac{\nabla_{ij}w}{2w}
            + \tfrac{\nabla_i w\nabla_j w}{4w^2} - \tfrac{w}{2}g^{kl}\Lambda_{ik}\Lambda_{jl}
    """
    d = data if data is not None else local_data(S, p)
    w, L, dw, gi = d.w, d.Lambda, d.dw, d.ginv
    r00 = -0.5 * d.lap_w + d.dot(dw, dw) / (4 * w) + 0.25 * w * w * d.Lambda_sq
    dlogw = dw / w
    r0j = 0.5 * w * (np.einsum("kl,kjl->j", gi, d.nabla_Lambda)
                     + 1.5 * np.einsum("kl,jk,l->j", gi, L, dlogw))
    rij = (d.ricci - d.hess_w / (2 * w) + np.outer(dw, dw) / (4 * w * w)
           - 0.5 * w * np.einsum("kl,ik,jl->ij", gi, L, L))
    return RicciBlocks(float(r00), r0j, rij)


def hat_ricci_blocks(S: StationarySpacetime, p, data: Optional[HorizontalData] = None) -> RicciBlocks:
    r"""Ricci blocks of the associated Riemannian metric from the Lorentzian ones.

    .. math::

        \hat{Ric}(e_0,e_0) = \tfrac{u^4}{2}|\Lambda|^2 - \bar{Ric}(e_0,e_0),\quad
        \hat{Ric}(e_0,e_j) = -\bar{Ric}(e_0,e_j),\quad
        \hat{Ric}(e_i,e_j) = -u^2 g^{kl}\Lambda_{ik}\Lambda_{jl} + \bar{Ric}(e_i,e_j)
    """
    if S.branch != "lorentzian":
        S = hat_metric(S)
    d = data if data is not None else local_data(S, p)
    bar = ricci_blocks(S, p, d)
    u2 = d.u ** 2
    r00 = 0.5 * u2 * u2 * d.Lambda_sq - bar.r00
    rij = -u2 * np.einsum("kl,ik,jl->ij", d.ginv, d.Lambda, d.Lambda) + bar.rij
    return RicciBlocks(float(r00), -bar.r0j, rij)


@dataclass(frozen=True)
class FrameGeometry:
    Lambda: np.ndarray
    conn: np.ndarray
    curvature: CurvatureBlocks
    ricci: RicciBlocks


def frame_geometry(S: StationarySpacetime, p) -> FrameGeometry:
    d = local_data(S, p)
    return FrameGeometry(d.Lambda, frame_connection(S, p, d), curvature_blocks(S, p, d),
                         ricci_blocks(S, p, d))


def frame_ricci_from_riemann(S: StationarySpacetime, p, blocks: Optional[CurvatureBlocks] = None):
    """Ricci obtained by contracting :func:`curvature_blocks` with the frame inverse metric."""
    d = local_data(S, p)
    blocks = blocks if blocks is not None else curvature_blocks(S, p, d)
    _, eta_inv = _frame_metric_from(d)
    return tensors.ricci(eta_inv, blocks.full())


# ------------------------------------------------------- Hessian and Laplacian

@dataclass(frozen=True)
class FrameHessian:
    hessian: np.ndarray
    laplacian: float


def hessian_laplacian(S: StationarySpacetime, f: Field, p,
                      data: Optional[HorizontalData] = None) -> FrameHessian:
    r"""Frame Hessian and Laplacian of a time-independent function.

    .. math::

        \bar\nabla^2 f(e_0,e_0) = \tfrac12\langle\nabla w,\nabla f\rangle,\quad
        \bar\nabla^2 f(e_0,e_j) = -\tfrac12 w g^{kl}\Lambda_{jk} f_l,\quad
        \bar\nabla^2 f(e_i,e_j) = \nabla_{ij} f,

    and :math:`\bar\Delta f = \Delta f + \tfrac12\langle\nabla\log|w|,\nabla f\rangle`.
    On the Riemannian branch these are the hatted operators.
    """
    d = data if data is not None else local_data(S, p)
    pol, dom = S.policy, S.domain
    df = np.asarray(f.gradient(d.p, pol, dom), dtype=float).reshape(d.n)
    ddf = np.asarray(f.hessian(d.p, pol, dom), dtype=float).reshape(d.n, d.n)
    n = d.n
    H = np.empty((n + 1, n + 1))
    H[0, 0] = 0.5 * d.dot(d.dw, df)
    H[0, 1:] = H[1:, 0] = -0.5 * d.w * np.einsum("kl,jk,l->j", d.ginv, d.Lambda, df)
    H[1:, 1:] = tensors.covariant_hessian(d.Gamma, df, ddf)
    lap = (float(np.einsum("ij,ij->", d.ginv, H[1:, 1:]))
           + 0.5 * d.dot(d.dw / d.w, df))
    return FrameHessian(H, lap)


# ------------------------------------------------------------ conformal metric

@dataclass(frozen=True)
class ConformalData:
    r"""Conformal horizontal metric :math:`\tilde g = u^{2/(n-2)} g` at a point.

    ``christoffel_correction`` is :math:`\tilde\Gamma - \Gamma`.  ``ric_til`` uses
    the conformal-change formula in terms of ``R_ij`` and ``u``; ``ric_til_field``
    rewrites it through the frame Ricci blocks and the twist.  Both must agree.
    ``field_residuals`` holds the residuals of the two reduced field equations
    (Laplacian of ``log u`` and the divergence of ``Lambda``).
    """

    gtil: np.ndarray
    christoffel: np.ndarray
    christoffel_correction: np.ndarray
    ric_til: np.ndarray
    ric_til_field: np.ndarray
    scalar_til: float
    field_residuals: tuple


def _conformal_correction(d: HorizontalData):
    n = d.n
    dlogu = d.du / d.u
    eye = np.eye(n)
    corr = (np.einsum("i,kj->kij", dlogu, eye) + np.einsum("j,ki->kij", dlogu, eye)
            - np.einsum("k,ij->kij", d.ginv @ dlogu, d.g)) / (n - 2)
    return corr


def conformal_reduction(S: StationarySpacetime, p, data: Optional[HorizontalData] = None) -> ConformalData:
    """Conformal metric, its Christoffels and two independent forms of its Ricci tensor."""
    if S.n < 3:
        raise DimensionError("conformal reduction needs n >= 3")
    if S.branch != "lorentzian":
        S = hat_metric(S)
    d = data if data is not None else local_data(S, p)
    n = d.n
    u = d.u
    factor = u ** (2.0 / (n - 2))
    gtil = factor * d.g
    corr = _conformal_correction(d)
    Gtil = d.Gamma + corr
    dlogu = d.du / u
    hess_logu = d.hess_u / u - np.outer(dlogu, dlogu)
    lap_u = d.lap_u
    ric_til = (d.ricci - hess_logu + np.outer(dlogu, dlogu) / (n - 2)
               - lap_u / u * d.g / (n - 2))
    bar = ricci_blocks(S, p, d)
    u2 = u * u
    ric_field = (u2 / (4 * (n - 2)) * d.Lambda_sq * d.g
                 - 0.5 * u2 * np.einsum("kl,ik,jl->ij", d.ginv, d.Lambda, d.Lambda)
                 + (n - 1) / (n - 2) * np.outer(dlogu, dlogu)
                 + bar.rij - bar.r00 / u2 / (n - 2) * d.g)
    scalar_til = float(np.einsum("ij,ij->", d.ginv, ric_til)) / factor

    # u^{2/(n-2)} Lap~ log u = -(u^2/4)|Lambda|^2 + u^{-2} Ric(X, X)
    ddlogu = d.ddu / u - np.outer(dlogu, dlogu)
    lap_til_logu = float(np.einsum("ij,ij->", d.ginv,
                                   ddlogu - np.einsum("kij,k->ij", Gtil, dlogu)))
    res_log = lap_til_logu - (-0.25 * u2 * d.Lambda_sq + bar.r00 / u2)
    # g^{kl}(nabla~_k Lambda_jl + (3 + (4-n)/(n-2)) Lambda_jk d_l log u) = -2 u^{-2} Ric(e_0, e_j)
    nabla_til = (d.dLambda - np.einsum("mki,mj->kij", Gtil, d.Lambda)
                 - np.einsum("mkj,im->kij", Gtil, d.Lambda))
    lhs = (np.einsum("kl,kjl->j", d.ginv, nabla_til)
           + (3 + (4 - n) / (n - 2)) * np.einsum("kl,jk,l->j", d.ginv, d.Lambda, dlogu))
    res_div = lhs + 2 * bar.r0j / u2
    return ConformalData(gtil, Gtil, corr, ric_til, ric_field, scalar_til,
                         (float(abs(res_log)), float(np.max(np.abs(res_div)))))


def laplacian_relation_residual(S: StationarySpacetime, L: Field, p) -> float:
    r"""|:math:`u^{2/(n-2)}\tilde\Delta L - \hat\Delta L`| for a time-independent ``L``.

    The left side uses the conformal Christoffels; the right side the hatted
    frame Laplacian from :func:`hessian_laplacian`.
    """
    if S.n < 3:
        raise DimensionError("conformal reduction needs n >= 3")
    lor = S if S.branch == "lorentzian" else hat_metric(S)
    d = local_data(lor, p)
    n = d.n
    Gtil = d.Gamma + _conformal_correction(d)
    dL = np.asarray(L.gradient(d.p, S.policy, S.domain)).reshape(n)
    ddL = np.asarray(L.hessian(d.p, S.policy, S.domain)).reshape(n, n)
    factor = d.u ** (2.0 / (n - 2))
    gtil_inv = d.ginv / factor
    lap_til = float(np.einsum("ij,ij->", gtil_inv, ddL - np.einsum("kij,k->ij", Gtil, dL)))
    lap_hat = hessian_laplacian(hat_metric(lor), L, p).laplacian
    return abs(factor * lap_til - lap_hat)


def static_system_residual(S: StationarySpacetime, p, lam: Optional[float] = None):
    r"""Residual norms of :math:`R_{ij} = u^{-1}\nabla_{ij}u + \lambda g_{ij}` and
    :math:`\Delta u = -\lambda u`."""
    lam = S.lam if lam is None else lam
    if lam is None:
        raise ValueError("static system needs an Einstein constant")
    d = local_data(S, p)
    if np.max(np.abs(d.Lambda)) > STATIC_TOL:
        raise NotStaticError(f"max |Lambda| = {np.max(np.abs(d.Lambda)):.3e} at {d.p.tolist()}")
    r1 = d.ricci - d.hess_u / d.u - lam * d.g
    r2 = d.lap_u + lam * d.u
    return float(np.linalg.norm(r1)), float(abs(r2))
