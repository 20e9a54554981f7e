r"""Geodesics of the stationary metric and of its Riemannian partner.

Trajectories are integrated in coordinates ``(t, x^1..x^n)`` with Christoffel
symbols taken from the finite-difference oracle, so nothing here depends on the
frame decomposition.  States are reported in the adapted frame: for a tangent
``T = T^a e_a`` the coordinate velocity is ``(T^0 - theta_i T^i, T^1..T^n)``.

Along every geodesic :math:`c = \langle T, X\rangle = T^0 w` is conserved.  The
horizontal projection carries an extra state component, the horizontal time
``y`` with :math:`\dot y = -\theta_i\dot x^i`, so projecting a trajectory needs
no quadrature afterwards.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import DomainError, StepUnderflow
from .fields import FDPolicy
from .geometry import StationarySpacetime, hat_metric
from .oracle import assembled_metric, coordinate_christoffels, horizontal_metric

__all__ = [
    "GeodesicState",
    "GeodesicTrajectory",
    "ProjectedCurve",
    "ProbeReport",
    "dopri5",
    "integrate_geodesic",
    "horizontal_projection",
    "projected_geodesic_integrate",
    "completeness_probe",
    "circular_orbit_state",
    "EXIT_MARGIN",
]

# distance (coordinate units) from the chart edge at which a trajectory counts as leaving
EXIT_MARGIN = 0.05
MAX_STEPS = 10 ** 6
# one extra Richardson level: near chart edges the Christoffels vary fast and
# two levels leave g(T, T) drifting at 1e-6
GEODESIC_POLICY = FDPolicy(step=1e-3, levels=3, max_order=2)

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(rhs, s, y, f0, h):
    K = np.empty((7, y.size))
    K[0] = f0
    for i in range(1, 7):
        K[i] = rhs(s + _C[i] * h, y + h * np.dot(_A[i], K[:i]))
    y_new = y + h * np.dot(_B5, K)
    return y_new, h * np.dot(_E, K), K[6]


@dataclass
class _ODEResult:
    s: np.ndarray
    y: np.ndarray
    exit: str
    s_exit: float
    steps: int
    rejected: int


def dopri5(rhs: Callable, y0, s_max: float, rtol: float = 1e-10, atol: float = 1e-12,
           inside: Optional[Callable] = None, s_eval: Optional[Sequence[float]] = None,
           h0: Optional[float] = None, max_steps: int = MAX_STEPS) -> _ODEResult:
    """Embedded Dormand-Prince 5(4) with a PI step controller.

    ``inside(y)`` is tested after each accepted step; on failure the crossing is
    bisected to ``1e-8`` in ``s`` and integration stops with exit
    ``"left_domain"``.  A :class:`DomainError` raised by ``rhs`` inside a trial
    step shrinks the step.  With ``s_eval`` the integrator lands exactly on those
    parameters and records only them; otherwise every accepted step is recorded.
    """
    y = np.asarray(y0, dtype=float).copy()
    s = 0.0
    f = rhs(s, y)
    targets = None if s_eval is None else [float(v) for v in s_eval if 0 < v <= s_max]
    out_s, out_y = [0.0], [y.copy()]
    h = (h0 or min(0.01, s_max)) if s_max > 0 else 0.0
    err_old = 1e-4
    beta, alpha = 0.04, 0.2 - 0.75 * 0.04
    steps = rejected = 0
    exit_kind, s_exit = "reached_smax", s_max
    inside = inside or (lambda _y: True)

    while s < s_max:
        if steps >= max_steps:
            exit_kind, s_exit = "step_underflow", s
            break
        stop = s_max if not targets else min(targets[0], s_max)
        h = min(h, stop - s)
        if h <= 1e-14 * max(1.0, abs(s)):
            if stop - s <= 1e-14 * max(1.0, abs(s)):
                s = stop
                if targets and s >= targets[0]:
                    targets.pop(0)
                continue
            exit_kind, s_exit = "step_underflow", s
            break
        try:
            y_new, err_vec, f_new = _dp_step(rhs, s, y, f, h)
            ok = bool(np.all(np.isfinite(y_new)))
        except DomainError:
            ok = False
        if not ok:
            h *= 0.25
            rejected += 1
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            if not inside(y_new):
                s_exit, y_exit = _bisect_exit(rhs, s, y, f, h, inside)
                out_s.append(s_exit)
                out_y.append(y_exit)
                exit_kind = "left_domain"
                break
            steps += 1
            s_next = s + h
            hit = targets is not None and targets and abs(s_next - targets[0]) <= 1e-12 * max(1, s_next)
            if hit:
                s_next = targets.pop(0)
            s, y, f = s_next, y_new, f_new
            if targets is None or hit:
                out_s.append(s)
                out_y.append(y.copy())
            fac = 0.9 * max(err, 1e-10) ** -alpha * err_old ** beta
            h *= min(5.0, max(0.2, fac))
            err_old = max(err, 1e-4)
        else:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.2)
    return _ODEResult(np.array(out_s), np.array(out_y), exit_kind, float(s_exit), steps, rejected)


def _bisect_exit(rhs, s, y, f, h, inside, tol=1e-8):
    lo, hi = 0.0, h
    y_lo = y
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            y_mid = _dp_step(rhs, s, y, f, mid)[0]
            good = inside(y_mid)
        except DomainError:
            good = False
        if good:
            lo, y_lo = mid, y_mid
        else:
            hi = mid
    return s + lo, y_lo


# ------------------------------------------------------------------ states

@dataclass(frozen=True)
class GeodesicState:
    """Coordinate time, chart point and frame components ``(T^0, T^1..T^n)``."""

    t: float
    x: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float))
        if self.T.size != self.x.size + 1:
            raise ValueError("T needs n + 1 frame components")
        if not (np.isfinite(self.t) and np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.T))):
            raise ValueError("state must be finite")


def _coord_velocity(theta, T):
    V = np.array(T, dtype=float)
    V[0] = T[0] - float(theta @ T[1:])
    return V


def _frame_velocity(theta, V):
    T = np.array(V, dtype=float)
    T[0] = V[0] + float(theta @ V[1:])
    return T


def _kind_spacetime(S, kind):
    if kind not in ("lorentzian", "hat"):
        raise ValueError(f"kind must be 'lorentzian' or 'hat', got {kind!r}")
    lor = S if S.branch == "lorentzian" else hat_metric(S)
    return lor if kind == "lorentzian" else hat_metric(lor)


@dataclass
class GeodesicTrajectory:
    """Sampled geodesic.  ``T`` holds frame components; ``y`` the horizontal time."""

    s: np.ndarray
    t: np.ndarray
    x: np.ndarray
    T: np.ndarray
    y: np.ndarray
    c: float
    norm0: float
    metric_kind: str
    exit: str
    s_exit: float
    c_drift: np.ndarray
    norm_drift: np.ndarray
    steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> List:
        return [(float(si), GeodesicState(float(ti), xi, Ti))
                for si, ti, xi, Ti in zip(self.s, self.t, self.x, self.T)]

    @property
    def max_c_drift(self):
        return float(np.max(np.abs(self.c_drift)))

    @property
    def max_norm_drift(self):
        return float(np.max(np.abs(self.norm_drift)))

    def to_csv(self, path):
        n = self.x.shape[1]
        header = (["s", "t"] + [f"x{i + 1}" for i in range(n)] + [f"T{a}" for a in range(n + 1)]
                  + ["c_drift", "gTT_drift"])
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for k in range(self.s.size):
                row = [self.s[k], self.t[k], *self.x[k], *self.T[k], self.c_drift[k],
                       self.norm_drift[k]]
                wr.writerow([repr(float(v)) for v in row])


def integrate_geodesic(S: StationarySpacetime, kind: str, init: GeodesicState, s_max: float,
                       tol: float = 1e-11, s_eval: Optional[Sequence[float]] = None,
                       exit_margin: float = EXIT_MARGIN, policy=GEODESIC_POLICY) -> GeodesicTrajectory:
    """Integrate the geodesic of the Lorentzian metric (``kind="lorentzian"``) or of
    the associated Riemannian metric (``kind="hat"``) from ``init``.

    Chart exits are reported in ``exit``, never raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    M = _kind_spacetime(S, kind)
    S.check(init.x)
    m = assembled_metric(M)
    n = S.n

    def rhs(_s, Y):
        X, V = Y[:n + 1], Y[n + 1:2 * n + 2]
        x = X[1:]
        G = coordinate_christoffels(m, X, policy)
        acc = -np.einsum("cab,a,b->c", G, V, V)
        return np.concatenate([V, acc, [-float(M.theta(x) @ V[1:])]])

    V0 = _coord_velocity(M.theta(init.x), init.T)
    Y0 = np.concatenate([[init.t], init.x, V0, [init.t]])
    res = dopri5(rhs, Y0, s_max, rtol=tol, atol=tol,
                 inside=lambda Y: S.domain.contains(Y[1:n + 1], exit_margin), s_eval=s_eval)
    t = res.y[:, 0]
    x = res.y[:, 1:n + 1]
    V = res.y[:, n + 1:2 * n + 2]
    T = np.array([_frame_velocity(M.theta(xi), Vi) for xi, Vi in zip(x, V)])
    w = np.array([M.w(xi) for xi in x])
    cs = T[:, 0] * w
    norms = np.array([w[k] * T[k, 0] ** 2 + T[k, 1:] @ M.g(x[k]) @ T[k, 1:] for k in range(len(w))])
    c = float(cs[0])
    return GeodesicTrajectory(res.s, t, x, T, res.y[:, -1], c, float(norms[0]), kind, res.exit,
                              res.s_exit, cs - c, norms - norms[0], res.steps,
                              {"entry": S.name, "tol": tol, "rejected": res.rejected})


# ---------------------------------------------------------------- projection

@dataclass
class ProjectedCurve:
    """Horizontal curve ``sigma(s) = (y(s), x(s))`` and the flow parameter ``tau = t - y``."""

    s: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    y: np.ndarray
    tau: np.ndarray
    horizontality: np.ndarray

    def hat_speed(self, S):
        return np.array([np.sqrt(v @ S.g(x) @ v) for x, v in zip(self.x, self.xdot)])


def horizontal_projection(S: StationarySpacetime, traj: GeodesicTrajectory, s0: float = 0.0) -> ProjectedCurve:
    """Project a trajectory onto the horizontal curve through ``gamma(s0)``.

    ``y`` solves ``dy/ds = -theta_i dx^i/ds`` with ``y(s0) = t(s0)``; the
    returned ``horizontality`` is ``<sigma', X>`` at each sample.
    """
    k0 = int(np.argmin(np.abs(traj.s - s0)))
    y = traj.y + (traj.t[k0] - traj.y[k0])
    xdot = traj.T[:, 1:]
    hor = []
    for xi, vi in zip(traj.x, xdot):
        th = S.theta(xi)
        ydot = -float(th @ vi)
        # <sigma', X> = w (ydot + theta . xdot)
        hor.append(S.w(xi) * (ydot + float(th @ vi)))
    return ProjectedCurve(traj.s.copy(), traj.x.copy(), xdot.copy(), y, traj.t - y, np.array(hor))


@dataclass
class ProjectedGeodesic:
    s: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    c: float
    exit: str
    s_exit: float


def projected_geodesic_integrate(S: StationarySpacetime, x0, v0, c: float, s_max: float,
                                 tol: float = 1e-11, s_eval: Optional[Sequence[float]] = None,
                                 exit_margin: float = EXIT_MARGIN, policy=GEODESIC_POLICY) -> ProjectedGeodesic:
    r"""Integrate the orbit-space equation

    .. math::

        \ddot x^i + \Gamma^i_{jk}\dot x^j\dot x^k
            = -\tfrac{c^2}{2} g^{ij}\partial_j(w^{-1}) - c\,\Lambda_{lm}\dot x^l g^{mi}

    with Christoffels of ``g`` from the oracle.
    """
    x0 = S.check(x0)
    h = horizontal_metric(S)
    n = S.n

    def rhs(_s, Y):
        x, v = Y[:n], Y[n:]
        G = coordinate_christoffels(h, x, policy)
        gi = np.linalg.inv(S.g(x))
        u = float(S.u(x))
        w = S.sign * u * u
        dw = 2 * S.sign * u * S.u.gradient(x, S.policy, S.domain)
        d_winv = -dw / w ** 2
        dth = S.theta.gradient(x, S.policy, S.domain)
        Lam = dth - dth.T
        acc = (-np.einsum("cab,a,b->c", G, v, v) - 0.5 * c * c * gi @ d_winv
               - c * gi @ (Lam.T @ v))
        return np.concatenate([v, acc])

    res = dopri5(rhs, np.concatenate([x0, np.asarray(v0, dtype=float)]), s_max, tol, tol,
                 inside=lambda Y: S.domain.contains(Y[:n], exit_margin), s_eval=s_eval)
    return ProjectedGeodesic(res.s, res.y[:, :n], res.y[:, n:], float(c), res.exit, res.s_exit)


# --------------------------------------------------------------- completeness

@dataclass
class ProbeReport:
    kind: str
    s_max: float
    outcomes: list

    @property
    def all_reached(self):
        return all(o["exit"] == "reached_smax" for o in self.outcomes)


def completeness_probe(S: StationarySpacetime, kind: str, fan: Sequence[GeodesicState],
                       s_max: float, tol: float = 1e-9) -> ProbeReport:
    """Integrate a fan of geodesics and record how each one ends.

    A ``left_domain`` outcome only says the ray reached the chart edge; it says
    nothing about completeness of the underlying manifold.
    """
    if not fan:
        raise ValueError("fan must contain at least one initial state")
    outcomes = []
    for k, st in enumerate(fan):
        tr = integrate_geodesic(S, kind, st, s_max, tol)
        outcomes.append({"ray": k, "exit": tr.exit, "s_exit": tr.s_exit,
                         "x_end": tr.x[-1].tolist(), "c_drift": tr.max_c_drift})
    return ProbeReport(kind, float(s_max), outcomes)


def circular_orbit_state(M: float, r: float, phi: float = 0.0) -> GeodesicState:
    """Timelike circular equatorial Schwarzschild orbit in ``(r, theta, phi)`` charts.

    Energy ``E = (1 - 2M/r)/sqrt(1 - 3M/r)``, angular momentum
    ``L = sqrt(M r)/sqrt(1 - 3M/r)``; unit normalised (``g(T, T) = -1``).
    """
    if r <= 3 * M:
        raise ValueError("circular timelike orbits need r > 3M")
    f = 1 - 2 * M / r
    E = f / np.sqrt(1 - 3 * M / r)
    L = np.sqrt(M * r) / np.sqrt(1 - 3 * M / r)
    # static chart: T^0 = dt/ds
    return GeodesicState(0.0, np.array([r, np.pi / 2, phi]), np.array([E / f, 0.0, 0.0, L / r ** 2]))
