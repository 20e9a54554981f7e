"""Exact stationary solutions in canonical ``(u, theta, g)`` form.

Each entry is built from closed-form sympy expressions; gradients and Hessians
are differentiated symbolically once and compiled to numpy callables, so the
geometry module receives exact partials through second order.  Every entry also
carries its textbook coordinate metric (Boyer-Lindquist for Kerr, and so on),
which is what the oracle differentiates.

Units: G = c = 1.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import sympy as sp

from .errors import ParameterError
from .fields import ChartDomain, Field
from .geometry import StationarySpacetime
from .oracle import CoordinateMetric

__all__ = [
    "CatalogEntry",
    "symbolic_field",
    "make_minkowski_static",
    "make_minkowski_rotating",
    "make_schwarzschild",
    "make_kerr",
    "make_ads",
    "make_product_flat",
    "make_entry",
    "ENTRY_NAMES",
    "CHART_EDGE",
]

# distance kept from coordinate singularities and horizons
CHART_EDGE = 1e-3


def _lambdify(coords, expr):
    fn = sp.lambdify(coords, expr, modules="math", cse=True)
    return lambda p: fn(*p)


def symbolic_field(expr, coords, name="", shape=()):
    """Compile a sympy expression (scalar, vector or matrix) into a :class:`Field`.

    The gradient and Hessian are exact symbolic derivatives.
    """
    coords = tuple(coords)
    arr = sp.Array(expr) if shape else sp.sympify(expr)
    grad = sp.derive_by_array(arr, coords)
    hess = sp.derive_by_array(grad, coords)

    def as_list(a):
        return a.tolist() if hasattr(a, "tolist") else a

    return Field(_lambdify(coords, as_list(arr)), _lambdify(coords, as_list(grad)),
                 _lambdify(coords, as_list(hess)), tuple(shape), name)


@dataclass(frozen=True)
class Flags:
    static: bool
    vacuum: bool
    einstein: bool
    flat: bool

    def as_dict(self):
        return {"static": self.static, "vacuum": self.vacuum, "einstein": self.einstein,
                "flat": self.flat}


@dataclass(frozen=True)
class CatalogEntry:
    """A named exact solution with its flags, anchors and textbook metric."""

    name: str
    spacetime: StationarySpacetime
    lam: Optional[float]
    flags: Flags
    anchors: Tuple[np.ndarray, ...]
    box: Tuple[np.ndarray, np.ndarray]
    textbook: CoordinateMetric
    params: Dict[str, float] = field(default_factory=dict)
    twist_anchor: Optional[np.ndarray] = None

    @property
    def S(self):
        return self.spacetime

    def sample_points(self, count, seed=0, margin=0.05):
        """Uniform points in the sampling box that lie in the chart with ``margin``."""
        rng = np.random.default_rng(seed)
        lo, hi = self.box
        pts = []
        while len(pts) < count:
            q = lo + (hi - lo) * rng.random(lo.size)
            if self.spacetime.domain.contains(q, margin):
                pts.append(q)
        return pts

    def fd_variant(self):
        """Same entry with every analytic derivative stripped (pure-FD tier)."""
        S = self.spacetime
        S2 = replace(S, u=S.u.value_only(), theta=S.theta.value_only(), g=S.g.value_only(),
                     name=S.name + "[fd]")
        return replace(self, spacetime=S2)

    def describe(self):
        return {"name": self.name, "params": dict(self.params), "lambda": self.lam,
                "n": self.spacetime.n, "coords": list(self.spacetime.coords),
                "flags": self.flags.as_dict(), "domain": self.spacetime.domain.description}


def _build(name, coords, u2, theta, g, lam, flags, domain, anchors, box, textbook_expr,
           params, twist_anchor=None):
    n = len(coords)
    u = sp.sqrt(u2)
    S = StationarySpacetime(
        n=n,
        u=symbolic_field(u, coords, "u"),
        theta=symbolic_field(theta, coords, "theta", (n,)),
        g=symbolic_field(g, coords, "g", (n, n)),
        lam=lam,
        domain=domain,
        name=name,
        coords=tuple(str(c) for c in coords),
    )
    t = sp.Symbol("t")
    tb = sp.lambdify((t,) + tuple(coords), textbook_expr.tolist(), modules="math", cse=True)
    textbook = CoordinateMetric(n + 1, lambda X: np.array(tb(*X), dtype=float), 1, domain, 1,
                                name + ":textbook")
    anchors = tuple(np.asarray(a, dtype=float) for a in anchors)
    box = (np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float))
    ta = None if twist_anchor is None else np.asarray(twist_anchor, dtype=float)
    return CatalogEntry(name, S, lam, flags, anchors, box, textbook, params, ta)


def _canonical_matrix(w, theta, g):
    """Coordinate matrix of ``w (dt + theta)^2 + g`` (used for textbook forms that
    are literally of that shape)."""
    n = len(theta)
    M = sp.zeros(n + 1, n + 1)
    M[0, 0] = w
    for i in range(n):
        M[0, i + 1] = M[i + 1, 0] = w * theta[i]
        for j in range(n):
            M[i + 1, j + 1] = g[i, j] + w * theta[i] * theta[j]
    return M


def make_minkowski_static():
    x, y, z = sp.symbols("x y z", real=True)
    tb = sp.diag(-1, 1, 1, 1)
    return _build("minkowski-static", (x, y, z), sp.Integer(1), [0, 0, 0], sp.eye(3), 0.0,
                  Flags(True, True, True, True), ChartDomain.everywhere(),
                  anchors=[(0.3, -0.2, 0.5), (1.0, 1.0, 1.0)],
                  box=((-2, -2, -2), (2, 2, 2)), textbook_expr=tb, params={},
                  twist_anchor=(0, 0, 0))


def make_minkowski_rotating(omega=0.5):
    """Flat spacetime in a frame rotating with angular velocity ``omega``.

    Coordinates ``(rho, phi, z)``; the chart ends where the rotating observer
    would move at light speed, ``rho = 1/omega``.
    """
    if not omega > 0:
        raise ParameterError(f"rotation rate must be positive, got {omega}")
    rho, phi, z = sp.symbols("rho phi z", real=True)
    Om = sp.nsimplify(omega)
    u2 = 1 - Om ** 2 * rho ** 2
    theta = [0, Om * rho ** 2 / u2, 0]
    g = sp.diag(1, rho ** 2 / u2, 1)
    t = sp.Symbol("t")
    # -dt^2 + drho^2 + rho^2 (dphi - Om dt)^2 + dz^2
    tb = sp.Matrix([[-1 + Om ** 2 * rho ** 2, 0, -Om * rho ** 2, 0],
                    [0, 1, 0, 0],
                    [-Om * rho ** 2, 0, rho ** 2, 0],
                    [0, 0, 0, 1]])
    rmax = 1.0 / omega

    def inside(p, margin):
        return CHART_EDGE + margin < p[0] < rmax - CHART_EDGE - margin

    dom = ChartDomain(inside, f"{CHART_EDGE} < rho < {rmax:g} - {CHART_EDGE}")
    return _build("minkowski-rotating", (rho, phi, z), u2, theta, g, 0.0,
                  Flags(False, True, True, True), dom,
                  anchors=[(0.5, 0.3, 0.0), (0.3 * rmax, 1.0, 0.5), (0.7 * rmax, 2.0, -0.4)],
                  box=((0.15 * rmax, 0.0, -1.0), (0.8 * rmax, 2 * np.pi, 1.0)),
                  textbook_expr=tb, params={"omega": float(omega)},
                  twist_anchor=(0.5, 0.0, 0.0))


def _spherical_domain(rmin_fn, description):
    def inside(p, margin):
        r, th = p[0], p[1]
        return (CHART_EDGE + margin < th < np.pi - CHART_EDGE - margin
                and r > rmin_fn(th) + CHART_EDGE + margin)
    return ChartDomain(inside, description)


def make_schwarzschild(M=1.0):
    if not M > 0:
        raise ParameterError(f"mass must be positive, got {M}")
    r, th, ph = sp.symbols("r theta phi", real=True)
    Ms = sp.nsimplify(M)
    f = 1 - 2 * Ms / r
    g = sp.diag(1 / f, r ** 2, r ** 2 * sp.sin(th) ** 2)
    tb = sp.diag(-f, 1 / f, r ** 2, r ** 2 * sp.sin(th) ** 2)
    dom = _spherical_domain(lambda _th: 2 * M, f"r > {2 * M:g} + {CHART_EDGE}, off-axis")
    return _build("schwarzschild", (r, th, ph), f, [0, 0, 0], g, 0.0,
                  Flags(True, True, True, False), dom,
                  anchors=[(4 * M, np.pi / 3, 0.0), (3 * M, np.pi / 2, 0.0),
                           (6 * M, 1.0, 0.5), (4 * M, np.pi / 2, 0.0)],
                  box=((3 * M, 0.3, 0.0), (10 * M, np.pi - 0.3, 2 * np.pi)),
                  textbook_expr=tb, params={"M": float(M)},
                  twist_anchor=(10 * M, np.pi / 2, 0.0))


def make_kerr(M=1.0, a=0.5):
    """Kerr in Boyer-Lindquist coordinates, restricted to outside the ergosphere."""
    if not M > 0:
        raise ParameterError(f"mass must be positive, got {M}")
    if not 0 <= a < M:
        raise ParameterError(f"need 0 <= a < M, got a={a}, M={M}")
    r, th, ph = sp.symbols("r theta phi", real=True)
    Ms, As = sp.nsimplify(M), sp.nsimplify(a)
    Sig = r ** 2 + As ** 2 * sp.cos(th) ** 2
    Del = r ** 2 - 2 * Ms * r + As ** 2
    s2 = sp.sin(th) ** 2
    gtt = -(1 - 2 * Ms * r / Sig)
    gtp = -2 * Ms * As * r * s2 / Sig
    gpp = (r ** 2 + As ** 2 + 2 * Ms * As ** 2 * r * s2 / Sig) * s2
    u2 = -gtt
    theta = [0, 0, gtp / gtt]
    g = sp.diag(Sig / Del, Sig, gpp - gtp ** 2 / gtt)
    tb = sp.Matrix([[gtt, 0, 0, gtp], [0, Sig / Del, 0, 0], [0, 0, Sig, 0], [gtp, 0, 0, gpp]])

    def ergo(theta_):
        return M + np.sqrt(M * M - a * a * np.cos(theta_) ** 2)

    dom = _spherical_domain(ergo, f"outside ergosphere r > M + sqrt(M^2 - a^2 cos^2) + {CHART_EDGE}")
    return _build("kerr", (r, th, ph), u2, theta, g, 0.0,
                  Flags(False, True, True, False), dom,
                  anchors=[(5 * M, np.pi / 3, 0.0), (4 * M, np.pi / 2, 1.0),
                           (6 * M, np.pi / 2, 0.0), (3 * M, 1.0, 2.0)],
                  box=((3 * M, 0.3, 0.0), (10 * M, np.pi - 0.3, 2 * np.pi)),
                  textbook_expr=tb, params={"M": float(M), "a": float(a)},
                  twist_anchor=(10 * M, np.pi / 2, 0.0))


def make_ads(lam=-3.0):
    """Static global anti-de Sitter space, ``Ric = lam * g`` with ``lam < 0`` (n = 3)."""
    if not lam < 0:
        raise ParameterError(f"anti-de Sitter needs lam < 0, got {lam}")
    r, th, ph = sp.symbols("r theta phi", real=True)
    L2 = sp.nsimplify(-3 / lam)
    f = 1 + r ** 2 / L2
    g = sp.diag(1 / f, r ** 2, r ** 2 * sp.sin(th) ** 2)
    tb = sp.diag(-f, 1 / f, r ** 2, r ** 2 * sp.sin(th) ** 2)
    L = float(np.sqrt(-3 / lam))
    dom = _spherical_domain(lambda _th: 0.0, f"r > {CHART_EDGE}, off-axis")
    return _build("ads", (r, th, ph), f, [0, 0, 0], g, float(lam),
                  Flags(True, False, True, False), dom,
                  anchors=[(0.5 * L, np.pi / 3, 0.0), (1.0 * L, np.pi / 2, 1.0),
                           (2.0 * L, 1.0, 0.0)],
                  box=((0.2 * L, 0.3, 0.0), (2.5 * L, np.pi - 0.3, 2 * np.pi)),
                  textbook_expr=tb, params={"lam": float(lam)},
                  twist_anchor=(1.0 * L, np.pi / 2, 0.0))


def make_product_flat(kappa=0.3):
    """``-(dt + d(kappa x y))^2 + g_A`` with a constant positive-definite ``g_A``.

    Static with a closed but nonzero shift; isometric to the product of a line
    and flat 3-space.
    """
    x, y, z = sp.symbols("x y z", real=True)
    k = sp.nsimplify(kappa)
    A = sp.Matrix([[sp.Rational(6, 5), sp.Rational(3, 10), 0],
                   [sp.Rational(3, 10), 1, sp.Rational(1, 10)],
                   [0, sp.Rational(1, 10), sp.Rational(4, 5)]])
    theta = [k * y, k * x, 0]
    tb = _canonical_matrix(-1, theta, A)
    return _build("product-flat", (x, y, z), sp.Integer(1), theta, A, 0.0,
                  Flags(True, True, True, True), ChartDomain.everywhere(),
                  anchors=[(0.2, -0.4, 0.1), (1.0, 0.5, -1.0)],
                  box=((-2, -2, -2), (2, 2, 2)), textbook_expr=tb,
                  params={"kappa": float(kappa)}, twist_anchor=(0, 0, 0))


_FACTORIES: Dict[str, Callable[..., CatalogEntry]] = {
    "minkowski-static": make_minkowski_static,
    "minkowski-rotating": make_minkowski_rotating,
    "schwarzschild": make_schwarzschild,
    "kerr": make_kerr,
    "ads": make_ads,
    "product-flat": make_product_flat,
}

ENTRY_NAMES = tuple(_FACTORIES)

_PARAMS = {
    "minkowski-static": (),
    "minkowski-rotating": ("omega",),
    "schwarzschild": ("M",),
    "kerr": ("M", "a"),
    "ads": ("lam",),
    "product-flat": ("kappa",),
}


def entry_parameters(name):
    return _PARAMS[name]


def make_entry(name, **params) -> CatalogEntry:
    """Build a catalog entry by name; ``None``-valued parameters take defaults."""
    if name not in _FACTORIES:
        raise ParameterError(f"unknown entry {name!r}; choose from {', '.join(ENTRY_NAMES)}")
    allowed = _PARAMS[name]
    extra = [k for k, v in params.items() if v is not None and k not in allowed]
    if extra:
        raise ParameterError(f"entry {name!r} takes no parameter(s) {extra}")
    kwargs = {k: v for k, v in params.items() if v is not None and k in allowed}
    return _FACTORIES[name](**kwargs)
