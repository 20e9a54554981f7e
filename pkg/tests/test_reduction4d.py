import numpy as np
import pytest
import sympy as sp

from stationary import geometry as geo
from stationary import reduction4d as r4
from stationary.catalog import symbolic_field
from stationary.errors import DimensionError, NotClosedError
from stationary.fields import Field, fd_jacobian
from stationary.geometry import StationarySpacetime


def e12():
    b = np.zeros((3, 3))
    b[0, 1], b[1, 0] = 1.0, -1.0
    return b


# ---------------------------------------------------------------- Hodge star

def test_hodge_euclidean():
    assert np.allclose(r4.hodge_star2(np.eye(3), None, e12()), [0, 0, 1])


def test_hodge_scaled_metric():
    # eps_312 = sqrt(det g) = 2, raising index 1 with g^11 = 1/4 gives 1/2
    assert np.allclose(r4.hodge_star2(np.diag([4.0, 1.0, 1.0]), None, e12()), [0, 0, 0.5])


def test_hodge_involution():
    rng = np.random.default_rng(4)
    for _ in range(5):
        A = rng.standard_normal((3, 3))
        g = A @ A.T + 3 * np.eye(3)
        a = rng.standard_normal(3)
        assert np.max(np.abs(r4.hodge_star2(g, None, r4.hodge_star1(g, None, a)) - a)) < 1e-10


def test_levi_civita_orientation():
    eps = r4.levi_civita(np.diag([4.0, 1.0, 9.0]))
    assert eps[0, 1, 2] == pytest.approx(6.0) and eps[1, 0, 2] == pytest.approx(-6.0)


def test_dimension_error():
    Y = sp.symbols("a b")
    S = StationarySpacetime(2, symbolic_field(1, Y), symbolic_field([0, 0], Y, shape=(2,)),
                            symbolic_field(sp.eye(2), Y, shape=(2, 2)))
    for fn in (r4.twist_one_form, r4.energy_density, r4.pullback_hyperbolic, r4.h_monitor):
        with pytest.raises(DimensionError):
            fn(S, [0.0, 0.0])


# ------------------------------------------------------------ twist identities

@pytest.mark.parametrize("name", ["minkowski-rotating", "schwarzschild", "kerr", "ads", "product-flat"])
def test_norm_and_divergence_identities(entries, name):
    e = entries[name]
    for p in e.sample_points(12, seed=5):
        t = r4.twist_identities(e.S, p)
        assert t.norm < 1e-8 and t.divergence < 1e-6


def test_norm_identity_rotating(rot):
    S = rot.S
    p = np.array([0.5, 0.3, 0.0])
    d = geo.local_data(S, p)
    om = r4.twist_one_form(S, p)
    assert abs(d.dot(om, om) - d.u ** 6 / 2 * d.Lambda_sq) < 1e-9
    assert d.dot(om, om) > 0


def test_static_twist_zero(schw):
    for p in schw.anchors:
        assert np.all(r4.twist_one_form(schw.S, p) == 0)
        t = r4.twist_identities(schw.S, p)
        assert t.norm == 0 and t.curl == 0 and t.d_omega == 0


def test_kerr_closed(kerr):
    for p in kerr.sample_points(8, seed=2):
        t = r4.twist_identities(kerr.S, p)
        assert t.d_omega < 1e-5 and t.curl < 1e-5


def test_curl_sign_pinned(twisted):
    """Vacuum entries have dω = 0, so the sign is only visible on a non-Einstein metric."""
    assert r4.CURL_SIGN == -1.0
    for p in ([0.3, -0.2, 0.5], [-0.6, 0.4, 0.2]):
        t = r4.twist_identities(twisted, p)
        assert t.d_omega > 1e-2
        assert t.curl < 1e-6
        d = geo.local_data(twisted, p)
        star = r4.hodge_star2(d.g, None, r4.twist_derivative(twisted, p) - r4.twist_derivative(twisted, p).T)
        r0j = geo.ricci_blocks(twisted, p).r0j
        assert np.max(np.abs(star + 2 * d.u * r0j)) < 1e-6
        assert np.max(np.abs(star - 2 * d.u * r0j)) > 1e-3


# ------------------------------------------------------------ twist potential

def test_potential_static(schw):
    assert r4.twist_potential(schw.S, [4, 1, 0], [6, 2, 0.5]) == 0.0


def test_potential_empty_loop(kerr):
    assert r4.twist_potential(kerr.S, kerr.twist_anchor, kerr.twist_anchor) == 0.0


def test_potential_path_independent(kerr):
    base, target = kerr.twist_anchor, np.array([5.0, np.pi / 3, 0.4])
    a = r4.twist_potential(kerr.S, base, target)
    b = r4.twist_potential(kerr.S, base, target, path=[[10.0, 0.8, 0.0], [5.0, 0.8, 1.0]])
    c = r4.twist_potential(kerr.S, base, target, path=[[7.0, 2.0, -0.5]])
    assert abs(a) > 1e-3
    assert abs(a - b) < 1e-6 and abs(a - c) < 1e-6


def test_potential_gradient_is_omega(kerr):
    psi = r4.potential_field(kerr.S, kerr.twist_anchor)
    p = np.array([6.0, 1.2, 0.1])
    g = fd_jacobian(psi, p, domain=kerr.S.domain)
    assert np.max(np.abs(g - r4.twist_one_form(kerr.S, p))) < 1e-6


def test_not_closed(twisted):
    with pytest.raises(NotClosedError):
        r4.twist_potential(twisted, [0, 0, 0], [0.5, 0.2, 0.1])
    with pytest.raises(NotClosedError):
        r4.tension_field(twisted, [0.3, -0.2, 0.5])


# ---------------------------------------------------------- hyperbolic target

def test_hyperbolic_curvature():
    for z in ([0.0, 1.0], [0.3, 0.5], [-1.0, 2.5]):
        assert r4.HyperbolicTarget.sectional_curvature(z) == pytest.approx(-1.0, abs=1e-8)


def test_hyperbolic_christoffels_vs_oracle():
    from stationary.oracle import coordinate_christoffels
    z = np.array([0.2, 0.7])
    ref = coordinate_christoffels(r4.HyperbolicTarget.coordinate_metric(), z)
    assert np.max(np.abs(ref - r4.HyperbolicTarget.christoffels(z))) < 1e-8


# ---------------------------------------------------------- pullback, energy

def test_pullback_schwarzschild(schw):
    S = schw.S
    p = np.array([4.0, 1.0, 0.0])
    P = r4.pullback_hyperbolic(S, p)
    d = geo.local_data(S, p)
    dl = d.du / d.u
    assert np.allclose(P[1:, 1:], 4 * np.outer(dl, dl))
    assert r4.energy_density(S, p).trace == pytest.approx(4 * d.dot(dl, dl), rel=1e-12)


def test_pullback_chain_rule_kerr(kerr):
    """Independent oracle: y^-2 (dx dx + dy dy) pulled back by FD derivatives of (psi, u^2)."""
    S = kerr.S
    p = np.array([5.0, np.pi / 3, 0.3])
    psi = r4.potential_field(S, kerr.twist_anchor)
    dpsi = fd_jacobian(psi, p, domain=S.domain)
    du2 = fd_jacobian(Field(lambda q: float(S.u(q)) ** 2), p, domain=S.domain)
    y = float(S.u(p)) ** 2
    ref = (np.outer(dpsi, dpsi) + np.outer(du2, du2)) / y ** 2
    P = r4.pullback_hyperbolic(S, p)
    assert np.max(np.abs(P[1:, 1:] - ref)) < 1e-6
    assert np.all(P[0] == 0)
    ev = np.linalg.eigvalsh(P[1:, 1:])
    assert ev.min() > -1e-12 and np.sum(ev > 1e-10) <= 2


def test_energy_minkowski(mink):
    e = r4.energy_density(mink.S, [0.1, 0.2, 0.3])
    assert e.trace == 0 and e.closed == 0 and abs(e.conformal) < 1e-12


@pytest.mark.parametrize("name", ["schwarzschild", "kerr"])
def test_energy_forms_agree(entries, name):
    e = entries[name]
    for p in e.sample_points(6, seed=8):
        en = r4.energy_density(e.S, p)
        assert abs(en.trace - en.closed) < 1e-8
        assert abs(en.conformal - en.closed) < 1e-4


def test_energy_schwarzschild_value(schw):
    # u^2 = 1 - 2/r, g^rr = 1 - 2/r, d_r log u = 1/(r^2 u^2); r = 4 gives 4 * 0.5 * (1/8)^2
    en = r4.energy_density(schw.S, [4.0, 1.0, 0.0])
    assert en.value == pytest.approx(4 * 0.5 * (1 / 8) ** 2, rel=1e-12)


def test_energy_rotating_conformal(rot):
    en = r4.energy_density(rot.S, [0.5, 0.3, 0.0])
    assert abs(en.conformal - en.closed) < 1e-5 and en.closed > 0


# -------------------------------------------------------------- tension field

def test_tension_kerr(kerr):
    for p in kerr.sample_points(20, seed=21):
        t = r4.tension_field(kerr.S, p)
        assert abs(t.x) < 1e-4 and abs(t.y) < 1e-4


def test_tension_ads(ads):
    for p in ads.anchors:
        t = r4.tension_field(ads.S, p)
        u2 = float(ads.S.u(p)) ** 2
        assert abs(t.x) < 1e-4
        assert t.y == pytest.approx(6 * u2, abs=1e-4)
        assert t.expected_y == pytest.approx(6 * u2, abs=1e-8)


def test_tension_minkowski(mink):
    t = r4.tension_field(mink.S, [0.1, 0.2, 0.3])
    assert abs(t.x) < 1e-10 and abs(t.y) < 1e-10


# ------------------------------------------------------------------- Bochner

@pytest.mark.parametrize("r", [3.0, 4.0, 6.0])
def test_bochner_schwarzschild(schw, r):
    b = r4.bochner_terms(schw.S, [r, 1.2, 0.0])
    assert b.relative < 1e-3 and b.rhs >= 0


def test_bochner_kerr(kerr):
    b = r4.bochner_terms(kerr.S, [5.0, np.pi / 3, 0.0])
    assert b.relative < 1e-3 and b.rhs >= 0
    assert all(v >= 0 for v in b.squares.values())
    assert b.squares["wedge"] > 0 and b.squares["mixed"] > 0


def test_bochner_minkowski(mink):
    b = r4.bochner_terms(mink.S, [0.1, 0.2, 0.3])
    assert abs(b.lhs) < 1e-12 and b.rhs == 0


def test_bochner_einstein(ads, rot):
    for e in (ads, rot):
        for p in e.anchors:
            assert r4.bochner_terms(e.S, p).relative < 1e-3


def test_bochner_ads_curvature_terms(ads):
    """I2 + I3 = 4 lam |grad log u|^2 + 3 lam u^-4 |omega|^2 on Einstein entries."""
    p = ads.anchors[0]
    b = r4.bochner_terms(ads.S, p)
    d = geo.local_data(ads.S, p)
    dl = d.du / d.u
    assert b.I2 + b.I3 == pytest.approx(4 * ads.lam * d.dot(dl, dl), rel=1e-8)


# ------------------------------------------------------------------ h monitor

def test_h_monitor(mink, schw, kerr):
    assert r4.h_monitor(mink.S, [0, 0, 0]).value == 0
    p = np.array([4.0, 1.0, 0.0])
    h = r4.h_monitor(schw.S, p)
    assert h.twist_term == 0
    assert h.value == pytest.approx(r4.energy_density(schw.S, p).value / 2, rel=1e-12)
    assert h.value == pytest.approx(2 * 0.5 * (1 / 8) ** 2, rel=1e-12)
    hk = r4.h_monitor(kerr.S, [5.0, np.pi / 3, 0.0])
    assert hk.gradient_term > 0 and hk.twist_term > 0
    assert hk.value == pytest.approx(r4.energy_density(kerr.S, [5.0, np.pi / 3, 0.0]).value / 2, rel=1e-12)


def test_twist_data(kerr, schw):
    td = r4.twist_data(kerr.S, [5.0, np.pi / 3, 0.0], base=kerr.twist_anchor)
    assert td.phi[1] > 0 and td.psi == td.phi[0]
    assert td.tension is not None and td.bochner_residual < 1e-2
    assert r4.twist_data(schw.S, [4.0, 1.0, 0.0]).psi is None
