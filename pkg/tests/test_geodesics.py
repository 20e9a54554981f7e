import csv

import numpy as np
import pytest

from stationary import geodesics as gd
from stationary.geodesics import GeodesicState


def radial_state(r0=10.0):
    f = 1 - 2 / r0
    return GeodesicState(0.0, np.array([r0, np.pi / 2, 0.0]), np.array([1 / np.sqrt(f), 0.0, 0.0, 0.0]))


def test_minkowski_worldline(mink):
    tr = gd.integrate_geodesic(mink.S, "lorentzian", GeodesicState(0.0, [0.1, 0.2, 0.3], [1, 0, 0, 0]),
                               5.0, s_eval=np.linspace(0, 5, 6))
    assert tr.c == -1.0 and tr.exit == "reached_smax"
    assert np.allclose(tr.t, tr.s, atol=1e-12)
    assert np.allclose(tr.x, [0.1, 0.2, 0.3], atol=1e-12)
    sig = gd.horizontal_projection(mink.S, tr)
    assert np.allclose(sig.x, [0.1, 0.2, 0.3]) and np.allclose(sig.hat_speed(mink.S), 0)


def test_circular_orbit(schw):
    init = gd.circular_orbit_state(1.0, 6.0)
    tr = gd.integrate_geodesic(schw.S, "lorentzian", init, 100.0, s_eval=np.linspace(0, 100, 201))
    assert tr.exit == "reached_smax"
    assert tr.norm0 == pytest.approx(-1.0, abs=1e-12)
    assert np.max(np.abs(tr.x[:, 0] - 6.0)) < 1e-6
    assert tr.max_c_drift < 1e-8 and tr.max_norm_drift < 1e-8
    # the orbit advances in phi at dphi/ds = L / r^2
    assert tr.x[-1, 2] > 1.0


def test_circular_orbit_invalid():
    with pytest.raises(ValueError):
        gd.circular_orbit_state(1.0, 2.5)


def test_radial_infall(schw):
    tr = gd.integrate_geodesic(schw.S, "lorentzian", radial_state(), 100.0, s_eval=np.linspace(0, 100, 401))
    assert tr.c == pytest.approx(-np.sqrt(0.8), rel=1e-14)
    assert tr.max_c_drift < 1e-8 and tr.max_norm_drift < 1e-8
    # the chart ends at r = 2M; the proper-time fall from rest at r = 10 takes ~ 33.6
    assert tr.exit == "left_domain" and 25 < tr.s_exit < 40
    assert np.all(np.diff(tr.s) > 0) and np.all(np.diff(tr.x[:, 0]) < 0)


def test_bad_inputs(schw):
    with pytest.raises(ValueError):
        gd.integrate_geodesic(schw.S, "euclid", radial_state(), 1.0)
    with pytest.raises(ValueError):
        gd.integrate_geodesic(schw.S, "lorentzian", radial_state(), 1.0, tol=0.0)
    with pytest.raises(ValueError):
        gd.completeness_probe(schw.S, "hat", [], 1.0)


def test_kerr_projection_properties(kerr):
    init = GeodesicState(0.0, [8.0, 1.2, 0.0], [1.2, 0.05, 0.02, 0.03])
    tr = gd.integrate_geodesic(kerr.S, "lorentzian", init, 20.0, s_eval=np.linspace(0, 20, 81))
    assert tr.exit == "reached_smax"
    assert tr.max_c_drift < 1e-8 and tr.max_norm_drift < 1e-8
    sig = gd.horizontal_projection(kerr.S, tr, s0=5.0)
    assert np.max(np.abs(sig.horizontality)) < 1e-8
    k0 = int(np.argmin(np.abs(tr.s - 5.0)))
    assert sig.y[k0] == pytest.approx(tr.t[k0]) and sig.tau[k0] == pytest.approx(0.0, abs=1e-12)
    # |sigma'|_hat < |gamma'|_hat wherever T^0 != 0
    u2 = np.array([float(kerr.S.u(x)) ** 2 for x in tr.x])
    full = np.sqrt(u2 * tr.T[:, 0] ** 2 + sig.hat_speed(kerr.S) ** 2)
    assert np.all(sig.hat_speed(kerr.S) < full)
    assert np.all(np.isfinite(np.diff(sig.tau)))


def test_projection_of_horizontal_curve(flat):
    """A curve with T^0 = 0 is already horizontal: sigma = gamma and tau is constant."""
    init = GeodesicState(0.5, [0.0, 0.0, 0.0], [0.0, 0.3, 0.2, 0.1])
    tr = gd.integrate_geodesic(flat.S, "hat", init, 3.0, s_eval=np.linspace(0, 3, 31))
    sig = gd.horizontal_projection(flat.S, tr)
    assert np.allclose(sig.tau, 0.0, atol=1e-10)
    assert np.allclose(sig.y, tr.t, atol=1e-10)


def _compare(S, init, s_max=10.0):
    s_eval = np.linspace(0, s_max, 41)
    tr = gd.integrate_geodesic(S, "lorentzian", init, s_max, s_eval=s_eval)
    sig = gd.horizontal_projection(S, tr)
    pg = gd.projected_geodesic_integrate(S, init.x, init.T[1:], tr.c, s_max, s_eval=s_eval)
    assert tr.exit == pg.exit == "reached_smax"
    return float(np.max(np.abs(pg.x - sig.x))), tr.c


def test_projected_ode_schwarzschild_radial(schw):
    r0 = 10.0
    f = 1 - 2 / r0
    init = GeodesicState(0.0, [r0, np.pi / 2, 0.0], [1 / f, -np.sqrt(1 - f), 0.0, 0.0])
    err, c = _compare(schw.S, init)
    assert c == pytest.approx(-1.0, abs=1e-14)
    assert err < 1e-5


def test_projected_ode_rotating(rot):
    S = rot.S
    x0 = np.array([0.5, 0.3, 0.0])
    u2 = float(S.u(x0)) ** 2
    init = GeodesicState(0.0, x0, [1 / u2, 0.1, 0.2, 0.05])
    err, c = _compare(S, init, 4.0)
    assert c == pytest.approx(-1.0, abs=1e-14)
    assert err < 1e-5


def test_projected_ode_kerr(kerr):
    init = GeodesicState(0.0, [8.0, 1.2, 0.0], [1.2, 0.05, 0.02, 0.03])
    err, _ = _compare(kerr.S, init)
    assert err < 1e-5


def test_projected_ode_c_zero(kerr):
    """c = 0: plain geodesic of (N, g); it coincides with the horizontal hat and Lorentzian geodesics."""
    init = GeodesicState(0.0, [8.0, 1.2, 0.0], [0.0, 0.1, 0.02, 0.03])
    s_eval = np.linspace(0, 10, 21)
    lor = gd.integrate_geodesic(kerr.S, "lorentzian", init, 10.0, s_eval=s_eval)
    hat = gd.integrate_geodesic(kerr.S, "hat", init, 10.0, s_eval=s_eval)
    pg = gd.projected_geodesic_integrate(kerr.S, init.x, init.T[1:], 0.0, 10.0, s_eval=s_eval)
    assert abs(lor.c) < 1e-15
    assert np.max(np.abs(lor.x - hat.x)) < 1e-6 and np.max(np.abs(lor.t - hat.t)) < 1e-6
    assert np.max(np.abs(pg.x - lor.x)) < 1e-6


def test_probe_minkowski(mink):
    fan = [GeodesicState(0.0, [0, 0, 0], [0.0, *d]) for d in np.eye(3)]
    rep = gd.completeness_probe(mink.S, "hat", fan, 1000.0)
    assert rep.all_reached


def test_probe_product(flat):
    rng = np.random.default_rng(0)
    fan = [GeodesicState(0.0, [0, 0, 0], [0.3, *rng.standard_normal(3)]) for _ in range(4)]
    assert gd.completeness_probe(flat.S, "hat", fan, 200.0).all_reached


def test_probe_schwarzschild_chart_exit(schw):
    fan = [GeodesicState(0.0, [6.0, np.pi / 2, 0.0], [0.0, -1.0, 0.0, 0.0]),
           GeodesicState(0.0, [6.0, 1.0, 0.0], [0.0, -1.0, 0.1, 0.0])]
    rep = gd.completeness_probe(schw.S, "hat", fan, 100.0)
    assert all(o["exit"] == "left_domain" and o["s_exit"] < 100 for o in rep.outcomes)
    # the equatorial ray stops at the horizon edge, the tilted one at the polar axis
    assert rep.outcomes[0]["x_end"][0] < 2.06
    assert rep.outcomes[1]["x_end"][1] > np.pi - 0.06


def test_csv_export(schw, tmp_path):
    tr = gd.integrate_geodesic(schw.S, "lorentzian", gd.circular_orbit_state(1.0, 6.0), 1.0,
                               s_eval=[0.0, 0.5, 1.0])
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["s", "t", "x1", "x2", "x3", "T0", "T1", "T2", "T3", "c_drift", "gTT_drift"]
    assert len(rows) == 4 and float(rows[2][0]) == 0.5


def test_dopri5_exponential():
    res = gd.dopri5(lambda s, y: -y, np.array([1.0]), 5.0, 1e-12, 1e-12, s_eval=[5.0])
    assert res.y[-1, 0] == pytest.approx(np.exp(-5.0), rel=1e-10)
