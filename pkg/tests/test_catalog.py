import numpy as np
import pytest

from stationary import catalog, geometry as geo
from stationary.errors import ParameterError
from stationary.oracle import coordinate_ricci, frame_transform


def test_entry_names(entries):
    assert set(entries) == set(catalog.ENTRY_NAMES)


@pytest.mark.parametrize("name", catalog.ENTRY_NAMES)
def test_textbook_matches_canonical(entries, name):
    e = entries[name]
    for p in e.anchors:
        X = np.concatenate([[0.0], p])
        assert np.max(np.abs(e.textbook(X) - geo.metric_components(e.S, p))) < 1e-12


@pytest.mark.parametrize("name", catalog.ENTRY_NAMES)
def test_flags_hold_at_anchors(entries, name):
    e = entries[name]
    S = e.S
    for p in e.anchors:
        d = geo.local_data(S, p)
        ric = geo.ricci_blocks(S, p, d).full()
        if e.flags.static:
            assert np.max(np.abs(d.Lambda)) < 1e-10
        else:
            assert np.max(np.abs(d.Lambda)) > 1e-6
        if e.flags.vacuum:
            assert np.max(np.abs(ric)) < 1e-6
        if e.flags.einstein:
            assert np.max(np.abs(ric - e.lam * geo.frame_metric(S, p))) < 1e-6
        if e.flags.flat:
            assert np.max(np.abs(geo.curvature_blocks(S, p, d).full())) < 1e-8


def test_kerr_ricci_at_reference_point(kerr):
    assert geo.ricci_blocks(kerr.S, [5.0, np.pi / 3, 0.0]).max_abs() < 1e-6


def test_kerr_reduces_to_schwarzschild(schw):
    k0 = catalog.make_kerr(1.0, 0.0)
    for p in schw.anchors:
        for a, b in ((k0.S.u, schw.S.u), (k0.S.theta, schw.S.theta), (k0.S.g, schw.S.g)):
            assert np.max(np.abs(a(p) - b(p))) < 1e-12


def test_rotating_closed_form(rot):
    S = rot.S
    om, rho = 0.5, 0.5
    p = np.array([rho, 0.3, 0.0])
    assert float(S.u(p)) ** 2 == pytest.approx(1 - om ** 2 * rho ** 2, abs=1e-14)
    assert S.theta(p)[1] == pytest.approx(om * rho ** 2 / (1 - om ** 2 * rho ** 2), abs=1e-14)
    assert S.g(p)[1, 1] == pytest.approx(rho ** 2 / (1 - om ** 2 * rho ** 2), abs=1e-14)


def test_ads_einstein_vs_oracle(ads):
    S = ads.S
    for p in ads.anchors:
        X = np.concatenate([[0.0], p])
        ric = frame_transform(coordinate_ricci(ads.textbook, X), S, p)
        assert np.max(np.abs(ric + 3 * geo.frame_metric(S, p))) < 1e-6


@pytest.mark.parametrize("factory,kw", [
    (catalog.make_schwarzschild, {"M": 0.0}),
    (catalog.make_kerr, {"M": 1.0, "a": 1.0}),
    (catalog.make_kerr, {"M": 1.0, "a": -0.1}),
    (catalog.make_kerr, {"M": 1.0, "a": 2.0}),
    (catalog.make_minkowski_rotating, {"omega": 0.0}),
    (catalog.make_ads, {"lam": 1.0}),
])
def test_parameter_errors(factory, kw):
    with pytest.raises(ParameterError):
        factory(**kw)
    with pytest.raises(ValueError):
        factory(**kw)


def test_make_entry_rejects_unknown():
    with pytest.raises(ParameterError):
        catalog.make_entry("reissner-nordstrom")
    with pytest.raises(ParameterError):
        catalog.make_entry("schwarzschild", a=0.3)
    assert catalog.make_entry("kerr", M=2.0, a=1.0).params == {"M": 2.0, "a": 1.0}


def test_domains(kerr, schw, rot):
    assert not schw.S.domain.contains([2.0005, 1.0, 0.0])
    assert schw.S.domain.contains([2.1, 1.0, 0.0])
    # equatorial ergosphere of M=1 is r = 2
    assert not kerr.S.domain.contains([1.99, np.pi / 2, 0.0])
    assert kerr.S.domain.contains([2.01, np.pi / 2, 0.0])
    assert not rot.S.domain.contains([1.9995, 0.0, 0.0])


def test_sample_points_seeded(kerr):
    a = kerr.sample_points(5, seed=11)
    b = kerr.sample_points(5, seed=11)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(kerr.S.domain.contains(p, 0.05) for p in a)


def test_fd_variant_drops_derivatives(kerr):
    fd = kerr.fd_variant()
    assert not fd.S.u.analytic and kerr.S.u.analytic
    p = kerr.anchors[0]
    assert np.max(np.abs(fd.S.g.gradient(p) - kerr.S.g.gradient(p))) < 1e-8
