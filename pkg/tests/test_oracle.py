import numpy as np
import pytest

from stationary import geometry as geo
from stationary.errors import DomainError, SingularMetricError, ValenceError
from stationary.fields import ChartDomain
from stationary.oracle import (CoordinateMetric, assembled_metric, coordinate_christoffels,
                               coordinate_ricci, coordinate_riemann, einstein_divergence,
                               frame_matrix, frame_transform, inverse_frame_transform, kretschmann,
                               metric_derivatives, oracle_frame_connection, vector_from_frame,
                               vector_to_frame)


def sphere():
    return CoordinateMetric(2, lambda X: np.diag([1.0, np.sin(X[0]) ** 2]), 0,
                            ChartDomain(lambda x, m: m < x[0] < np.pi - m, "0 < theta < pi"))


def test_euclidean_christoffels_vanish():
    m = CoordinateMetric(3, lambda X: np.eye(3))
    assert np.all(coordinate_christoffels(m, [0.1, 0.2, 0.3]) == 0)
    assert np.max(np.abs(coordinate_riemann(m, [0.1, 0.2, 0.3]))) == 0


def test_sphere_christoffel():
    G = coordinate_christoffels(sphere(), [np.pi / 4, 0.0])
    assert G[0, 1, 1] == pytest.approx(-0.5, abs=1e-10)
    assert G[1, 0, 1] == pytest.approx(1.0, abs=1e-10)


def test_sphere_sign_convention():
    for th in (0.4, np.pi / 4, 1.2):
        R = coordinate_riemann(sphere(), [th, 0.3])
        assert R[0, 1, 0, 1] == pytest.approx(np.sin(th) ** 2, abs=1e-8)
        assert R[0, 1, 0, 1] > 0


def test_christoffel_symmetric_and_compatible(kerr):
    m = kerr.textbook
    X = np.array([0.0, 5.0, 1.0, 0.3])
    G = coordinate_christoffels(m, X)
    assert np.max(np.abs(G - np.swapaxes(G, 1, 2))) < 1e-14
    g, dg, _ = metric_derivatives(m, X, order=1)
    # nabla_a g_bc = d_a g_bc - G^d_ab g_dc - G^d_ac g_bd
    nab = dg - np.einsum("dab,dc->abc", G, g) - np.einsum("dac,bd->abc", G, g)
    assert np.max(np.abs(nab)) < 1e-7


def test_riemann_symmetries(kerr):
    R = coordinate_riemann(kerr.textbook, [0.0, 5.0, np.pi / 3, 0.0])
    assert np.max(np.abs(R + np.swapaxes(R, 0, 1))) < 1e-7
    assert np.max(np.abs(R + np.swapaxes(R, 2, 3))) < 1e-7
    assert np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1)))) < 1e-7


def test_kerr_ricci_flat(kerr):
    assert np.max(np.abs(coordinate_ricci(kerr.textbook, [0.0, 5.0, np.pi / 3, 0.0]))) < 1e-5


def test_minkowski_zero(mink):
    assert np.max(np.abs(coordinate_riemann(mink.textbook, [0.0, 0.3, 0.1, -0.2]))) < 1e-12


def test_kretschmann_schwarzschild_limit():
    from stationary.catalog import make_kerr
    K = kretschmann(make_kerr(1.0, 0.0).textbook, [0.0, 4.0, np.pi / 3, 0.0])
    assert K == pytest.approx(48 / 4 ** 6, abs=1e-6)
    assert 48 / 4 ** 6 == 0.01171875


def test_einstein_divergence_small(kerr, ads):
    assert einstein_divergence(kerr.textbook, [0.0, 5.0, np.pi / 3, 0.0]) < 1e-3
    assert einstein_divergence(ads.textbook, [0.0, 0.8, 1.0, 0.0]) < 1e-3


def test_degenerate_metric():
    m = CoordinateMetric(2, lambda X: np.diag([1.0, 0.0]))
    with pytest.raises(SingularMetricError):
        coordinate_christoffels(m, [0.0, 0.0])


def test_stencil_outside_domain(schw):
    with pytest.raises(DomainError):
        coordinate_riemann(schw.textbook, [0.0, 2.0015, 1.0, 0.0])


def test_frame_transform_identity_when_static():
    T = np.random.default_rng(0).standard_normal((4, 4, 4))
    assert np.allclose(frame_transform(T, np.zeros(3)), T)


def test_metric_becomes_block_diagonal(kerr):
    S = kerr.S
    p = np.array([5.0, np.pi / 3, 0.0])
    F = frame_transform(geo.metric_components(S, p), S, p)
    assert np.max(np.abs(F[0, 1:])) < 1e-14
    assert F[0, 0] == pytest.approx(S.w(p))
    assert np.allclose(F[1:, 1:], S.g(p), atol=1e-14)


@pytest.mark.parametrize("upper", [0, 1, 2, 3])
def test_frame_roundtrip(upper):
    rng = np.random.default_rng(upper)
    th = rng.standard_normal(3)
    T = rng.standard_normal((4, 4, 4))
    back = inverse_frame_transform(frame_transform(T, th, upper=upper), th, upper=upper)
    assert np.max(np.abs(back - T)) < 1e-12


def test_valence_error():
    with pytest.raises(ValenceError):
        frame_transform(np.zeros((2,) * 5), np.zeros(1))
    with pytest.raises(ValenceError):
        frame_transform(np.zeros((4, 4)), np.zeros(3), upper=3)


def test_vector_frame_conversion():
    th = np.array([0.3, -0.1, 0.2])
    V = np.array([1.0, 0.5, 0.2, -0.4])
    T = vector_to_frame(V, th)
    assert T[0] == pytest.approx(V[0] + th @ V[1:])
    assert np.allclose(vector_from_frame(T, th), V)
    E = frame_matrix(th)
    assert np.allclose(E[1:, 0], -th)


def test_connection_schwarzschild(schw):
    S = schw.S
    p = np.array([4.0, 1.0, 0.0])
    assert np.max(np.abs(oracle_frame_connection(assembled_metric(S), S, p)
                         - geo.frame_connection(S, p))) < 1e-6
