import numpy as np
import pytest

from stationary import catalog

ACCEPTANCE_LINES = []


def rel_err(a, b):
    """Max-norm difference relative to the reference, floored at 1 (flat entries have zero curvature)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


@pytest.fixture(scope="session")
def entries():
    return {
        "minkowski-static": catalog.make_minkowski_static(),
        "minkowski-rotating": catalog.make_minkowski_rotating(0.5),
        "schwarzschild": catalog.make_schwarzschild(1.0),
        "kerr": catalog.make_kerr(1.0, 0.5),
        "ads": catalog.make_ads(-3.0),
        "product-flat": catalog.make_product_flat(),
    }


@pytest.fixture(scope="session")
def kerr(entries):
    return entries["kerr"]


@pytest.fixture(scope="session")
def schw(entries):
    return entries["schwarzschild"]


@pytest.fixture(scope="session")
def ads(entries):
    return entries["ads"]


@pytest.fixture(scope="session")
def rot(entries):
    return entries["minkowski-rotating"]


@pytest.fixture(scope="session")
def mink(entries):
    return entries["minkowski-static"]


@pytest.fixture(scope="session")
def flat(entries):
    return entries["product-flat"]


@pytest.fixture(scope="session")
def twisted():
    """Generic non-Einstein stationary metric with nonzero twist and curl of omega."""
    import sympy as sp
    from stationary.geometry import StationarySpacetime
    from stationary.fields import ChartDomain

    x = sp.symbols("x y z")
    u = 1 + x[0] ** 2 / 10 + x[1] * x[2] / 20
    th = [x[1] * x[2] / 5, 3 * x[0] * x[2] / 10 + x[0] ** 2 / 10, x[1] ** 2 * x[0] / 10]
    g = sp.Matrix([[1 + x[2] ** 2 / 10, x[0] / 10, 0], [x[0] / 10, 1, 0], [0, 0, 1 + x[1] ** 2 / 20]])
    dom = ChartDomain(lambda p, m: bool(np.all(np.abs(p) < 1.5 - m)), "|x_i| < 1.5")
    return StationarySpacetime(3, catalog.symbolic_field(u, x, "u"),
                               catalog.symbolic_field(th, x, "theta", (3,)),
                               catalog.symbolic_field(g, x, "g", (3, 3)), None, dom, name="twisted")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
