import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catalog import fixed_catalog
from radialeig import IntegrationError, IvpConfig, Source, first_zero, integrate, linear, pucci_plus
from radialeig.ivp import Trajectory, residual


def test_affine_solution():
    tr = integrate(linear(), 0.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    ts = np.linspace(0, 1, 11)
    np.testing.assert_allclose(tr(ts), ts, atol=1e-10)
    np.testing.assert_allclose(tr.eval(ts)[1], 1.0, atol=1e-10)


def test_cosh_solution():
    # u'' = u - 1, u(0) = u'(0) = 0
    tr = integrate(linear(), -1.0, 1.0, 0.0, 1.0, 0.0, 0.0)
    assert tr.u[-1] == pytest.approx(1 - math.cosh(1.0), abs=1e-10)
    ts = np.linspace(0, 1, 37)
    np.testing.assert_allclose(tr(ts), 1 - np.cosh(ts), atol=1e-10)


def test_backward_integration_matches_forward():
    spec = pucci_plus(1, 2, grad=0.3)
    fw = integrate(spec, -1.0, 1.0, 0.0, 1.0, 0.0, 0.7)
    bw = integrate(spec, -1.0, 1.0, 1.0, 0.0, fw.u[-1], fw.p[-1])
    assert np.all(np.diff(bw.t) > 0)
    assert bw.u[0] == pytest.approx(0.0, abs=1e-9)
    assert bw.p[0] == pytest.approx(0.7, abs=1e-9)


def test_zero_data_gives_zero():
    tr = integrate(fixed_catalog()["bellman_max"], 0.0, 1.0, 0.0, 1.0, 0.0, 0.0)
    assert np.all(tr.u == 0.0)


def test_blowup_reports_position():
    # u'' = 1e6 u grows like exp(1000 t)
    with pytest.raises(IntegrationError) as err:
        integrate(linear(), 0.0, 1e6, 0.0, 1.0, 1.0, 0.0)
    assert 0.0 < err.value.t_reached < 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        IvpConfig(rel_tol=0.0)


def test_dense_output_second_derivative():
    tr = integrate(linear(), 0.0, -math.pi ** 2, 0.0, 1.0, 0.0, math.pi)
    ts = np.linspace(0.01, 0.99, 50)
    u, p, m = tr.eval(ts)
    np.testing.assert_allclose(u, np.sin(math.pi * ts), atol=1e-9)
    np.testing.assert_allclose(m, -math.pi ** 2 * np.sin(math.pi * ts), atol=1e-6)


def _sampled(fun, a, b, n=2001):
    ts = np.linspace(a, b, n)
    h = 1e-6
    return Trajectory(ts, fun(ts), (fun(ts + h) - fun(ts - h)) / (2 * h), np.zeros_like(ts))


def test_first_zero_examples():
    sine = lambda t: np.sin(np.pi * t)
    assert first_zero(_sampled(sine, 0, 1.5), 0.1) == pytest.approx(1.0, abs=1e-12)
    assert first_zero(_sampled(lambda t: t, 0, 1), 0.0) is None
    triple = lambda t: np.sin(3 * np.pi * t)
    assert first_zero(_sampled(triple, 0, 1), 0.01) == pytest.approx(1 / 3, abs=1e-12)


def test_first_zero_on_solution():
    tr = integrate(linear(), 0.0, -4 * math.pi ** 2, 0.0, 1.0, 0.0, 1.0)
    assert first_zero(tr, 1e-3) == pytest.approx(0.5, abs=1e-10)


def test_source_interpolation():
    s = Source.samples([0.0, 1.0, 0.0], (0, 2))
    assert s(0.5) == pytest.approx(0.5)
    assert s(5.0) == 0.0
    assert s(-5.0) == 0.0
    with pytest.raises(ValueError):
        Source([0.0, 0.0], [1.0, 2.0])


@pytest.mark.parametrize("name", list(fixed_catalog()))
def test_residual_small_on_catalog(name):
    spec = fixed_catalog()[name]
    q = Source.from_function(lambda t: math.sin(3 * t) - 0.5, (0, 1), 41)
    tr = integrate(spec, q, 1.0, 0.0, 1.0, 0.2, -0.5)
    assert residual(spec, tr, q, 1.0) <= 1e-7 * (1 + tr.sup_abs())


@settings(max_examples=30, deadline=None)
@given(u0=st.floats(-2, 2), p0=st.floats(-2, 2), s=st.floats(0.01, 50))
def test_homogeneity_of_flow(u0, p0, s):
    # the solution map commutes with positive scaling when q = 0
    spec = fixed_catalog()["pucci_plus"]
    a = integrate(spec, 0.0, 1.0, 0.0, 1.0, u0, p0)
    b = integrate(spec, 0.0, 1.0, 0.0, 1.0, s * u0, s * p0)
    assert b.u[-1] == pytest.approx(s * a.u[-1], rel=1e-7, abs=1e-9 * s)
