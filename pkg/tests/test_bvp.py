import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catalog import fixed_catalog
from oracles import fd_dirichlet, richardson2
from radialeig import (BvpProblem, OperatorSpec, Source, choose_kappa, linear, pucci_plus,
                       solve_dirichlet, solve_neumann_dirichlet)
from radialeig.ivp import residual


def test_choose_kappa():
    assert choose_kappa(OperatorSpec("linear", 1.0, 1.0, delta=0.0)) == 1.0
    assert choose_kappa(OperatorSpec("linear", 1.0, 1.0, delta=2.5)) == 3.5


def test_dirichlet_cosh():
    u = solve_dirichlet(BvpProblem(linear(), -1.0, (0.0, 1.0), kappa=1.0))
    assert u(0.5) == pytest.approx(1 - 1 / math.cosh(0.5), abs=1e-10)
    ts = np.linspace(0, 1, 21)
    np.testing.assert_allclose(u(ts), 1 - np.cosh(ts - 0.5) / np.cosh(0.5), atol=1e-10)


def test_dirichlet_zero_data():
    u = solve_dirichlet(BvpProblem(pucci_plus(1, 2), 0.0, (0.0, 1.0)))
    assert u.meta["slope"] == 0.0
    assert np.all(u.u == 0.0)


def test_neumann_dirichlet_cosh():
    u = solve_neumann_dirichlet(BvpProblem(linear(), -1.0, (0.0, 1.0), kappa=1.0,
                                           bc="neumann_dirichlet", c=0.0))
    assert u(0.0) == pytest.approx(1 - 1 / math.cosh(1.0), abs=1e-10)
    assert u.eval(0.0)[1][0] == pytest.approx(0.0, abs=1e-12)


def test_neumann_inside_interval():
    prob = BvpProblem(linear(), -1.0, (-1.0, 1.0), kappa=1.0, bc="neumann_dirichlet", c=0.0)
    u = solve_neumann_dirichlet(prob)
    assert u.span == (-1.0, 1.0)
    assert u(-0.3) == pytest.approx(1 - math.cosh(0.3) / math.cosh(1.0), abs=1e-10)


def test_problem_validation():
    with pytest.raises(ValueError):
        BvpProblem(linear(), 0.0, (1.0, 0.0))
    with pytest.raises(ValueError):
        BvpProblem(linear(), 0.0, (0.0, 1.0), bc="robin")
    with pytest.raises(ValueError):
        BvpProblem(linear(), 0.0, (0.0, 1.0), bc="neumann_dirichlet", c=1.0)


def test_pucci_dirichlet_against_fd_oracle():
    spec = pucci_plus(1, 2)
    u = solve_dirichlet(BvpProblem(spec, -1.0, (0.0, 1.0), kappa=1.0))
    assert np.all(u.u[1:-1] > 0)
    xc, vc = fd_dirichlet(spec, lambda x: -1.0, 1.0, 0.0, 1.0, 5000)
    xf, vf = fd_dirichlet(spec, lambda x: -1.0, 1.0, 0.0, 1.0, 10000)
    ref = richardson2(vc, vf[1::2])
    assert np.max(np.abs(u(xc) - ref)) <= 1e-6


@pytest.mark.parametrize("name", list(fixed_catalog()))
def test_catalog_dirichlet_against_fd_oracle(name):
    spec = fixed_catalog()[name]
    f = Source.from_function(lambda t: math.cos(4 * t) - 0.3, (-0.2, 0.9), 23)
    u = solve_dirichlet(BvpProblem(spec, f, (-0.2, 0.9)))
    kappa = choose_kappa(spec)
    assert residual(spec, u, f, kappa) <= 1e-7 * (1 + u.sup_abs())
    xc, vc = fd_dirichlet(spec, f, kappa, -0.2, 0.9, 2000)
    xf, vf = fd_dirichlet(spec, f, kappa, -0.2, 0.9, 4000)
    ref = richardson2(vc, vf[1::2])
    assert np.max(np.abs(u(xc) - ref)) <= 1e-6 * (1 + np.max(np.abs(ref)))


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.0, 20.0))
def test_solution_scales_with_data(s):
    spec = fixed_catalog()["bellman_max"]
    f = Source.samples([-1.0, 0.5, -0.2], (0.0, 1.0))
    fs = Source.samples([-s, 0.5 * s, -0.2 * s], (0.0, 1.0))
    u = solve_dirichlet(BvpProblem(spec, f, (0.0, 1.0)))
    us = solve_dirichlet(BvpProblem(spec, fs, (0.0, 1.0)))
    ts = np.linspace(0, 1, 9)
    np.testing.assert_allclose(us(ts), s * u(ts), atol=1e-9 * (1 + s))


def test_comparison_principle():
    # f1 <= f2 gives u1 >= u2 for the decreasing-in-u problem
    spec = fixed_catalog()["pucci_minus"]
    u1 = solve_dirichlet(BvpProblem(spec, -2.0, (0.0, 1.0)))
    u2 = solve_dirichlet(BvpProblem(spec, -1.0, (0.0, 1.0)))
    ts = np.linspace(0, 1, 41)
    assert np.all(u1(ts) >= u2(ts) - 1e-12)
