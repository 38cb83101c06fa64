import math

import numpy as np
import pytest

from catalog import fixed_catalog
from oracles import fd_dirichlet, fd_eigen, richardson2
from radialeig import (RadialProblem, linear, pucci_plus, radial_dirichlet,
                       radial_integrate_from_origin, radial_semi_eigenvalue, radial_solve_mixed_eps,
                       radial_spectrum)
from radialeig.radial import origin_regularity, radial_eps_eigenvalue, richardson

PI2 = math.pi ** 2


def test_poisson_from_origin():
    tr = radial_integrate_from_origin(linear(dim=3), 1 / 6, 1.0, f=-1.0)
    rs = np.linspace(0, 1, 21)
    np.testing.assert_allclose(tr(rs), (1 - rs ** 2) / 6, atol=1e-10)
    assert tr.u[-1] == pytest.approx(0.0, abs=1e-9)
    assert tr.meta["ell0"] == pytest.approx(-1 / 3)


def test_sinc_from_origin():
    tr = radial_integrate_from_origin(linear(dim=3), 1.0, 1.0, lam=PI2)
    rs = np.linspace(0.05, 1, 20)
    np.testing.assert_allclose(tr(rs), np.sin(math.pi * rs) / (math.pi * rs), atol=1e-9)
    assert tr.u[-1] == pytest.approx(0.0, abs=1e-9)


def test_zero_data_from_origin():
    tr = radial_integrate_from_origin(pucci_plus(1, 2, dim=2), 0.0, 1.0, f=0.0, kappa=1.0)
    assert np.all(tr.u == 0.0)


def test_eps_family_tends_to_ball_solution():
    prob = RadialProblem(linear(dim=3), 1.0, -1.0, kappa=1.0)
    ref = radial_dirichlet(prob).solution(0.5)
    errs = []
    for k in (3, 4, 5, 6):
        tr = radial_solve_mixed_eps(prob, 2.0 ** -k)
        errs.append(abs(tr(0.5) - ref))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    for k in (3, 4):
        assert radial_solve_mixed_eps(RadialProblem(linear(dim=3), 1.0, 0.0), 2.0 ** -k).sup_abs() == 0


def test_zero_data_both_methods():
    rep = radial_dirichlet(RadialProblem(pucci_plus(1, 2, dim=2), 1.0, 0.0))
    assert rep.solution.sup_abs() == 0.0
    assert all(v == 0.0 for _, v in rep.eps_family)


def test_bessel_closed_form():
    # N = 3, Delta u - u = -1: u = 1 - sinh(r)/(r sinh(1))
    rep = radial_dirichlet(RadialProblem(linear(dim=3), 1.0, -1.0, kappa=1.0))
    rs = np.linspace(0.05, 1, 20)
    exact = 1 - np.sinh(rs) / (rs * math.sinh(1.0))
    np.testing.assert_allclose(rep.solution(rs), exact, atol=1e-9)
    assert rep.discrepancy <= 1e-6
    assert not rep.flagged
    assert rep.abp.passed


def test_pucci_ball_against_fd_oracle():
    spec = pucci_plus(1, 2, dim=2)
    rep = radial_dirichlet(RadialProblem(spec, 1.0, -1.0, kappa=1.0))
    xc, vc = fd_dirichlet(spec, lambda r: -1.0, 1.0, 0.0, 1.0, 2000, radial=True)
    xf, vf = fd_dirichlet(spec, lambda r: -1.0, 1.0, 0.0, 1.0, 4000, radial=True)
    ref = richardson2(vc, vf[::2])
    assert np.max(np.abs(rep.solution(xc) - ref)) <= 1e-5
    assert rep.discrepancy <= 1e-6


def test_richardson_measures_order():
    eps = [2.0 ** -k for k in range(3, 8)]
    vals = [1.0 + 3 * e ** 2 for e in eps]
    est, order, err = richardson(eps, vals)
    assert order == pytest.approx(2.0, abs=1e-9)
    assert est == pytest.approx(1.0, abs=1e-12)


def test_origin_regularity_shrinks():
    tr = radial_integrate_from_origin(pucci_plus(1, 2, dim=3), 1.0, 1.0, lam=10.0)
    probes = origin_regularity(tr)
    errs = [e for _, e in probes]
    assert errs[-1] <= 1e-5 * abs(tr.meta["ell0"])
    assert errs[-1] <= errs[0]


def test_laplacian_ball_eigenvalue():
    r = radial_semi_eigenvalue(linear(dim=3), 0.0, 1.0, 1)
    assert r.lam == pytest.approx(PI2, rel=1e-8)
    assert r.meta["cross_discrepancy"] <= 1e-6
    assert radial_semi_eigenvalue(linear(dim=3), 0.0, 2.0, 1, cross_check=False).lam == \
        pytest.approx(PI2 / 4, rel=1e-8)


def test_annulus_uses_interval_solver():
    # N = 3: v = r u solves v'' = -lam v on (1, 2)
    r = radial_semi_eigenvalue(linear(dim=3), 1.0, 2.0, 1)
    assert r.lam == pytest.approx(PI2, rel=1e-8)


def test_pucci_ball_eigen_cross_checks():
    spec = pucci_plus(1, 2, dim=2)
    for s in (1, -1):
        r = radial_semi_eigenvalue(spec, 0.0, 1.0, s)
        est, fam, order, err = radial_eps_eigenvalue(spec, 1.0, s)
        assert r.meta["cross_discrepancy"] <= 1e-6
        assert est == pytest.approx(r.lam, rel=1e-6)
        lc, _, _ = fd_eigen(spec, 0.0, 1.0, s, 1000, radial=True)
        lf, _, _ = fd_eigen(spec, 0.0, 1.0, s, 2000, radial=True)
        assert r.lam == pytest.approx(richardson2(lc, lf), rel=1e-4)


@pytest.mark.parametrize("name", ["bellman_max", "bellman_min", "linear"])
def test_catalog_ball_eigen(name):
    spec = fixed_catalog(dim=2)[name]
    r = radial_semi_eigenvalue(spec, 0.0, 1.0, 1)
    assert r.meta["cross_discrepancy"] <= 1e-6
    assert r.residual <= 1e-7 * abs(r.lam)


def test_laplacian_radial_spectrum():
    sp = radial_spectrum(linear(dim=3), 1.0, 2, signs=(1,))
    for pair in sp:
        assert pair.lam == pytest.approx((pair.n + 1) ** 2 * PI2, rel=1e-7)
        if pair.n:
            np.testing.assert_allclose(pair.nodes.t, [k / (pair.n + 1) for k in range(1, pair.n + 1)],
                                       atol=1e-7)


def test_validation():
    with pytest.raises(ValueError):
        RadialProblem(linear(dim=2), 0.0)
    with pytest.raises(ValueError):
        radial_semi_eigenvalue(linear(dim=2), 1.0, 0.5, 1)
    with pytest.raises(ValueError):
        radial_solve_mixed_eps(RadialProblem(linear(dim=2), 1.0), 1.0)
