"""Radial problems in the ball B_R of R^N.

The operator is evaluated with ell = u'/r.  At the origin a radial C^2
function has u''(0) = ell(0), so the equation fixes u''(0) from u(0) and
q(0) and the integration starts at r_s = 1e-6 R from the Taylor data

    u(r_s) = u0 + ell0 r_s^2 / 2,   u'(r_s) = ell0 r_s.

Annuli (r1 > 0) are regular and reuse the interval solvers directly.  The
ball is also solved through the regularized family on (eps, R) with
u'(eps) = 0 as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bvp import BvpProblem, choose_kappa, shoot, solve_neumann_dirichlet
from .diagnostics import AbpReport, abp_check
from .errors import BracketError, IntegrationError, SolverError
from .ivp import DEFAULT_CONFIG, ZERO, Trajectory, as_source, integrate, residual
from .nehari import SemiCache, Spectrum, assemble, principal_pair, solve_nodes, _map
from .operators import flip
from .semi_eigen import (SemiEigenResult, _finish, angle_function, lambda_search,
                         power_iterate, semi_eigenvalue)

R_START = 1e-6
EPS_LEVELS = tuple(range(3, 11))


def _start_state(spec, u0, q0, r_s):
    ell0 = K.invert_origin(spec.packed, 0.0, float(u0), float(q0))
    return ell0, u0 + 0.5 * ell0 * r_s ** 2, ell0 * r_s


def radial_integrate_from_origin(spec, u0, R, f=None, kappa=0.0, lam=None, cfg=None,
                                 r_start=R_START):
    """Integrate F = f + kappa*u (or F = -lam*u) from u(0) = u0, u'(0) = 0 out to R.

    The returned trajectory includes the node r = 0 with u''(0) = ell(0).
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if lam is not None:
        f, kappa = ZERO, -float(lam)
    f = as_source(f)
    r_s = r_start * R
    q0 = K.src_eval(f.packed, 0.0) + kappa * u0
    ell0, us, ps = _start_state(spec, u0, q0, r_s)
    tr = integrate(spec, f, kappa, r_s, R, us, ps, cfg)
    t = np.concatenate([[0.0], tr.t])
    out = Trajectory(t, np.concatenate([[u0], tr.u]), np.concatenate([[0.0], tr.p]),
                     np.concatenate([[ell0], tr.m]), tr.meta)
    out.meta["ell0"] = float(ell0)
    out.meta["r_start"] = r_s
    return out


@dataclass
class RadialProblem:
    spec: object
    R: float
    f: object = None
    kappa: float | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if int(self.spec.dim) != self.spec.dim or self.spec.dim < 1:
            raise ValueError("dimension must be a positive integer")
        self.f = as_source(self.f)
        if self.kappa is None:
            self.kappa = choose_kappa(self.spec)


def radial_solve_mixed_eps(prob, eps, cfg=None):
    """Solution of the regularized problem on (eps, R) with u'(eps) = 0, u(R) = 0."""
    if not 0 < eps < prob.R:
        raise ValueError("need 0 < eps < R")
    bp = BvpProblem(prob.spec, prob.f, (eps, prob.R), prob.kappa, bc="neumann_dirichlet", c=eps)
    return solve_neumann_dirichlet(bp, cfg)


def _tol(traj):
    return 1e-10 * (1.0 + float(np.max(np.abs(traj.u))))


def radial_dirichlet_origin(prob, cfg=None):
    """Ball solution by shooting on u(0); u(R) is nondecreasing in u(0)."""

    def phi(u0):
        tr = radial_integrate_from_origin(prob.spec, u0, prob.R, prob.f, prob.kappa, cfg=cfg)
        return tr.u[-1], tr

    u0, traj, evals = shoot(phi, _tol)
    traj.meta.update(u0=u0, evaluations=evals, end_residual=float(traj.u[-1]))
    return traj


def richardson(eps, values):
    """Extrapolate v(eps) -> v(0) from a halving family, with the order measured from the data.

    Returns (estimate, order, error estimate).  Order 1 is used when the
    measured ratio is unusable.
    """
    eps = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    order = 1.0
    d1, d2 = v[-3] - v[-2], v[-2] - v[-1]
    if d1 != 0 and d2 != 0 and d1 * d2 > 0:
        measured = math.log2(d1 / d2)
        if 0.5 <= measured <= 4.0:
            order = measured
    r = 2.0 ** order
    est = (r * v[-1] - v[-2]) / (r - 1.0)
    return float(est), float(order), float(abs(est - v[-1]))


@dataclass
class RadialSolveReport:
    solution: Trajectory
    eps_family: list
    u0_direct: float
    u0_extrapolated: float
    extrapolation_error: float
    order: float
    discrepancy: float
    flagged: bool
    abp: AbpReport
    bounds: list = field(default_factory=list)
    origin_regularity: list = field(default_factory=list)

    @property
    def family_monotone(self):
        v = [x for _, x in self.eps_family]
        d = np.abs(np.diff(v))
        return bool(np.all(np.diff(d) < 0))

    def as_dict(self):
        return {
            "u0_direct": self.u0_direct,
            "u0_extrapolated": self.u0_extrapolated,
            "extrapolation_error": self.extrapolation_error,
            "order": self.order,
            "discrepancy": self.discrepancy,
            "flagged": self.flagged,
            "abp": self.abp.as_dict(),
        }


def origin_regularity(traj, probes=6):
    """|u'(r)/r - u''(0)| at r = r_s 2^k, k = probes-1..0; should shrink toward r_s."""
    ell0 = traj.meta["ell0"]
    r_s = traj.meta["r_start"]
    rs = r_s * 2.0 ** np.arange(probes - 1, -1, -1)
    _, p, _ = traj.eval(rs)
    return [(float(r), float(abs(pp / r - ell0))) for r, pp in zip(rs, p)]


def radial_dirichlet(prob, cfg=None, levels=EPS_LEVELS, workers=1):
    """Ball solve by origin shooting, cross-checked with the eps-family extrapolation."""
    direct = radial_dirichlet_origin(prob, cfg)
    eps = [prob.R * 2.0 ** -k for k in levels]
    fam = _map(lambda e: radial_solve_mixed_eps(prob, e, cfg), eps, workers)
    proxies = [float(tr.u[0]) for tr in fam]
    bounds = []
    for e, tr in zip(eps, fam):
        inner = tr.t > 0
        bounds.append((e, float(np.max(np.abs(tr.p[inner] / tr.t[inner]))),
                       float(np.max(np.abs(tr.m)))))
    est, order, err = richardson(eps, proxies)
    u0 = float(direct.u[0])
    disc = abs(est - u0)
    sup = float(np.max(np.abs(direct.u)))
    flagged = disc > 1e-5 * sup
    geometry = "ball" if prob.spec.dim >= 2 else "interval"
    rep = abp_check(direct, prob.f, prob.spec, geometry)
    return RadialSolveReport(direct, list(zip(eps, proxies)), u0, est, err, order, disc, flagged,
                             rep, bounds, origin_regularity(direct))


def _origin_start(spec, sign, r_s):
    def start(lam):
        ell0, us, ps = _start_state(spec, float(sign), -lam * sign, r_s)
        return r_s, us, ps
    return start


def _ball_eigen(spec, R, sign, cfg, r_start=R_START):
    r_s = r_start * R
    g = angle_function(spec, r_s, R, _origin_start(spec, sign, r_s), sign, cfg)
    upper = math.pi ** 2 * spec.lambda_max * max(spec.dim, 1) / R ** 2
    lam, evals = lambda_search(g, -choose_kappa(spec), upper)
    tr = radial_integrate_from_origin(spec, float(sign), R, lam=lam, cfg=cfg, r_start=r_start)
    return lam, evals, tr


def radial_inverse_iteration(spec, R, sign, cfg=None, tol=1e-10, max_iter=500):
    """Ball eigenvalue from the power iteration on the origin-shooting Dirichlet solver."""
    if spec.concave:
        return radial_inverse_iteration(flip(spec), R, -sign, cfg, tol, max_iter).negated()
    kappa = choose_kappa(spec)
    for _ in range(6):
        def solve(f):
            return radial_dirichlet_origin(RadialProblem(spec, R, f, kappa), cfg)
        try:
            mu, v, it = power_iterate(solve, sign, kappa, tol, max_iter)
            break
        except BracketError:
            kappa *= 2.0
    else:
        raise SolverError("radial Dirichlet solves failed for every shift tried")
    return _finish(spec, v, mu - kappa, sign, (0.0, R), "radial_inverse_iteration", it,
                   {"kappa": kappa})


def radial_eps_eigenvalue(spec, R, sign, cfg=None, levels=EPS_LEVELS):
    """Eigenvalues of the mixed problems on (eps, R), extrapolated to eps = 0.

    Returns (estimate, family, order, error estimate).
    """
    if spec.concave:
        return radial_eps_eigenvalue(flip(spec), R, -sign, cfg, levels)
    cfg = cfg or DEFAULT_CONFIG
    fam = []
    for k in levels:
        e = R * 2.0 ** -k
        g = angle_function(spec, e, R, lambda lam, e=e: (e, float(sign), 0.0), sign, cfg)
        upper = math.pi ** 2 * spec.lambda_max * max(spec.dim, 1) / R ** 2
        lam, _ = lambda_search(g, -choose_kappa(spec), upper)
        fam.append((e, lam))
    est, order, err = richardson([e for e, _ in fam], [v for _, v in fam])
    return est, fam, order, err


def radial_semi_eigenvalue(spec, r1, r2, sign, cfg=None, cross_check=True):
    """lam^sign on the annulus (r1, r2), or on the ball B_r2 when r1 = 0."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not 0 <= r1 < r2:
        raise ValueError("need 0 <= r1 < r2")
    if r1 > 0:
        return semi_eigenvalue(spec, r1, r2, sign, cfg)
    if spec.concave:
        return radial_semi_eigenvalue(flip(spec), r1, r2, -sign, cfg, cross_check).negated()
    lam, evals, tr = _ball_eigen(spec, r2, sign, cfg)
    tr.u[-1] = 0.0
    ef = tr.normalized()
    res = residual(spec, ef, 0.0, -lam)
    meta = {"ell0": tr.meta["ell0"], "r_start": tr.meta["r_start"]}
    if cross_check:
        ii = radial_inverse_iteration(spec, r2, sign, cfg)
        meta["inverse_iteration"] = ii.lam
        meta["cross_discrepancy"] = abs(ii.lam - lam) / abs(lam)
    return SemiEigenResult(float(lam), sign, (0.0, r2), ef, "origin_shoot", evals, res, meta)


def _radial_semi(spec, t1, t2, sign, cfg=None):
    return radial_semi_eigenvalue(spec, t1, t2, sign, cfg, cross_check=False)


def radial_spectrum(spec, R, n_max, cache=None, workers=1, signs=(1, -1), cfg=None):
    """Radial eigenpairs with n interior zero spheres, n = 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if not R > 0:
        raise ValueError("R must be positive")
    cache = cache or SemiCache(spec, _radial_semi, cfg)

    def reshoot(lam, ef):
        return radial_integrate_from_origin(spec, float(ef.u[0]), R, lam=lam, cfg=cfg)

    def job(item):
        n, s = item
        if n == 0:
            return principal_pair(cache.get(0.0, R, s))
        ns = solve_nodes(spec, n, s, (0.0, R), cache=cache)
        pair = assemble(spec, ns.nodes, s, cache=cache, reshoot=reshoot, cfg=cfg)
        pair.meta.update(node_residual=ns.residual, node_method=ns.method,
                         node_iterations=ns.iterations)
        return pair

    items = [(n, s) for n in range(n_max + 1) for s in signs]
    return Spectrum(_map(job, items, workers))
