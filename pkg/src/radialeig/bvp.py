"""Shooting solvers for F(u'', u', u, t) - kappa*u = f with Dirichlet or mixed data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError
from .ivp import DEFAULT_CONFIG, Trajectory, as_source, integrate

MAX_EXPANSIONS = 60


def choose_kappa(spec):
    """Shift making F(m, p, u, t) - kappa*u strictly decreasing in u."""
    return float(spec.delta) + 1.0


@dataclass
class BvpProblem:
    spec: object
    f: object
    interval: tuple
    kappa: float | None = None
    bc: str = "dirichlet"
    c: float | None = None

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ValueError("interval must satisfy a < b")
        if self.bc not in ("dirichlet", "neumann_dirichlet"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.bc == "neumann_dirichlet":
            if self.c is None:
                self.c = a
            if not a <= self.c < b:
                raise ValueError("clamp point must satisfy a <= c < b")
        self.f = as_source(self.f)
        if self.kappa is None:
            self.kappa = choose_kappa(self.spec)


def shoot(phi, tol, scale=1.0):
    """Root of the nondecreasing shooting map phi(d) -> (residual, payload).

    Tries d = 0 first, then expands |d| = scale, 4*scale, ... until the sign
    changes, then refines with Brent's method.  ``tol(payload)`` gives the
    acceptance threshold for |residual|.
    """
    cache = {}

    def val(d):
        if d not in cache:
            cache[d] = phi(d)
        return cache[d][0]

    r0 = val(0.0)
    if abs(r0) <= tol(cache[0.0][1]):
        return 0.0, cache[0.0][1], 1
    direction = -1.0 if r0 > 0 else 1.0
    prev, d = 0.0, direction * scale
    for _ in range(MAX_EXPANSIONS):
        r = val(d)
        if r == 0.0 or (r > 0) != (r0 > 0):
            break
        prev, d = d, 4.0 * d
    else:
        raise BracketError("no sign change of the shooting residual within the expansion budget")
    lo, hi = sorted((prev, d))
    if val(lo) > 0 or val(hi) < 0:
        raise BracketError("shooting map is not monotone on the bracket")
    root = brentq(val, lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)), rtol=1e-15,
                  maxiter=200)
    res, payload = phi(root)
    return root, payload, len(cache) + 1


def _tol(traj):
    return 1e-10 * (1.0 + float(np.max(np.abs(traj.u))))


def solve_dirichlet(prob, cfg=None):
    """u(a) = u(b) = 0, found by shooting on the initial slope u'(a) = d."""
    if prob.bc != "dirichlet":
        raise ValueError("solve_dirichlet needs bc='dirichlet'")
    cfg = cfg or DEFAULT_CONFIG
    a, b = prob.interval

    def phi(d):
        tr = integrate(prob.spec, prob.f, prob.kappa, a, b, 0.0, d, cfg)
        return tr.u[-1], tr

    d, traj, evals = shoot(phi, _tol)
    traj.meta.update(slope=d, evaluations=evals, end_residual=float(traj.u[-1]))
    return traj


def _join(left, right):
    """Concatenate two trajectories sharing their junction node."""
    return Trajectory(np.concatenate([left.t[:-1], right.t]),
                      np.concatenate([left.u[:-1], right.u]),
                      np.concatenate([left.p[:-1], right.p]),
                      np.concatenate([left.m[:-1], right.m]), dict(right.meta))


def solve_neumann_dirichlet(prob, cfg=None):
    """u'(c) = u(b) = 0, found by shooting on the value u(c) = d."""
    if prob.bc != "neumann_dirichlet":
        raise ValueError("solve_neumann_dirichlet needs bc='neumann_dirichlet'")
    cfg = cfg or DEFAULT_CONFIG
    a, b = prob.interval
    c = prob.c

    def phi(d):
        tr = integrate(prob.spec, prob.f, prob.kappa, c, b, d, 0.0, cfg)
        return tr.u[-1], tr

    d, traj, evals = shoot(phi, _tol)
    if c > a:
        back = integrate(prob.spec, prob.f, prob.kappa, c, a, d, 0.0, cfg)
        traj = _join(back, traj)
    traj.meta.update(value_at_c=d, evaluations=evals, end_residual=float(traj.u[-1]))
    return traj
