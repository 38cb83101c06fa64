"""First positive and negative eigenpairs on an interval.

Convention: F(u'', u', u, t) = -lam * u, so the Laplacian F = u'' has
positive eigenvalues (pi/L)^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .bvp import BvpProblem, choose_kappa, solve_dirichlet
from .diagnostics import abp_constant
from .errors import BracketError, IntegrationError, SolverError
from .ivp import DEFAULT_CONFIG, ZERO, Source, Trajectory, first_zero, integrate, residual
from .operators import flip

MAX_EXPANSIONS = 60


@dataclass
class SemiEigenResult:
    lam: float
    sign: int
    interval: tuple
    eigenfunction: Trajectory
    method: str
    iterations: int
    residual: float
    meta: dict = field(default_factory=dict)

    def negated(self):
        """The same eigenvalue seen from the flipped operator."""
        return SemiEigenResult(self.lam, -self.sign, self.interval, self.eigenfunction.scaled(-1.0),
                               self.method, self.iterations, self.residual, dict(self.meta))

    def as_dict(self):
        return {
            "lambda": self.lam,
            "sign": self.sign,
            "interval": list(self.interval),
            "method": self.method,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _check_sign(sign):
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")


def turning_angle(u, p, crossings, sign):
    """Pruefer angle of (sign*u, sign*p), unwrapped with the crossing count, minus pi.

    Zero exactly when the first zero of u sits at the endpoint; negative
    before the first zero is reached, positive after.
    """
    theta = math.atan2(sign * u, sign * p) % (2.0 * math.pi)
    return theta + 2.0 * math.pi * (crossings // 2) - math.pi


def angle_function(spec, t_start, t2, start, sign, cfg=None):
    """lam -> turning angle at t2 for the IVP started by ``start(lam) -> (t, u, p)``."""
    cfg = cfg or DEFAULT_CONFIG
    packed = spec.packed
    zero = ZERO.packed

    def g(lam):
        t0, u0, p0 = start(lam)
        T, U, P, M, k, status = K.integrate(packed, zero, -lam, t0, t2, u0, p0, cfg.rel_tol,
                                            cfg.abs_tol, cfg.max_step, 3)
        if status == K.CROSSINGS:
            return (k - 0.5) * math.pi
        if status == K.OVERFLOW and k == 0:
            return -0.5 * math.pi
        if status != K.OK:
            raise IntegrationError(f"shooting failed at lambda={lam:.6g}", float(T[-1]))
        return turning_angle(U[-1], P[-1], k, sign)

    return g


def lambda_search(g, lower, upper):
    """Bracket the sign change of the increasing map g and refine it with Brent's method."""
    g_lo = g(lower)
    step = max(1.0, abs(lower))
    for _ in range(MAX_EXPANSIONS):
        if g_lo < 0:
            break
        lower -= step
        step *= 2.0
        g_lo = g(lower)
    else:
        raise BracketError("no lower eigenvalue bracket")
    if upper <= lower:
        upper = lower + 1.0
    g_hi = g(upper)
    for _ in range(MAX_EXPANSIONS):
        if g_hi > 0:
            break
        lower, g_lo = upper, g_hi
        upper *= 2.0
        g_hi = g(upper)
    else:
        raise BracketError("no upper eigenvalue bracket")
    count = [0]

    def counted(x):
        count[0] += 1
        val = g(x)
        return val

    root, info = brentq(counted, lower, upper, xtol=1e-13, rtol=1e-14, maxiter=200,
                        full_output=True)
    return root, count[0] + 2


def shoot_lambda(spec, t1, t2, sign, lam, slope=1.0, cfg=None):
    """Integrate F = -lam*u from u(t1) = 0, u'(t1) = sign*slope.

    Returns the first zero past t1 (None if u keeps its sign up to t2) and
    the trajectory.
    """
    _check_sign(sign)
    if not t1 < t2:
        raise ValueError("interval must satisfy t1 < t2")
    tr = integrate(spec, ZERO, -lam, t1, t2, 0.0, sign * slope, cfg)
    return first_zero(tr, t1), tr


def _finish(spec, traj, lam, sign, interval, method, iterations, extra=None):
    raw_end = float(traj.u[-1])
    traj.u[-1] = 0.0
    ef = traj.normalized()
    res = residual(spec, ef, 0.0, -lam)
    meta = {"end_value": raw_end}
    if extra:
        meta.update(extra)
    return SemiEigenResult(float(lam), sign, tuple(interval), ef, method, iterations, res, meta)


def semi_eigenvalue(spec, t1, t2, sign, cfg=None, slope=1.0):
    """lam^sign(t1, t2) by shooting on lam with the turning-angle bracket."""
    _check_sign(sign)
    if not t1 < t2:
        raise ValueError("interval must satisfy t1 < t2")
    if spec.concave:
        return semi_eigenvalue(flip(spec), t1, t2, -sign, cfg, slope).negated()
    cfg = cfg or DEFAULT_CONFIG
    length = t2 - t1
    g = angle_function(spec, t1, t2, lambda lam: (t1, 0.0, sign * slope), sign, cfg)
    lower = -choose_kappa(spec)
    upper = math.pi ** 2 * spec.lambda_max / length ** 2
    lam, evals = lambda_search(g, lower, upper)
    z, tr = shoot_lambda(spec, t1, t2, sign, lam, slope, cfg)
    gap = abs((z if z is not None else t2) - t2)
    return _finish(spec, tr, lam, sign, (t1, t2), "shoot", evals, {"zero_gap": gap})


def power_iterate(solve, sign, kappa, tol=1e-10, max_iter=500):
    """Krein-Rutman iteration v <- L(v)/|L(v)| for the positively homogeneous solver ``solve``.

    ``solve(f)`` returns the solution of F(w) - kappa*w = f.  Returns
    (mu, eigenfunction, iterations).
    """
    v = solve(Source.constant(-float(sign))).normalized()
    mu_prev = None
    for it in range(1, max_iter + 1):
        w = solve(Source.from_trajectory(v, -1.0))
        nw = w.sup_abs()
        if nw == 0:
            raise SolverError("solution operator returned zero")
        mu = 1.0 / nw
        v = w.scaled(1.0 / nw)
        if mu_prev is not None and abs(mu - mu_prev) < tol * mu:
            return mu, v, it
        mu_prev = mu
    raise SolverError(f"inverse iteration did not converge in {max_iter} steps", best=mu_prev)


def inverse_iteration(spec, t1, t2, sign, cfg=None, tol=1e-10, max_iter=500):
    """lam^sign(t1, t2) from the power iteration on the shifted Dirichlet solution map."""
    _check_sign(sign)
    if not t1 < t2:
        raise ValueError("interval must satisfy t1 < t2")
    if spec.concave:
        return inverse_iteration(flip(spec), t1, t2, -sign, cfg, tol, max_iter).negated()
    kappa = choose_kappa(spec)
    for _ in range(6):
        def solve(f):
            return solve_dirichlet(BvpProblem(spec, f, (t1, t2), kappa), cfg)
        try:
            mu, v, it = power_iterate(solve, sign, kappa, tol, max_iter)
            break
        except BracketError:
            kappa *= 2.0
    else:
        raise SolverError("Dirichlet solves failed for every shift tried")
    lam = mu - kappa
    return _finish(spec, v, lam, sign, (t1, t2), "inverse_iteration", it, {"kappa": kappa})


@dataclass
class MonotonicityTable:
    rows: list
    increasing: dict
    blowup_consistent: bool


def monotonicity_table(spec, base, shrink_steps, eps=None, cfg=None, semi=None):
    """lam^+- on (a + k eps, b - k eps), k = 0..shrink_steps-1, with the blow-up lower bound."""
    if shrink_steps < 2:
        raise ValueError("shrink_steps must be >= 2")
    semi = semi or semi_eigenvalue
    a, b = base
    if eps is None:
        eps = (b - a) / (2.0 * (shrink_steps + 1))
    kappa = choose_kappa(spec)
    rows = []
    blowup_ok = True
    for k in range(shrink_steps):
        lo, hi = a + k * eps, b - k * eps
        if not lo < hi:
            raise ValueError("shrink step exhausts the interval")
        length = hi - lo
        B = abp_constant(spec.lambda_min, spec.gamma, length, 1)
        row = {"level": k, "interval": (lo, hi), "bound": 1.0 / (B * length) - kappa}
        for s in (1, -1):
            row[s] = semi(spec, lo, hi, s, cfg).lam
            blowup_ok &= row[s] >= row["bound"]
        rows.append(row)
    inc = {s: bool(np.all(np.diff([r[s] for r in rows]) > 0)) for s in (1, -1)}
    return MonotonicityTable(rows, inc, blowup_ok)
