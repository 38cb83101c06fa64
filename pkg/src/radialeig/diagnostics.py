"""Maximum-principle (ABP) bounds used as post-hoc checks on computed solutions.

For F(u) - kappa*u = f with F - kappa*u decreasing in u, positive parts obey

    sup u+ <= B * ||f-||,    sup u- <= B * ||f+||,

where on an interval of length L the norm is L^1 and on the ball of radius
R in dimension N it is (int_0^R |f|^N r^(N-1) dr)^(1/N).  The constant comes
from the logarithmic integration argument with the choice k*lam^N = ||f-||^N:

    B = (R/lam) * (exp(2^N N + 2^N (gamma R / lam)^N) - 1)^(1/N)

with R replaced by L on an interval (N = 1).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .ivp import as_source

REL_SLACK = 1e-9
# solver noise: a computed zero of the boundary value problem is only zero to this relative level
ABS_FLOOR = 1e-10
DENSE_SAMPLES = 20001


def abp_constant(lambda_min, gamma, length_or_R, N):
    """The constant B; +inf when the exponential overflows."""
    if not lambda_min > 0:
        raise ValueError("lambda_min must be positive")
    if not length_or_R > 0:
        raise ValueError("length_or_R must be positive")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    N = int(N)
    R = float(length_or_R)
    expo = 2.0 ** N * N + 2.0 ** N * (gamma * R / lambda_min) ** N
    try:
        grow = math.expm1(expo)
    except OverflowError:
        return math.inf
    if math.isinf(grow):
        return math.inf
    return R / lambda_min * grow ** (1.0 / N)


def chain_bound(lambda_min, gamma, R, N, fnorm, k):
    """Upper bound on sup u from the log chain at an arbitrary k > 0.

    ln(1 + l0^N / k) <= 2^N N / lam^N * (fnorm^N / k + (gamma R)^N / N), sup u = R*l0.
    """
    rhs = 2.0 ** N * N / lambda_min ** N * (fnorm ** N / k + (gamma * R) ** N / N)
    return R * (k * math.expm1(rhs)) ** (1.0 / N)


@dataclass
class AbpReport:
    sup_u_plus: float
    sup_u_minus: float
    bound_plus: float
    bound_minus: float
    B: float
    norm_kind: str
    passed: bool
    vacuous: bool = False
    quadrature_note: str = ""

    def as_dict(self):
        return asdict(self)


def _trapezoid(x, y):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _norm(f, ts, N, weight, part):
    def integrand(x):
        vals = np.asarray(f(x), dtype=float)
        vals = np.maximum(part * vals, 0.0)
        out = vals ** N
        if weight:
            out = out * x ** (N - 1)
        return out

    coarse = _trapezoid(ts, integrand(ts))
    mids = 0.5 * (ts[1:] + ts[:-1])
    fine_ts = np.sort(np.concatenate([ts, mids]))
    fine = _trapezoid(fine_ts, integrand(fine_ts))
    note = ""
    if abs(fine - coarse) > 0.01 * max(abs(fine), 1e-300):
        dense = np.linspace(ts[0], ts[-1], DENSE_SAMPLES)
        fine = _trapezoid(dense, integrand(dense))
        note = "resampled"
    return max(fine, 0.0) ** (1.0 / N), note


def abp_check(traj, f, spec, geometry="interval"):
    """Compare sup u+- of ``traj`` with B*||f-+||.

    ``traj`` must solve F(u) - kappa*u = f with kappa >= choose_kappa(spec).
    ``geometry`` is "interval" (L^1 norm over the trajectory span) or
    "ball" (radial L^N norm on [0, R] with N = spec.dim).
    """
    if geometry not in ("interval", "ball"):
        raise ValueError(f"unknown geometry {geometry!r}")
    f = as_source(f)
    a, b = traj.span
    ts = np.asarray(traj.t, dtype=float)
    if geometry == "ball":
        N = int(spec.dim)
        size = b
        kind = "L^N(B_R)"
    else:
        N = 1
        size = b - a
        kind = "L^1"
    B = abp_constant(spec.lambda_min, spec.gamma, size, N)
    n_minus, note1 = _norm(f, ts, N, geometry == "ball", -1.0)
    n_plus, note2 = _norm(f, ts, N, geometry == "ball", 1.0)
    dense = traj.eval(np.linspace(a, b, 2001))[0]
    sup_plus = max(0.0, float(np.max(traj.u)), float(np.max(dense)))
    sup_minus = max(0.0, float(-np.min(traj.u)), float(-np.min(dense)))
    vacuous = math.isinf(B)
    bp = B * n_minus if n_minus > 0 else 0.0
    bm = B * n_plus if n_plus > 0 else 0.0
    if vacuous:
        bp = bm = math.inf
    floor = ABS_FLOOR * (1.0 + max(sup_plus, sup_minus))
    ok = (sup_plus <= bp * (1 + REL_SLACK) + floor) and (sup_minus <= bm * (1 + REL_SLACK) + floor)
    note = ",".join(x for x in (note1, note2) if x)
    return AbpReport(sup_plus, sup_minus, bp, bm, B, kind, bool(ok), vacuous, note)


@dataclass
class BlowupCheck:
    lam: float
    kappa: float
    length: float
    B: float
    lower: float
    passed: bool


def blowup_check(lam, kappa, spec, length):
    """lam + kappa >= 1/(B*length): a one-signed eigenfunction cannot beat the ABP bound."""
    B = abp_constant(spec.lambda_min, spec.gamma, length, 1)
    lower = 0.0 if math.isinf(B) else 1.0 / (B * length)
    return BlowupCheck(lam, kappa, length, B, lower, bool(lam + kappa >= lower))
