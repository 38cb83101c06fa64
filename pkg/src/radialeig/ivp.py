"""Initial value problems u'' = G(u', u, q(t) + kappa*u, t) with dense output."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import IntegrationError


@dataclass(frozen=True)
class IvpConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1  # fraction of the interval length
    event_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "event_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_CONFIG = IvpConfig()


class Source:
    """A sampled continuous function of t, extended by constants outside its range.

    mode 0 interpolates linearly between samples, mode 1 is quintic Hermite
    (used when the samples come from a :class:`Trajectory`).
    """

    def __init__(self, ts, ys, dys=None, ddys=None, mode=0):
        ts = np.ascontiguousarray(ts, dtype=float)
        ys = np.ascontiguousarray(ys, dtype=float)
        if ts.shape != ys.shape or ts.ndim != 1 or len(ts) == 0:
            raise ValueError("samples must be matching 1-d arrays")
        if len(ts) > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if not np.all(np.isfinite(ys)):
            raise ValueError("non-finite samples")
        self.ts = ts
        self.ys = ys
        self.dys = np.zeros_like(ys) if dys is None else np.ascontiguousarray(dys, dtype=float)
        self.ddys = np.zeros_like(ys) if ddys is None else np.ascontiguousarray(ddys, dtype=float)
        self.mode = int(mode)

    @classmethod
    def constant(cls, value):
        return cls([0.0], [float(value)])

    @classmethod
    def samples(cls, values, domain):
        """Uniform samples on ``domain`` with linear interpolation."""
        values = np.atleast_1d(np.asarray(values, dtype=float))
        if len(values) == 1:
            return cls.constant(values[0])
        return cls(np.linspace(domain[0], domain[1], len(values)), values)

    @classmethod
    def from_function(cls, fun, domain, n=2001):
        ts = np.linspace(domain[0], domain[1], n)
        return cls(ts, [fun(t) for t in ts])

    @classmethod
    def from_trajectory(cls, traj, scale=1.0):
        return cls(traj.t, scale * traj.u, scale * traj.p, scale * traj.m, mode=1)

    @property
    def packed(self):
        return (self.ts, self.ys, self.dys, self.ddys, self.mode)

    def is_zero(self):
        return not np.any(self.ys) and not np.any(self.dys) and not np.any(self.ddys)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.array([K.src_eval(self.packed, float(x)) for x in t.ravel()])
        return flat.reshape(t.shape) if t.ndim else float(flat[0])


ZERO = Source.constant(0.0)


def as_source(f):
    if f is None:
        return ZERO
    if isinstance(f, Source):
        return f
    if np.ndim(f) == 0:
        return Source.constant(float(f))
    raise TypeError("right-hand side must be a number or a Source")


@dataclass
class Trajectory:
    """Node samples of (u, u', u'') with quintic Hermite dense output."""

    t: np.ndarray
    u: np.ndarray
    p: np.ndarray
    m: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def span(self):
        return float(self.t[0]), float(self.t[-1])

    def eval(self, tq):
        """(u, u', u'') at the query points."""
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        if len(self.t) == 1:
            n = len(tq)
            return np.full(n, self.u[0]), np.full(n, self.p[0]), np.full(n, self.m[0])
        out = K.hermite_many(self.t, self.u, self.p, self.m, tq)
        return out[0], out[1], out[2]

    def __call__(self, tq):
        scalar = np.ndim(tq) == 0
        v = self.eval(tq)[0]
        return float(v[0]) if scalar else v

    def scaled(self, c):
        return Trajectory(self.t, c * self.u, c * self.p, c * self.m, dict(self.meta))

    def argmax_abs(self):
        """Location and value of the maximum of |u|, refined on the interpolant."""
        i = int(np.argmax(np.abs(self.u)))
        best_t, best = float(self.t[i]), abs(float(self.u[i]))
        for j in (i - 1, i):
            if j < 0 or j + 1 >= len(self.t):
                continue
            a, b = float(self.t[j]), float(self.t[j + 1])
            pa, pb = float(self.p[j]), float(self.p[j + 1])
            if pa == 0.0 or pb == 0.0 or pa * pb > 0:
                continue
            for _ in range(80):
                mid = 0.5 * (a + b)
                pm = self.eval(mid)[1][0]
                if (pm > 0) == (pa > 0):
                    a, pa = mid, pm
                else:
                    b = mid
                if b - a <= 1e-15 * max(1.0, abs(mid)):
                    break
            tm = 0.5 * (a + b)
            v = abs(self(tm))
            if v > best:
                best_t, best = tm, v
        return best_t, best

    def sup_abs(self):
        return self.argmax_abs()[1]

    def normalized(self):
        """Copy rescaled to sup |u| = 1 (sign preserved)."""
        s = self.sup_abs()
        if s == 0:
            return self
        return self.scaled(1.0 / s)

    def sign_changes(self):
        return int(K.interior_crossings(self.u))

    def to_csv(self, path, var="t"):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([var, "u", "u_prime", "u_second"])
            for row in zip(self.t, self.u, self.p, self.m):
                w.writerow([f"{x:.12g}" for x in row])


def integrate(spec, q, kappa, t0, t1, u0, p0, cfg=None):
    """Solve F(u'', u'/t, u', u, t) = q(t) + kappa*u from (u0, p0) at t0 to t1.

    ``t1 < t0`` integrates backwards; nodes are always returned in increasing order.
    """
    cfg = cfg or DEFAULT_CONFIG
    q = as_source(q)
    if t0 == t1:
        raise ValueError("empty integration interval")
    T, U, P, M, _, status = K.integrate(spec.packed, q.packed, float(kappa), float(t0),
                                        float(t1), float(u0), float(p0), cfg.rel_tol,
                                        cfg.abs_tol, cfg.max_step, 0)
    if status != K.OK:
        raise IntegrationError(f"integration stopped (status {status}) at t={T[-1]:.6g}",
                               float(T[-1]))
    if t1 < t0:
        T, U, P, M = T[::-1], U[::-1], P[::-1], M[::-1]
    return Trajectory(T.copy(), U.copy(), P.copy(), M.copy(), {"steps": len(T) - 1})


def first_zero(traj, start, event_tol=None):
    """Smallest t > start where u changes sign, refined on the dense output."""
    tol = event_tol or DEFAULT_CONFIG.event_tol
    t = traj.t
    if not t[0] <= start <= t[-1]:
        raise ValueError("start outside trajectory span")
    ua = traj(start)
    a = start
    j = int(np.searchsorted(t, start, side="right"))
    for i in range(j, len(t)):
        b, ub = float(t[i]), float(traj.u[i])
        if ua == 0.0:
            a, ua = b, ub
            continue
        if ub == 0.0:
            # exact zero at a node: accept only with a sign change after it
            nxt = traj.u[i + 1] if i + 1 < len(t) else None
            if nxt is None or nxt * ua < 0:
                return b
            a, ua = b, ub
            continue
        if ua * ub < 0:
            return _refine_zero(traj, a, b, ua, tol)
        a, ua = b, ub
    return None


def _refine_zero(traj, a, b, ua, tol):
    while b - a > tol:
        mid = 0.5 * (a + b)
        um = traj(mid)
        if um == 0.0:
            return mid
        if (um > 0) == (ua > 0):
            a, ua = mid, um
        else:
            b = mid
    # secant polish
    ub = traj(b)
    if ub != ua:
        x = b - ub * (b - a) / (ub - ua)
        if a <= x <= b:
            return float(x)
    return 0.5 * (a + b)


def residual(spec, traj, q, kappa, points=64, seed=0, radial=None):
    """max |F(u'', u'/t, u', u, t) - kappa*u - q| at random interior points.

    u'' is the second derivative of the dense-output interpolant.
    """
    from .operators import EvalPoint, evaluate

    q = as_source(q)
    rng = np.random.default_rng(seed)
    a, b = traj.span
    ts = np.sort(rng.uniform(a, b, points))
    u, p, m = traj.eval(ts)
    radial = spec.dim >= 2 if radial is None else radial
    worst = 0.0
    for t, uu, pp, mm in zip(ts, u, p, m):
        ell = pp / t if radial and t > 0 else mm
        val = evaluate(spec, EvalPoint(mm, ell, pp, uu, t))
        worst = max(worst, abs(val - kappa * uu - q(float(t))))
    return worst
