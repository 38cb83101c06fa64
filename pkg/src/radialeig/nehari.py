"""Higher eigenpairs by gluing one-signed pieces at interior nodes.

Piece j on (t_j, t_{j+1}) carries the sign s_j = sign * (-1)^j.  The nodes
solve V(t) = 0 with

    V_i(t) = lam^{s_{i-1}}(t_{i-1}, t_i) - lam^{s_i}(t_i, t_{i+1}),   i = 1..n,

so all pieces share one eigenvalue; scaling the pieces to match slopes at
each node gives a C^1 eigenfunction with exactly n interior zeros.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import AssemblyError, SolverError
from .ivp import DEFAULT_CONFIG, ZERO, Trajectory, integrate, residual
from .semi_eigen import SemiEigenResult, semi_eigenvalue

MIN_GAP = 1e-8
PROJ_GAP = 1e-6
NEWTON_TOL = 1e-10
ACCEPT_TOL = 1e-7


@dataclass(frozen=True)
class NodeVector:
    t: tuple
    endpoints: tuple

    def __post_init__(self):
        a, b = map(float, self.endpoints)
        t = tuple(float(x) for x in self.t)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "endpoints", (a, b))
        pts = (a,) + t + (b,)
        if min(np.diff(pts)) <= MIN_GAP * (b - a):
            raise ValueError("nodes must be strictly ordered inside the interval")

    @property
    def n(self):
        return len(self.t)

    @property
    def points(self):
        return (self.endpoints[0],) + self.t + (self.endpoints[1],)

    def pieces(self):
        pts = self.points
        return list(zip(pts[:-1], pts[1:]))


def piece_signs(n, sign):
    return [sign * (-1) ** j for j in range(n + 1)]


class SemiCache:
    """Memo of semi-eigenvalue solves keyed by endpoints rounded to 1e-12."""

    def __init__(self, spec, semi=None, cfg=None):
        self.spec = spec
        self.semi = semi or semi_eigenvalue
        self.cfg = cfg
        self._store = {}
        self._lock = threading.Lock()
        self.misses = 0

    @staticmethod
    def key(t1, t2, sign):
        return (round(t1, 12), round(t2, 12), int(sign))

    def get(self, t1, t2, sign):
        k = self.key(t1, t2, sign)
        hit = self._store.get(k)
        if hit is not None:
            return hit
        res = self.semi(self.spec, t1, t2, sign, self.cfg)
        with self._lock:
            self.misses += 1
            self._store.setdefault(k, res)
        return res

    def lam(self, t1, t2, sign):
        return self.get(t1, t2, sign).lam


def _map(fun, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fun, items))
    return [fun(x) for x in items]


def piece_values(cache, nodes, sign, workers=1):
    signs = piece_signs(nodes.n, sign)
    jobs = [(a, b, s) for (a, b), s in zip(nodes.pieces(), signs)]
    return np.array(_map(lambda j: cache.lam(*j), jobs, workers))


def v_map(spec, nodes, sign, cache=None, workers=1):
    """The node map V(t); sign is the sign of the first piece."""
    cache = cache or SemiCache(spec)
    lams = piece_values(cache, nodes, sign, workers)
    return lams[:-1] - lams[1:]


def initial_nodes(cache, n, sign, interval):
    """Piece lengths proportional to sqrt(lam^s) on the whole interval (exact for Pucci)."""
    a, b = interval
    full = {s: cache.lam(a, b, s) for s in (1, -1)}
    if min(full.values()) > 0:
        w = np.array([math.sqrt(full[s]) for s in piece_signs(n, sign)])
    else:
        w = np.ones(n + 1)
    cuts = a + (b - a) * np.cumsum(w)[:-1] / w.sum()
    return cuts


def _project(t, a, b):
    g = PROJ_GAP * (b - a)
    n = len(t)
    t = np.sort(np.asarray(t, dtype=float))
    for i in range(n):
        t[i] = min(max(t[i], a + g * (i + 1)), b - g * (n - i))
    for i in range(1, n):
        t[i] = max(t[i], t[i - 1] + g)
    for i in range(n - 2, -1, -1):
        t[i] = min(t[i], t[i + 1] - g)
    return t


@dataclass
class NodeSolve:
    nodes: NodeVector
    residual: float
    scale: float
    iterations: int
    method: str


def solve_nodes(spec, n, sign, interval, cache=None, workers=1, max_newton=60, max_sweeps=200,
                start=None):
    """Zero of the node map on the simplex by damped Newton, with a cyclic 1-D fallback."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a, b = map(float, interval)
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    cache = cache or SemiCache(spec)
    ends = (a, b)

    def V(t):
        lams = piece_values(cache, NodeVector(tuple(t), ends), sign, workers)
        return lams[:-1] - lams[1:], float(np.max(np.abs(lams)))

    t = _project(initial_nodes(cache, n, sign, ends) if start is None else start, a, b)
    v, scale = V(t)
    norm = float(np.max(np.abs(v)))
    best = (norm, t.copy(), scale)
    h = 1e-6 * (b - a)
    it = 0
    method = "newton"
    for it in range(1, max_newton + 1):
        if norm <= NEWTON_TOL * (1 + scale):
            break
        J = np.empty((n, n))
        for k in range(n):
            tk = t.copy()
            tk[k] += h if tk[k] + h < (t[k + 1] if k + 1 < n else b) else -h
            dv, _ = V(tk)
            J[:, k] = (dv - v) / (tk[k] - t[k])
        try:
            step = np.linalg.solve(J, -v)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -v, rcond=None)[0]
        alpha = 1.0
        improved = False
        for _ in range(21):
            trial = _project(t + alpha * step, a, b)
            tv, ts = V(trial)
            tn = float(np.max(np.abs(tv)))
            if tn < norm:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
        t, v, norm, scale = trial, tv, tn, ts
        if norm < best[0]:
            best = (norm, t.copy(), scale)
    if norm > NEWTON_TOL * (1 + scale):
        method = "newton+cyclic"
        t, v, norm, scale, sweeps = _cyclic(V, t, a, b, sign, max_sweeps)
        it += sweeps
        if norm < best[0]:
            best = (norm, t.copy(), scale)
    norm, t, scale = best
    if norm > ACCEPT_TOL * (1 + scale):
        raise SolverError(f"node map not solved: |V| = {norm:.3g}", best=NodeVector(tuple(t), ends))
    return NodeSolve(NodeVector(tuple(t), ends), norm, scale, it, method)


def _cyclic(V, t, a, b, sign, max_sweeps):
    """Gauss-Seidel sweeps: each V_i is decreasing in t_i, from +inf to -inf across its gap."""
    n = len(t)
    g = PROJ_GAP * (b - a)
    t = t.copy()
    v, scale = V(t)
    norm = float(np.max(np.abs(v)))
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            lo = (t[i - 1] if i > 0 else a) + g
            hi = (t[i + 1] if i + 1 < n else b) - g

            def vi(x, i=i):
                tt = t.copy()
                tt[i] = x
                return V(tt)[0][i]

            flo, fhi = vi(lo), vi(hi)
            if flo > 0 > fhi:
                t[i] = brentq(vi, lo, hi, xtol=1e-14 * (b - a), rtol=1e-15)
            else:
                t[i] = lo if abs(flo) < abs(fhi) else hi
        v, scale = V(t)
        norm = float(np.max(np.abs(v)))
        if norm <= NEWTON_TOL * (1 + scale):
            return t, v, norm, scale, sweep
    return t, v, norm, scale, max_sweeps


@dataclass
class EigenPair:
    n: int
    sign: int
    lam: float
    nodes: NodeVector | None
    pieces: list
    alphas: list
    eigenfunction: Trajectory
    jumps: list = field(default_factory=list)
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def zero_count(self):
        """Interior sign changes of the assembled eigenfunction on a dense grid."""
        a, b = self.eigenfunction.span
        grid = np.linspace(a, b, 20001)[1:-1]
        vals = self.eigenfunction(np.union1d(grid, self.eigenfunction.t[1:-1]))
        return int(K.interior_crossings(np.asarray(vals)))

    def as_dict(self):
        return {
            "n": self.n,
            "sign": self.sign,
            "lambda": self.lam,
            "nodes": list(self.nodes.t) if self.nodes else [],
            "alphas": list(self.alphas),
            "residual": self.residual,
            "max_jump": max(self.jumps, default=0.0),
        }


def _glue(pieces, scales):
    ts, us, ps, ms = [], [], [], []
    for j, (tr, c) in enumerate(zip(pieces, scales)):
        sl = slice(0, None) if j == 0 else slice(1, None)
        ts.append(tr.t[sl])
        us.append(c * tr.u[sl])
        ps.append(c * tr.p[sl])
        ms.append(c * tr.m[sl])
    return Trajectory(np.concatenate(ts), np.concatenate(us), np.concatenate(ps),
                      np.concatenate(ms))


def assemble(spec, nodes, sign, cache=None, reshoot=None, cfg=None):
    """Glue the piecewise semi-eigenfunctions into one eigenfunction with matched slopes.

    ``reshoot(lam, start_trajectory)`` integrates the undivided equation
    across the whole interval as an independent check of the gluing; by
    default from u(a) = 0 with the first piece's slope.
    """
    cache = cache or SemiCache(spec)
    signs = piece_signs(nodes.n, sign)
    results = [cache.get(lo, hi, s) for (lo, hi), s in zip(nodes.pieces(), signs)]
    trs = [r.eigenfunction for r in results]
    lams = np.array([r.lam for r in results])
    scales = [1.0]
    alphas = []
    for i in range(1, len(trs)):
        left = scales[-1] * trs[i - 1].p[-1]
        right = trs[i].p[0]
        if abs(left) < 1e-10 or abs(right) < 1e-10:
            raise AssemblyError(f"vanishing slope at node {i}: node vector not converged")
        alpha = left / right
        if alpha <= 0:
            raise AssemblyError(f"slopes of opposite sign at node {i}")
        alphas.append(alpha)
        scales.append(alpha)
    glued = _glue(trs, scales)
    jumps, second_jumps = [], []
    for i in range(1, len(trs)):
        jumps.append(abs(scales[i - 1] * trs[i - 1].p[-1] - scales[i] * trs[i].p[0]))
        second_jumps.append(abs(scales[i - 1] * trs[i - 1].m[-1] - scales[i] * trs[i].m[0]))
    sup = glued.sup_abs()
    ef = glued.scaled(1.0 / sup)
    sup_p = float(np.max(np.abs(ef.p)))
    lam = float(lams[0])
    rel_jumps = [j / sup / sup_p for j in jumps]
    res = residual(spec, ef, 0.0, -lam)
    a, b = nodes.endpoints
    if reshoot is None:
        def reshoot(lam_, first):
            return integrate(spec, ZERO, -lam_, a, b, 0.0, first.p[0], cfg)
    try:
        full = reshoot(lam, ef)
        grid = np.linspace(a, b, 401)
        reshoot_err = float(np.max(np.abs(full(grid) - ef(grid))))
    except Exception as exc:  # diagnostic only
        reshoot_err = float("nan")
    meta = {
        "lambda_spread": float(np.ptp(lams) / max(abs(lam), 1e-300)),
        "second_derivative_jumps": [j / sup for j in second_jumps],
        "reshoot_error": reshoot_err,
    }
    return EigenPair(nodes.n, sign, lam, nodes, results, alphas, ef, rel_jumps, res, meta)


def principal_pair(result):
    """Wrap a semi-eigenvalue result as the n = 0 eigenpair."""
    ef = result.eigenfunction
    return EigenPair(0, result.sign, result.lam, None, [result], [], ef, [], result.residual,
                     {"lambda_spread": 0.0})


class Spectrum(list):
    """List of EigenPairs with the monotonicity verdict per sign."""

    def family(self, sign):
        return sorted((p for p in self if p.sign == sign), key=lambda p: p.n)

    @property
    def increasing(self):
        out = {}
        for s in (1, -1):
            lams = [p.lam for p in self.family(s)]
            out[s] = bool(np.all(np.diff(lams) > 0))
        return out

    def value(self, n, sign):
        for p in self:
            if p.n == n and p.sign == sign:
                return p.lam
        raise KeyError((n, sign))


def spectrum(spec, n_max, interval, cache=None, workers=1, signs=(1, -1), reshoot=None):
    """Eigenpairs for n = 0..n_max and both signs."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cache = cache or SemiCache(spec)
    a, b = map(float, interval)

    def job(item):
        n, s = item
        if n == 0:
            return principal_pair(cache.get(a, b, s))
        ns = solve_nodes(spec, n, s, (a, b), cache=cache)
        pair = assemble(spec, ns.nodes, s, cache=cache, reshoot=reshoot)
        pair.meta.update(node_residual=ns.residual, node_method=ns.method,
                         node_iterations=ns.iterations)
        return pair

    items = [(n, s) for n in range(n_max + 1) for s in signs]
    return Spectrum(_map(job, items, workers))


@dataclass
class CompletenessReport:
    lams: np.ndarray
    counts: dict
    transitions: dict
    unmatched_transitions: list
    missing: list

    @property
    def passed(self):
        return not self.unmatched_transitions and not self.missing


def zero_counts(spec, interval, sign, lams, cfg=None):
    """Interior zero count of the shot solution u(a) = 0, u'(a) = sign at each lam."""
    cfg = cfg or DEFAULT_CONFIG
    a, b = interval
    packed, zero = spec.packed, ZERO.packed
    out = np.empty(len(lams), dtype=int)
    for i, lam in enumerate(lams):
        T, U, P, M, k, status = K.integrate(packed, zero, -float(lam), a, b, 0.0, float(sign),
                                            cfg.rel_tol, cfg.abs_tol, cfg.max_step, 0)
        if status != K.OK:
            raise SolverError(f"scan integration failed at lambda={lam:.6g}")
        out[i] = int(K.interior_crossings(U[:-1])) if U[-1] == 0.0 else k
    return out


def completeness_probe(spec, interval, pairs, lam_max, points=10_000, cfg=None):
    """Scan lam on a grid and match every jump of the zero count with a computed eigenvalue.

    A zero of the shot solution enters through b exactly when lam crosses an
    eigenvalue, so the count jumps from n to n+1 across lam_n^s.  Any jump
    without a computed eigenvalue in its grid cell, or any computed
    eigenvalue below lam_max without a jump, is reported.
    """
    a, b = interval
    lo = min(0.0, min(p.lam for p in pairs) * 0.5)
    lams = np.linspace(lo, lam_max, points)
    counts, transitions, unmatched, missing = {}, {}, [], []
    for s in (1, -1):
        c = zero_counts(spec, (a, b), s, lams, cfg)
        counts[s] = c
        known = {p.n: p.lam for p in pairs if p.sign == s}
        cells = []
        for j in np.nonzero(np.diff(c))[0]:
            before, after = int(c[j]), int(c[j + 1])
            cell = (float(lams[j]), float(lams[j + 1]))
            cells.append((cell, before, after))
            ok = after == before + 1 and before in known and cell[0] <= known[before] <= cell[1]
            if not ok:
                unmatched.append((s, cell, before, after))
        transitions[s] = cells
        for n, lam in known.items():
            if lam < lam_max and not any(cell[0] <= lam <= cell[1] and bf == n
                                         for cell, bf, _ in cells):
                missing.append((s, n, lam))
    return CompletenessReport(lams, counts, transitions, unmatched, missing)
