"""Compiled inner loops: operator evaluation/inversion and the RK5(4) integrator.

An operator is passed around as the tuple ``(kind, lam, Lam, N, table, lo, hi)``
where ``table`` has shape ``(K, 4, S)``: K linear branches, rows a, b, c, d
sampled uniformly on ``[lo, hi]``.  A source term is ``(ts, ys, dys, ddys, mode)``
with mode 0 = piecewise linear, 1 = quintic Hermite.
"""
import numpy as np
from numba import njit

LINEAR = 0
PUCCI_PLUS = 1
PUCCI_MINUS = 2
BELLMAN_MAX = 3
BELLMAN_MIN = 4

OK = 0
STEP_UNDERFLOW = 1
OVERFLOW = 2
MAX_STEPS = 3
CROSSINGS = 4

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def coef(table, k, j, r, lo, hi):
    S = table.shape[2]
    if S == 1:
        return table[k, j, 0]
    x = (r - lo) / (hi - lo) * (S - 1)
    if x <= 0.0:
        return table[k, j, 0]
    if x >= S - 1:
        return table[k, j, S - 1]
    i = int(np.floor(x))
    w = x - i
    return (1.0 - w) * table[k, j, i] + w * table[k, j, i + 1]


@njit(**_opts)
def _pos(x):
    return x if x > 0.0 else 0.0


@njit(**_opts)
def _neg(x):
    return -x if x < 0.0 else 0.0


@njit(**_opts)
def eval_op(op, m, ell, p, u, r):
    kind, lam, Lam, N, table, lo, hi = op
    nm1 = N - 1.0
    if kind == PUCCI_PLUS or kind == PUCCI_MINUS:
        c = coef(table, 0, 2, r, lo, hi)
        d = coef(table, 0, 3, r, lo, hi)
        up = _pos(m) + nm1 * _pos(ell)
        dn = _neg(m) + nm1 * _neg(ell)
        if kind == PUCCI_PLUS:
            return Lam * up - lam * dn + c * p + d * u
        return lam * up - Lam * dn + c * p + d * u
    best = 0.0
    for k in range(table.shape[0]):
        a = coef(table, k, 0, r, lo, hi)
        b = coef(table, k, 1, r, lo, hi)
        c = coef(table, k, 2, r, lo, hi)
        d = coef(table, k, 3, r, lo, hi)
        val = a * m + b * nm1 * ell + c * p + d * u
        if k == 0:
            best = val
        elif kind == BELLMAN_MIN:
            best = min(best, val)
        else:
            best = max(best, val)
    return best


@njit(**_opts)
def invert_m(op, ell, p, u, q, r):
    """Unique m with eval_op(op, m, ell, p, u, r) == q (closed form per kind)."""
    kind, lam, Lam, N, table, lo, hi = op
    nm1 = N - 1.0
    if kind == PUCCI_PLUS or kind == PUCCI_MINUS:
        c = coef(table, 0, 2, r, lo, hi)
        d = coef(table, 0, 3, r, lo, hi)
        if kind == PUCCI_PLUS:
            s = q - (nm1 * (Lam * _pos(ell) - lam * _neg(ell)) + c * p + d * u)
            return s / Lam if s > 0.0 else s / lam
        s = q - (nm1 * (lam * _pos(ell) - Lam * _neg(ell)) + c * p + d * u)
        return s / lam if s > 0.0 else s / Lam
    best = 0.0
    for k in range(table.shape[0]):
        a = coef(table, k, 0, r, lo, hi)
        b = coef(table, k, 1, r, lo, hi)
        c = coef(table, k, 2, r, lo, hi)
        d = coef(table, k, 3, r, lo, hi)
        val = (q - b * nm1 * ell - c * p - d * u) / a
        if k == 0:
            best = val
        elif kind == BELLMAN_MIN:
            # min of increasing lines: the largest individual root
            best = max(best, val)
        else:
            best = min(best, val)
    return best


@njit(**_opts)
def invert_origin(op, p, u, q):
    """Unique ell with eval_op(op, ell, ell, p, u, 0) == q."""
    kind, lam, Lam, N, table, lo, hi = op
    nm1 = N - 1.0
    r = 0.0
    if kind == PUCCI_PLUS or kind == PUCCI_MINUS:
        c = coef(table, 0, 2, r, lo, hi)
        d = coef(table, 0, 3, r, lo, hi)
        s = q - c * p - d * u
        if kind == PUCCI_PLUS:
            return s / (N * Lam) if s > 0.0 else s / (N * lam)
        return s / (N * lam) if s > 0.0 else s / (N * Lam)
    best = 0.0
    for k in range(table.shape[0]):
        a = coef(table, k, 0, r, lo, hi)
        b = coef(table, k, 1, r, lo, hi)
        c = coef(table, k, 2, r, lo, hi)
        d = coef(table, k, 3, r, lo, hi)
        val = (q - c * p - d * u) / (a + nm1 * b)
        if k == 0:
            best = val
        elif kind == BELLMAN_MIN:
            best = max(best, val)
        else:
            best = min(best, val)
    return best


@njit(**_opts)
def hermite_coeffs(y0, y1, d0, d1, e0, e1):
    # d = h*y', e = h^2*y''; polynomial in s on [0, 1]
    dy = y1 - y0
    c3 = 10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * e0 + 0.5 * e1
    c4 = -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * e0 - e1
    c5 = 6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * e0 + 0.5 * e1
    return y0, d0, 0.5 * e0, c3, c4, c5


@njit(**_opts)
def hermite_eval(ts, ys, dys, ddys, i, t):
    """Value, first and second derivative of the quintic Hermite piece i at t."""
    h = ts[i + 1] - ts[i]
    s = (t - ts[i]) / h
    c0, c1, c2, c3, c4, c5 = hermite_coeffs(ys[i], ys[i + 1], h * dys[i], h * dys[i + 1],
                                            h * h * ddys[i], h * h * ddys[i + 1])
    v = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))))
    dv = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)))
    ddv = 2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5))
    return v, dv / h, ddv / (h * h)


@njit(**_opts)
def src_eval(src, t):
    ts, ys, dys, ddys, mode = src
    n = ts.shape[0]
    if n == 1 or t <= ts[0]:
        return ys[0]
    if t >= ts[n - 1]:
        return ys[n - 1]
    i = np.searchsorted(ts, t, side="right") - 1
    if i >= n - 1:
        i = n - 2
    if mode == 0:
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1.0 - w) * ys[i] + w * ys[i + 1]
    v, _, _ = hermite_eval(ts, ys, dys, ddys, i, t)
    return v


@njit(**_opts)
def second_derivative(op, src, kappa, t, u, p):
    """u'' from the equation F(u'', u'/t, u', u, t) = src(t) + kappa*u."""
    q = src_eval(src, t) + kappa * u
    if op[3] >= 2.0:
        if t > 0.0:
            return invert_m(op, p / t, p, u, q, t)
        return invert_origin(op, p, u, q)
    return invert_m(op, 0.0, p, u, q, t)


@njit(**_opts)
def regime(op, src, t, u, p, m):
    """Integer label of the smooth piece of the right-hand side containing the state.

    Combines the coefficient-table cell, the cell of a piecewise-linear source
    and the active branch of the operator (signs of m and ell for Pucci, the
    extremal branch for Bellman).  Inside one regime G is smooth.
    """
    kind, lam, Lam, N, table, lo, hi = op
    S = table.shape[2]
    cell = 0
    if S > 1:
        x = (t - lo) / (hi - lo) * (S - 1)
        if x < 0.0:
            cell = -1
        elif x >= S - 1:
            cell = S - 1
        else:
            cell = int(np.floor(x))
    ts, ys, dys, ddys, mode = src
    scell = 0
    if mode == 0 and ts.shape[0] > 1:
        scell = np.searchsorted(ts, t, side="right")
    ell = m
    if N >= 2.0 and t > 0.0:
        ell = p / t
    pol = 0
    if kind == PUCCI_PLUS or kind == PUCCI_MINUS:
        pol = (1 if m > 0.0 else 0) + (2 if ell > 0.0 else 0)
    elif kind != LINEAR:
        best = 0.0
        nm1 = N - 1.0
        for k in range(table.shape[0]):
            val = (coef(table, k, 0, t, lo, hi) * m + coef(table, k, 1, t, lo, hi) * nm1 * ell
                   + coef(table, k, 2, t, lo, hi) * p + coef(table, k, 3, t, lo, hi) * u)
            if k == 0 or (kind == BELLMAN_MAX and val > best) or (kind == BELLMAN_MIN and val < best):
                best = val
                pol = k
    return ((cell + 1) * (ts.shape[0] + 2) + scell) * 64 + pol


# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
                           -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
                          22.0 / 525.0, -1.0 / 40.0)
C2, C3, C4, C5 = 0.2, 0.3, 0.8, 8.0 / 9.0


@njit(**_opts)
def _sgn(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(**_opts)
def integrate(op, src, kappa, t0, t1, u0, p0, rtol, atol, max_step, max_crossings):
    """Adaptive Dormand-Prince integration of (u, p)' = (p, G(...)) from t0 to t1.

    Returns node arrays (t, u, p, m), the number of sign changes of u,
    and a status code.  ``max_crossings > 0`` stops early once that many
    sign changes have been seen.
    """
    cap = 1024
    T = np.empty(cap)
    U = np.empty(cap)
    P = np.empty(cap)
    M = np.empty(cap)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    hmax = max_step * span

    t = t0
    u = u0
    p = p0
    m = second_derivative(op, src, kappa, t, u, p)
    T[0] = t
    U[0] = u
    P[0] = p
    M[0] = m
    n = 1
    crossings = 0
    last_sign = _sgn(u0)
    if last_sign == 0.0:
        last_sign = _sgn(p0) * direction
    status = OK
    if span == 0.0:
        return T[:1], U[:1], P[:1], M[:1], 0, status

    # starting step (Hairer-Wanner heuristic)
    sc0 = atol + rtol * abs(u)
    sc1 = atol + rtol * abs(p)
    d0 = np.sqrt(0.5 * ((u / sc0) ** 2 + (p / sc1) ** 2))
    d1 = np.sqrt(0.5 * ((p / sc0) ** 2 + (m / sc1) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * span
    else:
        h = 0.01 * d0 / d1
    h = min(h, hmax)
    ue = u + direction * h * p
    pe = p + direction * h * m
    me = second_derivative(op, src, kappa, t + direction * h, ue, pe)
    d2 = np.sqrt(0.5 * (((pe - p) / sc0) ** 2 + ((me - m) / sc1) ** 2)) / h
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6 * span, h * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    h = min(100.0 * h, h1, hmax, span)

    k1u = p
    k1p = m
    nsteps = 0
    label = regime(op, src, t, u, p, m)
    landing = False
    while True:
        remaining = abs(t1 - t)
        if remaining <= 1e-14 * max(1.0, abs(t1)):
            break
        last = False
        if h >= remaining:
            h = remaining
            last = True
        if h < 1e-14 * max(1.0, abs(t)):
            status = STEP_UNDERFLOW
            break
        nsteps += 1
        if nsteps > 2_000_000:
            status = MAX_STEPS
            break
        hs = direction * h
        k2u = p + hs * A21 * k1p
        u2 = u + hs * A21 * k1u
        k2p = second_derivative(op, src, kappa, t + C2 * hs, u2, k2u)
        u3 = u + hs * (A31 * k1u + A32 * k2u)
        k3u = p + hs * (A31 * k1p + A32 * k2p)
        k3p = second_derivative(op, src, kappa, t + C3 * hs, u3, k3u)
        u4 = u + hs * (A41 * k1u + A42 * k2u + A43 * k3u)
        k4u = p + hs * (A41 * k1p + A42 * k2p + A43 * k3p)
        k4p = second_derivative(op, src, kappa, t + C4 * hs, u4, k4u)
        u5 = u + hs * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
        k5u = p + hs * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
        k5p = second_derivative(op, src, kappa, t + C5 * hs, u5, k5u)
        u6 = u + hs * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
        k6u = p + hs * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
        k6p = second_derivative(op, src, kappa, t + hs, u6, k6u)
        un = u + hs * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
        pn = p + hs * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
        tn = t1 if last else t + hs
        k7u = pn
        k7p = second_derivative(op, src, kappa, tn, un, pn)
        eu = hs * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ep = hs * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
        su = atol + rtol * max(abs(u), abs(un))
        sp = atol + rtol * max(abs(p), abs(pn))
        err = np.sqrt(0.5 * ((eu / su) ** 2 + (ep / sp) ** 2))
        if not np.isfinite(err):
            if abs(un) > 1e200 or abs(pn) > 1e200 or not np.isfinite(un):
                status = OVERFLOW
                break
            h *= 0.2
            continue
        if err <= 1.0 and not landing:
            # a regime switch inside the step: shorten it to end just past the switch
            if regime(op, src, tn, un, pn, k7p) != label:
                a_s = 0.0
                b_s = 1.0
                for _ in range(60):
                    mid = 0.5 * (a_s + b_s)
                    c0, c1, c2, c3, c4, c5 = hermite_coeffs(u, un, hs * p, hs * pn,
                                                            hs * hs * m, hs * hs * k7p)
                    um = c0 + mid * (c1 + mid * (c2 + mid * (c3 + mid * (c4 + mid * c5))))
                    pm = (c1 + mid * (2.0 * c2 + mid * (3.0 * c3 + mid * (4.0 * c4 + mid * 5.0 * c5)))) / hs
                    tm = t + mid * hs
                    mm = second_derivative(op, src, kappa, tm, um, pm)
                    if regime(op, src, tm, um, pm, mm) == label:
                        a_s = mid
                    else:
                        b_s = mid
                    if (b_s - a_s) * h <= 1e-14 * max(1.0, abs(t)):
                        break
                hnew = b_s * h
                if hnew > max(1e-12 * span, 1e-13 * max(1.0, abs(t))) and b_s < 1.0 - 1e-12:
                    h = hnew
                    landing = True
                    continue
        if err <= 1.0:
            landing = False
            t = tn
            u = un
            p = pn
            m = k7p
            k1u = k7u
            k1p = k7p
            label = regime(op, src, t, u, p, m)
            if n == cap:
                cap *= 2
                T2 = np.empty(cap)
                U2 = np.empty(cap)
                P2 = np.empty(cap)
                M2 = np.empty(cap)
                T2[:n] = T[:n]
                U2[:n] = U[:n]
                P2[:n] = P[:n]
                M2[:n] = M[:n]
                T, U, P, M = T2, U2, P2, M2
            T[n] = t
            U[n] = u
            P[n] = p
            M[n] = m
            n += 1
            s = _sgn(u)
            if s != 0.0:
                if last_sign != 0.0 and s != last_sign:
                    crossings += 1
                last_sign = s
            if abs(u) > 1e200 or abs(p) > 1e200:
                status = OVERFLOW
                break
            if max_crossings > 0 and crossings >= max_crossings:
                status = CROSSINGS
                break
            if last:
                break
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
            h = min(h * fac, hmax)
        else:
            landing = False
            h *= max(0.2, 0.9 * err ** -0.2)
    return T[:n], U[:n], P[:n], M[:n], crossings, status


@njit(**_opts)
def interior_crossings(U):
    """Number of sign changes in a node sequence, ignoring exact zeros."""
    count = 0
    last = 0.0
    for i in range(U.shape[0]):
        s = _sgn(U[i])
        if s != 0.0:
            if last != 0.0 and s != last:
                count += 1
            last = s
    return count


@njit(**_opts)
def hermite_many(ts, ys, dys, ddys, tq):
    n = ts.shape[0]
    out = np.empty((3, tq.shape[0]))
    for j in range(tq.shape[0]):
        t = tq[j]
        i = np.searchsorted(ts, t, side="right") - 1
        if i < 0:
            i = 0
        if i > n - 2:
            i = n - 2
        v, dv, ddv = hermite_eval(ts, ys, dys, ddys, i, t)
        out[0, j] = v
        out[1, j] = dv
        out[2, j] = ddv
    return out
