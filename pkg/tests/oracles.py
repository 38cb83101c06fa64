"""Independent finite-difference oracles.

Operators of the catalog are max/min of linear operators (Pucci included:
the weight on m and on (N-1) ell is chosen in {lam, Lam} by sign), so the
discrete nonlinear problems are solved by Howard policy iteration: freeze
the maximizing (or minimizing) branch at every node, solve the linear
problem with sparse LU, repeat until the policy stops changing.
"""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu


def _branches(spec, r):
    """Linear branches (a, b, c, d) at radius r, and whether F is the max over them."""
    lam, Lam = spec.lambda_min, spec.lambda_max
    kind = spec.kind
    if kind in ("pucci_plus", "pucci_minus"):
        c, d = spec.coefficient("c", r), spec.coefficient("d", r)
        out = [(a, b, c, d) for a in (lam, Lam) for b in (lam, Lam)]
        return out, kind == "pucci_plus"
    k = len(spec.coeffs)
    out = [tuple(spec.coefficient(x, r, j) for x in "abcd") for j in range(k)]
    return out, kind != "bellman_min"


class Grid:
    """Nodes x_0..x_M on [a, b]; Dirichlet at b, Dirichlet or radial symmetry at a."""

    def __init__(self, spec, a, b, M, radial=False):
        self.spec = spec
        self.x = np.linspace(a, b, M + 1)
        self.h = (b - a) / M
        self.radial = radial
        n1 = spec.dim - 1 if radial else 0
        self.n1 = n1
        # unknowns: interior nodes 1..M-1, plus node 0 when radial
        self.idx = np.arange(0 if radial else 1, M)
        self.branches = [_branches(spec, xi) for xi in self.x[self.idx]]

    def stencils(self, u_full):
        """Per-unknown candidate rows: list of (coef_left, coef_mid, coef_right) per branch."""
        h = self.h
        rows = []
        for k, i in enumerate(self.idx):
            brs, is_max = self.branches[k]
            xi = self.x[i]
            cand = []
            for a, b, c, d in brs:
                if self.radial and i == 0:
                    # u''(0) = ell(0) = 2 (u1 - u0)/h^2
                    w = (a + self.n1 * b) * 2.0 / h ** 2
                    cand.append((0.0, -w + d, w))
                    continue
                lo = a / h ** 2 - c / (2 * h)
                hi = a / h ** 2 + c / (2 * h)
                mid = -2 * a / h ** 2 + d
                if self.n1 and xi > 0:
                    g = self.n1 * b / (xi * 2 * h)
                    lo -= g
                    hi += g
                cand.append((lo, mid, hi))
            rows.append((cand, is_max))
        return rows

    def matrix(self, policy, rows):
        n = len(self.idx)
        lo = np.zeros(n)
        mid = np.zeros(n)
        hi = np.zeros(n)
        for k, (cand, _) in enumerate(rows):
            lo[k], mid[k], hi[k] = cand[policy[k]]
        # unknown k corresponds to node idx[k]; neighbours outside the unknowns are zero
        A = sp.diags([lo[1:], mid, hi[:-1]], [-1, 0, 1], format="csc")
        return A

    def apply(self, rows, v):
        """Values of every branch at every unknown for the vector of unknowns v."""
        n = len(v)
        left = np.concatenate([[0.0], v[:-1]])
        right = np.concatenate([v[1:], [0.0]])
        vals = []
        for k, (cand, _) in enumerate(rows):
            vals.append([c0 * left[k] + c1 * v[k] + c2 * right[k] for c0, c1, c2 in cand])
        return vals

    def scales(self, rows, v):
        left = np.concatenate([[0.0], v[:-1]])
        right = np.concatenate([v[1:], [0.0]])
        return [max(abs(c0 * left[k]) + abs(c1 * v[k]) + abs(c2 * right[k]) for c0, c1, c2 in cand)
                for k, (cand, _) in enumerate(rows)]

    def best_policy(self, rows, v, prev=None):
        vals = self.apply(rows, v)
        sc = self.scales(rows, v)
        pol = np.empty(len(v), dtype=int)
        for k, (row, (cand, is_max)) in enumerate(zip(vals, rows)):
            row = np.asarray(row)
            target = row.max() if is_max else row.min()
            # keep the previous branch on ties so the iteration terminates
            if prev is not None and abs(row[prev[k]] - target) <= 1e-12 * sc[k]:
                pol[k] = prev[k]
            else:
                pol[k] = int(np.argmax(row) if is_max else np.argmin(row))
        return pol


def fd_eigen(spec, a, b, sign, M, radial=False, max_policy=100):
    """Principal eigenvalue with sign*u > 0 of the discrete problem F_h(u) = -lam u."""
    g = Grid(spec, a, b, M, radial)
    rows = g.stencils(None)
    n = len(g.idx)
    v = sign * np.ones(n)
    pol = g.best_policy(rows, v)
    lam = None
    for _ in range(max_policy):
        A = g.matrix(pol, rows)
        lam, v = _principal(-A, sign, -spec.delta - 1.0)
        new = g.best_policy(rows, v, pol)
        if np.array_equal(new, pol):
            break
        pol = new
    else:
        raise RuntimeError("policy iteration did not settle")
    return lam, g.x[g.idx], v / np.max(np.abs(v))


def _principal(B, sign, shift, iters=2000):
    """Eigenpair of B closest to ``shift`` (below the spectrum) by shifted inverse iteration."""
    n = B.shape[0]
    lu = splu((B - shift * sp.identity(n, format="csc")).tocsc())
    x = sign * np.ones(n)
    mu = None
    for _ in range(iters):
        y = lu.solve(x)
        k = np.argmax(np.abs(y))
        new = shift + x[k] / y[k]
        x = y / abs(y[k])
        if mu is not None and abs(new - mu) <= 1e-14 * abs(new):
            mu = new
            break
        mu = new
    x = sign * np.abs(x) if np.all(sign * x >= -1e-12) else x
    return mu, x


def fd_dirichlet(spec, f, kappa, a, b, M, radial=False, max_policy=100):
    """Discrete solution of F_h(u) - kappa u = f, u = 0 at the Dirichlet ends."""
    g = Grid(spec, a, b, M, radial)
    rows = g.stencils(None)
    n = len(g.idx)
    rhs = np.array([f(x) for x in g.x[g.idx]])
    v = np.zeros(n)
    pol = g.best_policy(rows, -np.ones(n))
    for _ in range(max_policy):
        A = g.matrix(pol, rows) - kappa * sp.identity(n, format="csc")
        v = splu(A.tocsc()).solve(rhs)
        new = g.best_policy(rows, v, pol)
        if np.array_equal(new, pol):
            break
        pol = new
    else:
        raise RuntimeError("policy iteration did not settle")
    return g.x[g.idx], v


def richardson2(coarse, fine):
    """Second-order Richardson combination of results on grids h and h/2."""
    return (4.0 * fine - coarse) / 3.0
