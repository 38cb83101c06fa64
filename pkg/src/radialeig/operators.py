"""Catalog of radially symmetric, positively 1-homogeneous elliptic operators.

Every operator is evaluated in its radial form ``F(m, ell, p, u, r)`` where
``m = u''``, ``ell = u'/r``, ``p = u'`` and ``r`` is the radius (or the
abscissa, in dimension one).  With ``n1 = N - 1``:

=============  ================================================================
kind           F(m, ell, p, u, r)
=============  ================================================================
linear         a m + b n1 ell + c p + d u
pucci_plus     Lam (m+ + n1 ell+) - lam (m- + n1 ell-) + c p + d u
pucci_minus    lam (m+ + n1 ell+) - Lam (m- + n1 ell-) + c p + d u
bellman_max    max_k [a_k m + b_k n1 ell + c_k p + d_k u]
bellman_min    min_k [a_k m + b_k n1 ell + c_k p + d_k u]
=============  ================================================================

Coefficients a, b, c, d are functions of r given as uniform samples on
``domain`` and linearly interpolated (constant outside).  For the Pucci
kinds only c and d are used.  Uniform ellipticity asks ``lam <= a, b <= Lam``,
``|c| <= gamma``, ``|d| <= delta``.

Operator files are TOML::

    kind = "bellman_max"
    lambda_min = 1.0
    lambda_max = 2.0
    gamma = 0.5
    delta = 0.0
    dim = 1
    domain = [0.0, 1.0]
    coeffs = [{a = [1.0, 2.0], c = 0.5}, {a = 1.5}]
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import BracketError, DomainError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

KINDS = {
    "linear": K.LINEAR,
    "pucci_plus": K.PUCCI_PLUS,
    "pucci_minus": K.PUCCI_MINUS,
    "bellman_max": K.BELLMAN_MAX,
    "bellman_min": K.BELLMAN_MIN,
}
_FLIPPED = {
    "linear": "linear",
    "pucci_plus": "pucci_minus",
    "pucci_minus": "pucci_plus",
    "bellman_max": "bellman_min",
    "bellman_min": "bellman_max",
}
_DEFAULTS = {"a": 1.0, "b": 1.0, "c": 0.0, "d": 0.0}


@dataclass(frozen=True)
class EvalPoint:
    """Arguments of the radial operator: u'', u'/r, u', u and r."""

    m: float
    ell: float
    p: float
    u: float
    r: float

    def __neg__(self):
        return EvalPoint(-self.m, -self.ell, -self.p, -self.u, self.r)

    def scaled(self, s):
        return EvalPoint(s * self.m, s * self.ell, s * self.p, s * self.u, self.r)


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """An operator of the catalog with its structural constants.

    ``coeffs`` is a tuple of branches, each a mapping from ``"a"``, ``"b"``,
    ``"c"``, ``"d"`` to a float or an array of uniform samples on ``domain``.
    Missing entries take the defaults a = b = 1, c = d = 0.
    """

    kind: str
    lambda_min: float
    lambda_max: float
    gamma: float = 0.0
    delta: float = 0.0
    dim: int = 1
    coeffs: tuple = ({},)
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError("dim must be a positive integer")
        if len(self.coeffs) == 0:
            raise DomainError("at least one coefficient branch is required")
        if self.kind.startswith("pucci") or self.kind == "linear":
            if len(self.coeffs) != 1:
                raise DomainError(f"{self.kind} takes exactly one coefficient branch")
        lo, hi = self.domain
        if not hi > lo:
            raise DomainError("coefficient domain must satisfy lo < hi")

    @cached_property
    def table(self):
        branches = []
        size = 1
        for br in self.coeffs:
            rows = [np.atleast_1d(np.asarray(br.get(k, _DEFAULTS[k]), dtype=float))
                    for k in "abcd"]
            branches.append(rows)
            size = max(size, *(len(r) for r in rows))
        out = np.empty((len(branches), 4, size))
        grid = np.linspace(0.0, 1.0, size)
        for i, rows in enumerate(branches):
            for j, row in enumerate(rows):
                if len(row) == size:
                    out[i, j] = row
                else:
                    out[i, j] = np.interp(grid, np.linspace(0.0, 1.0, len(row)), row)
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite coefficient samples")
        return out

    @property
    def packed(self):
        """Tuple consumed by the compiled kernels."""
        return (KINDS[self.kind], float(self.lambda_min), float(self.lambda_max),
                float(self.dim), self.table, float(self.domain[0]), float(self.domain[1]))

    @property
    def concave(self):
        if self.kind == "pucci_minus":
            return True
        return self.kind == "bellman_min" and len(self.coeffs) > 1

    def coefficient(self, name, r, branch=0):
        j = "abcd".index(name)
        lo, hi = self.domain
        return K.coef(self.table, branch, j, float(r), float(lo), float(hi))

    def replace(self, **changes):
        fields = dict(kind=self.kind, lambda_min=self.lambda_min, lambda_max=self.lambda_max,
                      gamma=self.gamma, delta=self.delta, dim=self.dim, coeffs=self.coeffs,
                      domain=self.domain)
        fields.update(changes)
        return OperatorSpec(**fields)

    def describe(self):
        return {
            "kind": self.kind,
            "lambda_min": float(self.lambda_min),
            "lambda_max": float(self.lambda_max),
            "gamma": float(self.gamma),
            "delta": float(self.delta),
            "dim": int(self.dim),
            "domain": [float(x) for x in self.domain],
            "branches": len(self.coeffs),
        }


# ---------------------------------------------------------------- constructors

def _sup(x):
    return float(np.max(np.abs(np.atleast_1d(np.asarray(x, dtype=float)))))


def pucci_plus(lam, Lam, dim=1, grad=0.0, zero=0.0, domain=(0.0, 1.0)):
    """Maximal Pucci operator, optionally with linear lower-order terms grad*p + zero*u."""
    return OperatorSpec("pucci_plus", lam, Lam, _sup(grad), _sup(zero), dim,
                        ({"c": grad, "d": zero},), tuple(domain))


def pucci_minus(lam, Lam, dim=1, grad=0.0, zero=0.0, domain=(0.0, 1.0)):
    """Minimal Pucci operator, optionally with linear lower-order terms."""
    return OperatorSpec("pucci_minus", lam, Lam, _sup(grad), _sup(zero), dim,
                        ({"c": grad, "d": zero},), tuple(domain))


def _linear_bounds(branches, dim):
    lo, hi, g, dl = math.inf, 0.0, 0.0, 0.0
    for br in branches:
        a = np.atleast_1d(np.asarray(br.get("a", 1.0), dtype=float))
        vals = [a]
        if dim > 1:
            vals.append(np.atleast_1d(np.asarray(br.get("b", 1.0), dtype=float)))
        lo = min(lo, *(float(v.min()) for v in vals))
        hi = max(hi, *(float(v.max()) for v in vals))
        g = max(g, _sup(br.get("c", 0.0)))
        dl = max(dl, _sup(br.get("d", 0.0)))
    return lo, hi, g, dl


def linear(a=1.0, b=1.0, c=0.0, d=0.0, dim=1, domain=(0.0, 1.0)):
    """Linear operator a m + b (N-1) ell + c p + d u with constants read off the coefficients."""
    br = {"a": a, "b": b, "c": c, "d": d}
    lo, hi, g, dl = _linear_bounds([br], dim)
    return OperatorSpec("linear", lo, hi, g, dl, dim, (br,), tuple(domain))


def bellman(branches, maximize=True, dim=1, domain=(0.0, 1.0)):
    """Pointwise max (or min) of linear operators given as coefficient mappings."""
    branches = tuple(dict(b) for b in branches)
    lo, hi, g, dl = _linear_bounds(branches, dim)
    kind = "bellman_max" if maximize else "bellman_min"
    return OperatorSpec(kind, lo, hi, g, dl, dim, branches, tuple(domain))


def flip(spec):
    """The operator (m, ell, p, u, r) -> -F(-m, -ell, -p, -u, r).

    For the catalog this only swaps the kind; lower-order linear terms are odd
    and are kept as they are.
    """
    return spec.replace(kind=_FLIPPED[spec.kind])


# ---------------------------------------------------------------- evaluation

def _finite(*xs):
    for x in xs:
        if not math.isfinite(x):
            raise DomainError(f"non-finite argument {x!r}")


def evaluate(spec, pt):
    """Radial operator value F(m, ell, p, u, r); ell is ignored when dim == 1."""
    _finite(pt.m, pt.ell, pt.p, pt.u, pt.r)
    if spec.dim >= 2 and pt.r < 0:
        raise DomainError("radius must be non-negative")
    return K.eval_op(spec.packed, float(pt.m), float(pt.ell), float(pt.p), float(pt.u),
                     float(pt.r))


def invert_m(spec, ell, p, u, q, r):
    """The unique m with F(m, ell, p, u, r) = q."""
    _finite(ell, p, u, q, r)
    return K.invert_m(spec.packed, float(ell), float(p), float(u), float(q), float(r))


def invert_origin(spec, p, u, q):
    """The unique ell with F(ell, ell, p, u, 0) = q (all curvatures equal at r = 0)."""
    _finite(p, u, q)
    return K.invert_origin(spec.packed, float(p), float(u), float(q))


def invert_m_bisect(fun, q, tol=1e-13, max_expand=200):
    """Solve fun(m) = q for a nondecreasing, onto ``fun`` by bracket expansion and bisection.

    Generic fallback for operators without a closed-form inverse.  The bracket
    starts at width 1 around 0 and grows by a factor 4.
    """
    lo, hi = -1.0, 1.0
    for _ in range(max_expand):
        if fun(lo) <= q <= fun(hi):
            break
        lo, hi = 4.0 * lo, 4.0 * hi
    else:
        raise BracketError("operator is not onto: no bracket for m")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
        if fun(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def evaluate_matrix(spec, hess, grad, u, x):
    """Full-space form F(D2u, Du, u, x) of a catalog operator at x != 0."""
    hess = np.asarray(hess, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(np.linalg.norm(x))
    e = x / r
    lo, hi = spec.domain
    radial_p = float(np.dot(grad, e))
    if spec.kind.startswith("pucci"):
        ev = np.linalg.eigvalsh(0.5 * (hess + hess.T))
        pos = ev[ev > 0].sum()
        neg = -ev[ev < 0].sum()
        big, small = spec.lambda_max, spec.lambda_min
        if spec.kind == "pucci_plus":
            val = big * pos - small * neg
        else:
            val = small * pos - big * neg
        c = spec.coefficient("c", r)
        d = spec.coefficient("d", r)
        return float(val + c * radial_p + d * u)
    normal = float(e @ hess @ e)
    tangential = float(np.trace(hess)) - normal
    vals = []
    for k in range(len(spec.coeffs)):
        a, b, c, d = (spec.coefficient(nm, r, k) for nm in "abcd")
        vals.append(a * normal + b * tangential + c * radial_p + d * u)
    if spec.kind == "bellman_min":
        return float(min(vals))
    return float(max(vals))


# ---------------------------------------------------------------- structure audit

@dataclass
class HypothesisCheck:
    passed: bool
    worst: float
    note: str = ""


@dataclass
class StructureReport:
    checks: dict = field(default_factory=dict)
    concave: bool = False
    samples: int = 0
    seed: int = 0

    @property
    def admissible(self):
        """(F1), (F2), (F4) hold and (F3) holds for the operator or for its flip."""
        c = self.checks
        f3 = c["F3"].passed or self.concave
        return c["F1"].passed and c["F2"].passed and c["F4"].passed and f3

    def failures(self):
        return [k for k, v in self.checks.items() if not v.passed]

    def as_dict(self):
        return {
            "checks": {k: {"passed": v.passed, "worst": v.worst, "note": v.note}
                       for k, v in self.checks.items()},
            "concave": self.concave,
            "admissible": self.admissible,
            "samples": self.samples,
            "seed": self.seed,
        }


def _pucci_pm(spec, dm, dl):
    n1 = spec.dim - 1
    up = max(dm, 0.0) + n1 * max(dl, 0.0)
    dn = max(-dm, 0.0) + n1 * max(-dl, 0.0)
    lam, Lam = spec.lambda_min, spec.lambda_max
    return lam * up - Lam * dn, Lam * up - lam * dn


def _random_point(rng, spec):
    lo, hi = spec.domain
    if spec.dim >= 2:
        lo = max(lo, 0.0)
    scale = 10.0 ** rng.uniform(-2, 2, size=4)
    m, ell, p, u = rng.standard_normal(4) * scale
    if spec.dim == 1:
        ell = m
    return EvalPoint(m, ell, p, u, rng.uniform(lo, hi))


def _magnitude(spec, pt):
    return (1.0 + spec.lambda_max * (abs(pt.m) + (spec.dim - 1) * abs(pt.ell))
            + spec.gamma * abs(pt.p) + spec.delta * abs(pt.u)
            + abs(evaluate(spec, pt)))


def _f3_worst(spec, pairs):
    worst = 0.0
    for x, y in pairs:
        diff = evaluate(spec, x) - evaluate(spec, y)
        yx = EvalPoint(y.m - x.m, y.ell - x.ell, y.p - x.p, y.u - x.u, x.r)
        lower = -evaluate(spec, yx)
        upper = evaluate(spec, -yx)
        tol = 1e-12 * (_magnitude(spec, x) + _magnitude(spec, y))
        worst = max(worst, (lower - diff) - tol, (diff - upper) - tol)
    return worst


def check_structure(spec, samples=200, seed=0):
    """Audit (F1)-(F4) on random samples; failures are report entries, not errors."""
    rng = np.random.default_rng(seed)
    points = [_random_point(rng, spec) for _ in range(samples)]
    partners = []
    for x in points:
        y = _random_point(rng, spec)
        partners.append(EvalPoint(y.m, y.ell, y.p, y.u, x.r))
    pairs = list(zip(points, partners))
    rep = StructureReport(samples=samples, seed=seed)

    # (F1) positive homogeneity, s in [0, 10]
    worst = 0.0
    for x in points:
        s = rng.uniform(0.0, 10.0)
        err = abs(evaluate(spec, x.scaled(s)) - s * evaluate(spec, x))
        worst = max(worst, err - 1e-12 * (1.0 + s * _magnitude(spec, x)))
    rep.checks["F1"] = HypothesisCheck(worst <= 0.0, max(worst, 0.0))

    # (F2) Pucci sandwich
    notes = []
    if not spec.lambda_min > 0:
        notes.append("lambda_min must be > 0 (degenerate ellipticity)")
    if not spec.lambda_max >= spec.lambda_min:
        notes.append("lambda_max must be >= lambda_min")
    if spec.gamma < 0 or spec.delta < 0:
        notes.append("gamma and delta must be >= 0")
    worst = 0.0
    for x, y in pairs:
        diff = evaluate(spec, x) - evaluate(spec, y)
        lo_, hi_ = _pucci_pm(spec, x.m - y.m, x.ell - y.ell)
        slack = spec.gamma * abs(x.p - y.p) + spec.delta * abs(x.u - y.u)
        tol = 1e-12 * (_magnitude(spec, x) + _magnitude(spec, y))
        worst = max(worst, (lo_ - slack) - diff - tol, diff - (hi_ + slack) - tol)
    if worst > 0:
        notes.append("sandwich inequality violated")
    rep.checks["F2"] = HypothesisCheck(not notes, max(worst, 0.0), "; ".join(notes))

    # (F3) two-sided convexity inequality
    worst = _f3_worst(spec, pairs)
    rep.checks["F3"] = HypothesisCheck(worst <= 0.0, max(worst, 0.0))
    if worst > 0.0:
        flipped = _f3_worst(flip(spec), pairs)
        rep.concave = flipped <= 0.0
        if rep.concave:
            rep.checks["F3"].note = "concave: handled through the flipped operator"

    # (F4) radial invariance of the full-space form
    worst = 0.0
    for x in points:
        if x.r <= 0:
            continue
        n = spec.dim
        vals = []
        for _ in range(2):
            e = rng.standard_normal(n)
            e /= np.linalg.norm(e)
            hess = x.ell * np.eye(n) + (x.m - x.ell) * np.outer(e, e)
            vals.append(evaluate_matrix(spec, hess, x.p * e, x.u, x.r * e))
        ref = evaluate(spec, x)
        tol = 1e-10 * _magnitude(spec, x)
        worst = max(worst, max(abs(v - ref) for v in vals) - tol)
    rep.checks["F4"] = HypothesisCheck(worst <= 0.0, max(worst, 0.0))
    return rep


# ---------------------------------------------------------------- files

def _coeff_value(v):
    if isinstance(v, list):
        return np.asarray(v, dtype=float)
    return float(v)


def operator_from_dict(data):
    """Build an OperatorSpec from the parsed contents of an operator file."""
    required = ("kind", "lambda_min", "lambda_max")
    for key in required:
        if key not in data:
            raise DomainError(f"operator file: missing field {key!r}")
    known = {"kind", "lambda_min", "lambda_max", "gamma", "delta", "dim", "coeffs", "domain"}
    extra = set(data) - known
    if extra:
        raise DomainError(f"operator file: unknown field {sorted(extra)[0]!r}")
    coeffs = data.get("coeffs", [{}])
    if isinstance(coeffs, dict):
        coeffs = [coeffs]
    branches = []
    for br in coeffs:
        bad = set(br) - set("abcd")
        if bad:
            raise DomainError(f"operator file: unknown coefficient {sorted(bad)[0]!r}")
        branches.append({k: _coeff_value(v) for k, v in br.items()})
    return OperatorSpec(
        kind=str(data["kind"]),
        lambda_min=float(data["lambda_min"]),
        lambda_max=float(data["lambda_max"]),
        gamma=float(data.get("gamma", 0.0)),
        delta=float(data.get("delta", 0.0)),
        dim=int(data.get("dim", 1)),
        coeffs=tuple(branches),
        domain=tuple(float(x) for x in data.get("domain", (0.0, 1.0))),
    )


def load_operator(path):
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise DomainError(f"operator file {path}: {exc}") from exc
    return operator_from_dict(data)


def _toml_value(v):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if np.ndim(v) == 0:
        return repr(float(v))
    return "[" + ", ".join(repr(float(x)) for x in arr) + "]"


def dump_operator(spec, path):
    lines = [
        f'kind = "{spec.kind}"',
        f"lambda_min = {float(spec.lambda_min)!r}",
        f"lambda_max = {float(spec.lambda_max)!r}",
        f"gamma = {float(spec.gamma)!r}",
        f"delta = {float(spec.delta)!r}",
        f"dim = {int(spec.dim)}",
        f"domain = [{float(spec.domain[0])!r}, {float(spec.domain[1])!r}]",
    ]
    branches = []
    for br in spec.coeffs:
        items = ", ".join(f"{k} = {_toml_value(v)}" for k, v in br.items())
        branches.append("{" + items + "}")
    lines.append("coeffs = [" + ", ".join(branches) + "]")
    Path(path).write_text("\n".join(lines) + "\n")
