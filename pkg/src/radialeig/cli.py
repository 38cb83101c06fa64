"""Command-line front end.

Exit status: 0 success, 1 bad configuration, 2 solver failure (or a failed
certificate in ``abp-audit``), 3 operator structure check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bvp import BvpProblem, choose_kappa, solve_dirichlet
from .diagnostics import abp_check, blowup_check
from .errors import DomainError, SolverError, BracketError, IntegrationError, AssemblyError
from .ivp import Source
from .nehari import SemiCache, spectrum
from .operators import check_structure, linear, load_operator, pucci_minus, pucci_plus
from .radial import RadialProblem, radial_dirichlet, radial_spectrum
from .semi_eigen import inverse_iteration, semi_eigenvalue

SCHEMA_VERSION = 1
CONVENTION = "F(u'', u', u, t) = -lambda * u"
OPERATORS = ("pucci+", "pucci-", "linear")
COMMANDS = ("check-operator", "dirichlet", "semi-eig", "spectrum", "radial-spectrum", "abp-audit")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p):
    g = p.add_argument_group("operator")
    g.add_argument("--op", choices=OPERATORS, help="catalog operator")
    g.add_argument("--op-file", help="TOML operator file (overrides --op)")
    g.add_argument("--lam", type=float, default=1.0, help="lower ellipticity constant")
    g.add_argument("--Lam", type=float, default=1.0, help="upper ellipticity constant")
    g.add_argument("--grad", type=float, default=0.0, help="first-order coefficient c in c*u'")
    g.add_argument("--zero", type=float, default=0.0, help="zero-order coefficient d in d*u")
    g.add_argument("--dim", type=int, default=None, help="space dimension N")
    o = p.add_argument_group("output")
    o.add_argument("--out", default="radialeig-out", help="output directory")
    o.add_argument("--format", choices=("json", "csv", "both"), default="both")
    o.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--samples", type=int, default=200, help="structure-check sample count")


def _interval(p):
    p.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"), required=True)


def _sign(p):
    p.add_argument("--sign", choices=("+", "-", "both"), default="both")


def build_parser():
    parser = _Parser(prog="radialeig", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check-operator", help="audit the structural hypotheses")
    _common(p)

    p = sub.add_parser("dirichlet", help="solve F(u) - kappa u = f with zero boundary data")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    g.add_argument("--R", type=float, help="ball radius (radial problem)")
    p.add_argument("--f", type=float, default=-1.0, help="constant right-hand side")
    p.add_argument("--f-file", help="text file of uniform samples of f on the domain")
    p.add_argument("--kappa", type=float, default=None)

    p = sub.add_parser("semi-eig", help="first positive and negative eigenpairs")
    _common(p)
    _interval(p)
    _sign(p)
    p.add_argument("--method", choices=("shoot", "inverse", "both"), default="shoot")

    p = sub.add_parser("spectrum", help="eigenpairs n = 0..n_max on an interval")
    _common(p)
    _interval(p)
    _sign(p)
    p.add_argument("--n-max", type=int, default=2)

    p = sub.add_parser("radial-spectrum", help="radial eigenpairs in the ball")
    _common(p)
    p.add_argument("--R", type=float, default=1.0)
    _sign(p)
    p.add_argument("--n-max", type=int, default=2)

    p = sub.add_parser("abp-audit", help="maximum-principle certificates")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    g.add_argument("--R", type=float)
    p.add_argument("--f", type=float, default=-1.0)
    p.add_argument("--min-length", type=float, default=1e-3,
                   help="smallest interval length in the blow-up table")
    return parser


# ------------------------------------------------------------ config checks

def _operator(args):
    if args.op_file:
        try:
            spec = load_operator(args.op_file)
        except FileNotFoundError:
            raise ConfigError(f"--op-file: no such file {args.op_file}")
        if args.dim is not None:
            spec = spec.replace(dim=args.dim)
        return spec
    if args.op is None:
        raise ConfigError("--op: one of --op or --op-file is required")
    dim = 1 if args.dim is None else args.dim
    if dim < 1:
        raise ConfigError("--dim: must be >= 1")
    if args.op == "linear":
        return linear(c=args.grad, d=args.zero, dim=dim)
    if not args.Lam >= args.lam:
        raise ConfigError("--Lam: must be >= --lam")
    make = pucci_plus if args.op == "pucci+" else pucci_minus
    return make(args.lam, args.Lam, dim=dim, grad=args.grad, zero=args.zero)


def _validate(args):
    if args.workers < 1:
        raise ConfigError("--workers: must be >= 1")
    if args.samples < 1:
        raise ConfigError("--samples: must be >= 1")
    iv = getattr(args, "interval", None)
    if iv is not None and not iv[0] < iv[1]:
        raise ConfigError("--interval: need A < B")
    R = getattr(args, "R", None)
    if R is not None and not R > 0:
        raise ConfigError("--R: must be positive")
    if getattr(args, "n_max", 0) < 0:
        raise ConfigError("--n-max: must be >= 0")
    if getattr(args, "min_length", 1.0) <= 0:
        raise ConfigError("--min-length: must be positive")


def _signs(args):
    return {"+": (1,), "-": (-1,), "both": (1, -1)}[args.sign]


# ------------------------------------------------------------ output

def _round(x):
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, float) or isinstance(x, np.floating):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return str(x)


def _sign_char(s):
    return "+" if s > 0 else "-"


class Writer:
    def __init__(self, args):
        self.out = Path(args.out)
        self.format = args.format
        self.out.mkdir(parents=True, exist_ok=True)

    def json(self, doc):
        if self.format in ("json", "both"):
            with open(self.out / "results.json", "w") as fh:
                json.dump(_round(doc), fh, indent=2, sort_keys=True)
                fh.write("\n")

    def csv(self, name, traj, var):
        if self.format in ("csv", "both"):
            traj.to_csv(self.out / name, var)

    def summary(self, text):
        with open(self.out / "summary.txt", "w") as fh:
            fh.write(text)
        print(text, end="")


def _header(args, spec, command):
    return {
        "schema_version": SCHEMA_VERSION,
        "convention": CONVENTION,
        "command": command,
        "seed": args.seed,
        "operator": spec.describe(),
    }


def _eigen_abp(spec, ef, lam, geometry):
    kappa = choose_kappa(spec)
    f = Source.from_trajectory(ef, -(lam + kappa))
    return abp_check(ef, f, spec, geometry)


def _table(rows):
    lines = [f"{'n':>3} {'sign':>4} {'lambda':>20}  nodes"]
    for n, s, lam, nodes in rows:
        nd = " ".join(f"{x:.9g}" for x in nodes)
        lines.append(f"{n:>3} {_sign_char(s):>4} {lam:>20.12g}  {nd}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ commands

def cmd_check_operator(args, spec, report):
    w = Writer(args)
    doc = _header(args, spec, "check-operator")
    doc["structure"] = report.as_dict()
    w.json(doc)
    lines = [f"{k}: {'pass' if v.passed else 'FAIL'}"
             + (f" ({v.note})" if v.note else "") for k, v in report.checks.items()]
    lines.append(f"admissible: {report.admissible}")
    w.summary("\n".join(lines) + "\n")
    return 0


def _load_f(args, domain):
    if args.f_file:
        try:
            vals = np.loadtxt(args.f_file, dtype=float, ndmin=1)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"--f-file: {exc}")
        return Source.samples(vals, domain)
    return Source.constant(args.f)


def cmd_dirichlet(args, spec, report):
    w = Writer(args)
    doc = _header(args, spec, "dirichlet")
    if args.kappa is not None and args.kappa < choose_kappa(spec):
        raise ConfigError(f"--kappa: must be >= {choose_kappa(spec)}")
    if args.R is not None:
        f = _load_f(args, (0.0, args.R))
        rep = radial_dirichlet(RadialProblem(spec, args.R, f, args.kappa), workers=args.workers)
        doc["geometry"] = {"ball": {"N": spec.dim, "R": args.R}}
        doc["solution"] = rep.as_dict()
        w.csv("solution.csv", rep.solution, "r")
        text = (f"u(0) direct = {rep.u0_direct:.12g}\n"
                f"u(0) eps-family = {rep.u0_extrapolated:.12g}\n"
                f"discrepancy = {rep.discrepancy:.3g}{' (flagged)' if rep.flagged else ''}\n"
                f"ABP: {'pass' if rep.abp.passed else 'FAIL'}\n")
    else:
        a, b = args.interval
        f = _load_f(args, (a, b))
        traj = solve_dirichlet(BvpProblem(spec, f, (a, b), args.kappa))
        abp = abp_check(traj, f, spec)
        doc["geometry"] = {"interval": [a, b]}
        doc["solution"] = {"slope": traj.meta["slope"], "sup_abs": traj.sup_abs(),
                           "end_residual": traj.meta["end_residual"], "abp": abp.as_dict()}
        w.csv("solution.csv", traj, "t")
        text = (f"u'(a) = {traj.meta['slope']:.12g}\nsup|u| = {traj.sup_abs():.12g}\n"
                f"ABP: {'pass' if abp.passed else 'FAIL'}\n")
    w.json(doc)
    w.summary(text)
    return 0


def cmd_semi_eig(args, spec, report):
    w = Writer(args)
    a, b = args.interval
    doc = _header(args, spec, "semi-eig")
    doc["geometry"] = {"interval": [a, b]}
    results, rows = [], []
    for s in _signs(args):
        runs = []
        if args.method in ("shoot", "both"):
            runs.append(semi_eigenvalue(spec, a, b, s))
        if args.method in ("inverse", "both"):
            runs.append(inverse_iteration(spec, a, b, s))
        for r in runs:
            rec = r.as_dict()
            rec["abp"] = _eigen_abp(spec, r.eigenfunction, r.lam, "interval").as_dict()
            results.append(rec)
        w.csv(f"eig_{_sign_char(s)}0.csv", runs[0].eigenfunction, "t")
        rows.append((0, s, runs[0].lam, []))
    doc["results"] = results
    w.json(doc)
    w.summary(_table(rows))
    return 0


def _spectrum_doc(args, spec, pairs, geometry, var):
    w = Writer(args)
    rows, recs = [], []
    for p in sorted(pairs, key=lambda p: (p.n, -p.sign)):
        rec = p.as_dict()
        rec["abp"] = _eigen_abp(spec, p.eigenfunction, p.lam, geometry).as_dict()
        recs.append(rec)
        rows.append((p.n, p.sign, p.lam, list(p.nodes.t) if p.nodes else []))
        w.csv(f"eig_{_sign_char(p.sign)}{p.n}.csv", p.eigenfunction, var)
    return w, recs, rows


def cmd_spectrum(args, spec, report):
    a, b = args.interval
    pairs = spectrum(spec, args.n_max, (a, b), workers=args.workers, signs=_signs(args))
    w, recs, rows = _spectrum_doc(args, spec, pairs, "interval", "t")
    doc = _header(args, spec, "spectrum")
    doc["geometry"] = {"interval": [a, b]}
    doc["results"] = recs
    doc["increasing"] = {_sign_char(s): v for s, v in pairs.increasing.items()}
    w.json(doc)
    w.summary(_table(rows))
    return 0


def cmd_radial_spectrum(args, spec, report):
    pairs = radial_spectrum(spec, args.R, args.n_max, workers=args.workers, signs=_signs(args))
    geometry = "ball" if spec.dim >= 2 else "interval"
    w, recs, rows = _spectrum_doc(args, spec, pairs, geometry, "r")
    doc = _header(args, spec, "radial-spectrum")
    doc["geometry"] = {"ball": {"N": spec.dim, "R": args.R}}
    doc["results"] = recs
    doc["increasing"] = {_sign_char(s): v for s, v in pairs.increasing.items()}
    w.json(doc)
    w.summary(_table(rows))
    return 0


def cmd_abp_audit(args, spec, report):
    w = Writer(args)
    doc = _header(args, spec, "abp-audit")
    f = Source.constant(args.f)
    if args.R is not None:
        rep = radial_dirichlet(RadialProblem(spec, args.R, f), workers=args.workers)
        abp = rep.abp
        doc["geometry"] = {"ball": {"N": spec.dim, "R": args.R}}
        a, b = 0.0, args.R
    else:
        a, b = args.interval
        traj = solve_dirichlet(BvpProblem(spec, f, (a, b)))
        abp = abp_check(traj, f, spec)
        doc["geometry"] = {"interval": [a, b]}
    kappa = choose_kappa(spec)
    mid = 0.5 * (a + b)
    table = []
    cache = SemiCache(spec)
    lengths = [b - a]
    while lengths[-1] * 0.5 > args.min_length:
        lengths.append(lengths[-1] * 0.5)
    if lengths[-1] > args.min_length:
        lengths.append(args.min_length)
    for length in lengths:
        lo, hi = mid - 0.5 * length, mid + 0.5 * length
        for s in (1, -1):
            lam = cache.lam(lo, hi, s)
            chk = blowup_check(lam, kappa, spec, length)
            table.append({"length": length, "sign": s, "lambda": lam, "lower": chk.lower,
                          "passed": chk.passed})
    ok = abp.passed and all(r["passed"] for r in table)
    doc["abp"] = abp.as_dict()
    doc["blowup"] = table
    doc["passed"] = ok
    w.json(doc)
    lines = [f"ABP: {'pass' if abp.passed else 'FAIL'} (sup u+ {abp.sup_u_plus:.6g} <= "
             f"{abp.bound_plus:.6g}, sup u- {abp.sup_u_minus:.6g} <= {abp.bound_minus:.6g})",
             f"{'length':>12} {'sign':>4} {'lambda+kappa':>16} {'1/(B L)':>16}"]
    for r in table:
        lines.append(f"{r['length']:>12.6g} {_sign_char(r['sign']):>4} "
                     f"{r['lambda'] + kappa:>16.9g} {r['lower']:>16.9g}"
                     f"{'' if r['passed'] else '  FAIL'}")
    w.summary("\n".join(lines) + "\n")
    return 0 if ok else 2


HANDLERS = {
    "check-operator": cmd_check_operator,
    "dirichlet": cmd_dirichlet,
    "semi-eig": cmd_semi_eig,
    "spectrum": cmd_spectrum,
    "radial-spectrum": cmd_radial_spectrum,
    "abp-audit": cmd_abp_audit,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        spec = _operator(args)
        if args.command == "radial-spectrum" and spec.dim < 1:
            raise ConfigError("--dim: must be >= 1")
        report = check_structure(spec, samples=args.samples, seed=args.seed)
    except (ConfigError, DomainError) as exc:
        print(f"radialeig: configuration error: {exc}", file=sys.stderr)
        return 1
    if not report.admissible:
        if args.command == "check-operator":
            cmd_check_operator(args, spec, report)
        failed = ", ".join(f"({k})" + (f" {report.checks[k].note}" if report.checks[k].note else "")
                           for k in report.failures() if not (k == "F3" and report.concave))
        print(f"radialeig: structure check failed: {failed}", file=sys.stderr)
        return 3
    try:
        return HANDLERS[args.command](args, spec, report)
    except ConfigError as exc:
        print(f"radialeig: configuration error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, BracketError, IntegrationError, AssemblyError) as exc:
        print(f"radialeig: solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
