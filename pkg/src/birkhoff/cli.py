"""Command-line interface: ``birkhoff <subcommand> system.txt [options]``.

Exit status is 0 on success, 1 on a domain error (including a failed
``check``) and 2 on usage or input-format errors.  Every error prints one
line ``error[E_CODE]: message`` to stderr.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .actions import ActionConfig, CoordinateMap, MomentumMap, compute_action, regularity_diagnostic
from .errors import BirkhoffError, ParseError, UnsupportedEigenstructure, ValidationError
from .normalizer import (NEAR_RESONANCE_FLOOR, check_normal_form, convergence_report, normalize,
                         report_csv, transform_function)
from .quadratic import quadratic_data
from .resonance import resonance_basis
from .series import FORWARD, INVERSE, TruncatedSeries, to_string
from .sysfile import SystemSpec, emit_system, format_exact, format_vector, parse_system

USAGE_EXIT = 2
DOMAIN_EXIT = 1


class _UsageError(Exception):
    code = "E_USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[E_USAGE]: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _load(path) -> SystemSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_system(text)
    except ParseError as exc:
        exc.path = path
        raise


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _UsageError(f"cannot write {path}: {exc.strerror}") from None


def _working_hamiltonian(spec: SystemSpec, use_float: bool):
    """Hamiltonian in the arithmetic actually used.

    Float mode replaces the diagonal ``x_j y_j`` coefficients by the model's
    numeric ``gamma_j`` so that ``H_ss`` matches the model to the last bit.
    """
    H = spec.H
    F = spec.freq
    if not use_float and F.has_exact_values:
        return H, False
    H = H.to_float()
    gam = F.numeric_gamma()
    terms = dict(H.terms)
    n = spec.n
    for j, g in enumerate(gam):
        mono = [0] * (2 * n)
        mono[j] = mono[n + j] = 1
        terms[tuple(mono)] = g
    return TruncatedSeries(n, H.order, terms, exact=False), True


def _normalize(spec: SystemSpec, order, use_float, floor=NEAR_RESONANCE_FLOOR):
    H, is_float = _working_hamiltonian(spec, use_float)
    qd = quadratic_data(H)
    if not qd.is_canonical():
        raise UnsupportedEigenstructure(
            "quadratic part is not of the form sum gamma_j x_j y_j (+ nilpotent); "
            "rewrite the system in eigen-coordinates first")
    m = spec.order if order is None else order
    return normalize(H, m, qdata=qd, F=spec.freq, floor=floor), is_float


def cmd_resonance(args):
    spec = _load(args.system)
    basis = resonance_basis(spec.freq)
    out = [f"n {spec.n}", f"d {spec.freq.d}", f"q {basis.q}"]
    for h, row in enumerate(basis.mu, 1):
        out.append(f"mu {h} {format_vector(row)}")
    for k, row in enumerate(basis.rho, 1):
        out.append(f"rho {k} {format_vector(row)}")
    for k, coords in enumerate(basis.alpha, 1):
        out.append(f"alpha {k} (" + ", ".join(format_exact(c) for c in coords) + ")")
    for k, F in enumerate(basis.generators(), 1):
        out.append(f"F {k} {to_string(F)}")
    _write(None, "\n".join(out) + "\n")
    return 0


def cmd_normalize(args):
    spec = _load(args.system)
    res, is_float = _normalize(spec, args.order, args.float, args.floor)
    integrals = {i: transform_function(G if not is_float else G.to_float(), res.gens, FORWARD, res.m)
                 for i, G in spec.integrals.items()}
    out = SystemSpec(spec.n, res.m, res.N, spec.freq, integrals,
                     {k: res.generator(k) for k in range(3, res.m + 1)},
                     declared_numeric=spec.declared_numeric)
    mode = "float" if is_float else "exact"
    _write(args.out, emit_system(out, comments=[f"Birkhoff normal form through order {res.m} ({mode})"]))
    if args.diag:
        _write(args.diag, report_csv(convergence_report(res)))
    return 0


def cmd_transform(args):
    spec = _load(args.system)
    gens_spec = _load(args.gens)
    if gens_spec.n != spec.n:
        raise ValidationError(f"generator file has dof {gens_spec.n}, system has {spec.n}")
    gens = gens_spec.generator_list()
    m = args.order if args.order is not None else spec.order
    use_float = not (spec.exact and gens_spec.exact)
    conv = (lambda A: A.to_float()) if use_float else (lambda A: A)
    gens = [conv(g) for g in gens]
    H = transform_function(conv(spec.H).with_order(max(m, 2)), gens, args.direction, m)
    integrals = {i: transform_function(conv(G).with_order(max(m, 2)), gens, args.direction, m)
                 for i, G in spec.integrals.items()}
    out = SystemSpec(spec.n, m, H, spec.freq, integrals, declared_numeric=spec.declared_numeric)
    _write(args.out, emit_system(out, comments=[f"{args.direction} transform through order {m}"]))
    return 0


def cmd_check(args):
    spec = _load(args.system)
    H, is_float = _working_hamiltonian(spec, args.float)
    qd = quadratic_data(H)
    m = spec.order if args.order is None else args.order
    ok, residual = check_normal_form(H, qd.Hss, m, tol=args.tol)
    print(f"normal_form {'yes' if ok else 'no'}")
    print(f"order {m}")
    print(f"max_residual {residual.max_abs_coef()!r}")
    if not ok:
        print(f"error[E_NOT_NORMAL]: {{H_ss, H}} has {len(residual)} nonzero terms through order {m}",
              file=sys.stderr)
        return DOMAIN_EXIT
    return 0


def _parse_point(text, n):
    try:
        z = np.array([complex(tok.replace(" ", "")) for tok in text.split(",")])
    except ValueError:
        raise _UsageError(f"bad point {text!r}; expected comma-separated numbers") from None
    if z.shape[0] != 2 * n:
        raise _UsageError(f"point has {z.shape[0]} coordinates, expected {2 * n}")
    return z


def _format_complex(c) -> str:
    return f"{c.real!r} {c.imag!r}"


def cmd_actions(args):
    spec = _load(args.system)
    z = _parse_point(args.point, spec.n)
    basis = resonance_basis(spec.freq)
    if not 1 <= args.k <= spec.n - basis.q:
        raise ValidationError(f"k must be in 1..{spec.n - basis.q} (n - q)")
    res, _ = _normalize(spec, args.order, args.float, args.floor)
    G = MomentumMap(spec.momentum_functions())
    config = ActionConfig(nsteps=args.steps, tol=args.tol, max_iter=args.max_iter,
                          regularity_floor=args.regularity_floor, radius=args.radius)
    weights = basis.rho[args.k - 1]
    cmap = CoordinateMap(res.gens, spec.n, res.m)
    out = compute_action(z, weights, res.gens, G, config, cmap=cmap)
    F = TruncatedSeries.action(spec.n, weights, res.m, exact=res.N.exact)
    Fm = transform_function(F, res.gens, INVERSE, res.m).to_float()
    iF = 1j * Fm(z)
    print(f"k {args.k}")
    print(f"weights {format_vector(weights)}")
    print(f"P {_format_complex(out.value)}")
    print(f"iF_m {_format_complex(iF)}")
    print(f"abs_diff {abs(out.value - iF)!r}")
    print(f"max_residual {out.max_residual!r}")
    print(f"max_displacement {out.max_displacement!r}")
    print(f"max_iterations {int(out.projected.iterations.max())}")
    print(f"min_singular {out.min_singular!r}")
    return 0


def cmd_diagnose(args):
    spec = _load(args.system)
    basis = resonance_basis(spec.freq)
    print(f"q {basis.q}")
    m = spec.order if args.order is None else args.order
    F = spec.freq
    if F.numeric is not None:
        from .series import monomials_of_degree

        smallest = None
        for k in range(3, m + 1):
            for mono in monomials_of_degree(2 * spec.n, k):
                if F.is_resonance(F.weight(mono)):
                    continue
                v = abs(F.eigenvalue(mono).numeric)
                if smallest is None or v < smallest[0]:
                    smallest = (v, mono)
        if smallest is not None:
            print(f"min_divisor {smallest[0]!r}")
            print(f"min_divisor_monomial {format_vector(smallest[1])}")
            print(f"near_resonance {'yes' if smallest[0] < args.floor else 'no'}")
    if args.point is not None:
        z = _parse_point(args.point, spec.n)
        G = MomentumMap(spec.momentum_functions())
        smin, prod = regularity_diagnostic(G, z)
        print(f"min_singular {smin!r}")
        print(f"singular_product {prod!r}")
        print(f"regular {'yes' if smin >= args.regularity_floor else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    defaults = ActionConfig()
    p = _Parser(prog="birkhoff", description="Birkhoff normal forms and action functions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def system(sp):
        sp.add_argument("system", help="system file")

    sp = sub.add_parser("resonance", help="resonance lattice, dual basis and torus generators")
    system(sp)
    sp.set_defaults(func=cmd_resonance)

    sp = sub.add_parser("normalize", help="normal form and generators")
    system(sp)
    sp.add_argument("--order", type=int, help="truncation order (default: file 'order')")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--diag", help="write the per-degree CSV report here")
    sp.add_argument("--float", action="store_true", help="complex double arithmetic")
    sp.add_argument("--floor", type=float, default=NEAR_RESONANCE_FLOOR, help="near-resonance floor")
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("transform", help="apply normalizing generators to a system")
    system(sp)
    sp.add_argument("--gens", required=True, help="file with 'generator' blocks (normalize output)")
    sp.add_argument("--direction", choices=(FORWARD, INVERSE), default=FORWARD)
    sp.add_argument("--order", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("check", help="test whether the Hamiltonian is in normal form")
    system(sp)
    sp.add_argument("--order", type=int)
    sp.add_argument("--tol", type=float, default=0.0, help="float-mode residual tolerance")
    sp.add_argument("--float", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("actions", help="action function at a point")
    system(sp)
    sp.add_argument("--point", required=True, help="comma-separated x_1..x_n,y_1..y_n")
    sp.add_argument("--order", type=int)
    sp.add_argument("--k", type=int, default=1, help="torus generator index")
    sp.add_argument("--steps", type=int, default=defaults.nsteps)
    sp.add_argument("--tol", type=float, default=defaults.tol)
    sp.add_argument("--max-iter", type=int, default=defaults.max_iter)
    sp.add_argument("--regularity-floor", type=float, default=defaults.regularity_floor)
    sp.add_argument("--radius", type=float, default=defaults.radius)
    sp.add_argument("--float", action="store_true")
    sp.add_argument("--floor", type=float, default=NEAR_RESONANCE_FLOOR)
    sp.set_defaults(func=cmd_actions)

    sp = sub.add_parser("diagnose", help="small divisors and regularity")
    system(sp)
    sp.add_argument("--order", type=int)
    sp.add_argument("--point")
    sp.add_argument("--floor", type=float, default=NEAR_RESONANCE_FLOOR)
    sp.add_argument("--regularity-floor", type=float, default=defaults.regularity_floor)
    sp.set_defaults(func=cmd_diagnose)
    return p


def run_command(argv=None) -> int:
    """Run one subcommand; returns 0 on success, 1 on domain errors, 2 on usage errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version or an argparse error
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return args.func(args)
    except ParseError as exc:
        where = f"{getattr(exc, 'path', '<input>')}:{exc.line}:{exc.column}"
        print(f"error[{exc.code}]: {where}: {exc.message}", file=sys.stderr)
        return USAGE_EXIT
    except _UsageError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except BirkhoffError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return DOMAIN_EXIT


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
