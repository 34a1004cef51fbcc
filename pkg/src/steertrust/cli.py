"""Command-line entry point.

Exit codes: 0 success, 2 an analytic bound was violated by a sample,
64 usage error, 65 malformed input data, 74 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import bd_family, steering, tomography, trust
from .errors import SteeringError
from .operators import BASIS_LABELS, build_basis, matrix_from_json

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_IO = 74


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    return format(float(x), ".15g")


def _round(obj):
    """Round every float to 15 significant digits for stable output."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_output(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_json(path: str):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or inclusive ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a,b,c or start:stop:step")


def parse_dims(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            dims = list(range(lo, hi + 1))
        else:
            dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be integers >= 2")
    return dims


def dimension(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dimension must be an integer, got {text!r}")
    if d < 2:
        raise argparse.ArgumentTypeError(f"dimension must be >= 2, got {d}")
    return d


def nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def resolve_epsilon(args, d: int) -> float:
    if args.gamma is not None:
        if not 0.0 <= args.gamma <= 1.0:
            raise UsageError(f"--gamma must lie in [0, 1], got {args.gamma}")
        return trust.epsilon_from_gamma(args.gamma, d)
    eps = 0.0 if args.epsilon is None else args.epsilon
    if eps < 0 or eps > 4 * d:
        raise UsageError(f"--epsilon must lie in [0, {4 * d}] for d = {d}, got {eps}")
    return eps


def _add_eps(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--epsilon", type=float, help="per-observable deviation Tr((s-t)(s-t)^dagger)")
    g.add_argument("--gamma", type=float, help="trust parameter, converted as eps = 2d(1 - gamma)")


def _add_common(p, fmt_default="json", formats=("json", "csv")):
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=formats, default=fmt_default)


def _add_mc(p):
    p.add_argument("--samples", type=nonneg_int, default=1000)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--threads", type=nonneg_int, default=os.cpu_count() or 1)


def load_functional(path: str) -> steering.SteeringFunctional:
    try:
        return steering.functional_from_json(read_json(path))
    except SteeringError as exc:
        raise DataError(f"{path}: {exc}")


def load_assemblage(path: str) -> steering.Assemblage:
    try:
        return steering.assemblage_from_json(read_json(path))
    except SteeringError as exc:
        raise DataError(f"{path}: {exc}")


def cmd_tomography(args) -> int:
    d = args.dim
    eps = resolve_epsilon(args, d)
    label = args.basis or ("pauli" if d == 2 else "heisenberg-weyl")
    try:
        basis = build_basis(d, label)
    except SteeringError as exc:
        raise UsageError(str(exc))
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    summary = tomography.run_fact1_experiment(d, eps, args.samples, args.seed, basis, max(1, args.threads))
    if args.format == "csv":
        text = dump_csv(("sample_index", "deviation"), enumerate(summary.deviations))
    else:
        text = dump_json(summary.as_dict())
    write_output(args.out, text)
    bad = summary.violations + summary.rel1_violations + summary.rel2_violations + summary.coefficient_violations
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_lhs_bound(args) -> int:
    f = load_functional(args.functional)
    res = steering.lhs_bound(f)
    out = res.as_dict()
    out["optimal_state"] = [[z.real, z.imag] for z in res.optimal_state.matrix.ravel()]
    write_output(args.out, dump_json(out))
    return EXIT_OK


def cmd_corrected_bound(args) -> int:
    f = load_functional(args.functional)
    eps = resolve_epsilon(args, f.scenario.d_alice)
    a = load_assemblage(args.assemblage) if args.assemblage else None
    res = steering.corrected_local_bound(f, eps, a, sharp=args.sharp)
    write_output(args.out, dump_json(res.as_dict()))
    return EXIT_OK


def cmd_empirical_bound(args) -> int:
    f = load_functional(args.functional)
    eps = resolve_epsilon(args, f.scenario.d_alice)
    local = steering.lhs_bound(f)
    a = load_assemblage(args.assemblage) if args.assemblage else local.attaining_assemblage
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    res = steering.empirical_corrected_bound(f, a, eps, args.samples, args.seed, threads=max(1, args.threads))
    if args.format == "csv":
        text = dump_csv(("sample_index", "W"), enumerate(res.values))
    else:
        out = {"beta_L": local.beta_L, "strategy": list(local.optimal_strategy.outcomes)}
        out.update(res.as_dict())
        text = dump_json(out)
    write_output(args.out, text)
    return EXIT_VIOLATION if res.violations else EXIT_OK


def cmd_bd_curve(args) -> int:
    try:
        if args.epsilon is not None:
            rows = bd_family.bd_curve_epsilon(args.dims, args.epsilon)
        else:
            rows = bd_family.bd_curve(args.dims, args.gamma)
    except SteeringError as exc:
        raise UsageError(str(exc))
    if args.format == "csv":
        text = dump_csv(bd_family.CURVE_HEADER, (r.values() for r in rows))
    else:
        text = dump_json([dict(zip(bd_family.CURVE_HEADER, r.values())) for r in rows])
    write_output(args.out, text)
    for d in sorted(set(args.dims)):
        print(f"threshold d={d}: {fmt(bd_family.bd_trust_threshold(d))}", file=sys.stderr)
    return EXIT_OK


def cmd_bd_threshold(args) -> int:
    rows = [(d, bd_family.bd_trust_threshold(d)) for d in args.dims]
    if args.format == "csv":
        text = dump_csv(("d", "threshold"), rows)
    else:
        text = dump_json([{"d": d, "threshold": t} for d, t in rows])
    write_output(args.out, text)
    return EXIT_OK


def _load_observables(path: str) -> np.ndarray:
    doc = read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("elements", doc.get("actual"))
    if not isinstance(doc, list) or not doc:
        raise DataError(f"{path}: expected a nonempty list of matrix objects")
    try:
        return np.array([matrix_from_json(m) for m in doc])
    except SteeringError as exc:
        raise DataError(f"{path}: {exc}")


def cmd_trust(args) -> int:
    if args.ideal or args.actual:
        if not (args.ideal and args.actual):
            raise UsageError("--ideal and --actual must be given together")
        try:
            report = trust.trust_from_deviations(
                _load_observables(args.ideal), _load_observables(args.actual), args.k
            )
        except SteeringError as exc:
            raise DataError(str(exc))
        write_output(args.out, dump_json(report.as_dict()))
        return EXIT_OK
    if args.dim is None:
        raise UsageError("--dim is required unless --ideal/--actual are given")
    d = args.dim
    if args.fidelity is not None:
        try:
            report = trust.trust_from_fidelity(args.fidelity, d)
        except SteeringError as exc:
            raise UsageError(str(exc))
        out = report.as_dict()
        out["mean_deviation"] = report.epsilon
    elif args.gamma is not None:
        eps = resolve_epsilon(args, d)
        out = trust.TrustReport(d, 1, eps, args.gamma).as_dict()
    else:
        eps = resolve_epsilon(args, d)
        label = args.basis or ("pauli" if d == 2 else "heisenberg-weyl")
        try:
            pb = trust.perturb_basis(build_basis(d, label), eps, args.seed)
        except SteeringError as exc:
            raise UsageError(str(exc))
        out = pb.trust(args.k).as_dict()
        out["deviations"] = list(pb.deviations)
        out["seed"] = args.seed
        if args.dump_basis:
            write_output(args.dump_basis, dump_json(pb.to_json()))
    write_output(args.out, dump_json(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steertrust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tomography", help="Monte-Carlo check of the imprecise-tomography bound")
    p.add_argument("--dim", type=dimension, required=True)
    _add_eps(p)
    _add_mc(p)
    p.add_argument("--basis", choices=BASIS_LABELS)
    _add_common(p)
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("lhs-bound", help="exact local bound of a steering functional")
    p.add_argument("--functional", required=True)
    _add_common(p, formats=("json",))
    p.set_defaults(func=cmd_lhs_bound)

    p = sub.add_parser("corrected-bound", help="local bound inflated for an imprecise device")
    p.add_argument("--functional", required=True)
    p.add_argument("--assemblage")
    p.add_argument("--sharp", action="store_true", help="use d*sqrt(d^2-1) instead of d^2")
    _add_eps(p)
    _add_common(p, formats=("json",))
    p.set_defaults(func=cmd_corrected_bound)

    p = sub.add_parser("empirical-bound", help="Monte-Carlo estimate of the corrected bound")
    p.add_argument("--functional", required=True)
    p.add_argument("--assemblage")
    _add_eps(p)
    _add_mc(p)
    _add_common(p)
    p.set_defaults(func=cmd_empirical_bound)

    p = sub.add_parser("bd-curve", help="corrected-to-quantum bound ratio of the clock/shift family")
    p.add_argument("--dims", type=parse_dims, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--gamma", type=parse_grid)
    g.add_argument("--epsilon", type=parse_grid)
    _add_common(p, fmt_default="csv")
    p.set_defaults(func=cmd_bd_curve)

    p = sub.add_parser("bd-threshold", help="minimum trust for which steering can be witnessed")
    p.add_argument("--dims", type=parse_dims, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_bd_threshold)

    p = sub.add_parser("trust", help="trust parameter from fidelity, deviation or observables")
    p.add_argument("--dim", type=dimension)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fidelity", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--gamma", type=float)
    p.add_argument("--ideal")
    p.add_argument("--actual")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--basis", choices=BASIS_LABELS)
    p.add_argument("--dump-basis", help="write the sampled device as JSON")
    _add_common(p, formats=("json",))
    p.set_defaults(func=cmd_trust)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"steertrust {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"steertrust {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"steertrust {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
