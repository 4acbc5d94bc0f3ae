"""Command-line interface: `lapdp <command> SPEC [options]`.

SPEC is a path to a JSON composition spec, '-' for standard input, or an
inline JSON document. Output is CSV on standard output or --output.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
import warnings
from typing import Iterable, List, Optional, Sequence

import numpy as np

from lapdp import __version__, composition, errors, laplace, oracle, specfile, subsampling, verify

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_SPEC = 2
EXIT_METHOD = 3
EXIT_RESOURCE = 4
EXIT_ROC = 5

METHODS = ("recursion", "kernel", "closed-form", "oracle")


class UsageError(Exception):
    """Bad command-line values; mapped to the invalid-spec exit code."""


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x + 0.0:.17g}"


def write_csv(stream, header: Sequence[str], rows: Iterable[Sequence], meta: dict):
    for key, value in meta.items():
        stream.write(f"# {key}: {value}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_spec(source: str) -> specfile.CompositionSpec:
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise errors.SpecError(f"cannot read spec {source!r}: {exc}") from exc
    return specfile.parse_spec(text)


def _eps_grid(args) -> np.ndarray:
    if not args.eps_min < args.eps_max:
        raise UsageError("--eps-min must be below --eps-max")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    return np.linspace(args.eps_min, args.eps_max, args.steps)


def _parse_k_range(text: str) -> List[int]:
    """'a..b' (inclusive), 'a:b' (inclusive) or a comma list."""
    try:
        for sep in ("..", ":"):
            if sep in text:
                a, b = text.split(sep)
                ks = list(range(int(a), int(b) + 1))
                break
        else:
            ks = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --k-range {text!r}") from exc
    if not ks or min(ks) < 1:
        raise UsageError("--k-range must list positive integers")
    return ks


def _bromwich_cfg(args) -> laplace.BromwichConfig:
    return laplace.BromwichConfig(gamma=args.gamma, omega_max=args.omega_max, quad_tol=args.quad_tol)


# ---------------------------------------------------------------------------
# Commands.


def cmd_profile(args, out):
    d = _read_spec(args.spec).single()
    eps = _eps_grid(args)
    prof = d.profile()
    write_csv(out, ("epsilon", "delta"), zip(eps, np.asarray(prof(eps))),
              {"command": "profile", "mechanism": prof.label})


def _compose_curve(spec: specfile.CompositionSpec, method: str, eps: np.ndarray, step: float):
    mechs = spec.expanded()
    points = specfile.point_guarantees(spec)
    if method == "recursion":
        if points is None:
            raise errors.InapplicableMethodError("recursion needs point guarantees or randomized response only")
        return np.asarray(composition.compose_point_guarantees(points, eps))
    if method == "closed-form":
        if points is None or len(set(points)) != 1:
            raise errors.InapplicableMethodError("closed-form needs identical point guarantees")
        e0, d0 = points[0]
        return np.asarray(composition.compose_homogeneous(e0, d0, len(points), eps))
    if method == "kernel":
        prof = composition.compose_profiles([m.profile() for m in mechs], step=step)
        return np.asarray(prof(eps))
    if method == "oracle":
        plds = [m.pld(step) for m in mechs]
        if any(p.grid is not None for p in plds):
            plds = [oracle.discretize(p, step) for p in plds]
        total = plds[0]
        for p in plds[1:]:
            total = oracle.convolve_plds(total, p)
        return np.asarray(oracle.profile_from_pld(total, eps))
    raise UsageError(f"unknown method {method!r}")


def cmd_compose(args, out):
    spec = _read_spec(args.spec)
    eps = _eps_grid(args)
    method = args.method
    if method is None:
        method = "recursion" if specfile.point_guarantees(spec) is not None else "kernel"
    delta = _compose_curve(spec, method, eps, args.step)
    write_csv(out, ("epsilon", "delta"), zip(eps, delta),
              {"command": "compose", "method": method, "mechanisms": len(spec.expanded())})


def cmd_calibrate(args, out):
    spec = _read_spec(args.spec)
    if not 0.0 < args.delta_budget < 1.0:
        raise UsageError("--delta-budget must lie in (0, 1)")
    points = specfile.point_guarantees(spec)
    if points is None:
        raise errors.InapplicableMethodError("calibrate needs point guarantees or randomized response only")
    ks = _parse_k_range(args.k_range) if args.k_range else [len(points)]
    if max(ks) > len(points):
        # A single descriptor is repeated as needed.
        if len(points) == 1:
            points = points * max(ks)
        else:
            raise UsageError(f"--k-range reaches {max(ks)} but the spec lists {len(points)} mechanisms")
    eps = composition.calibrate_guarantees(points, args.delta_budget, ks, tol=args.tol)
    write_csv(out, ("k", "epsilon"), ((str(k), eps[k]) for k in ks),
              {"command": "calibrate", "delta_budget": _fmt(args.delta_budget)})


def cmd_convert(args, out):
    d = _read_spec(args.spec).single()
    meta = {"command": "convert", "from": args.from_, "to": args.to}
    if args.from_ == args.to:
        raise UsageError("--from and --to must differ")
    if args.to == "renyi":
        curve = laplace.renyi_curve_from_profile(d.profile())
        if args.complex_line is not None:
            gamma = args.complex_line
            omega_max = args.omega_max if args.omega_max is not None else 10.0
            omega = np.linspace(0.0, omega_max, args.steps)
            vals = curve.E(gamma + 1j * omega)
            meta["gamma"] = _fmt(gamma)
            write_csv(out, ("omega", "re_E", "im_E"), zip(omega, vals.real, vals.imag), meta)
            return
        if not args.q_min < args.q_max:
            raise UsageError("--q-min must be below --q-max")
        qs = np.linspace(args.q_min, args.q_max, args.steps)
        rows = []
        for q in qs:
            try:
                rho = curve.rho(q)
            except errors.SingularOrderError:
                rho = math.nan
            rows.append((q, float(np.real(rho))))
        write_csv(out, ("q", "rho"), rows, meta)
    else:
        curve = d.renyi_curve()
        eps = _eps_grid(args)
        cfg = _bromwich_cfg(args)
        meta.update(gamma=_fmt(cfg.gamma), quad_tol=_fmt(cfg.quad_tol))
        with warnings.catch_warnings():
            warnings.simplefilter("always", errors.ImaginaryResidueWarning)
            delta = laplace.profile_from_renyi(curve, eps, cfg)
        write_csv(out, ("epsilon", "delta"), zip(eps, np.atleast_1d(delta)), meta)


def cmd_subsample(args, out):
    d = _read_spec(args.spec).single()
    eps = _eps_grid(args)
    prof = d.profile()
    lam = args.lam
    if args.direction == "remove":
        delta = subsampling.poisson_subsample_profile(prof, lam)(eps)
    elif args.direction == "add":
        delta = subsampling.subsampled_reverse_profile(prof, lam)(eps)
    else:
        delta = subsampling.pointwise_two_sided_guarantee(prof, lam, eps)
    write_csv(out, ("epsilon", "delta"), zip(eps, np.asarray(delta)),
              {"command": "subsample", "lambda": _fmt(lam), "direction": args.direction})


def cmd_verify(args, out) -> int:
    results = verify.run(seed=args.seed, level=args.level)
    out.write(verify.format_report(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stderr.write("failed: " + ", ".join(failed) + "\n")
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser.


def _grid_flags(p, eps_min=-2.0, eps_max=6.0, steps=81):
    p.add_argument("--eps-min", type=float, default=eps_min)
    p.add_argument("--eps-max", type=float, default=eps_max)
    p.add_argument("--steps", type=int, default=steps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapdp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lapdp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, spec=True):
        p = sub.add_parser(name, help=help_text)
        if spec:
            p.add_argument("spec", help="spec file, '-' for stdin, or inline JSON")
        p.add_argument("--output", "-o", help="write CSV here instead of stdout")
        return p

    p = add("profile", "privacy profile of one mechanism")
    _grid_flags(p)

    p = add("compose", "composed privacy profile")
    _grid_flags(p)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--step", type=float, default=1e-3, help="lattice step for kernel and oracle methods")

    p = add("calibrate", "smallest epsilon meeting a delta budget for each k")
    p.add_argument("--delta-budget", type=float, required=True)
    p.add_argument("--k-range", help="e.g. 1..40, 1:40 or 1,10,100")
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("convert", "profile to Rényi curve or back")
    p.add_argument("--from", dest="from_", choices=("profile", "renyi"), required=True)
    p.add_argument("--to", choices=("profile", "renyi"), required=True)
    _grid_flags(p)
    p.add_argument("--q-min", type=float, default=1.5)
    p.add_argument("--q-max", type=float, default=10.0)
    p.add_argument("--complex-line", type=float, metavar="GAMMA",
                   help="emit E_q along q = GAMMA + i omega instead of real orders")
    p.add_argument("--gamma", type=float, default=-1.0, help="Bromwich abscissa")
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--quad-tol", type=float, default=1e-8)

    p = add("subsample", "Poisson-subsampled profile")
    _grid_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--direction", choices=("remove", "add", "max"), default="remove")

    p = add("verify", "run the oracle-backed self checks", spec=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


COMMANDS = {
    "profile": cmd_profile,
    "compose": cmd_compose,
    "calibrate": cmd_calibrate,
    "convert": cmd_convert,
    "subsample": cmd_subsample,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _output(args.output) as out:
            code = COMMANDS[args.command](args, out)
        return EXIT_OK if code is None else code
    except errors.EmptyROCError as exc:
        code, msg = EXIT_ROC, exc
    except errors.InapplicableMethodError as exc:
        code, msg = EXIT_METHOD, exc
    except (errors.BookOverflowError, errors.SupportOverflowError, errors.NonConvergenceError) as exc:
        code, msg = EXIT_RESOURCE, exc
    except (errors.SpecError, UsageError, errors.LapDPError) as exc:
        code, msg = EXIT_SPEC, exc
    sys.stderr.write(f"lapdp {args.command}: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
