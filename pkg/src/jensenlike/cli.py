"""Command-line front end: figure CSVs, single bounds, and the verify suite.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys

from . import bounds, distributions, figures, funcs, verification
from .errors import JensenLikeError
from .optimize import GridSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _open_output(path):
    if path in (None, "-", "stdout"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# --- key=value parsing for `bound` ---------------------------------------------

_MODELS = {
    "gaussian": (distributions.gaussian, (float, float)),
    "exponential": (distributions.exponential, (float,)),
    "bernoulli_sum": (distributions.bernoulli_sum, (int, float)),
    "geometric": (distributions.geometric, (float,)),
    "shifted_chi_square_sum": (distributions.shifted_chi_square_sum, (int, float)),
    "sample_mean_sq_error": (distributions.sample_mean_sq_error, (int, float)),
    "degenerate": (distributions.degenerate, (float,)),
}


def _split_call(text):
    name, _, rest = text.partition(":")
    return name, [a for a in rest.split(",") if a] if rest else []


def parse_function(text):
    """``neg_log`` or ``power:0.5``."""
    name, args = _split_call(text)
    return funcs.catalog(name, [float(a) for a in args])


def parse_model(text):
    """``exponential:1``, ``bernoulli_sum:50,0.2``; prefix ``affine:c,b@`` for c + b*X."""
    affine = None
    if text.startswith("affine:"):
        head, _, text = text[len("affine:"):].partition("@")
        c, b = (float(v) for v in head.split(","))
        affine = (c, b)
    name, args = _split_call(text)
    if name not in _MODELS:
        raise UsageError(f"unknown model {name!r}; known: {', '.join(_MODELS)}")
    make, types = _MODELS[name]
    if len(args) != len(types):
        raise UsageError(f"model {name} takes {len(types)} argument(s)")
    model = make(*(t(a) for t, a in zip(types, args)))
    return distributions.affine_of(model, *affine) if affine else model


def parse_grid(text):
    """``lo:hi:step`` with an optional ``:refine`` suffix."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid must be lo:hi:step[:refine], got {text!r}")
    lo, hi, step = (float(p) for p in parts[:3])
    refine = bounds.DEFAULT_REFINE if len(parts) == 4 else None
    return GridSpec(lo, hi, step, refine)


def _float_or_grid(text):
    return parse_grid(text) if ":" in text else float(text)


def _probs(text):
    return bounds.PmfTable(tuple(float(p) for p in text.split(",")))


_PARAM_TYPES = {
    "f": parse_function, "g": parse_function, "model": parse_model,
    "grid": parse_grid, "s_grid": parse_grid,
    "k": int, "n": int, "N": int, "P": _probs, "orientation": str,
    "s": _float_or_grid,
}

BOUND_OPS = {
    "product_convex_positive": bounds.product_convex_positive,
    "empirical_entropy_lower": bounds.empirical_entropy_lower,
    "moment_two_point": bounds.moment_two_point,
    "guessing_moment_lower": bounds.guessing_moment_lower,
    "guessing_moment_bound": bounds.guessing_moment_bound,
    "exp_tilted": bounds.exp_tilted,
    "exp_of_convex": bounds.exp_of_convex,
    "gaussian_exp_square": bounds.gaussian_exp_square,
    "product_exp_composition": bounds.product_exp_composition,
    "log_expectation_lower": bounds.log_expectation_lower,
    "simo_capacity_lower": bounds.simo_capacity_lower,
    "exp_snr_capacity_lower": bounds.exp_snr_capacity_lower,
    "power_moment_lower": bounds.power_moment_lower,
    "estimation_error_moment_lower": bounds.estimation_error_moment_lower,
    "gap_factor_mu": bounds.gap_factor_mu,
    "product_two_convex": bounds.product_two_convex,
    "product_two_convex_joint": bounds.product_two_convex_joint,
    "capacity_variance_upper": bounds.capacity_variance_upper,
}

_TUPLE_KEYS = {
    "empirical_entropy_lower": ("B1", "B2"),
    "gaussian_exp_square": ("bound", "exact"),
    "gap_factor_mu": ("mu_t", "s_star"),
}


def run_bound(op: str, assignments: list[str]) -> dict:
    if op not in BOUND_OPS:
        raise UsageError(f"unknown operation {op!r}; known: {', '.join(BOUND_OPS)}")
    kwargs = {}
    for item in assignments:
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"expected key=value, got {item!r}")
        try:
            kwargs[key] = _PARAM_TYPES.get(key, float)(value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
    try:
        result = BOUND_OPS[op](**kwargs)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(result, bounds.BoundResult):
        return {"operation": op, **result.to_dict()}
    if isinstance(result, tuple):
        return {"operation": op, **dict(zip(_TUPLE_KEYS[op], result))}
    return {"operation": op, "value": result}


# --- argument parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jensenlike", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, resolution):
        p.add_argument("--output", default="-", help="file path, or - for stdout")
        p.add_argument("--resolution", type=float, default=resolution)
        p.add_argument("--alpha-max", type=float, default=10.0)

    p1 = sub.add_parser("fig1", help="SIMO capacity bounds versus k")
    common(p1, 0.001)
    p1.add_argument("--sigma2", type=float, default=1.0)
    p1.add_argument("--k-max", type=int, default=100)
    p1.add_argument("--samples", type=int, default=1_000_000)
    p1.add_argument("--seed", type=int, default=1)
    p1.add_argument("--no-oracle", action="store_true")

    p2 = sub.add_parser("fig2", help="exponential-SNR capacity bounds versus theta")
    common(p2, 0.001)
    p2.add_argument("--gain", type=float, default=5.0)
    p2.add_argument("--theta-grid", type=parse_grid, default=GridSpec(0.1, 5.0, 0.05), metavar="LO:HI:STEP")
    p2.add_argument("--no-oracle", action="store_true")

    p3 = sub.add_parser("fig3", help="binomial fractional-moment bounds versus n")
    common(p3, 0.01)
    p3.add_argument("--p", type=float, default=0.2)
    p3.add_argument("--n-max", type=int, default=100)
    p3.add_argument("--t", type=float, default=0.5)
    p3.add_argument("--no-oracle", action="store_true")

    p4 = sub.add_parser("fig4", help="gap factor mu_t versus t")
    p4.add_argument("--output", default="-")
    p4.add_argument("--t-grid", type=parse_grid, default=GridSpec(0.1, 2.0, 0.01), metavar="LO:HI:STEP")
    p4.add_argument("--s-resolution", type=float, default=0.001)

    pv = sub.add_parser("verify", help="run invariant and acceptance checks")
    pv.add_argument("--seed", type=int, default=1)
    pv.add_argument("--output", default="-")
    pv.add_argument("--only", action="append", default=None, help="run only checks whose name contains this")
    pv.add_argument("--corrupt-tolerances", action="store_true", help=argparse.SUPPRESS)

    pb = sub.add_parser("bound", help="evaluate one bound: bound NAME key=value ...")
    pb.add_argument("operation")
    pb.add_argument("params", nargs="*")
    return parser


def _figure_rows(args):
    if args.command == "fig1":
        return figures.fig1(args.sigma2, args.k_max, args.resolution, args.samples, args.seed, args.alpha_max, not args.no_oracle)
    if args.command == "fig2":
        return figures.fig2(args.gain, args.theta_grid, args.resolution, args.alpha_max, not args.no_oracle)
    if args.command == "fig3":
        return figures.fig3(args.p, args.n_max, args.t, args.resolution, args.alpha_max, oracle=not args.no_oracle)
    return figures.fig4(args.t_grid, args.s_resolution)


def _verify(args) -> int:
    scale = -1.0 if args.corrupt_tolerances else 1.0
    checks = verification.CHECKS
    if args.only:
        checks = [(n, fn) for n, fn in checks if any(o in n for o in args.only)]
    failed = 0
    with _open_output(args.output) as out:
        for name, fn in checks:
            res = verification.run_check(name, fn, args.seed, scale)
            failed += not res.passed
            out.write(json.dumps({"check": res.name, "passed": res.passed, "detail": res.detail}) + "\n")
            out.flush()
        out.write(json.dumps({"summary": {"checks": len(checks), "failed": failed}}) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return float(obj)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "bound":
            print(json.dumps(run_bound(args.operation, args.params), default=_json_default, sort_keys=True))
            return EXIT_OK
        with _open_output(args.output) as out:
            figures.write_csv(_figure_rows(args), out)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JensenLikeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
