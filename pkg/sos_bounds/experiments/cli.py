"""Command-line interface: ``sos_bounds <subcommand> ...``."""

import argparse
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from ..config import get_settings, load_settings, set_settings
from ..errors import SosBoundsError
from ..geoassume import growth_exponent, load_region
from ..hierarchy import Method, density_grid, optimal_density, sample_density, upper_bound
from ..measures import Domain
from ..needle import certificate_bound, fitting_h_constant
from ..utils import export_table, write_table
from . import catalog
from .harness import FIGURES, figure_data, selftest
from .maxcut import GENERATOR, maxcut_bounds, maxcut_gen, maxcut_opt, table3_ratios

logger = logging.getLogger(__name__)

EXIT_ERROR = 2
EXIT_CHECK_FAILED = 1


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from e


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from e


def _meta(**extra) -> dict:
    settings = get_settings()
    meta = {"seed": settings.seed, "precision": settings.precision, "generator": GENERATOR}
    meta.update(extra)
    return meta


def _emit(args, schema: str, columns: Sequence[str], rows, **extra) -> None:
    export_table(args.out, schema, columns, rows, **_meta(**extra))


def cmd_bound(args) -> int:
    f = catalog.load_poly(args.poly)
    domain = Domain.parse(args.domain, args.dim if args.dim is not None else f.nvars)
    method = Method(args.method)
    kwargs = {"backend": args.backend} if method is Method.FULL else {}
    result = upper_bound(f, domain, args.r, method, **kwargs)
    _emit(args, "bound", ["r", "method", "value"], [(result.r, method.value, result.value)], domain=domain)
    if args.density_grid is not None:
        density = optimal_density(result)
        samples = sample_density(density, density_grid(domain, args.density_grid))
        columns = [f"x{i + 1}" for i in range(domain.nvars)] + ["density"]
        rows = [tuple(float(x) for x in point) + (float(value),) for point, value in samples]
        write_table(sys.stdout, "density", columns, rows, **_meta(method=method.value, r=args.r))
    return 0


def cmd_certificate(args) -> int:
    f = catalog.load_poly(args.poly)
    f_min, f_max = args.f_min, args.f_max
    if args.poly.lower() in catalog.NAMES:
        tf = catalog.test_function(args.poly)
        f_min = tf.f_min if f_min is None else f_min
        f_max = tf.f_max if f_max is None else f_max
    domain = Domain.box(args.dim if args.dim is not None else f.nvars)
    columns = ["r", "h", "ratio", "bound"]
    if args.with_quadrature_error:
        columns.append("quadrature_error")
    rows = []
    for r in args.r:
        c = args.h_constant if args.h_constant is not None else fitting_h_constant(r, domain.nvars)
        report = certificate_bound(f, domain, r, f_min, f_max, h_constant=c)
        row = (r, float(report.h_used), report.ratio, report.bound, report.quadrature_error)
        rows.append(row[: len(columns)])
    h_constant = args.h_constant if args.h_constant is not None else "auto"
    _emit(args, "certificate", columns, rows, h_constant=h_constant)
    return 0


def cmd_geom(args) -> int:
    region = load_region(args.region, args.dim)
    fit = growth_exponent(region, args.anchor, args.ladder, args.samples, get_settings().seed, workers=args.workers)
    _emit(
        args,
        "geom",
        ["delta", "fraction", "stderr", "volume", "reliable"],
        fit.rows(),
        exponent=f"{fit.exponent:.6g}",
        eta=f"{fit.eta:.6g}",
        residual=f"{fit.residual:.3g}",
        divergent=int(fit.divergent),
    )
    return 0


def cmd_maxcut(args) -> int:
    seed = get_settings().seed
    if args.maxcut_command == "gen":
        inst = maxcut_gen(args.n, args.p, seed, args.index)
        _emit(args, "maxcut-instance", ["i", "j", "w"], inst.edges, p=args.p, index=args.index)
    elif args.maxcut_command == "bounds":
        inst = maxcut_gen(args.n, args.p, seed, args.index)
        opt = maxcut_opt(inst)
        rows = [
            (row.r, row.full, row.pfm, opt)
            for row in maxcut_bounds(inst, args.r_max, with_large_full=args.with_large_full)
        ]
        _emit(args, "maxcut-bounds", ["r", "full", "pfm", "opt"], rows, sense="max=-min(-f)", p=args.p, index=args.index)
    else:
        rows = []
        for p in args.p_values:
            for row in table3_ratios(p, args.count, args.r_max, seed, n=args.n, workers=args.workers):
                rows.append(tuple(row))
        _emit(args, "maxcut-table3", ["p", "r", "ratio", "ratio_pfm", "instances", "skipped"], rows, sense="max=-min(-f)")
    return 0


def cmd_figures(args) -> int:
    schema, columns, rows = figure_data(args.which, r_max=args.r_max, step=args.step)
    _emit(args, schema, columns, rows)
    return 0


def cmd_selftest(args) -> int:
    rows = selftest()
    _emit(args, "selftest", ["check", "passed", "detail"], rows)
    return 0 if all(passed for _, passed, _ in rows) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sos_bounds",
        description="Measure-based and push-forward upper bounds for polynomial minimization.",
    )
    parser.add_argument("--precision", type=int, default=None, help="working precision in bits (default 256)")
    parser.add_argument("--seed", type=int, default=None, help="base random seed")
    parser.add_argument("--out", default=None, help="output path (.csv, .h5, .mat, .pickle); stdout if omitted")
    parser.add_argument("--config", default=None, help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="compute f^(r) or f_pfm^(r)")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.FULL.value)
    p.add_argument("--domain", choices=["box", "ball"], default="box")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--poly", required=True, help="polynomial file or test-function name")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--backend", choices=["mpmath", "lapack"], default="mpmath")
    p.add_argument("--density-grid", type=_fraction, default=None, metavar="STEP")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("certificate", help="needle certificate on the box")
    p.add_argument("--poly", required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--r", type=int, nargs="+", required=True)
    p.add_argument(
        "--h-constant", type=_fraction, default=None,
        help="c in h = (c (n + 1) log r / r)^2 (default: 4, halved until h < 1)",
    )
    p.add_argument("--with-quadrature-error", action="store_true")
    p.add_argument("--f-min", type=_fraction, default=None)
    p.add_argument("--f-max", type=_fraction, default=None)
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("geom", help="local volume growth exponent")
    p.add_argument("--region", required=True, help="example1, example2, box, or a region JSON file")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--anchor", type=_float_list, required=True)
    p.add_argument("--ladder", type=_float_list, required=True)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_geom)

    p = sub.add_parser("maxcut", help="random MAXCUT experiments")
    msub = p.add_subparsers(dest="maxcut_command", required=True)
    for name in ("gen", "bounds"):
        q = msub.add_parser(name)
        q.add_argument("--n", type=int, default=8)
        q.add_argument("--p", type=_fraction, default=Fraction(1, 2))
        q.add_argument("--index", type=int, default=0)
        if name == "bounds":
            q.add_argument("--r-max", type=int, default=4)
            q.add_argument("--with-large-full", action="store_true")
    q = msub.add_parser("table3")
    q.add_argument("--n", type=int, default=8)
    q.add_argument("--p", dest="p_values", type=_fraction, nargs="+", default=[Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    q.add_argument("--count", type=int, default=50)
    q.add_argument("--r-max", type=int, default=4)
    q.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_maxcut)

    p = sub.add_parser("figures", help="data behind the comparison and density figures")
    p.add_argument("which", choices=FIGURES)
    p.add_argument("--r-max", type=int, default=20)
    p.add_argument("--step", type=_fraction, default=None)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("selftest", help="fast oracle checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")
    try:
        set_settings(load_settings(args.config, precision=args.precision, seed=args.seed))
        return args.func(args)
    except SosBoundsError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR
