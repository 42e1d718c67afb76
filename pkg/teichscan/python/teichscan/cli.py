"""
Command line front end.

    teichscan build torus --w 1 --h 1 -o t.json
    teichscan validate t.json
    teichscan estimate --surface t.json --curve torus:1,0 --kind ext
    teichscan example slit-tori --a 0.1 --t-min -2 --t-max 2.3 --t-step 0.1 -o slit

Exit status: 0 on success, 1 on a failed validation or any other library error,
2 when an enumeration budget runs out, 3 on bad configuration or artifacts.

"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from pydantic import ValidationError

from .artifacts import (
    dumps,
    load_curve,
    scan_csv,
    store_json,
    store_scan_csv,
    store_scan_svg,
    store_surface,
    write_atomic,
)
from .config import Defaults, RunConfig
from .curves import landmark_curve, tighten, torus_curve
from .decomposition import find_short_curves
from .errors import BudgetError, ConfigError, SchemaError, TeichscanError
from .estimators import Kind, classify_essential, ext_estimate, hyp_estimate
from .experiments import property_suite, quasiconvexity, scan, slit_tori_example
from .flow import make_scan
from .surface import surface_from_source, validate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BUDGET = 2
EXIT_CONFIG = 3


class ArgumentParser(argparse.ArgumentParser):
    """
    Reports usage errors as ConfigError instead of exiting with argparse's own status.

    """

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _ints(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from error


def build_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("-o", "--output", default=None, help="output path (default: stdout)")

    surface = ArgumentParser(add_help=False)
    surface.add_argument("--surface", required=True, help="surface JSON file")
    surface.add_argument("--m0", type=float, default=None)
    surface.add_argument("--twist-mode", choices=["max", "sum"], default=None)

    grid = ArgumentParser(add_help=False)
    grid.add_argument("--t-min", type=float, default=None)
    grid.add_argument("--t-max", type=float, default=None)
    grid.add_argument("--t-step", type=float, default=None)

    parser = ArgumentParser(prog="teichscan", description="Length estimates along Teichmueller geodesics")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    build = commands.add_parser("build", parents=[common], help="build a surface and store it")
    build.add_argument("builder", choices=["torus", "slit-tori", "square-tiled"])
    build.add_argument("--w", type=float, default=None)
    build.add_argument("--h", type=float, default=None)
    build.add_argument("--a", type=float, default=None)
    build.add_argument("--horiz", type=_ints, default=None)
    build.add_argument("--vert", type=_ints, default=None)

    check = commands.add_parser("validate", parents=[common], help="check a surface's invariants")
    check.add_argument("path")

    decompose = commands.add_parser("decompose", parents=[common, surface], help="thick-thin decomposition")
    decompose.add_argument("--json", action="store_true", help="emit JSON (the default)")

    estimate = commands.add_parser("estimate", parents=[common, surface], help="length estimate of a curve")
    estimate.add_argument("--curve", required=True, help="curve JSON file, torus:p,q or landmark:name")
    estimate.add_argument("--kind", choices=["ext", "hyp"], default="ext")
    estimate.add_argument("--json", action="store_true", help="emit JSON (the default)")

    for name in ("scan", "quasiconvexity"):
        sub = commands.add_parser(name, parents=[common, surface, grid], help=f"{name} along the flow")
        sub.add_argument("--curve", required=True, help="curve JSON file, torus:p,q or landmark:name")
        if name == "scan":
            sub.add_argument("--format", choices=["json", "csv", "svg"], default="json")

    example = commands.add_parser("example", parents=[common, grid], help="reproduce the slit tori example")
    example.add_argument("name", choices=["slit-tori"])
    example.add_argument("--a", type=float, required=True)
    example.add_argument("--m0", type=float, default=None)

    suite = commands.add_parser("suite", parents=[common, grid], help="seeded property suite")
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--size", type=int, default=20)
    suite.add_argument("--m0", type=float, default=None)

    return parser


def config_from_args(args):
    """
    Turns parsed arguments into a validated RunConfig.

    """
    fields = {"command": args.command, "output": args.output, "jobs": args.jobs}

    if args.command == "build":
        fields["surface"] = {
            "kind": args.builder,
            "width": args.w,
            "height": args.h,
            "a": args.a,
            "horiz": args.horiz,
            "vert": args.vert,
        }
    elif args.command == "validate":
        fields["surface"] = {"kind": "file", "path": args.path}
    elif args.command == "example":
        fields["surface"] = {"kind": "slit-tori", "a": args.a}
    elif hasattr(args, "surface"):
        fields["surface"] = {"kind": "file", "path": args.surface}

    for name in ("curve", "kind", "seed", "size", "m0", "twist_mode"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value

    if getattr(args, "format", None):
        fields["output_format"] = args.format

    bounds = {k: getattr(args, f"t_{k}", None) for k in ("min", "max", "step")}
    grid = {f"t_{k}": v for k, v in bounds.items() if v is not None}
    if grid:
        fields["grid"] = grid

    return RunConfig.parse(**fields)


def resolve_curve(source, surface):
    """
    Returns the curve named by a curve source, tightened on the surface.

    """
    if source.startswith("torus:"):
        try:
            p, q = (int(x) for x in source[len("torus:") :].split(","))
        except ValueError as error:
            raise ConfigError(f"Curve source {source!r} must look like torus:p,q") from error
        curve = torus_curve(surface, p, q)
    elif source.startswith("landmark:"):
        curve = landmark_curve(surface, source[len("landmark:") :])
    else:
        curve = load_curve(source)

    return curve.with_chain(tighten(surface, curve.chain()))


def _emit(config, payload):
    if config.output is None:
        sys.stdout.write(dumps(payload))
    else:
        store_json(payload, config.output)


def run(config):
    """
    Runs one validated invocation and returns its exit status.

    """
    defaults = Defaults.from_env(twist_mode=config.twist_mode)
    jobs = config.jobs or os.cpu_count() or 1
    logger.info("Running %s", config.command)

    if config.command == "suite":
        grid = make_scan(config.grid.t_min, config.grid.t_max, config.grid.t_step)
        report = property_suite(config.seed, config.size, grid, config.m0, defaults, jobs)
        _emit(config, report)
        return EXIT_OK if all(report["passed"].values()) else EXIT_FAILED

    if config.command == "example":
        grid = make_scan(config.grid.t_min, config.grid.t_max, config.grid.t_step)
        example = slit_tori_example(config.surface.a, grid, config.m0, defaults, jobs)
        if config.output is None:
            sys.stdout.write(scan_csv(example.scan))
            sys.stdout.write(dumps(example.to_dict()))
        else:
            stem = str(config.output)
            store_scan_csv(example.scan, f"{stem}.csv")
            store_json(example.to_dict(), f"{stem}.json")
            store_scan_svg(example.scan, f"{stem}.svg", title=f"slit tori, a = {config.surface.a}")
        return EXIT_OK

    surface = surface_from_source(config.surface)

    if config.command == "build":
        if config.output is None:
            sys.stdout.write(dumps(surface.to_dict()))
        else:
            store_surface(surface, config.output)
        return EXIT_OK

    if config.command == "validate":
        report = validate(surface, defaults.closure_tol, defaults.angle_tol)
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        if config.output is None:
            sys.stdout.write(text)
        else:
            write_atomic(config.output, text)
        if not report.ok:
            logger.error("Surface violates %s", ", ".join(report.invariants()))
            return EXIT_FAILED
        return EXIT_OK

    if config.command == "decompose":
        _emit(config, find_short_curves(surface, config.m0, defaults).to_dict())
        return EXIT_OK

    if config.curve is None:
        raise ConfigError(f"command {config.command!r} needs --curve")
    curve = resolve_curve(config.curve, surface)

    if config.command == "estimate":
        tt = find_short_curves(surface, config.m0, defaults)
        estimator = ext_estimate if config.kind == "ext" else hyp_estimate
        estimate = estimator(surface, curve, tt)
        payload = estimate.to_dict()
        payload["class"] = classify_essential(surface, curve, tt, Kind(config.kind), estimate).to_dict()
        _emit(config, payload)
        return EXIT_OK

    grid = make_scan(config.grid.t_min, config.grid.t_max, config.grid.t_step)
    result = scan(surface, curve, grid, config.m0, defaults, jobs, config.seed)

    if config.command == "quasiconvexity":
        _emit(config, quasiconvexity(result).to_dict())
        return EXIT_OK

    if config.output_format == "csv":
        if config.output is None:
            sys.stdout.write(scan_csv(result))
        else:
            store_scan_csv(result, config.output)
    elif config.output_format == "svg":
        if config.output is None:
            raise ConfigError("SVG output needs --output")
        store_scan_svg(result, config.output)
    else:
        _emit(config, result.to_dict())

    return EXIT_OK


def main(argv=None):
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        return run(config_from_args(args))
    except (ConfigError, SchemaError, ValidationError) as error:
        logger.error("%s", error)
        sys.stderr.write(f"teichscan: {error}\n")
        return EXIT_CONFIG
    except BudgetError as error:
        logger.error("%s", error)
        sys.stderr.write(f"teichscan: {error}\n")
        return EXIT_BUDGET
    except TeichscanError as error:
        logger.error("%s", error)
        sys.stderr.write(f"teichscan: {error}\n")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
