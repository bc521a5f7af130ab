"""
Command-line front end for horolab.

Exit status: 0 pass, 1 failed check, 2 usage error or unsupported pairing,
3 non-escaping sequence, 4 limit not converged or not stabilized.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from src.boundary_functions import LimitReport, busemann, dl_function, horofunction
from src.config import TOLERANCE_NAMES, RunConfig, Tolerances
from src.eikonal import distance_to_set, export_field_csv
from src.errors import HorolabError, SequenceError, StabilizationError
from src.geodesics import trace_ray
from src.manifold import DiscreteManifold, describe, load_spec_file
from src.scenarios import ScenarioInstance, direction_targets, scenario
from src.utils.reporting import format_value, write_text
from src.verification import HoroLab


logger = logging.getLogger("horolab")
console = Console()

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SEQUENCE, EXIT_UNCONVERGED = 0, 1, 2, 3, 4


class UsageError(HorolabError, ValueError):
    """Invalid combination of command-line options."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horolab",
        description="Busemann functions, horofunctions and dl-functions on discrete surfaces",
    )
    parser.add_argument("--help-tolerances", action="store_true",
                        help="Print the tolerance table and exit")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--scenario", help="plane, cylinder, capped_half_cylinder or pants")
    source.add_argument("--spec", type=Path, help="Manifold spec file")
    common.add_argument("--window", type=float, help="Extent of the cut directions")
    common.add_argument("--resolution", type=int, help="Grid steps per reference length")
    common.add_argument("--out", type=Path, default=Path("results"), help="Output directory")
    common.add_argument("--seed", type=int, default=0, help="Seed for sampled start nodes")
    common.add_argument("--backend", choices=["graph", "fast_march"], default="fast_march")
    for name in TOLERANCE_NAMES:
        common.add_argument(f"--tol-{name}", dest=f"tol_{name}", type=float, default=None,
                            help=f"Override {name}")

    sub = parser.add_subparsers(dest="command")
    dist = sub.add_parser("dist", parents=[common], help="Distance to a node set")
    dist.add_argument("--source", help="'u,v[;u,v...]', 'ball:r' or 'circle:v'")

    for name, help_text in (("busemann", "Busemann function of a ray"),
                            ("horo", "Horofunction of the targets of a ray")):
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("--direction", type=float, help="Ray direction in degrees (flat charts)")
        cmd.add_argument("--end", help="End whose first scenario ray is used")
        cmd.add_argument("--ray", help="Named scenario ray")

    dl = sub.add_parser("dl", parents=[common], help="dl-function of an escaping set sequence")
    dl.add_argument("--sets", choices=["circles"], default="circles")
    dl.add_argument("--end", help="End the set sequence escapes into")

    verify = sub.add_parser("verify", parents=[common], help="Run a verification")
    verify.add_argument("which", choices=list(HoroLab.VERIFICATIONS))

    describe_cmd = sub.add_parser("describe", parents=[common], help="Summarize a manifold")
    describe_cmd.add_argument("--radii", help="Comma-separated exhaustion radii")
    return parser


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
    )


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(args, f"tol_{name}") for name in TOLERANCE_NAMES
                 if getattr(args, f"tol_{name}") is not None}
    return RunConfig(
        command=args.command, scenario=args.scenario, spec=args.spec, window=args.window,
        resolution=args.resolution, out=args.out, seed=args.seed, backend=args.backend,
        tolerances=overrides, which=getattr(args, "which", None),
    )


def _manifold(config: RunConfig) -> Tuple[DiscreteManifold, Optional[ScenarioInstance], int]:
    if config.scenario is not None:
        M, inst = scenario(config.scenario, window=config.window, resolution=config.resolution)
        return M, inst, inst.x0
    M = load_spec_file(config.spec)
    x0 = int(np.argmax(np.where(np.isfinite(M.margin), M.margin, -1.0)))
    return M, None, x0


def _parse_source(M: DiscreteManifold, x0: int, text: Optional[str]) -> np.ndarray:
    if not text:
        raise UsageError("dist needs --source")
    chart = M.charts[int(M.node_chart[x0])].name
    dist = M.distances_from(x0)
    if text.startswith("ball:"):
        return np.flatnonzero(dist <= float(text.split(":", 1)[1]))
    if text.startswith("circle:"):
        grid = M.chart(chart)
        v = float(text.split(":", 1)[1])
        row = M.nearest_node(chart, grid.spec.u_range[0], v)
        j = int(np.argwhere(grid.nodes == row)[0][0])
        return np.array(grid.nodes[j], dtype=np.int64)
    nodes = []
    for pair in text.split(";"):
        try:
            u, v = (float(c) for c in pair.split(","))
        except ValueError as e:
            raise UsageError(f"Invalid source {pair!r}; expected u,v") from e
        nodes.append(M.nearest_node(chart, u, v))
    return np.array(nodes, dtype=np.int64)


def _ray_name(inst: Optional[ScenarioInstance], args: argparse.Namespace) -> str:
    if inst is None:
        raise UsageError("--ray and --end need --scenario")
    if args.ray:
        return args.ray
    names = inst.rays_into(args.end) if args.end else []
    if not names:
        raise UsageError(f"Scenario {inst.name} has no end {args.end!r}; choose from {', '.join(inst.end_names)}")
    return names[0]


def _targets(M: DiscreteManifold, inst: Optional[ScenarioInstance], x0: int,
             args: argparse.Namespace) -> Tuple[int, List[int]]:
    if args.direction is not None:
        return x0, direction_targets(M, x0, args.direction)
    if not (args.ray or args.end):
        raise UsageError(f"{args.command} needs --direction, --end or --ray")
    name = _ray_name(inst, args)
    if name not in inst.ray_targets:
        raise UsageError(f"Scenario {inst.name} has no ray {name!r}")
    return inst.ray_starts[name], inst.ray_targets[name]


def _write_limit(config: RunConfig, M: DiscreteManifold, field, report: LimitReport) -> int:
    export_field_csv(M, field, config.out / f"{config.command}.csv")
    write_text(config.out / f"{config.command}_report.txt", report.to_text() + "\n")
    console.print(report.to_text())
    return EXIT_OK if report.converged else EXIT_UNCONVERGED


def cmd_verify(config: RunConfig) -> int:
    """Run one verification on a scenario and save its report."""
    if config.scenario is None:
        raise UsageError("verify needs --scenario")
    lab = HoroLab(backend=config.backend, tolerance_overrides=config.tolerances,
                  seed=config.seed, progress=True)
    run = lab.run(config.which, config.scenario, config.window, config.resolution)
    lab.save_results(run, config.out)
    _print_run(run)
    return EXIT_OK if run["passed"] else EXIT_FAIL


def cmd_describe(config: RunConfig, args: argparse.Namespace) -> int:
    M, inst, x0 = _manifold(config)
    radii = ([float(r) for r in args.radii.split(",")] if args.radii
             else inst.spec.end_radii if inst is not None else None)
    text = describe(M, x0, radii)
    write_text(config.out / "describe.txt", text + "\n")
    console.print(text)
    return EXIT_OK


def cmd_dist(config: RunConfig, args: argparse.Namespace) -> int:
    """Distance to the --source node set, written as field CSV plus a summary."""
    M, _, x0 = _manifold(config)
    K = _parse_source(M, x0, args.source)
    field = distance_to_set(M, K, backend=config.backend)
    export_field_csv(M, field, config.out / "dist.csv")
    summary = "\n".join([
        f"sources = {K.size}",
        f"reliable_nodes = {int(field.reliable.sum())}",
        f"nodes = {M.n_nodes}",
        f"backend = {field.backend}",
    ])
    write_text(config.out / "dist_report.txt", summary + "\n")
    console.print(summary)
    return EXIT_OK


def cmd_limit(config: RunConfig, args: argparse.Namespace) -> int:
    """busemann, horo and dl: one certified limit field with its report."""
    M, inst, x0 = _manifold(config)
    kwargs = {"backend": config.backend, "tolerances": Tolerances.for_manifold(M, **config.tolerances)}
    if inst is not None:
        kwargs["eval_fraction"] = inst.spec.eval_fraction

    if config.command == "busemann":
        start, targets = _targets(M, inst, x0, args)
        field, report = busemann(M, trace_ray(M, start, targets, kwargs["tolerances"]), x0, **kwargs)
    elif config.command == "horo":
        _, targets = _targets(M, inst, x0, args)
        field, report = horofunction(M, targets, x0, **kwargs)
    else:
        if inst is None or not args.end or args.end not in inst.set_sequences:
            choices = ", ".join(inst.set_sequences) if inst is not None else "none"
            raise UsageError(f"dl needs --scenario and --end (choose from {choices})")
        field, report = dl_function(M, inst.set_sequences[args.end], x0, **kwargs)
    return _write_limit(config, M, field, report)


def run_command(config: RunConfig, args: argparse.Namespace) -> int:
    """Execute one validated command and return its exit status."""
    if config.command == "verify":
        return cmd_verify(config)
    if config.command == "describe":
        return cmd_describe(config, args)
    if config.command == "dist":
        return cmd_dist(config, args)
    return cmd_limit(config, args)


def _print_run(run) -> None:
    table = Table(title=f"{run['name']}: {'pass' if run['passed'] else 'fail'}")
    table.add_column("check")
    table.add_column("status")
    table.add_column("metric", justify="right")
    table.add_column("tolerance", justify="right")
    for result in run["results"]:
        style = "green" if result.passed else "red"
        table.add_row(result.check, f"[{style}]{result.status}[/{style}]",
                      format_value(float(result.metric)), format_value(float(result.tolerance)))
    console.print(table)


def print_tolerances(tol: Tolerances) -> None:
    table = Table(title="Tolerances")
    table.add_column("name")
    table.add_column("value", justify="right")
    table.add_column("rule")
    for row in tol.table():
        table.add_row(*row)
    console.print(table)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    setup_logging(args.verbose)

    if args.help_tolerances:
        name = getattr(args, "scenario", None) or "plane"
        M, _ = scenario(name)
        print_tolerances(Tolerances.for_manifold(M))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        config = _config(args)
        return run_command(config, args)
    except ValidationError as e:
        logger.error("Invalid configuration: %s", e.errors()[0]["msg"])
        return EXIT_USAGE
    except SequenceError as e:
        logger.error("%s", e)
        return EXIT_SEQUENCE
    except StabilizationError as e:
        logger.error("%s", e)
        return EXIT_UNCONVERGED
    except (HorolabError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
