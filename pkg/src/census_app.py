"""
Command-line entry point.

    python -m src.census_app formula [2,3,3]x10
    python -m src.census_app verify --grid m<=2,k<=5
    python -m src.census_app census [2,2]x4 --format json
    python -m src.census_app example 3 8 10
    python -m src.census_app sweep --max-k 40
"""
import argparse
import logging
import sys
from typing import List, Optional

from src.controller.controller import EXIT_REFUSED, Controller
from src.data.config_manager import ConfigManager
from src.data.report_writer import FORMATS
from src.model.rank_histogram import Engine
from src.model.run_config import GridSpec, RunConfig
from src.model.shape import Shape

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s %(levelname)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", choices=[Engine.NAIVE.value, Engine.PREFIX.value], default=None,
                        help="census engine (default from config: prefix)")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--shards", type=int, default=None, help="shard count, a power of two")
    common.add_argument("--checkpoint", default=None, help="resumable checkpoint file")
    common.add_argument("--format", dest="output_format", choices=FORMATS, default=None,
                        help="output format (default from config: table)")
    common.add_argument("--big", action="store_true", help="lift the free-bit limit")
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="log level")
    common.add_argument("--config-dir", default=None, help="configuration directory")
    common.add_argument("--no-progress", action="store_true", help="hide the progress bar")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="persym-census",
        description="Rank census and closed-form checks for stacked Hankel matrices over F2.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    formula = sub.add_parser("formula", parents=[common],
                             help="conjectured full-rank count of a family")
    formula.add_argument("target", nargs="+", help="a shape like [2,3,3]x10, or m delta k")

    verify = sub.add_parser("verify", parents=[common],
                            help="census shapes and compare with the conjecture")
    verify.add_argument("shapes", nargs="*", help="shapes like [1,2]x5")
    verify.add_argument("--grid", default=None, help="shape grid, e.g. m<=3,s<=3,k<=6,F<=22")

    census = sub.add_parser("census", parents=[common], help="full rank histogram of one shape")
    census.add_argument("shape", help="shape like [2,2]x4")

    example = sub.add_parser("example", parents=[common],
                             help="the m-column-shift construction for (m, delta, k)")
    example.add_argument("m", type=int)
    example.add_argument("delta", type=int)
    example.add_argument("k", type=int)

    sweep = sub.add_parser("sweep", parents=[common], help="exact identity checks between closed forms")
    sweep.add_argument("--max-k", type=int, default=40)
    sweep.add_argument("--max-m", type=int, default=8)
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
        stream=sys.stderr,
    )


def build_run_config(args: argparse.Namespace, config_manager: ConfigManager) -> RunConfig:
    """
    Turn parsed arguments into a RunConfig, filling unset flags from the
    configuration file.

    Raises:
        Shape.ShapeError: If a shape argument is malformed.
        ValueError: If the grid or the formula target is malformed.
    """
    shapes: List[Shape] = []
    triple = None
    grid = None
    if args.command == "formula":
        if len(args.target) == 3 and all(t.lstrip("-").isdigit() for t in args.target):
            triple = tuple(int(t) for t in args.target)
        elif len(args.target) == 1:
            shapes = [Shape.parse(args.target[0])]
        else:
            raise ValueError(f"formula expects one shape or m delta k, got {' '.join(args.target)}")
    elif args.command == "verify":
        shapes = [Shape.parse(text) for text in args.shapes]
        if args.grid:
            grid = GridSpec.parse(args.grid)
    elif args.command == "census":
        shapes = [Shape.parse(args.shape)]
    elif args.command == "example":
        triple = (args.m, args.delta, args.k)

    return RunConfig(
        command=args.command,
        shapes=shapes,
        grid=grid,
        triple=triple,
        engine=Engine(args.engine or config_manager.default_engine),
        workers=config_manager.default_workers if args.workers is None else args.workers,
        shards=config_manager.default_shards if args.shards is None else args.shards,
        checkpoint=args.checkpoint,
        output_format=args.output_format or config_manager.output_format,
        big=args.big,
        out=args.out,
        max_k=getattr(args, "max_k", 40),
        max_m=getattr(args, "max_m", 8),
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config_manager = ConfigManager(config_dir=args.config_dir)
    _configure_logging(args.log_level or config_manager.log_level)

    try:
        config = build_run_config(args, config_manager)
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REFUSED

    controller = Controller(config_manager, progress=not args.no_progress)
    try:
        return controller.run(config)
    except ValueError as e:
        logger.error(f"{config.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except KeyboardInterrupt:
        logger.warning("Interrupted; finished shards stay in the checkpoint")
        return 130


if __name__ == "__main__":
    sys.exit(main())
