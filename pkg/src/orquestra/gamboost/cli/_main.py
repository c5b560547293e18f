################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import argparse
import logging
import sys
from typing import Optional, Sequence

from ..errors import ConfigurationError, DataError, DomainError, NumericalError
from ._config import RunConfig, load_run_config
from ._stages import STAGES, run_stage

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIGURATION = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

SUBCOMMANDS = tuple(STAGES) + ("all",)

_EXIT_CODES = (
    (ConfigurationError, EXIT_CONFIGURATION),
    (DataError, EXIT_DATA),
    (DomainError, EXIT_DATA),
    (NumericalError, EXIT_NUMERICAL),
    (OSError, EXIT_IO),
)


def _origin(error: BaseException) -> str:
    """Public package of the innermost package frame the error passed."""
    package = __name__.rsplit(".", 2)[0]
    traceback = error.__traceback__
    module = __name__
    while traceback is not None:
        name = traceback.tb_frame.f_globals.get("__name__", "")
        if name.startswith(package):
            module = name
        traceback = traceback.tb_next
    return ".".join(part for part in module.split(".") if not part.startswith("_"))


def exit_code(error: BaseException) -> Optional[int]:
    for error_class, code in _EXIT_CODES:
        if isinstance(error, error_class):
            return code
    return None


def run(subcommand: str, cfg: RunConfig) -> int:
    """Run a subcommand and map failures to exit codes.

    Errors are reported on stderr as "<ErrorClass> in <module>: <message>".
    Unexpected exceptions propagate.
    """
    try:
        run_stage(subcommand, cfg)
    except Exception as error:
        code = exit_code(error)
        if code is None:
            raise
        print(
            f"{type(error).__name__} in {_origin(error)}: {error}", file=sys.stderr
        )
        return code
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamboost",
        description="Boosted structured additive probit regression pipeline.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="overrides the configured seed")
    parser.add_argument("--workers", type=int, help="parallel replicate workers")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_run_config(args.config).with_overrides(
            seed=args.seed, workers=args.workers, output_dir=args.out
        )
    except ConfigurationError as error:
        print(f"ConfigurationError in {_origin(error)}: {error}", file=sys.stderr)
        return EXIT_CONFIGURATION
    return run(args.subcommand, cfg)
