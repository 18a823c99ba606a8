"""Command-line application: ``python -m openmedium <command>``."""
import argparse
import logging
import sys

from .commands import ExitStatus
from .commands import export, inspect, resume, run, verify
from .utils.errors import AuditViolation, CheckpointError, Extinction, OpenMediumError
from .utils.logs import ENV_VAR, setup_logging

logger = logging.getLogger(__name__)

COMMANDS = (run, resume, inspect, export, verify)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openmedium",
        description="Open-ended evolution in two media: an instruction soup and an atom chemistry.",
        epilog=(
            f"exit codes: 0 ok, 1 runtime failure, 2 usage or config error, 3 verification failed. "
            f"Log level comes from {ENV_VAR} (error|info|debug)."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()
    try:
        return int(args.handler(args))
    except (AuditViolation, Extinction, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.RUNTIME_FAILURE
    except (OpenMediumError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return ExitStatus.RUNTIME_FAILURE
    except Exception as exc:
        logger.exception("unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.RUNTIME_FAILURE


if __name__ == "__main__":
    sys.exit(main())
