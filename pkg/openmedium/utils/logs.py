import logging
import os
import sys

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
ENV_VAR = "OPENMEDIUM_LOG_LEVEL"


def setup_logging(level: str | None = None) -> int:
    """Configure the root logger from OPENMEDIUM_LOG_LEVEL (error|info|debug).

    Log lines carry wall-clock timestamps and go to stderr; they are never
    part of the canonical outputs (events.log, metrics.csv, checkpoints).
    """
    name = (level or os.environ.get(ENV_VAR) or "info").strip().lower()
    numeric = LOG_LEVELS.get(name)
    if numeric is None:
        print(f"unknown {ENV_VAR}={name!r}, falling back to info", file=sys.stderr)
        numeric = logging.INFO
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s", "%H:%M:%S"))
    root.addHandler(handler)
    root.setLevel(numeric)
    return numeric
