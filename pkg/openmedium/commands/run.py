import logging
import sys

from ..utils.errors import Extinction
from ..utils.simulation import Experiment
from . import ExitStatus, load_config, world_summary

logger = logging.getLogger(__name__)


def register(subparsers):
    p = subparsers.add_parser("run", help="start a run from a config file")
    p.add_argument("config", nargs="?", help="key = value config file (defaults apply when omitted)")
    p.add_argument("-o", "--out", dest="out_dir", help="output directory (overrides output_dir)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key; repeatable")
    p.add_argument("--no-observatory", action="store_true", help="run without metrics and genotype analysis")
    p.add_argument("--fail-on-extinction", action="store_true", help="exit 1 if the population dies out")
    p.set_defaults(handler=cmd_run)


def cmd_run(args) -> ExitStatus:
    overrides = list(args.overrides)
    if args.out_dir:
        overrides.append(f"output_dir={args.out_dir}")
    cfg = load_config(args.config, overrides)
    result = Experiment(cfg, observatory=not args.no_observatory, progress=sys.stderr.isatty()).start()
    print(f"{world_summary(result.world)} events={result.event_hash:016x} out={cfg.output_dir}")
    if result.extinct:
        logger.warning("population died out at step %d", result.world.clock)
        if args.fail_on_extinction:
            raise Extinction(result.world.clock)
    return ExitStatus.OK
