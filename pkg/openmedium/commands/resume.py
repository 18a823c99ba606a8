import sys

from ..utils.errors import Extinction, UsageError
from ..utils.simulation import Experiment
from . import ExitStatus, world_summary


def register(subparsers):
    p = subparsers.add_parser("resume", help="continue a run from a checkpoint, in its own directory")
    p.add_argument("checkpoint", help="ckpt_<step>.vwld file")
    p.add_argument("extra_steps", type=int, help="number of further steps")
    p.add_argument("--no-observatory", action="store_true")
    p.add_argument("--fail-on-extinction", action="store_true")
    p.set_defaults(handler=cmd_resume)


def cmd_resume(args) -> ExitStatus:
    if args.extra_steps < 0:
        raise UsageError("extra_steps must be ≥ 0")
    experiment = Experiment.resume(
        args.checkpoint, args.extra_steps, observatory=not args.no_observatory, progress=sys.stderr.isatty(),
    )
    result = experiment.continue_run()
    print(f"{world_summary(result.world)} events={result.event_hash:016x} out={experiment.run_dir}")
    if result.extinct and args.fail_on_extinction:
        raise Extinction(result.world.clock)
    return ExitStatus.OK
