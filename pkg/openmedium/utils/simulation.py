"""The step loop and the run/resume entry points built on it."""
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from tqdm import tqdm

from ..observatory import Observatory
from ..observatory.audit import audit
from ..worlds import make_world
from .checkpoint import checkpoint_load, checkpoint_name, checkpoint_save
from .config import RUN_ONLY_KEYS, config_parse, config_text
from .errors import AuditViolation
from .events import Event, EventLog
from .rng import RngStreams

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.log"
CONFIG_FILE = "config.conf"


@dataclass
class RunResult:
    world: object
    rngs: RngStreams
    steps_run: int = 0
    frames: int = 0
    checkpoints: list = field(default_factory=list)
    audit_failures: list = field(default_factory=list)
    event_hash: int = 0

    @property
    def extinct(self) -> bool:
        return self.world.extinct


def initial_census(world):
    return world.expected_census() if world.kind == "atoms" else None


def steps_to_frame(clock: int, interval: int) -> int:
    """Steps up to and including the next one that starts on a multiple of ``interval``."""
    return (-clock) % interval + 1


def steps_to_checkpoint(clock: int, every: int) -> int:
    return (-clock) % every or every


def run_loop(world, config, hooks=(), rngs=None, event_log=None, run_dir=None, progress=False, census=None) -> RunResult:
    """Advance ``config.steps`` steps (fewer if the population dies out).

    Steps run in batches that end on the next frame or checkpoint, so the
    world can take them in one call. A frame is taken after every step
    whose starting clock is a multiple of ``metrics_interval``; the audit
    runs on each frame and after the last step whether or not any hook is
    attached. Checkpoints go to ``run_dir`` at multiples of the checkpoint
    interval and at the end.
    """
    rngs = rngs if rngs is not None else world.rngs
    event_log = event_log if event_log is not None else EventLog()
    census = census if census is not None else initial_census(world)
    result = RunResult(world=world, rngs=rngs)
    interval = config.metrics_interval
    every = config.effective_checkpoint_interval
    last_audit = None

    def check(snapshot):
        report = audit(snapshot, census)
        if report.ok:
            return
        result.audit_failures.append(report)
        event_log.write(Event(snapshot.step, "audit_violation", detail=f"{report.detail}; expected {report.expected}, actual {report.actual}"))
        event_log.flush()
        if config.strict_audit:
            raise AuditViolation(report.step, report.detail, report.expected, report.actual)
        logger.warning("audit at step %d: %s", report.step, report.detail)

    def save():
        path = Path(run_dir) / checkpoint_name(world.clock)
        event_log.flush()
        checkpoint_save(world, rngs, path, config, event_log.rolling_hash, event_log.offset)
        result.checkpoints.append(path)
        for hook in hooks:
            hook.on_checkpoint(world.clock, path)

    bar = tqdm(total=config.steps, disable=not progress, file=sys.stderr, unit="step", leave=False)
    try:
        while result.steps_run < config.steps and not world.extinct:
            batch = min(config.steps - result.steps_run, steps_to_frame(world.clock, interval))
            if run_dir is not None:
                batch = min(batch, steps_to_checkpoint(world.clock, every))
            taken = world.run_steps(batch)
            result.steps_run += taken
            events = world.drain_events()
            for event in events:
                event_log.write(event)
            for hook in hooks:
                hook.on_events(events)
            if (world.clock - 1) % interval == 0:
                snapshot = world.snapshot()
                result.frames += 1
                last_audit = world.clock
                check(snapshot)
                for hook in hooks:
                    hook.on_frame(snapshot)
            if run_dir is not None and world.clock % every == 0:
                save()
            bar.update(taken)
        if last_audit != world.clock:
            check(world.snapshot())
        if run_dir is not None and (not result.checkpoints or result.checkpoints[-1].name != checkpoint_name(world.clock)):
            save()
    finally:
        bar.close()
        event_log.flush()
    result.event_hash = event_log.rolling_hash
    return result


class Experiment:
    """A run directory: config, event log, checkpoints and observatory output."""

    def __init__(self, config, observatory: bool = True, progress: bool = False):
        self.config = config
        self.run_dir = Path(config.output_dir)
        self.observatory = observatory
        self.progress = progress
        self.checkpoint = None

    def _hooks(self, resume_step=None):
        if not self.observatory:
            return []
        return [Observatory(self.config, self.run_dir, resume_step=resume_step)]

    def _execute(self, world, rngs, event_log, hooks) -> RunResult:
        try:
            return run_loop(
                world, self.config, hooks, rngs=rngs, event_log=event_log,
                run_dir=self.run_dir, progress=self.progress,
            )
        finally:
            event_log.close()
            for hook in hooks:
                hook.close()

    def start(self, genome: bytes | None = None) -> RunResult:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / CONFIG_FILE).write_text(config_text(self.config), encoding="utf-8")
        rngs = RngStreams(self.config.seed)
        world = make_world(self.config, rngs, genome)
        event_log = EventLog(self.run_dir / EVENTS_FILE)
        seeded = world.drain_events()
        for event in seeded:
            event_log.write(event)
        hooks = self._hooks()
        for hook in hooks:
            hook.on_events(seeded)
        logger.info("run %s: %s world, seed %d, %d steps", self.run_dir, self.config.world_kind, self.config.seed, self.config.steps)
        return self._execute(world, rngs, event_log, hooks)

    @classmethod
    def resume(cls, checkpoint_path, extra_steps: int, observatory: bool = True, progress: bool = False) -> "Experiment":
        """Continue a checkpoint in its own directory for ``extra_steps`` more steps."""
        checkpoint_path = Path(checkpoint_path)
        run_dir = checkpoint_path.parent
        run_keys = {"steps": extra_steps, "output_dir": str(run_dir)}
        saved = run_dir / CONFIG_FILE
        if saved.exists():
            previous = config_parse(saved.read_text(encoding="utf-8"))
            for key in RUN_ONLY_KEYS:
                run_keys.setdefault(key, getattr(previous, key))
        ckpt = checkpoint_load(checkpoint_path, **run_keys)
        experiment = cls(ckpt.config, observatory=observatory, progress=progress)
        experiment.checkpoint = ckpt
        return experiment

    def continue_run(self) -> RunResult:
        ckpt = self.checkpoint
        event_log = EventLog(self.run_dir / EVENTS_FILE, rolling_hash=ckpt.event_hash, offset=ckpt.event_offset)
        event_log.last_step = ckpt.step
        hooks = self._hooks(resume_step=ckpt.step)
        logger.info("resuming %s at step %d for %d steps", self.run_dir, ckpt.step, self.config.steps)
        return self._execute(ckpt.world, ckpt.rngs, event_log, hooks)

