"""The observatory as a run-loop hook.

The engine thread only hands over immutable snapshots and finished events;
all analysis runs on one background worker, so frames are written in the
order they were taken and the world never waits on disk or pandas.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pandas as pd

from ..utils.checkpoint import checkpoint_name
from .detectors import STASIS, StasisVerdict, detect_stasis
from .genotypes import GenotypeRegistry, soup_genotype
from .metrics import METRICS_COLUMNS, metrics_frame

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
GENOTYPES_FILE = "genotypes.csv"
OBSERVATORY_LOG = "observatory.log"


def sidecar_path(checkpoint_path) -> Path:
    checkpoint_path = Path(checkpoint_path)
    return checkpoint_path.with_name(checkpoint_path.stem + ".obs.json")


class Observatory:
    def __init__(self, config, run_dir=None, resume_step: int | None = None):
        self.config = config
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.registry = GenotypeRegistry()
        self.frames = []
        self.verdict = None
        self.origin = 0
        self._births = self._deaths = self._new = 0
        self._pending = []
        self._futures = []
        self._metrics_fh = None
        self._log_fh = None
        self._executor = ThreadPoolExecutor(max_workers=1, thread_name_prefix="observatory")
        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            if resume_step is None:
                self._start_files()
            else:
                self._resume_files(resume_step)
        elif resume_step is not None:
            self.origin = resume_step

    # --- engine side ---

    def on_events(self, events) -> None:
        self._pending.extend(events)

    def on_frame(self, snapshot) -> None:
        self._submit(self._frame, snapshot, self._take())

    def on_checkpoint(self, step: int, path) -> None:
        self._submit(self._sidecar, step, path, self._take())

    def close(self) -> None:
        self._submit(self._apply, self._take())
        self._submit(self._finish)
        self._executor.shutdown(wait=True)
        for future in self._futures:
            future.result()
        self._futures = []

    def _take(self) -> list:
        batch, self._pending = self._pending, []
        return batch

    def _submit(self, fn, *args):
        self._futures.append(self._executor.submit(fn, *args))
        # keep only unfinished futures plus any that failed
        self._futures = [f for f in self._futures if not f.done() or f.exception() is not None]

    # --- worker side ---

    def _apply(self, events) -> None:
        for event in events:
            if event.kind == "birth":
                canonical = "" if event.body is None else soup_genotype(event.body).canonical
                if self.registry.observe_birth(event.genotype, canonical, event.step):
                    self._new += 1
                self._births += 1
            elif event.kind == "death":
                self.registry.observe_death(event.genotype, event.step)
                self._deaths += 1

    def _frame(self, snapshot, events) -> None:
        self._apply(events)
        if hasattr(snapshot, "cells"):
            frame = metrics_frame(
                snapshot, self.registry, births=self._births, deaths=self._deaths,
                new=self._new, parasite_fraction=self.config.parasite_fraction,
            )
        else:
            frame = metrics_frame(snapshot, self.registry)
        self._births = self._deaths = self._new = 0
        self.frames.append(frame)
        if self._metrics_fh is not None:
            pd.DataFrame([frame.to_row()], columns=METRICS_COLUMNS).to_csv(
                self._metrics_fh, header=False, index=False, lineterminator="\n",
            )
        self._check_stasis(snapshot.step)

    def _check_stasis(self, step: int) -> None:
        cfg = self.config
        self.registry.record_frame(step)
        horizon = step - cfg.stasis_window
        self.registry.history = [(s, live) for s, live in self.registry.history if s > horizon]
        first_seen = {gid: r.first_seen for gid, r in self.registry.records.items()}
        verdict = detect_stasis(
            self.registry.history, first_seen, cfg.stasis_window, cfg.stasis_persistence,
            cfg.stasis_min_abundance, origin=self.origin,
        )
        previous = self.verdict.status if self.verdict is not None else None
        if verdict.status != previous:
            logger.info("step %d: evolution %s", step, verdict.status)
            if verdict.status == STASIS:
                self._log({"step": step, "kind": "stasis_flag", "window": list(verdict.window)})
        self.verdict = verdict

    def _log(self, record: dict) -> None:
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            self._log_fh.flush()

    def _sidecar(self, step: int, path, events) -> None:
        self._apply(events)
        state = {
            "step": step,
            "origin": self.origin,
            "counters": [self._births, self._deaths, self._new],
            "verdict": None if self.verdict is None else self.verdict.status,
            "registry": self.registry.to_dict(),
        }
        target = sidecar_path(path)
        tmp = target.with_name(target.name + ".tmp")
        tmp.write_text(json.dumps(state, sort_keys=True), encoding="utf-8")
        tmp.replace(target)
        if self._metrics_fh is not None:
            self._metrics_fh.flush()

    def _finish(self) -> None:
        if self.run_dir is not None:
            self.registry.to_frame().to_csv(self.run_dir / GENOTYPES_FILE, index=False, lineterminator="\n")
        for fh in (self._metrics_fh, self._log_fh):
            if fh is not None:
                fh.close()
        self._metrics_fh = self._log_fh = None

    # --- files ---

    def _start_files(self) -> None:
        self._metrics_fh = open(self.run_dir / METRICS_FILE, "w", encoding="utf-8", newline="")
        self._metrics_fh.write(",".join(METRICS_COLUMNS) + "\n")
        self._log_fh = open(self.run_dir / OBSERVATORY_LOG, "w", encoding="utf-8")

    def _resume_files(self, step: int) -> None:
        """Pick the registry up from the checkpoint sidecar and drop output written after it."""
        sidecar = sidecar_path(self.run_dir / checkpoint_name(step))
        if sidecar.exists():
            state = json.loads(sidecar.read_text(encoding="utf-8"))
            self.registry = GenotypeRegistry.from_dict(state["registry"])
            self.origin = state.get("origin", 0)
            self._births, self._deaths, self._new = state.get("counters", [0, 0, 0])
            if state.get("verdict"):
                self.verdict = StasisVerdict((0, step), state["verdict"])
        else:
            logger.warning("no observatory sidecar for step %d; genotype history restarts here", step)
            self.origin = step

        metrics = self.run_dir / METRICS_FILE
        if metrics.exists():
            table = pd.read_csv(metrics, dtype=str, keep_default_na=False)
            table = table[table["step"].astype(int) <= step]
        else:
            table = pd.DataFrame(columns=METRICS_COLUMNS)
        table.to_csv(metrics, index=False, lineterminator="\n")
        self._metrics_fh = open(metrics, "a", encoding="utf-8", newline="")

        log_path = self.run_dir / OBSERVATORY_LOG
        kept = []
        if log_path.exists():
            kept = [line for line in log_path.read_text(encoding="utf-8").splitlines() if line and json.loads(line)["step"] <= step]
        log_path.write_text("".join(line + "\n" for line in kept), encoding="utf-8")
        self._log_fh = open(log_path, "a", encoding="utf-8")
