"""Parasite and stasis detection. Both are pure functions of their inputs."""
from dataclasses import dataclass

ACTIVE, STASIS, INDETERMINATE = "active", "stasis", "indeterminate"


def foreign_fraction(org) -> float | None:
    """Share of foreign instructions in the last full window, or the running one before it."""
    if org.window_done:
        own, foreign = org.last_own, org.last_foreign
    else:
        own, foreign = org.executed_own, org.executed_foreign
    total = own + foreign
    return foreign / total if total else None


def detect_parasites(snapshot, parasite_fraction: float = 0.5) -> list[int]:
    flagged = []
    for org in snapshot.organisms:
        share = foreign_fraction(org)
        if share is not None and share > parasite_fraction:
            flagged.append(org.id)
    return flagged


@dataclass(frozen=True)
class StasisVerdict:
    window: tuple
    status: str
    newest_persistent: int | None = None

    @property
    def active(self) -> bool:
        return self.status == ACTIVE


def _longest_persistence(frames, genotype_id, n_min) -> int:
    best = 0
    run_start = None
    previous = None
    for step, live in frames:
        if live.get(genotype_id, 0) >= n_min:
            if run_start is None:
                run_start = step
            previous = step
            best = max(best, previous - run_start)
        else:
            run_start = None
    return best


def detect_stasis(history, first_seen: dict, window: int, persistence: int, n_min: int, origin: int | None = None) -> StasisVerdict:
    """Active when a genotype first seen inside the last ``window`` steps held
    ``n_min`` or more individuals across frames spanning ``persistence`` steps.

    ``history`` is a list of (step, {genotype_id: abundance}) frames.
    """
    if not history:
        return StasisVerdict((0, 0), INDETERMINATE)
    now = history[-1][0]
    start = now - window
    origin = history[0][0] if origin is None else origin
    if now - origin < window:
        return StasisVerdict((max(origin, start), now), INDETERMINATE)
    frames = [(step, live) for step, live in history if step > start]
    candidates = sorted(
        (gid for gid, seen in first_seen.items() if seen > start),
        key=lambda gid: (first_seen[gid], gid),
        reverse=True,
    )
    for gid in candidates:
        if _longest_persistence(frames, gid, n_min) >= persistence:
            return StasisVerdict((start, now), ACTIVE, gid)
    return StasisVerdict((start, now), STASIS)
