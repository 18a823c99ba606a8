"""Conservation audits over snapshots: atom census per type, soup memory accounting."""
import logging
from dataclasses import dataclass

from ..worlds.rules import TYPE_LETTERS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AuditReport:
    step: int
    ok: bool
    detail: str = ""
    expected: object = None
    actual: object = None


def audit_soup(snapshot) -> AuditReport:
    bodies = sum(o.length for o in snapshot.organisms)
    allocations = sum(o.child_length for o in snapshot.organisms if o.child_start >= 0)
    total = bodies + allocations + snapshot.free_cells
    if total != snapshot.soup_size:
        return AuditReport(
            snapshot.step, False,
            f"bodies {bodies} + allocations {allocations} + free {snapshot.free_cells} != soup_size",
            snapshot.soup_size, total,
        )
    return AuditReport(snapshot.step, True)


def audit_chem(snapshot, initial_census) -> AuditReport:
    for t, (want, have) in enumerate(zip(initial_census, snapshot.census)):
        if int(want) != int(have):
            return AuditReport(
                snapshot.step, False, f"census of type {TYPE_LETTERS[t]} changed", int(want), int(have),
            )
    xs, ys = snapshot.xs, snapshot.ys
    for a, b in snapshot.bonds:
        dx = abs(int(xs[a]) - int(xs[b]))
        dy = abs(int(ys[a]) - int(ys[b]))
        if min(dx, snapshot.width - dx) > 1 or min(dy, snapshot.height - dy) > 1:
            return AuditReport(snapshot.step, False, f"bond {a}-{b} stretched past one cell", 1, max(dx, dy))
    return AuditReport(snapshot.step, True)


def audit(snapshot, initial_census=None) -> AuditReport:
    if hasattr(snapshot, "cells"):
        return audit_soup(snapshot)
    return audit_chem(snapshot, initial_census)
