"""World events and the canonical, line-delimited event log."""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

EVENT_KINDS = ("birth", "death", "reap", "error", "mutation", "audit_violation", "stasis_flag", "extinction")
FIELD_ORDER = ("step", "kind", "org", "parent", "genotype", "addr", "detail")


@dataclass(frozen=True, slots=True)
class Event:
    step: int
    kind: str
    org: int | None = None
    parent: int | None = None
    genotype: int | None = None
    addr: int | None = None
    detail: str | None = None
    # genome of a newborn, kept in memory only
    body: bytes | None = field(default=None, compare=False, repr=False)

    def to_line(self) -> str:
        record = {
            "step": self.step,
            "kind": self.kind,
            "org": self.org,
            "parent": self.parent,
            "genotype": None if self.genotype is None else f"{self.genotype:016x}",
            "addr": self.addr,
            "detail": self.detail,
        }
        return json.dumps(record, separators=(",", ":"), ensure_ascii=False) + "\n"

    @classmethod
    def from_line(cls, line: str) -> "Event":
        record = json.loads(line)
        genotype = record.get("genotype")
        return cls(
            step=record["step"],
            kind=record["kind"],
            org=record.get("org"),
            parent=record.get("parent"),
            genotype=None if genotype is None else int(genotype, 16),
            addr=record.get("addr"),
            detail=record.get("detail"),
        )


def chain_hash(previous: int, data: bytes) -> int:
    digest = hashlib.blake2b(previous.to_bytes(8, "little") + data, digest_size=8).digest()
    return int.from_bytes(digest, "little")


class EventLog:
    """Appends events as JSON lines and keeps a rolling hash plus byte offset.

    With ``path=None`` nothing is written but hash and offset still advance,
    so checkpoints do not depend on whether a log file is attached.
    """

    def __init__(self, path: Path | None = None, rolling_hash: int = 0, offset: int = 0):
        self.path = Path(path) if path is not None else None
        self.rolling_hash = rolling_hash
        self.offset = offset
        self.last_step = 0
        self._fh = None
        if self.path is not None:
            self._open()

    def _open(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists() and self.path.stat().st_size > self.offset:
            # resuming from an older checkpoint: drop what came after it
            with open(self.path, "r+b") as fh:
                fh.truncate(self.offset)
        elif self.offset and (not self.path.exists() or self.path.stat().st_size < self.offset):
            logger.warning("event log %s is shorter than the checkpoint offset %d", self.path, self.offset)
        self._fh = open(self.path, "ab")

    def write(self, event: Event) -> None:
        if event.step < self.last_step:
            raise ValueError(f"event step {event.step} before {self.last_step}")
        self.last_step = event.step
        data = event.to_line().encode("utf-8")
        self.rolling_hash = chain_hash(self.rolling_hash, data)
        self.offset += len(data)
        if self._fh is not None:
            self._fh.write(data)

    def flush(self):
        if self._fh is not None:
            self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_events(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield Event.from_line(line)
