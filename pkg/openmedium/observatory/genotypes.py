"""Genotype extraction and the registry the observatory keeps across frames."""
import logging
from dataclasses import asdict, dataclass

import pandas as pd

from ..utils.calculations import fnv1a64
from ..worlds.rules import TYPE_LETTERS

logger = logging.getLogger(__name__)

CHAIN, NON_CHAIN, SINGLETON = "chain", "non-chain", "singleton"
CAP = "e"
MIN_CHAIN_ATOMS = 3

GENOTYPE_COLUMNS = ["genotype_id", "sequence", "first_seen", "last_seen", "abundance", "max_abundance"]


@dataclass
class GenotypeRecord:
    genotype_id: int
    canonical: str
    first_seen: int
    last_seen: int
    abundance: int = 0
    max_abundance: int = 0


@dataclass(frozen=True)
class Genotype:
    kind: str
    canonical: str
    genotype_id: int

    @property
    def length(self) -> int:
        return len(self.canonical)


def soup_genotype(body: bytes) -> Genotype:
    """Soup canonical form is one hex digit per cell; the id hashes the raw cells."""
    return Genotype("soup", "".join(f"{c:x}" for c in body), fnv1a64(bytes(body)))


def chain_genotype(payload: str) -> Genotype:
    """A capped chain reads the same from either end; the smaller reading is canonical."""
    canonical = min(payload, payload[::-1])
    return Genotype(CHAIN, canonical, fnv1a64(canonical.encode()))


def chem_genotype(component, types, partners) -> Genotype:
    letters = [TYPE_LETTERS[int(types[a])] for a in component]
    if len(component) == 1:
        return Genotype(SINGLETON, letters[0], fnv1a64(letters[0].encode()))
    path = _chain_order(component, types, partners)
    if path is not None:
        return chain_genotype("".join(TYPE_LETTERS[int(types[a])] for a in path[1:-1]))
    multiset = sorted(f"{TYPE_LETTERS[int(types[a])]}{len(partners[a])}" for a in component)
    canonical = "~" + ",".join(multiset)
    return Genotype(NON_CHAIN, canonical, fnv1a64(canonical.encode()))


def _chain_order(component, types, partners):
    """Atoms in path order for an e-capped simple path of 3+ atoms, else None."""
    if len(component) < MIN_CHAIN_ATOMS:
        return None
    degrees = {a: len(partners[a]) for a in component}
    ends = [a for a, d in degrees.items() if d == 1]
    if len(ends) != 2 or any(d not in (1, 2) for d in degrees.values()):
        return None
    path = [min(ends)]
    previous = None
    while len(path) < len(component):
        nxt = [p for p in partners[path[-1]] if p != previous]
        if len(nxt) != 1:
            return None
        previous = path[-1]
        path.append(nxt[0])
    letters = [TYPE_LETTERS[int(types[a])] for a in path]
    if letters[0] != CAP or letters[-1] != CAP or CAP in letters[1:-1]:
        return None
    return path


def extract_genotype(snapshot, item) -> Genotype:
    """Soup organisms read their body cells; atom components read the bond graph."""
    if hasattr(snapshot, "cells"):
        return soup_genotype(snapshot.body(item))
    return chem_genotype(item, snapshot.types, snapshot.partners())


class GenotypeRegistry:
    def __init__(self):
        self.records: dict[int, GenotypeRecord] = {}
        self.history: list[tuple] = []

    def __len__(self):
        return len(self.records)

    def __contains__(self, genotype_id):
        return genotype_id in self.records

    def _record(self, genotype_id, canonical, step) -> tuple:
        record = self.records.get(genotype_id)
        if record is None:
            record = GenotypeRecord(genotype_id, canonical, first_seen=step, last_seen=step)
            self.records[genotype_id] = record
            logger.debug("new genotype %016x at step %d", genotype_id, step)
            return record, True
        return record, False

    def observe_birth(self, genotype_id: int, canonical: str, step: int) -> bool:
        record, new = self._record(genotype_id, canonical, step)
        record.abundance += 1
        record.last_seen = step
        record.max_abundance = max(record.max_abundance, record.abundance)
        return new

    def observe_death(self, genotype_id: int, step: int) -> None:
        record = self.records.get(genotype_id)
        if record is not None:
            record.abundance = max(0, record.abundance - 1)
            record.last_seen = step

    def observe_abundances(self, counts: dict, canonicals: dict, step: int) -> tuple:
        """Set abundances from a census; returns (new ids, summed increases, summed decreases)."""
        new, births, deaths = [], 0, 0
        for genotype_id, record in self.records.items():
            if genotype_id not in counts and record.abundance:
                deaths += record.abundance
                record.abundance = 0
        for genotype_id in sorted(counts):
            record, is_new = self._record(genotype_id, canonicals[genotype_id], step)
            if is_new:
                new.append(genotype_id)
            delta = counts[genotype_id] - record.abundance
            births += max(delta, 0)
            deaths += max(-delta, 0)
            record.abundance = counts[genotype_id]
            record.last_seen = step
            record.max_abundance = max(record.max_abundance, record.abundance)
        return new, births, deaths

    def live(self) -> dict:
        return {gid: r.abundance for gid, r in self.records.items() if r.abundance > 0}

    def record_frame(self, step: int) -> None:
        self.history.append((step, self.live()))

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {**asdict(r), "genotype_id": f"{r.genotype_id:016x}", "sequence": r.canonical}
            for r in sorted(self.records.values(), key=lambda r: (r.first_seen, r.genotype_id))
        ]
        return pd.DataFrame(rows, columns=GENOTYPE_COLUMNS)

    def to_dict(self) -> dict:
        return {
            "records": [asdict(r) for r in sorted(self.records.values(), key=lambda r: r.genotype_id)],
            "history": [[step, sorted([gid, n] for gid, n in live.items())] for step, live in self.history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenotypeRegistry":
        registry = cls()
        for item in data.get("records", []):
            registry.records[item["genotype_id"]] = GenotypeRecord(**item)
        registry.history = [(step, {gid: n for gid, n in live}) for step, live in data.get("history", [])]
        return registry
