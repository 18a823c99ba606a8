"""Per-frame ecology summaries."""
from dataclasses import asdict, dataclass

from ..utils.calculations import dominant, fnv1a64, format_shannon, shannon_diversity
from .components import connected_components
from .detectors import detect_parasites
from .genotypes import CHAIN, chem_genotype, soup_genotype

METRICS_COLUMNS = [
    "step", "population", "free_resource", "genotype_richness", "shannon_diversity",
    "dominant_genotype_length", "births", "deaths", "parasite_count", "new_genotypes",
]


@dataclass(frozen=True)
class MetricsFrame:
    step: int
    population: int
    free_resource: int
    genotype_richness: int
    shannon_diversity: float
    dominant_genotype_length: int
    births: int
    deaths: int
    parasite_count: int
    new_genotypes: int

    def to_row(self) -> dict:
        row = asdict(self)
        row["shannon_diversity"] = format_shannon(self.shannon_diversity)
        return row


def _summary(live: dict, lengths: dict) -> tuple:
    top = dominant(live)
    return len(live), shannon_diversity(list(live.values())), lengths.get(top, 0) if top is not None else 0


def soup_frame(snapshot, registry, births: int, deaths: int, new: int, parasite_fraction: float) -> MetricsFrame:
    """Soup abundances come from birth and death events; bodies fill in canonical forms."""
    lengths = {}
    for org in snapshot.organisms:
        lengths.setdefault(org.genotype_id, org.length)
        record = registry.records.get(org.genotype_id)
        if record is not None and not record.canonical:
            body = snapshot.body(org)
            if fnv1a64(body) == org.genotype_id:
                record.canonical = soup_genotype(body).canonical
    live = {}
    for org in snapshot.organisms:
        live[org.genotype_id] = live.get(org.genotype_id, 0) + 1
    richness, shannon, top_length = _summary(live, lengths)
    return MetricsFrame(
        step=snapshot.step, population=len(snapshot.organisms), free_resource=snapshot.free_cells,
        genotype_richness=richness, shannon_diversity=shannon, dominant_genotype_length=top_length,
        births=births, deaths=deaths, parasite_count=len(detect_parasites(snapshot, parasite_fraction)),
        new_genotypes=new,
    )


def chem_organisms(snapshot) -> tuple:
    """Chain genotypes present in a snapshot: ({id: count}, {id: canonical}, free atoms)."""
    partners = snapshot.partners()
    counts, canonicals, free = {}, {}, 0
    for component in connected_components(snapshot):
        if len(component) == 1:
            free += 1
            continue
        genotype = chem_genotype(component, snapshot.types, partners)
        if genotype.kind != CHAIN:
            continue
        counts[genotype.genotype_id] = counts.get(genotype.genotype_id, 0) + 1
        canonicals[genotype.genotype_id] = genotype.canonical
    return counts, canonicals, free


def chem_frame(snapshot, registry) -> MetricsFrame:
    counts, canonicals, free = chem_organisms(snapshot)
    new, births, deaths = registry.observe_abundances(counts, canonicals, snapshot.step)
    lengths = {gid: len(canonical) for gid, canonical in canonicals.items()}
    richness, shannon, top_length = _summary(counts, lengths)
    return MetricsFrame(
        step=snapshot.step, population=sum(counts.values()), free_resource=free,
        genotype_richness=richness, shannon_diversity=shannon, dominant_genotype_length=top_length,
        births=births, deaths=deaths, parasite_count=0, new_genotypes=len(new),
    )


def metrics_frame(snapshot, registry, **soup_counts) -> MetricsFrame:
    if hasattr(snapshot, "cells"):
        return soup_frame(snapshot, registry, **soup_counts)
    return chem_frame(snapshot, registry)
