"""Tests for genotypes.py - canonical forms and the registry."""

from openmedium.observatory.genotypes import (
    CHAIN,
    NON_CHAIN,
    SINGLETON,
    GenotypeRegistry,
    chain_genotype,
    chem_genotype,
    soup_genotype,
)
from openmedium.commands.verify import _max_chain_abundance
from openmedium.observatory.metrics import chem_organisms
from openmedium.utils.calculations import fnv1a64
from openmedium.utils.rng import RngStreams
from openmedium.worlds import make_world
from openmedium.worlds.rules import TYPE_LETTERS


def chain(letters):
    types = [TYPE_LETTERS.index(ch) for ch in letters]
    partners = [[] for _ in letters]
    for k in range(len(letters) - 1):
        partners[k].append(k + 1)
        partners[k + 1].append(k)
    return list(range(len(letters))), types, partners


def test_soup_genotype_hashes_raw_cells():
    genotype = soup_genotype(bytes([1, 15, 0]))
    assert genotype.canonical == "1f0"
    assert genotype.genotype_id == fnv1a64(bytes([1, 15, 0]))
    assert genotype.length == 3


def test_chain_reads_payload_between_caps():
    genotype = chem_genotype(*chain("eabbe"))
    assert genotype.kind == CHAIN
    assert genotype.canonical == "abb"


def test_chain_direction_does_not_matter():
    assert chem_genotype(*chain("eabbe")).genotype_id == chem_genotype(*chain("ebbae")).genotype_id


def test_uncapped_path_is_not_a_chain():
    assert chem_genotype(*chain("aabb")).kind == NON_CHAIN


def test_ring_is_not_a_chain():
    component, types, partners = chain("eabe")
    partners[0].append(3)
    partners[3].append(0)
    genotype = chem_genotype(component, types, partners)
    assert genotype.kind == NON_CHAIN
    assert genotype.canonical == "~a2,b2,e2,e2"


def test_singleton():
    genotype = chem_genotype([0], [TYPE_LETTERS.index("a")], [[]])
    assert (genotype.kind, genotype.canonical) == (SINGLETON, "a")


def test_registry_births_and_deaths():
    registry = GenotypeRegistry()
    assert registry.observe_birth(7, "", 0)
    assert not registry.observe_birth(7, "", 5)
    registry.observe_death(7, 9)
    record = registry.records[7]
    assert (record.first_seen, record.last_seen, record.abundance, record.max_abundance) == (0, 9, 1, 2)
    assert registry.live() == {7: 1}


def test_registry_abundances_from_census():
    registry = GenotypeRegistry()
    new, births, deaths = registry.observe_abundances({1: 3, 2: 1}, {1: "ab", 2: "ba"}, 10)
    assert (new, births, deaths) == ([1, 2], 4, 0)
    new, births, deaths = registry.observe_abundances({1: 1}, {1: "ab"}, 20)
    assert (new, births, deaths) == ([], 0, 3)
    assert registry.live() == {1: 1}
    assert registry.records[2].last_seen == 10


def test_registry_frame_and_dict_round_trip():
    registry = GenotypeRegistry()
    registry.observe_abundances({0xFFFF_FFFF_FFFF_FFFF: 2}, {0xFFFF_FFFF_FFFF_FFFF: "ab"}, 3)
    registry.record_frame(3)
    frame = registry.to_frame()
    assert list(frame.columns) == ["genotype_id", "sequence", "first_seen", "last_seen", "abundance", "max_abundance"]
    assert frame.iloc[0]["genotype_id"] == "ffffffffffffffff"
    restored = GenotypeRegistry.from_dict(registry.to_dict())
    assert restored.records == registry.records
    assert restored.history == registry.history


def test_chain_id_ignores_reading_direction(atoms_config):
    assert chain_genotype("ba") == chain_genotype("ab")
    assert chain_genotype("ba").canonical == "ab"
    world = make_world(atoms_config.replace(payload="ba"), RngStreams(0))
    counts, _, _ = chem_organisms(world.snapshot())
    assert counts.get(chain_genotype("ba").genotype_id) == 1


def test_replicator_check_counts_a_reversed_payload(atoms_config):
    cfg = atoms_config.replace(payload="ba", food_count=0, cap_food_count=0, p_bond_break=0.0, p_state_reset=0.0)
    best, at = _max_chain_abundance(cfg, 1)
    assert (best, at) == (1, 1)
