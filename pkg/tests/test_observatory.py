"""Tests for the observatory hook and the run artifacts it leaves behind."""

import json

import pytest

from openmedium.observatory import Observatory
from openmedium.observatory.detectors import ACTIVE
from openmedium.observatory.hooks import OBSERVATORY_LOG
from openmedium.utils.data_handler import (
    DEFAULT_RULES,
    missing_artifacts,
    read_run_table,
    resolve_input,
    rules_text,
)
from openmedium.utils.calculations import fnv1a64
from openmedium.utils.events import Event
from openmedium.utils.rng import RngStreams
from openmedium.utils.simulation import Experiment, run_loop
from openmedium.worlds import make_world


def test_frames_without_a_run_directory(quiet_soup_config):
    cfg = quiet_soup_config.replace(steps=200)
    world = make_world(cfg, RngStreams(0))
    observatory = Observatory(cfg)
    observatory.on_events(world.drain_events())
    run_loop(world, cfg, hooks=[observatory])
    observatory.close()
    assert [f.step for f in observatory.frames] == [1, 51, 101, 151]
    assert all(f.population >= 1 for f in observatory.frames)
    assert observatory.frames[0].new_genotypes == 1


def test_unchanging_soup_is_flagged_as_stasis(tmp_path, quiet_soup_config):
    cfg = quiet_soup_config.replace(
        steps=600, metrics_interval=10, stasis_window=200, stasis_persistence=50,
        stasis_min_abundance=1, output_dir=str(tmp_path),
    )
    Experiment(cfg).start()
    records = [json.loads(line) for line in (tmp_path / OBSERVATORY_LOG).read_text().splitlines()]
    assert records
    assert records[0]["kind"] == "stasis_flag"
    assert records[0]["step"] >= 200


def test_run_tables_read_back_as_strings(tmp_path, atoms_config):
    Experiment(atoms_config.replace(steps=60, output_dir=str(tmp_path))).start()
    assert missing_artifacts(tmp_path) == []
    metrics = read_run_table(tmp_path, "metrics")
    assert metrics["step"].tolist() == ["1", "51"]
    genotypes = read_run_table(tmp_path, "genotypes")
    assert "ab" in genotypes["sequence"].tolist()


def test_inputs_resolve_against_the_data_directory():
    assert resolve_input("", DEFAULT_RULES) == DEFAULT_RULES
    assert resolve_input("decay.rules", DEFAULT_RULES).name == "decay.rules"
    assert resolve_input("parasite.soup", DEFAULT_RULES).parent.name == "fixtures"
    with pytest.raises(FileNotFoundError):
        resolve_input("missing.rules", DEFAULT_RULES)


def test_rule_files_concatenate_in_order():
    text = rules_text("replicator.rules, decay.rules")
    assert text.index("e8+e0") < text.index("x0#y9")


def test_births_carry_their_genome_into_the_registry(quiet_soup_config):
    genome = bytes([1, 2, 15])
    observatory = Observatory(quiet_soup_config)
    observatory.on_events([Event(0, "birth", org=1, genotype=fnv1a64(genome), body=genome)])
    observatory.close()
    assert observatory.registry.records[fnv1a64(genome)].canonical == "12f"


def test_short_lived_genotypes_keep_their_sequence(tmp_path, soup_config):
    cfg = soup_config.replace(steps=6000, p_copy_flip=0.02, metrics_interval=2000, output_dir=str(tmp_path))
    Experiment(cfg).start()
    genotypes = read_run_table(tmp_path, "genotypes")
    assert len(genotypes) > 1
    assert (genotypes["sequence"] != "").all()
    for gid, sequence in zip(genotypes["genotype_id"], genotypes["sequence"]):
        assert fnv1a64(bytes(int(c, 16) for c in sequence)) == int(gid, 16)


def test_mutation_free_soup_exports_one_genotype(tmp_path, quiet_soup_config, ancestor):
    Experiment(quiet_soup_config.replace(steps=3000, output_dir=str(tmp_path))).start()
    genotypes = read_run_table(tmp_path, "genotypes")
    assert genotypes["sequence"].tolist() == ["".join(f"{c:x}" for c in ancestor)]


def test_mutating_soup_reads_as_active(soup_config, ancestor):
    cfg = soup_config.replace(
        steps=30000, p_copy_flip=0.004, metrics_interval=250, stasis_window=20000,
        stasis_persistence=250, stasis_min_abundance=2,
    )
    world = make_world(cfg, RngStreams(0))
    observatory = Observatory(cfg)
    observatory.on_events(world.drain_events())
    run_loop(world, cfg, hooks=[observatory])
    observatory.close()
    assert observatory.verdict.status == ACTIVE
    assert observatory.verdict.newest_persistent != fnv1a64(ancestor)
