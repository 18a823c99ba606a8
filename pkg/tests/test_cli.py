"""Tests for the command-line surface and its exit codes."""

import pytest

from openmedium.index import main
from openmedium.utils.checkpoint import checkpoint_name
from openmedium.utils.data_handler import ancestor_text
from openmedium.worlds import isa

ATOMS = ["--set", "world_kind=atoms", "--set", "grid_width=24", "--set", "grid_height=24",
         "--set", "food_count=60", "--set", "cap_food_count=10", "--set", "metrics_interval=20"]


@pytest.fixture
def atoms_run(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "-o", str(out), "--set", "steps=50", *ATOMS]) == 0
    return out


def test_run_prints_summary(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "-o", str(out), "--set", "steps=50", *ATOMS]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("atoms step=50 ")
    assert f"out={out}" in line
    assert (out / checkpoint_name(50)).exists()


def test_run_from_config_file(tmp_path, capsys):
    conf = tmp_path / "soup.conf"
    conf.write_text(f"world_kind = soup\nsoup_size = 8000\nsteps = 20\noutput_dir = {tmp_path / 'out'}\n")
    assert main(["run", str(conf)]) == 0
    assert capsys.readouterr().out.startswith("soup step=20 population=")


def test_unknown_key_is_a_usage_error(tmp_path, capsys):
    assert main(["run", "-o", str(tmp_path), "--set", "colour=red"]) == 2
    assert "unknown key: colour" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "none.conf")]) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "everything"])
    assert exc.value.code == 2


def test_resume_continues(atoms_run, capsys):
    capsys.readouterr()
    assert main(["resume", str(atoms_run / checkpoint_name(50)), "30"]) == 0
    assert capsys.readouterr().out.startswith("atoms step=80 ")
    assert (atoms_run / checkpoint_name(80)).exists()


def test_resume_rejects_negative_steps(atoms_run):
    assert main(["resume", str(atoms_run / checkpoint_name(50)), "-5"]) == 2


def test_resume_corrupt_checkpoint(tmp_path, capsys):
    bad = tmp_path / "ckpt_1.vwld"
    bad.write_bytes(b"VWLD\x01\x00\x00\x00" + bytes(30))
    assert main(["resume", str(bad), "10"]) == 1
    assert "corrupt checkpoint" in capsys.readouterr().err


def test_inspect_fresh_soup_disassembles_the_ancestor(tmp_path, capsys):
    out = tmp_path / "soup"
    assert main(["run", "-o", str(out), "--set", "steps=0", "--set", "soup_size=8000"]) == 0
    capsys.readouterr()
    assert main(["inspect", str(out / checkpoint_name(0))]) == 0
    summary = capsys.readouterr().out
    assert "organisms=1" in summary
    assert main(["inspect", str(out / checkpoint_name(0)), "org:1"]) == 0
    listing = capsys.readouterr().out
    assert isa.parse_genome(listing) == isa.parse_genome(ancestor_text(""))


def test_inspect_chain(atoms_run, capsys):
    capsys.readouterr()
    assert main(["inspect", str(atoms_run / checkpoint_name(50))]) == 0
    assert "census a=" in capsys.readouterr().out


def test_inspect_bad_selector(atoms_run):
    assert main(["inspect", str(atoms_run / checkpoint_name(50)), "chain:0"]) == 2


def test_export_metrics(atoms_run, capsys):
    capsys.readouterr()
    assert main(["export", str(atoms_run), "metrics"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ("step,population,free_resource,genotype_richness,shannon_diversity,"
                        "dominant_genotype_length,births,deaths,parasite_count,new_genotypes")
    assert len(lines) == 1 + 3


def test_export_genotypes_and_events(atoms_run, capsys):
    capsys.readouterr()
    assert main(["export", str(atoms_run), "genotypes"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "genotype_id,sequence,first_seen,last_seen,max_abundance"
    assert main(["export", str(atoms_run), "events"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "step,kind,org,parent,genotype,addr,detail"


def test_export_missing_artifact(tmp_path):
    assert main(["export", str(tmp_path), "metrics"]) == 2


def test_verify_ancestor_passes(capsys):
    assert main(["verify", "ancestor"]) == 0
    assert capsys.readouterr().out.startswith("PASS ancestor")


def test_verify_truncated_ancestor_fails(capsys):
    assert main(["verify", "ancestor", "--genome", "ancestor_truncated.soup"]) == 3
    assert capsys.readouterr().out.startswith("FAIL ancestor")


def test_verify_determinism_short(capsys):
    assert main(["verify", "determinism", "--steps", "120"]) == 0
    out = capsys.readouterr().out
    assert "soup: events match" in out and "atoms: events match" in out


@pytest.mark.slow
def test_verify_replicator(capsys):
    assert main(["verify", "replicator"]) == 0


@pytest.mark.slow
def test_verify_conservation(capsys):
    assert main(["verify", "conservation"]) == 0
    assert "census unchanged" in capsys.readouterr().out
