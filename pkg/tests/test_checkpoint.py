"""Tests for checkpoint.py - the binary format and its failure modes."""

import struct
import zlib

import pytest

from openmedium.utils.checkpoint import (
    checkpoint_bytes,
    checkpoint_load,
    checkpoint_name,
    checkpoint_parse,
    checkpoint_save,
)
from openmedium.utils.errors import CheckpointError
from openmedium.utils.rng import RngStreams
from openmedium.worlds import make_world


def _advanced(config, steps=150):
    rngs = RngStreams(config.seed)
    world = make_world(config, rngs)
    for _ in range(steps):
        world.step()
    return world, rngs


@pytest.mark.parametrize("kind", ["soup", "atoms"])
def test_save_then_load_restores_the_world(tmp_path, kind, soup_config, atoms_config):
    config = soup_config if kind == "soup" else atoms_config
    world, rngs = _advanced(config)
    path = checkpoint_save(world, rngs, tmp_path / checkpoint_name(world.clock), config, 123, 456)
    ckpt = checkpoint_load(path, steps=config.steps, metrics_interval=config.metrics_interval)
    assert ckpt.step == world.clock
    assert (ckpt.event_hash, ckpt.event_offset) == (123, 456)
    assert ckpt.config == config
    assert ckpt.world.to_bytes() == world.to_bytes()
    assert ckpt.rngs.states() == rngs.states()
    assert checkpoint_bytes(ckpt.config, ckpt.world, ckpt.rngs, 123, 456) == path.read_bytes()


def test_name():
    assert checkpoint_name(4200) == "ckpt_4200.vwld"


def test_save_is_atomic_and_leaves_no_temp(tmp_path, atoms_config):
    world, rngs = _advanced(atoms_config, 10)
    path = checkpoint_save(world, rngs, tmp_path / "x.vwld", atoms_config)
    assert [p.name for p in tmp_path.iterdir()] == ["x.vwld"]
    checkpoint_save(world, rngs, path, atoms_config)
    assert path.exists()


def test_bad_magic():
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        checkpoint_parse(b"PK\x03\x04" + bytes(40))


def test_truncated_file(tmp_path, atoms_config):
    world, rngs = _advanced(atoms_config, 5)
    data = checkpoint_bytes(atoms_config, world, rngs)
    for cut in (0, 3, 6, 40, len(data) // 2, len(data) - 1):
        with pytest.raises(CheckpointError, match="corrupt checkpoint"):
            checkpoint_parse(data[:cut])


def test_flipped_byte(atoms_config):
    world, rngs = _advanced(atoms_config, 5)
    data = bytearray(checkpoint_bytes(atoms_config, world, rngs))
    data[len(data) // 2] ^= 0xFF
    with pytest.raises(CheckpointError, match="corrupt checkpoint"):
        checkpoint_parse(bytes(data))


def test_unsupported_version(atoms_config):
    world, rngs = _advanced(atoms_config, 5)
    data = bytearray(checkpoint_bytes(atoms_config, world, rngs))
    data[4:8] = struct.pack("<I", 2)
    body = bytes(data[:-4])
    with pytest.raises(CheckpointError, match="unsupported version 2"):
        checkpoint_parse(body + struct.pack("<I", zlib.crc32(body)))


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError, match="cannot read"):
        checkpoint_load(tmp_path / "nope.vwld")
