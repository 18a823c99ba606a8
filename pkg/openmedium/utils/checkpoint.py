"""Binary checkpoints, little-endian throughout. Layout (version 1):

    magic        4s   b"VWLD"
    version      u32  1
    config       u32 length + UTF-8 JSON (world keys only, sorted)
    step         u64
    event_hash   u64  rolling hash of events.log up to this step
    event_offset u64  byte length of events.log up to this step
    streams      u32 count, then per stream: u16 label length, label, u64 key, u64 counter
    world        u8 kind (0 soup, 1 atoms), u32 length, payload
    crc32        u32  over every preceding byte

docs/checkpoint-format.md describes the world payloads.
"""
import json
import logging
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

from ..worlds import WORLD_CODES, restore_world
from .config import config_from_world_dict
from .errors import CheckpointError, ConfigError
from .rng import RngStreams

logger = logging.getLogger(__name__)

MAGIC = b"VWLD"
VERSION = 1


@dataclass
class Checkpoint:
    config: object
    step: int
    event_hash: int
    event_offset: int
    rngs: RngStreams
    world: object
    path: Path | None = None


def checkpoint_bytes(config, world, rngs, event_hash: int = 0, event_offset: int = 0) -> bytes:
    parts = [MAGIC, struct.pack("<I", VERSION)]
    blob = json.dumps(config.to_world_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts.append(struct.pack("<I", len(blob)) + blob)
    parts.append(struct.pack("<QQQ", world.clock, event_hash, event_offset))
    states = rngs.states()
    parts.append(struct.pack("<I", len(states)))
    for label, key, counter in states:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw + struct.pack("<QQ", key, counter))
    payload = world.to_bytes()
    parts.append(struct.pack("<BI", WORLD_CODES[world.kind], len(payload)) + payload)
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def checkpoint_save(world, rngs, path, config=None, event_hash: int = 0, event_offset: int = 0) -> Path:
    """Write atomically: a temp file in the same directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = checkpoint_bytes(config or world.config, world, rngs, event_hash, event_offset)
    if path.exists() and path.read_bytes() == data:
        return path
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
    logger.info("checkpoint at step %d -> %s", world.clock, path)
    return path


def checkpoint_parse(data: bytes, **run_keys) -> Checkpoint:
    if len(data) < 12:
        raise CheckpointError("corrupt checkpoint")
    if data[:4] != MAGIC:
        raise CheckpointError("not a checkpoint")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}")
    if zlib.crc32(data[:-4]) != struct.unpack_from("<I", data, len(data) - 4)[0]:
        raise CheckpointError("corrupt checkpoint")
    try:
        offset = 8
        (size,) = struct.unpack_from("<I", data, offset)
        offset += 4
        values = json.loads(data[offset:offset + size].decode("utf-8"))
        offset += size
        config = config_from_world_dict(values, **run_keys)
        step, event_hash, event_offset = struct.unpack_from("<QQQ", data, offset)
        offset += 24
        (count,) = struct.unpack_from("<I", data, offset)
        offset += 4
        states = []
        for _ in range(count):
            (length,) = struct.unpack_from("<H", data, offset)
            offset += 2
            label = data[offset:offset + length].decode("utf-8")
            offset += length
            key, counter = struct.unpack_from("<QQ", data, offset)
            offset += 16
            states.append((label, key, counter))
        code, length = struct.unpack_from("<BI", data, offset)
        offset += 5
        payload = data[offset:offset + length]
        if len(payload) != length or offset + length != len(data) - 4:
            raise ValueError("world payload length mismatch")
        rngs = RngStreams.from_states(config.seed, states)
        world = restore_world(config, rngs, code, payload)
    except ConfigError:
        raise
    except (struct.error, ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None
    if world.clock != step:
        raise CheckpointError("corrupt checkpoint: step mismatch")
    return Checkpoint(config=config, step=step, event_hash=event_hash, event_offset=event_offset, rngs=rngs, world=world)


def checkpoint_load(path, **run_keys) -> Checkpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc.strerror}") from None
    ckpt = checkpoint_parse(data, **run_keys)
    ckpt.path = path
    return ckpt


def checkpoint_name(step: int) -> str:
    return f"ckpt_{step}.vwld"
