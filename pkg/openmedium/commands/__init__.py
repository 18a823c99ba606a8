"""One module per subcommand; each exposes ``register(subparsers)``."""
from enum import IntEnum
from pathlib import Path

from ..observatory.metrics import chem_organisms
from ..utils.config import RunConfig, apply_overrides, config_parse
from ..utils.errors import ConfigError


class ExitStatus(IntEnum):
    OK = 0
    RUNTIME_FAILURE = 1
    USAGE = 2
    VERIFY_FAILED = 3


def load_config(path: str | None, overrides=()) -> RunConfig:
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        cfg = config_parse(text)
    else:
        cfg = RunConfig()
    return apply_overrides(cfg, overrides)


def world_summary(world) -> str:
    if world.kind == "soup":
        snap = world.snapshot()
        genotypes = len({o.genotype_id for o in snap.organisms})
        return (
            f"soup step={world.clock} population={len(snap.organisms)} genotypes={genotypes} "
            f"free={snap.free_cells}/{snap.soup_size} instructions={snap.instructions}"
        )
    snap = world.snapshot()
    counts, _, free = chem_organisms(snap)
    census = " ".join(f"{letter}={n}" for letter, n in zip("abcdef", snap.census))
    return (
        f"atoms step={world.clock} chains={sum(counts.values())} genotypes={len(counts)} "
        f"free_atoms={free} bonds={len(snap.bonds)} census[{census}]"
    )
