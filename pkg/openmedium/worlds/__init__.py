"""The two media and the factory the engine builds them through."""
import logging

from ..utils.data_handler import ancestor_text, rules_text
from . import isa
from .chem import ChemWorld
from .rules import parse_rules
from .soup import SoupWorld

logger = logging.getLogger(__name__)

WORLD_CODES = {"soup": 0, "atoms": 1}
WORLD_KINDS_BY_CODE = {code: kind for kind, code in WORLD_CODES.items()}


def load_rules(config):
    return parse_rules(rules_text(config.rules_path), config.max_state)


def new_world(config, rngs):
    """An empty medium of the configured kind, with all of its streams created."""
    if config.world_kind == "soup":
        return SoupWorld(config, rngs)
    return ChemWorld(config, rngs, load_rules(config))


def make_world(config, rngs, genome: bytes | None = None):
    """Build and seed a world: the ancestor for the soup, barriers and a chain for atoms."""
    world = new_world(config, rngs)
    if config.world_kind == "soup":
        if genome is None:
            genome = isa.parse_genome(ancestor_text(config.ancestor_path), config.max_org_size)
        world.seed_ancestor(genome)
        logger.info("seeded a %d-cell ancestor in a %d-cell soup", len(genome), world.n)
    else:
        world.place_barriers(config.barrier_spec)
        position = None if config.seed_x < 0 or config.seed_y < 0 else (config.seed_x, config.seed_y)
        world.seed_replicator(config.payload, position)
    return world


def restore_world(config, rngs, code: int, payload: bytes):
    kind = WORLD_KINDS_BY_CODE.get(code)
    if kind != config.world_kind:
        raise ValueError(f"world kind {code} does not match config {config.world_kind}")
    if kind == "soup":
        return SoupWorld.from_bytes(config, rngs, payload)
    return ChemWorld.from_bytes(config, rngs, load_rules(config), payload)
