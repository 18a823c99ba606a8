"""Atom medium: typed atoms with states and bonds on a toroidal grid.

A step is three phases, each drawing from its own stream: reactions, then
motion, then perturbation. The phases see only atoms, bonds, the grid and
the rule table; organisms exist only in what the observatory reads back.
"""
import io
import logging
import struct
from dataclasses import dataclass

import numpy as np

from ..utils.errors import ConfigError, PlacementError
from . import kernels
from .rules import BARRIER_TYPE, TYPE_LETTERS

logger = logging.getLogger(__name__)

EMPTY = -1
CAP_TYPE = TYPE_LETTERS.index("e")
CAP_START_STATE = 8
CAP_END_STATE = 1
PAYLOAD_STATE = 1

# reaction neighbours: each unordered adjacent pair is seen once
FORWARD_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1))
MOORE = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def _frozen(array: np.ndarray) -> np.ndarray:
    out = array.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ChemSnapshot:
    step: int
    width: int
    height: int
    types: np.ndarray
    states: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    barrier: np.ndarray
    bonds: tuple
    census: tuple

    @property
    def atom_count(self) -> int:
        return int(self.types.size)

    def partners(self) -> list[list[int]]:
        out = [[] for _ in range(self.atom_count)]
        for a, b in self.bonds:
            out[a].append(b)
            out[b].append(a)
        return out


class ChemWorld:
    kind = "atoms"

    def __init__(self, config, rngs, rules):
        self.config = config
        self.width = config.grid_width
        self.height = config.grid_height
        self.rules = rules
        self.grid = np.full((self.height, self.width), EMPTY, dtype=np.int32)
        self.types = np.zeros(0, dtype=np.int8)
        self.states = np.zeros(0, dtype=np.int8)
        self.xs = np.zeros(0, dtype=np.int32)
        self.ys = np.zeros(0, dtype=np.int32)
        self.barrier = np.zeros(0, dtype=bool)
        self.bonds: set[tuple] = set()
        self.clock = 0
        self.extinct = False

        self.rngs = rngs
        self.rng_react = rngs.stream("chem.react")
        self.rng_move = rngs.stream("chem.move")
        self.rng_perturb = rngs.stream("chem.perturb")
        self.rng_seed = rngs.stream("chem.seed")

    def drain_events(self) -> list:
        return []

    @property
    def atom_count(self) -> int:
        return int(self.types.size)

    # --- building ---

    def add_atoms(self, types, states, xs, ys, barrier=False) -> np.ndarray:
        """Append atoms at empty cells; returns their indices."""
        xs = np.asarray(xs, dtype=np.int32) % self.width
        ys = np.asarray(ys, dtype=np.int32) % self.height
        if np.any(self.grid[ys, xs] != EMPTY) or len(set(zip(xs.tolist(), ys.tolist()))) != xs.size:
            raise PlacementError("atoms must go on distinct empty cells")
        first = self.atom_count
        ids = np.arange(first, first + xs.size, dtype=np.int32)
        self.types = np.concatenate([self.types, np.asarray(types, dtype=np.int8)])
        self.states = np.concatenate([self.states, np.asarray(states, dtype=np.int8)])
        self.xs = np.concatenate([self.xs, xs])
        self.ys = np.concatenate([self.ys, ys])
        self.barrier = np.concatenate([self.barrier, np.full(xs.size, bool(barrier))])
        self.grid[ys, xs] = ids
        return ids

    def bond(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("self-bond")
        pair = (a, b) if a < b else (b, a)
        if pair in self.bonds:
            return
        self.bonds.add(pair)

    def unbond(self, a: int, b: int) -> None:
        self.bonds.discard((a, b) if a < b else (b, a))

    def place_barriers(self, rects) -> int:
        cells = {}
        for x0, y0, x1, y1 in rects:
            for y in range(y0, y1 + 1):
                for x in range(x0, x1 + 1):
                    if self.grid[y, x] == EMPTY:
                        cells[(x, y)] = None
        if cells:
            xs, ys = zip(*cells)
            self.add_atoms([BARRIER_TYPE] * len(cells), [0] * len(cells), xs, ys, barrier=True)
        return len(cells)

    def seed_replicator(self, payload: str, position=None) -> list[int]:
        """Lay an e-capped chain horizontally, bonded end to end, then scatter food.

        ``position`` is the start cap's cell; None centres the chain.
        """
        if not payload:
            raise ConfigError("payload must be non-empty")
        letters = "e" + payload + "e"
        if len(letters) > self.width:
            raise PlacementError(f"chain of {len(letters)} atoms does not fit a grid {self.width} wide")
        if position is None:
            position = ((self.width - len(letters)) // 2, self.height // 2)
        x0, y0 = position
        types = [TYPE_LETTERS.index(ch) for ch in letters]
        states = [CAP_START_STATE] + [PAYLOAD_STATE] * len(payload) + [CAP_END_STATE]
        xs = [x0 + k for k in range(len(letters))]
        try:
            ids = self.add_atoms(types, states, xs, [y0] * len(letters)).tolist()
        except PlacementError:
            raise PlacementError(f"no room for the seed chain at ({x0}, {y0})") from None
        for a, b in zip(ids, ids[1:]):
            self.bond(a, b)
        self.scatter_food(self.config.food_count, self.config.food_types, self.config.cap_food_count)
        logger.info("seeded chain %s at (%d, %d) with %d food atoms", letters, x0, y0, self.config.food_count)
        return ids

    def scatter_food(self, count: int, food_types: str, cap_count: int = 0) -> None:
        total = count + cap_count
        if not total:
            return
        empty = np.flatnonzero(self.grid.ravel() == EMPTY)
        if empty.size < total:
            raise PlacementError(f"{total} food atoms do not fit in {empty.size} empty cells")
        gen = self.rng_seed.numpy_generator()
        cells = gen.choice(empty, size=total, replace=False)
        kinds = np.array([TYPE_LETTERS.index(ch) for ch in food_types], dtype=np.int8)
        types = np.concatenate([kinds[gen.integers(0, kinds.size, size=count)], np.full(cap_count, CAP_TYPE, dtype=np.int8)])
        ys, xs = np.divmod(cells, self.width)
        self.add_atoms(types, np.zeros(total, dtype=np.int8), xs, ys)

    # --- physics ---

    def _adjacent(self, x0, y0, x1, y1) -> bool:
        dx = abs(x0 - x1)
        dy = abs(y0 - y1)
        return min(dx, self.width - dx) <= 1 and min(dy, self.height - dy) <= 1

    def _pair_keys(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        lo = np.minimum(p, q).astype(np.int64)
        hi = np.maximum(p, q).astype(np.int64)
        return lo * self.atom_count + hi

    def _bond_keys(self) -> np.ndarray:
        n = self.atom_count
        return np.fromiter((a * n + b for a, b in self.bonds), dtype=np.int64, count=len(self.bonds))

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Bond partners in CSR form: partners of atom a are ``partners[offsets[a]:offsets[a + 1]]``."""
        n = self.atom_count
        pairs = np.fromiter((v for pair in self.bonds for v in pair), dtype=np.int64, count=2 * len(self.bonds))
        ends = np.concatenate([pairs[0::2], pairs[1::2]])
        others = np.concatenate([pairs[1::2], pairs[0::2]])
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=n), out=offsets[1:])
        return offsets, others[np.argsort(ends, kind="stable")]

    def candidate_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Moore-adjacent non-barrier pairs some rule matches, as (p, q) arrays."""
        grid = self.grid
        width = self.rules.max_state + 1
        firsts, seconds = [], []
        for dx, dy in FORWARD_OFFSETS:
            other = np.roll(grid, shift=(-dy, -dx), axis=(0, 1))
            mask = (grid != EMPTY) & (other != EMPTY)
            p = grid[mask]
            q = other[mask]
            keep = ~self.barrier[p] & ~self.barrier[q]
            firsts.append(p[keep])
            seconds.append(q[keep])
        p = np.concatenate(firsts)
        q = np.concatenate(seconds)
        if not p.size:
            return p, q
        bonded = np.isin(self._pair_keys(p, q), self._bond_keys())
        kp = self.types[p].astype(np.int32) * width + self.states[p]
        kq = self.types[q].astype(np.int32) * width + self.states[q]
        hit = self.rules.rule_index[bonded.astype(np.int32), kp, kq] >= 0
        return p[hit], q[hit]

    def apply_reactions(self) -> int:
        p, q = self.candidate_pairs()
        gen = self.rng_react.numpy_generator()
        if not p.size:
            return 0
        order = gen.permutation(p.size)
        used = np.zeros(self.atom_count, dtype=bool)
        width = self.rules.max_state + 1
        fired = 0
        for a, b in zip(p[order].tolist(), q[order].tolist()):
            if used[a] or used[b]:
                continue
            bonded = ((a, b) if a < b else (b, a)) in self.bonds
            ka = int(self.types[a]) * width + int(self.states[a])
            kb = int(self.types[b]) * width + int(self.states[b])
            index = self.rules.rule_index[int(bonded), ka, kb]
            if self.rules.swapped[int(bonded), ka, kb]:
                a, b = b, a
            rule = self.rules.rules[index]
            self.states[a] = rule.new_state_a
            self.states[b] = rule.new_state_b
            if bonded and not rule.bonded_after:
                self.unbond(a, b)
            elif rule.bonded_after and not bonded:
                self.bond(a, b)
            used[a] = used[b] = True
            fired += 1
        return fired

    def move_atoms(self) -> int:
        gen = self.rng_move.numpy_generator()
        movers = np.flatnonzero(~self.barrier)
        if not movers.size:
            return 0
        order = gen.permutation(movers)
        directions = gen.integers(0, len(MOORE), size=order.size)
        offsets, partners = self.adjacency()
        return int(kernels.move_atoms(
            self.xs, self.ys, self.grid, self.barrier, order, directions,
            offsets, partners, self.width, self.height,
        ))

    def perturb(self) -> tuple[int, int]:
        gen = self.rng_perturb.numpy_generator()
        broken = reset = 0
        p_break = self.config.p_bond_break
        if p_break > 0.0 and self.bonds:
            bonds = sorted(self.bonds)
            hits = np.flatnonzero(gen.random(len(bonds)) < p_break)
            for k in hits.tolist():
                self.unbond(*bonds[k])
            broken = int(hits.size)
        p_reset = self.config.p_state_reset
        if p_reset > 0.0 and self.atom_count:
            hits = (gen.random(self.atom_count) < p_reset) & ~self.barrier
            self.states[hits] = 0
            reset = int(hits.sum())
        return broken, reset

    def step(self) -> None:
        self.apply_reactions()
        if self.config.motion_enabled:
            self.move_atoms()
        self.perturb()
        self.clock += 1

    def run_steps(self, steps: int) -> int:
        for _ in range(steps):
            self.step()
        return steps

    # --- audits and snapshots ---

    def census(self) -> np.ndarray:
        """Atoms per type, counted from the grid."""
        on_grid = self.grid[self.grid != EMPTY]
        return np.bincount(self.types[on_grid], minlength=len(TYPE_LETTERS))

    def expected_census(self) -> np.ndarray:
        return np.bincount(self.types, minlength=len(TYPE_LETTERS))

    def bond_violations(self) -> list[tuple]:
        return [
            (a, b) for a, b in sorted(self.bonds)
            if not self._adjacent(int(self.xs[a]), int(self.ys[a]), int(self.xs[b]), int(self.ys[b]))
        ]

    def snapshot(self) -> ChemSnapshot:
        return ChemSnapshot(
            step=self.clock, width=self.width, height=self.height,
            types=_frozen(self.types), states=_frozen(self.states), xs=_frozen(self.xs),
            ys=_frozen(self.ys), barrier=_frozen(self.barrier), bonds=tuple(sorted(self.bonds)),
            census=tuple(int(c) for c in self.census()),
        )

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(struct.pack("<IIIQ", self.width, self.height, self.atom_count, self.clock))
        out.write(self.types.astype("<i1").tobytes())
        out.write(self.states.astype("<i1").tobytes())
        out.write(self.xs.astype("<i4").tobytes())
        out.write(self.ys.astype("<i4").tobytes())
        out.write(self.barrier.astype("u1").tobytes())
        bonds = sorted(self.bonds)
        out.write(struct.pack("<I", len(bonds)))
        out.write(np.asarray(bonds, dtype="<i4").reshape(-1).tobytes())
        return out.getvalue()

    @classmethod
    def from_bytes(cls, config, rngs, rules, data: bytes) -> "ChemWorld":
        world = cls(config, rngs, rules)
        width, height, count, world.clock = struct.unpack_from("<IIIQ", data, 0)
        if (width, height) != (world.width, world.height):
            raise ValueError(f"grid {width}x{height} does not match config {world.width}x{world.height}")
        offset = struct.calcsize("<IIIQ")

        def take(dtype, n):
            nonlocal offset
            size = np.dtype(dtype).itemsize * n
            if offset + size > len(data):
                raise ValueError("short read")
            arr = np.frombuffer(data, dtype=dtype, count=n, offset=offset).copy()
            offset += size
            return arr

        world.types = take("<i1", count).astype(np.int8)
        world.states = take("<i1", count).astype(np.int8)
        world.xs = take("<i4", count).astype(np.int32)
        world.ys = take("<i4", count).astype(np.int32)
        world.barrier = take("u1", count).astype(bool)
        (nbonds,) = take("<u4", 1).tolist()
        pairs = take("<i4", 2 * nbonds).reshape(-1, 2).tolist()
        if offset != len(data):
            raise ValueError("trailing bytes after grid state")
        world.grid[world.ys, world.xs] = np.arange(count, dtype=np.int32)
        for a, b in pairs:
            world.bond(a, b)
        return world
