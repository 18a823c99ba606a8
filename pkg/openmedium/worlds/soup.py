"""Tierra-style medium: a circular memory of 4-bit instructions run by per-organism CPUs.

Reproduction happens only when an organism executes ``divide`` on memory it
allocated and filled itself. Nothing here scores or ranks organisms; the
reaper kills by queue position and CPU time is handed out by length alone.

Each organism's CPU, allocation and queue slot live in engine tables rather
than in the soup, so this medium is not fully embodied. The tables are numpy
arrays so the compiled turn loop in kernels.py can run on them directly;
``step`` is the plain interpreter and ``run_steps`` the fast path.
"""
import io
import logging
import math
import struct
from dataclasses import dataclass

import numpy as np

from ..utils.calculations import fnv1a64
from ..utils.errors import GenomeError, PlacementError
from ..utils.events import Event
from . import isa, kernels
from .kernels import (
    AX, BUDGET, BX, CHILD_LENGTH, CHILD_START, COLUMNS, CX, DEPTH, ERRORS, FOREIGN, IP,
    LAST_FOREIGN, LAST_OWN, LENGTH, OWN, START, WINDOW_DONE,
)

logger = logging.getLogger(__name__)

FORWARD, BACKWARD, NEAREST = "forward", "backward", "nearest"
NOT_FOUND = None

# uniforms fetched per refill of the copy-mutation draw buffer
DRAW_BLOCK = 1 << 16

_COMPLEMENT = bytes.maketrans(b"\x00\x01", b"\x01\x00")


class SoupFault(Exception):
    """An instruction could not complete; becomes an error event, never escapes a step."""


class OrganismTable:
    """Registers of every live organism, one row per slot, plus their stacks."""

    def __init__(self, capacity: int = 64):
        self.regs = np.zeros((capacity, COLUMNS), dtype=np.int64)
        self.stacks = np.zeros((capacity, isa.STACK_DEPTH), dtype=np.int64)
        self._free = list(range(capacity - 1, -1, -1))

    def acquire(self) -> int:
        if not self._free:
            size = len(self.regs)
            self.regs = np.concatenate([self.regs, np.zeros_like(self.regs)])
            self.stacks = np.concatenate([self.stacks, np.zeros_like(self.stacks)])
            self._free = list(range(2 * size - 1, size - 1, -1))
        slot = self._free.pop()
        self.regs[slot] = 0
        self.stacks[slot] = 0
        return slot

    def release(self, slot: int) -> None:
        self._free.append(slot)


def _column(index: int):
    def get(self):
        return int(self._table.regs[self._slot, index])

    def put(self, value):
        self._table.regs[self._slot, index] = value

    return property(get, put)


class CpuStack:
    """List-like view of one organism's stack row."""

    __slots__ = ("_table", "_slot")

    def __init__(self, table: OrganismTable, slot: int):
        self._table = table
        self._slot = slot

    def __len__(self):
        return int(self._table.regs[self._slot, DEPTH])

    def __iter__(self):
        return iter(self._table.stacks[self._slot, :len(self)].tolist())

    def __eq__(self, other):
        return list(self) == list(other)

    def append(self, value: int) -> None:
        depth = len(self)
        self._table.stacks[self._slot, depth] = value
        self._table.regs[self._slot, DEPTH] = depth + 1

    def pop(self) -> int:
        depth = len(self) - 1
        self._table.regs[self._slot, DEPTH] = depth
        return int(self._table.stacks[self._slot, depth])


class Cpu:
    __slots__ = ("_table", "_slot")

    ax = _column(AX)
    bx = _column(BX)
    cx = _column(CX)
    ip = _column(IP)
    error_flag_count = _column(ERRORS)

    def __init__(self, table: OrganismTable, slot: int):
        self._table = table
        self._slot = slot

    @property
    def stack(self) -> CpuStack:
        return CpuStack(self._table, self._slot)


class Organism:
    """Handle on one table row. A killed organism keeps a private copy of its row."""

    __slots__ = ("id", "parent_id", "birth_step", "genotype_id", "alive", "cpu", "_table", "_slot")

    start = _column(START)
    length = _column(LENGTH)
    child_start = _column(CHILD_START)
    child_length = _column(CHILD_LENGTH)
    # instruction counters for the running window and the last completed one
    executed_own = _column(OWN)
    executed_foreign = _column(FOREIGN)
    last_own = _column(LAST_OWN)
    last_foreign = _column(LAST_FOREIGN)

    def __init__(self, table: OrganismTable, slot: int, id: int, parent_id: int | None,
                 birth_step: int, genotype_id: int):
        self.id = id
        self.parent_id = parent_id
        self.birth_step = birth_step
        self.genotype_id = genotype_id
        self.alive = True
        self._table = table
        self._slot = slot
        self.cpu = Cpu(table, slot)

    @property
    def window_done(self) -> bool:
        return bool(self._table.regs[self._slot, WINDOW_DONE])

    @window_done.setter
    def window_done(self, value: bool) -> None:
        self._table.regs[self._slot, WINDOW_DONE] = int(value)

    def detach(self) -> None:
        private = OrganismTable(1)
        private.acquire()
        private.regs[0] = self._table.regs[self._slot]
        private.stacks[0] = self._table.stacks[self._slot]
        self._table, self._slot = private, 0
        self.cpu = Cpu(private, 0)


@dataclass(frozen=True, slots=True)
class OrganismView:
    id: int
    start: int
    length: int
    child_start: int
    child_length: int
    genotype_id: int
    parent_id: int | None
    birth_step: int
    ax: int
    bx: int
    cx: int
    ip: int
    stack: tuple
    error_flag_count: int
    executed_own: int
    executed_foreign: int
    last_own: int
    last_foreign: int
    window_done: bool


@dataclass(frozen=True)
class SoupSnapshot:
    step: int
    soup_size: int
    cells: bytes
    free_cells: int
    organisms: tuple
    instructions: int

    def body(self, org: OrganismView) -> bytes:
        return cyclic_slice(self.cells, org.start, org.length)


def cyclic_slice(cells, start: int, length: int) -> bytes:
    n = len(cells)
    start %= n
    if start + length <= n:
        return bytes(cells[start:start + length])
    out = bytearray(cells[start:])
    while len(out) < length:
        out += cells
    return bytes(out[:length])


def template_search(cells, start: int, direction: str, template: bytes, search_limit: int):
    """Locate the nearest complement of a nop template.

    Forward candidates begin at ``start + d``; the result is one past the
    match. Backward candidates end at ``start - 1 - d``; the result is the
    match's first cell. ``d`` runs over ``[0, min(search_limit, len(cells)))``
    and matching wraps around the soup. ``nearest`` takes the smaller ``d``,
    forward on ties. Returns NOT_FOUND for an empty template or no match.
    """
    if not template:
        return NOT_FOUND
    n = len(cells)
    size = len(template)
    pattern = bytes(template).translate(_COMPLEMENT)
    span = min(search_limit, n)
    found_fwd = found_bwd = None
    if direction in (FORWARD, NEAREST):
        p = cyclic_slice(cells, start, span - 1 + size).find(pattern)
        if p != -1:
            found_fwd = (p, (start + p + size) % n)
    if direction in (BACKWARD, NEAREST):
        window_start = start - size - (span - 1)
        p = cyclic_slice(cells, window_start, span - 1 + size).rfind(pattern)
        if p != -1:
            found_bwd = (span - 1 - p, (window_start + p) % n)
    if found_fwd and found_bwd:
        return found_fwd[1] if found_fwd[0] <= found_bwd[0] else found_bwd[1]
    if found_fwd:
        return found_fwd[1]
    if found_bwd:
        return found_bwd[1]
    return NOT_FOUND


def mutate_copy(value: int, rng, p_flip: float) -> int:
    """With probability p_flip, flip one uniformly chosen bit of the 4-bit opcode."""
    if p_flip > 0.0 and rng.bernoulli(p_flip):
        return value ^ (1 << rng.below(4))
    return value


class ReaperQueue:
    """Kill order, head first. Births join the tail; faults can move an organism forward."""

    def __init__(self, ids=()):
        self._items: list[int] = []
        self._head = 0
        self._pos: dict[int, int] = {}
        for org_id in ids:
            self.append(org_id)

    def __len__(self):
        return len(self._items) - self._head

    def __contains__(self, org_id):
        return org_id in self._pos

    def ids(self) -> list[int]:
        return self._items[self._head:]

    def append(self, org_id: int) -> None:
        self._pos[org_id] = len(self._items)
        self._items.append(org_id)

    def head(self) -> int | None:
        return self._items[self._head] if len(self) else None

    def promote(self, org_id: int) -> None:
        i = self._pos[org_id]
        if i > self._head:
            other = self._items[i - 1]
            self._items[i - 1], self._items[i] = org_id, other
            self._pos[org_id], self._pos[other] = i - 1, i

    def remove(self, org_id: int) -> None:
        i = self._pos.pop(org_id)
        if i == self._head:
            self._head += 1
            if self._head > 1024 and self._head * 2 > len(self._items):
                self._compact()
        else:
            del self._items[i]
            for k in range(i, len(self._items)):
                self._pos[self._items[k]] = k

    def _compact(self):
        self._items = self._items[self._head:]
        self._head = 0
        self._pos = {org_id: k for k, org_id in enumerate(self._items)}


class SliceScheduler:
    """Round-robin ring of organism ids; a turn's budget is round(base * length ** pow).

    The ring is a growable int64 buffer so the compiled turn loop can walk it.
    """

    def __init__(self, slice_base: int, slice_pow: float, ring=(), index: int = 0):
        self.slice_base = slice_base
        self.slice_pow = slice_pow
        ids = [int(org_id) for org_id in ring]
        self.buffer = np.zeros(max(16, 2 * len(ids)), dtype=np.int64)
        self.buffer[:len(ids)] = ids
        self.size = len(ids)
        self.index = index

    @property
    def ring(self) -> list[int]:
        return self.buffer[:self.size].tolist()

    def budget(self, length: int) -> int:
        return int(math.floor(self.slice_base * length ** self.slice_pow + 0.5))

    def current(self) -> int:
        return int(self.buffer[self.index])

    def add(self, org_id: int) -> None:
        if self.size == len(self.buffer):
            self.buffer = np.concatenate([self.buffer, np.zeros_like(self.buffer)])
        self.buffer[self.size] = org_id
        self.size += 1

    def remove(self, org_id: int) -> None:
        k = int(np.flatnonzero(self.buffer[:self.size] == org_id)[0])
        self.buffer[k:self.size - 1] = self.buffer[k + 1:self.size]
        self.size -= 1
        if k < self.index:
            self.index -= 1
        if self.index >= self.size:
            self.index = 0

    def advance(self, org_id: int) -> bool:
        """Move past the organism that just ran; True when the ring wrapped."""
        if self.index < self.size and self.buffer[self.index] == org_id:
            self.index += 1
        if self.index >= self.size:
            self.index = 0
            return True
        return False


class SoupWorld:
    kind = "soup"

    def __init__(self, config, rngs):
        self.config = config
        self.n = config.soup_size
        self.cells = bytearray(self.n)
        self.occupied = bytearray(self.n)
        self.used = 0
        self.orgs: dict[int, Organism] = {}
        self.table = OrganismTable()
        self.slot_of = np.full(64, -1, dtype=np.int64)
        self.reaper = ReaperQueue()
        self.scheduler = SliceScheduler(config.slice_base, config.slice_pow)
        self.next_id = 1
        self.clock = 0
        self.instructions = 0
        self.extinct = False
        self.events: list[Event] = []
        # False routes run_steps through the plain interpreter
        self.compiled = True

        self.rngs = rngs
        self.rng_copy = rngs.stream("soup.copy")
        self.rng_cosmic = rngs.stream("soup.cosmic")

        self.p_copy_flip = config.p_copy_flip
        self.p_cosmic = config.p_cosmic
        self.max_org_size = config.max_org_size
        self.search_limit = config.search_limit
        self.error_promotion = config.error_promotion
        self.record_errors = config.record_errors
        self.window = config.parasite_window
        self._reap_above = config.fill_threshold * self.n
        self._reap_until = (config.fill_threshold - config.fill_hysteresis) * self.n
        self._debug = logger.isEnabledFor(logging.DEBUG)

        self._cell_array = None
        self._draws = np.empty(0, dtype=np.float64)
        self._draws_base = 0
        self._out = np.zeros(5, dtype=np.int64)

        self._ops = (
            self._op_nop, self._op_nop, self._op_ifz, self._op_jmp,
            self._op_adrf, self._op_adrb, self._op_sub_ab, self._op_xchg,
            self._op_mov_ii, self._op_inc_a, self._op_inc_b, self._op_dec_c,
            self._op_push_ax, self._op_pop_ax, self._op_mal, self._op_divide,
        )

    # --- bookkeeping ---

    def _emit(self, kind, **fields):
        self.events.append(Event(self.clock, kind, **fields))

    def drain_events(self) -> list[Event]:
        events, self.events = self.events, []
        return events

    @property
    def population(self) -> int:
        return len(self.orgs)

    @property
    def occupancy(self) -> float:
        return self.used / self.n

    @property
    def cell_array(self) -> np.ndarray:
        """The soup as a uint8 array sharing memory with ``cells``."""
        if self._cell_array is None:
            self._cell_array = np.frombuffer(self.cells, dtype=np.uint8)
        return self._cell_array

    def _mark(self, start: int, length: int, value: int) -> None:
        end = start + length
        fill = b"\x01" if value else b"\x00"
        if end <= self.n:
            self.occupied[start:end] = fill * length
        else:
            self.occupied[start:] = fill * (self.n - start)
            self.occupied[:end - self.n] = fill * (end - self.n)

    def _write_cells(self, start: int, data: bytes) -> None:
        for k, value in enumerate(data):
            self.cells[(start + k) % self.n] = value

    def _region_free(self, start: int, length: int) -> bool:
        return not any(cyclic_slice(self.occupied, start, length))

    def is_own(self, org: Organism, addr: int) -> bool:
        n = self.n
        if (addr - org.start) % n < org.length:
            return True
        return org.child_start >= 0 and (addr - org.child_start) % n < org.child_length

    def _new_organism(self, org_id: int, parent_id: int | None, birth_step: int, genotype_id: int) -> Organism:
        slot = self.table.acquire()
        if org_id >= len(self.slot_of):
            grown = np.full(max(2 * len(self.slot_of), org_id + 1), -1, dtype=np.int64)
            grown[:len(self.slot_of)] = self.slot_of
            self.slot_of = grown
        self.slot_of[org_id] = slot
        org = Organism(self.table, slot, org_id, parent_id, birth_step, genotype_id)
        self.orgs[org_id] = org
        return org

    # --- placement ---

    def place_organism(self, cells: bytes, address: int = 0, parent_id: int | None = None) -> int:
        """Write a genome into free memory and give it a fresh CPU."""
        length = len(cells)
        if not 1 <= length <= self.max_org_size:
            raise GenomeError(f"genome too long: {length} cells > max_org_size {self.max_org_size}")
        if any(c > isa.OPCODE_MASK for c in cells):
            raise GenomeError("cell values must lie in 0..15")
        address %= self.n
        if not self._region_free(address, length):
            raise PlacementError(f"cells {address}..{address + length - 1} are not free")
        self._write_cells(address, cells)
        self._mark(address, length, 1)
        self.used += length
        return self._birth(address, length, parent_id)

    def seed_ancestor(self, cells: bytes) -> int:
        return self.place_organism(cells, 0)

    def _birth(self, start: int, length: int, parent_id: int | None) -> int:
        genome = cyclic_slice(self.cells, start, length)
        genotype = fnv1a64(genome)
        org = self._new_organism(self.next_id, parent_id, self.clock, genotype)
        self.next_id += 1
        org.start = start
        org.length = length
        org.child_start = -1
        org.cpu.ip = start
        self.table.regs[org._slot, BUDGET] = self.scheduler.budget(length)
        self.reaper.append(org.id)
        self.scheduler.add(org.id)
        self.extinct = False
        self._emit("birth", org=org.id, parent=parent_id, genotype=genotype, addr=start,
                   detail=f"len={length}", body=genome)
        return org.id

    def kill(self, org_id: int) -> None:
        org = self.orgs.pop(org_id)
        org.alive = False
        self._mark(org.start, org.length, 0)
        self.used -= org.length
        if org.child_start >= 0:
            self._mark(org.child_start, org.child_length, 0)
            self.used -= org.child_length
        self.reaper.remove(org_id)
        self.scheduler.remove(org_id)
        slot = org._slot
        org.detach()
        self.slot_of[org_id] = -1
        self.table.release(slot)
        self._emit("death", org=org.id, genotype=org.genotype_id, addr=org.start)

    # --- operations ---

    def reap(self, force: bool = False) -> int:
        """Kill from the queue head until occupancy drops to threshold minus hysteresis.

        An unforced pass does nothing at or below the threshold; a forced pass
        (allocation failure) kills at least one organism.
        """
        if not force and self.used <= self._reap_above:
            return 0
        killed = 0
        while len(self.reaper) and (self.used > self._reap_until or (force and killed == 0)):
            self.kill(self.reaper.head())
            killed += 1
        if killed:
            self._emit("reap", detail=f"killed={killed}")
        return killed

    def malloc_child(self, org: Organism, size: int) -> int:
        if org.child_start >= 0:
            raise SoupFault("allocation already held")
        if not 1 <= size <= self.max_org_size:
            raise SoupFault(f"allocation size {size} out of range")
        start = self._first_gap(org, size)
        if start is None:
            self.reap(force=True)
            if not org.alive:
                raise SoupFault("reaped while allocating")
            start = self._first_gap(org, size)
        if start is None:
            raise SoupFault("no free gap")
        self._mark(start, size, 1)
        self.used += size
        org.child_start = start
        org.child_length = size
        return start

    def _first_gap(self, org: Organism, size: int) -> int | None:
        """First run of ``size`` free cells met walking forward from the end of the body.

        The run may cross the end of the soup but not the walk's own origin.
        """
        n = self.n
        origin = (org.start + org.length) % n
        free = bytes(size)
        p = self.occupied.find(free, origin)
        if p != -1:
            return p
        if origin:
            span = self.occupied[max(origin, n - size + 1):] + self.occupied[:origin]
            p = span.find(free)
            if p != -1:
                return (max(origin, n - size + 1) + p) % n
        return None

    def divide(self, org: Organism) -> int:
        if org.child_start < 0:
            raise SoupFault("divide without allocation")
        start, length = org.child_start, org.child_length
        org.child_start, org.child_length = -1, 0
        return self._birth(start, length, org.id)

    def cosmic_ray(self) -> int:
        """Flip one random bit in each cell independently with probability p_cosmic."""
        p = self.p_cosmic
        if p <= 0.0:
            return 0
        gen = self.rng_cosmic.numpy_generator()
        if p >= 1.0:
            hits = list(range(self.n))
        else:
            count = int(gen.binomial(self.n, p))
            hits = sorted(gen.choice(self.n, size=count, replace=False).tolist()) if count else []
        bits = gen.integers(0, 4, size=len(hits)).tolist()
        for addr, bit in zip(hits, bits):
            old = self.cells[addr]
            self.cells[addr] = old ^ (1 << bit)
            self._emit("mutation", addr=addr, detail=f"cosmic {old}->{self.cells[addr]}")
            if self._debug:
                logger.debug("cosmic ray at %d: %d -> %d", addr, old, self.cells[addr])
        return len(hits)

    def step(self) -> None:
        """One scheduler turn, then reaping and (after a full ring cycle) cosmic rays."""
        if self.orgs:
            org = self.orgs[self.scheduler.current()]
            for _ in range(self.scheduler.budget(org.length)):
                self.execute_instruction(org)
                if not org.alive:
                    break
            self._end_turn(org)
        self._close_step()

    def _end_turn(self, org: Organism) -> None:
        wrapped = self.scheduler.advance(org.id)
        self.reap()
        if wrapped:
            self.cosmic_ray()

    def _close_step(self) -> None:
        if not self.orgs and not self.extinct:
            self.extinct = True
            self._emit("extinction")
        self.clock += 1

    def _copy_draws(self) -> tuple[np.ndarray, int]:
        """Upcoming copy-mutation uniforms and the offset of the next unused one."""
        if self.p_copy_flip <= 0.0 or self.p_copy_flip >= 1.0:
            return self._draws[:0], 0
        at = self.rng_copy.counter - self._draws_base
        if not 0 <= at < len(self._draws):
            self._draws_base = self.rng_copy.counter
            self._draws = self.rng_copy.peek_uniforms(DRAW_BLOCK)
            at = 0
        return self._draws, at

    def run_steps(self, steps: int) -> int:
        """Run ``steps`` turns exactly as ``step`` would, most of them in compiled code.

        Stops early on extinction; returns the number of turns taken.
        """
        done = 0
        remaining = -1
        out = self._out
        while done < steps and not self.extinct:
            if not self.orgs or not self.compiled:
                self.step()
                done += 1
                continue
            draws, at = self._copy_draws()
            scheduler = self.scheduler
            status = kernels.soup_turns(
                self.cell_array, self.table.regs, self.table.stacks, scheduler.buffer, scheduler.size,
                scheduler.index, self.slot_of, draws, at, self.p_copy_flip, self.window,
                self.search_limit, steps - done, remaining, self.p_cosmic > 0.0,
                self.used > self._reap_above, out,
            )
            turns = int(out[kernels.OUT_TURNS])
            scheduler.index = int(out[kernels.OUT_INDEX])
            self.instructions += int(out[kernels.OUT_EXECUTED])
            self.rng_copy.counter += int(out[kernels.OUT_DRAWS]) - at
            self.clock += turns
            done += turns
            remaining = int(out[kernels.OUT_REMAINING])
            if status == kernels.TURNS_DONE or status == kernels.NEED_DRAWS:
                continue
            org = self.orgs[scheduler.current()]
            if status == kernels.HAND_BACK:
                self.execute_instruction(org)
                remaining -= 1
                if org.alive and remaining > 0:
                    continue
            self._end_turn(org)
            self._close_step()
            done += 1
            remaining = -1
        return done

    # --- the CPU ---

    def execute_instruction(self, org: Organism) -> None:
        cpu = org.cpu
        ip = cpu.ip
        if self.is_own(org, ip):
            org.executed_own += 1
        else:
            org.executed_foreign += 1
        if org.executed_own + org.executed_foreign >= self.window:
            org.last_own, org.last_foreign = org.executed_own, org.executed_foreign
            org.executed_own = org.executed_foreign = 0
            org.window_done = True
        self.instructions += 1
        try:
            self._ops[self.cells[ip]](org, cpu, ip)
        except SoupFault as fault:
            self._fault(org, str(fault), ip)

    def _fault(self, org: Organism, detail: str, ip: int, skip: int = 1) -> None:
        cpu = org.cpu
        cpu.error_flag_count += 1
        if org.alive:
            cpu.ip = (ip + skip) % self.n
            if self.error_promotion:
                self.reaper.promote(org.id)
        if self.record_errors:
            self._emit("error", org=org.id, addr=ip, detail=detail)
        if self._debug:
            logger.debug("fault in organism %d at %d: %s", org.id, ip, detail)

    def read_template(self, pos: int) -> bytes:
        cells = self.cells
        n = self.n
        limit = min(self.search_limit, n - 1)
        out = bytearray()
        while len(out) < limit:
            c = cells[pos]
            if c > isa.NOP1:
                break
            out.append(c)
            pos = pos + 1 if pos + 1 < n else 0
        return bytes(out)

    def _op_nop(self, org, cpu, ip):
        cpu.ip = (ip + 1) % self.n

    def _op_ifz(self, org, cpu, ip):
        cpu.ip = (ip + (1 if cpu.cx == 0 else 2)) % self.n

    def _search(self, org, cpu, ip, direction, from_next: bool):
        template = self.read_template((ip + 1) % self.n)
        size = len(template)
        if not size:
            self._fault(org, "empty template", ip)
            return None, size
        start = (ip + 1 + size) % self.n if from_next else ip
        target = template_search(self.cells, start, direction, template, self.search_limit)
        if target is NOT_FOUND:
            self._fault(org, "template not found", ip, skip=1 + size)
        return target, size

    def _op_jmp(self, org, cpu, ip):
        target, _ = self._search(org, cpu, ip, NEAREST, from_next=True)
        if target is not None:
            cpu.ip = target

    def _op_adrf(self, org, cpu, ip):
        target, size = self._search(org, cpu, ip, FORWARD, from_next=True)
        if target is not None:
            cpu.ax = target
            cpu.ip = (ip + 1 + size) % self.n

    def _op_adrb(self, org, cpu, ip):
        target, size = self._search(org, cpu, ip, BACKWARD, from_next=False)
        if target is not None:
            cpu.ax = target
            cpu.ip = (ip + 1 + size) % self.n

    def _op_sub_ab(self, org, cpu, ip):
        cpu.cx = (cpu.ax - cpu.bx) % self.n
        cpu.ip = (ip + 1) % self.n

    def _op_xchg(self, org, cpu, ip):
        cpu.ax, cpu.bx = cpu.bx, cpu.ax
        cpu.ip = (ip + 1) % self.n

    def _op_mov_ii(self, org, cpu, ip):
        dest = cpu.ax
        if not self.is_own(org, dest):
            raise SoupFault(f"write to {dest} outside own body and allocation")
        value = self.cells[cpu.bx]
        copied = mutate_copy(value, self.rng_copy, self.p_copy_flip)
        self.cells[dest] = copied
        if copied != value:
            self._emit("mutation", org=org.id, addr=dest, detail=f"copy {value}->{copied}")
            if self._debug:
                logger.debug("copy mutation by %d at %d: %d -> %d", org.id, dest, value, copied)
        cpu.ip = (ip + 1) % self.n

    def _op_inc_a(self, org, cpu, ip):
        cpu.ax = (cpu.ax + 1) % self.n
        cpu.ip = (ip + 1) % self.n

    def _op_inc_b(self, org, cpu, ip):
        cpu.bx = (cpu.bx + 1) % self.n
        cpu.ip = (ip + 1) % self.n

    def _op_dec_c(self, org, cpu, ip):
        cpu.cx = (cpu.cx - 1) % self.n
        cpu.ip = (ip + 1) % self.n

    def _op_push_ax(self, org, cpu, ip):
        if len(cpu.stack) >= isa.STACK_DEPTH:
            raise SoupFault("stack overflow")
        cpu.stack.append(cpu.ax)
        cpu.ip = (ip + 1) % self.n

    def _op_pop_ax(self, org, cpu, ip):
        if not len(cpu.stack):
            raise SoupFault("stack underflow")
        cpu.ax = cpu.stack.pop()
        cpu.ip = (ip + 1) % self.n

    def _op_mal(self, org, cpu, ip):
        cpu.ax = self.malloc_child(org, cpu.cx)
        cpu.ip = (ip + 1) % self.n

    def _op_divide(self, org, cpu, ip):
        self.divide(org)
        cpu.ip = (ip + 1) % self.n

    # --- snapshots and persistence ---

    def snapshot(self) -> SoupSnapshot:
        orgs = [self.orgs[org_id] for org_id in sorted(self.orgs)]
        slots = [org._slot for org in orgs]
        rows = self.table.regs[slots].tolist()
        stacks = self.table.stacks[slots].tolist()
        views = tuple(
            OrganismView(
                id=o.id, start=r[START], length=r[LENGTH], child_start=r[CHILD_START],
                child_length=r[CHILD_LENGTH], genotype_id=o.genotype_id, parent_id=o.parent_id,
                birth_step=o.birth_step, ax=r[AX], bx=r[BX], cx=r[CX], ip=r[IP],
                stack=tuple(s[:r[DEPTH]]), error_flag_count=r[ERRORS],
                executed_own=r[OWN], executed_foreign=r[FOREIGN],
                last_own=r[LAST_OWN], last_foreign=r[LAST_FOREIGN], window_done=bool(r[WINDOW_DONE]),
            )
            for o, r, s in zip(orgs, rows, stacks)
        )
        return SoupSnapshot(
            step=self.clock, soup_size=self.n, cells=bytes(self.cells),
            free_cells=self.occupied.count(0), organisms=views, instructions=self.instructions,
        )

    _ORG = struct.Struct("<qqqqqqqQqqqqqqqqqB")

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(struct.pack("<QQQQB", self.n, self.clock, self.next_id, self.instructions, int(self.extinct)))
        out.write(bytes(self.cells))
        out.write(struct.pack("<I", len(self.orgs)))
        for view in self.snapshot().organisms:
            out.write(self._ORG.pack(
                view.id, view.start, view.length, view.child_start, view.child_length,
                -1 if view.parent_id is None else view.parent_id, view.birth_step, view.genotype_id,
                view.ax, view.bx, view.cx, view.ip, view.error_flag_count,
                view.executed_own, view.executed_foreign, view.last_own, view.last_foreign,
                int(view.window_done),
            ))
            out.write(struct.pack("<B", len(view.stack)))
            out.write(struct.pack(f"<{len(view.stack)}q", *view.stack))
        ring = self.scheduler.ring
        out.write(struct.pack(f"<Iq{len(ring)}q", len(ring), self.scheduler.index, *ring))
        queue = self.reaper.ids()
        out.write(struct.pack(f"<I{len(queue)}q", len(queue), *queue))
        return out.getvalue()

    @classmethod
    def from_bytes(cls, config, rngs, data: bytes) -> "SoupWorld":
        world = cls(config, rngs)
        buf = io.BytesIO(data)

        def take(fmt):
            size = struct.calcsize(fmt)
            chunk = buf.read(size)
            if len(chunk) != size:
                raise struct.error("short read")
            return struct.unpack(fmt, chunk)

        n, world.clock, world.next_id, world.instructions, extinct = take("<QQQQB")
        if n != world.n:
            raise ValueError(f"soup size {n} does not match config {world.n}")
        world.extinct = bool(extinct)
        cells = buf.read(n)
        if len(cells) != n:
            raise struct.error("short read")
        world.cells[:] = cells
        (count,) = take("<I")
        for _ in range(count):
            (oid, start, length, cstart, clen, parent, birth, genotype,
             ax, bx, cx, ip, errors, own, foreign, last_own, last_foreign, done) = take("<qqqqqqqQqqqqqqqqqB")
            (depth,) = take("<B")
            stack = take(f"<{depth}q")
            org = world._new_organism(oid, None if parent < 0 else parent, birth, genotype)
            row = world.table.regs[org._slot]
            row[[START, LENGTH, CHILD_START, CHILD_LENGTH, AX, BX, CX, IP, DEPTH, ERRORS]] = (
                start, length, cstart, clen, ax, bx, cx, ip, depth, errors)
            row[[OWN, FOREIGN, LAST_OWN, LAST_FOREIGN, WINDOW_DONE]] = (own, foreign, last_own, last_foreign, done)
            row[BUDGET] = world.scheduler.budget(length)
            world.table.stacks[org._slot, :depth] = stack
            world._mark(start, length, 1)
            world.used += length
            if cstart >= 0:
                world._mark(cstart, clen, 1)
                world.used += clen
        (ring_len, index) = take("<Iq")
        world.scheduler = SliceScheduler(config.slice_base, config.slice_pow, take(f"<{ring_len}q"), index)
        (queue_len,) = take("<I")
        world.reaper = ReaperQueue(take(f"<{queue_len}q"))
        if buf.read(1):
            raise ValueError("trailing bytes after soup state")
        return world
