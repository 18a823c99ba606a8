"""Compiled inner loops for both media.

``soup_turns`` runs whole scheduler turns over the organism table and stops
before any instruction that would allocate, divide, fault or mutate; the
Python interpreter in soup.py executes that one instruction and re-enters.
``move_atoms`` is the sequential motion sweep of the chemistry grid.
"""
import numpy as np
from numba import njit

from .isa import (
    ADRB, ADRF, DEC_C, IFZ, INC_A, INC_B, JMP, MOV_II, NOP0, NOP1,
    POP_AX, PUSH_AX, STACK_DEPTH, SUB_AB, XCHG,
)

# organism table columns
(START, LENGTH, CHILD_START, CHILD_LENGTH, AX, BX, CX, IP, DEPTH, ERRORS,
 OWN, FOREIGN, LAST_OWN, LAST_FOREIGN, WINDOW_DONE, BUDGET) = range(16)
COLUMNS = 16

# soup_turns return codes
TURNS_DONE, HAND_BACK, NEED_DRAWS, END_OF_TURN = 0, 1, 2, 3
# soup_turns out[] slots
OUT_TURNS, OUT_INDEX, OUT_EXECUTED, OUT_DRAWS, OUT_REMAINING = range(5)
_EXECUTED = 0

# search directions
SEARCH_FORWARD, SEARCH_BACKWARD, SEARCH_NEAREST = 0, 1, 2

# Moore neighbourhood, row-major
DX = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)
DY = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)


@njit(cache=True)
def _is_own(regs, slot, addr, n):
    if (addr - regs[slot, START]) % n < regs[slot, LENGTH]:
        return True
    child = regs[slot, CHILD_START]
    return child >= 0 and (addr - child) % n < regs[slot, CHILD_LENGTH]


@njit(cache=True)
def _count(regs, slot, ip, n, window):
    if _is_own(regs, slot, ip, n):
        regs[slot, OWN] += 1
    else:
        regs[slot, FOREIGN] += 1
    if regs[slot, OWN] + regs[slot, FOREIGN] >= window:
        regs[slot, LAST_OWN] = regs[slot, OWN]
        regs[slot, LAST_FOREIGN] = regs[slot, FOREIGN]
        regs[slot, OWN] = 0
        regs[slot, FOREIGN] = 0
        regs[slot, WINDOW_DONE] = 1


@njit(cache=True)
def read_template(cells, pos, limit, out):
    n = cells.shape[0]
    size = 0
    while size < limit:
        c = cells[pos]
        if c > NOP1:
            break
        out[size] = c
        size += 1
        pos += 1
        if pos == n:
            pos = 0
    return size


@njit(cache=True)
def _complement_at(cells, begin, template, size, n):
    for k in range(size):
        if cells[(begin + k) % n] != 1 - template[k]:
            return False
    return True


@njit(cache=True)
def search(cells, start, direction, template, size, search_limit):
    """Same contract as soup.template_search; directions 0/1/2 are forward/backward/nearest, -1 is not found."""
    n = cells.shape[0]
    span = min(search_limit, n)
    for d in range(span):
        if direction != SEARCH_BACKWARD and _complement_at(cells, start + d, template, size, n):
            return (start + d + size) % n
        if direction != SEARCH_FORWARD and _complement_at(cells, start - d - size, template, size, n):
            return (start - d - size) % n
    return -1


@njit(cache=True)
def _execute(cells, regs, stacks, slot, template, limit, search_limit, window, draws, draw_at, p_flip):
    n = cells.shape[0]
    ip = regs[slot, IP]
    op = cells[ip]
    if op == NOP0 or op == NOP1:
        _count(regs, slot, ip, n, window)
        regs[slot, IP] = (ip + 1) % n
    elif op == IFZ:
        _count(regs, slot, ip, n, window)
        regs[slot, IP] = (ip + 1) % n if regs[slot, CX] == 0 else (ip + 2) % n
    elif op == JMP or op == ADRF or op == ADRB:
        size = read_template(cells, (ip + 1) % n, limit, template)
        if size == 0:
            return HAND_BACK, draw_at
        if op == JMP:
            target = search(cells, (ip + 1 + size) % n, SEARCH_NEAREST, template, size, search_limit)
        elif op == ADRF:
            target = search(cells, (ip + 1 + size) % n, SEARCH_FORWARD, template, size, search_limit)
        else:
            target = search(cells, ip, SEARCH_BACKWARD, template, size, search_limit)
        if target < 0:
            return HAND_BACK, draw_at
        _count(regs, slot, ip, n, window)
        if op == JMP:
            regs[slot, IP] = target
        else:
            regs[slot, AX] = target
            regs[slot, IP] = (ip + 1 + size) % n
    elif op == SUB_AB:
        _count(regs, slot, ip, n, window)
        regs[slot, CX] = (regs[slot, AX] - regs[slot, BX]) % n
        regs[slot, IP] = (ip + 1) % n
    elif op == XCHG:
        _count(regs, slot, ip, n, window)
        ax = regs[slot, AX]
        regs[slot, AX] = regs[slot, BX]
        regs[slot, BX] = ax
        regs[slot, IP] = (ip + 1) % n
    elif op == MOV_II:
        dest = regs[slot, AX]
        if not _is_own(regs, slot, dest, n):
            return HAND_BACK, draw_at
        if p_flip > 0.0:
            if p_flip >= 1.0:
                return HAND_BACK, draw_at
            if draw_at >= draws.shape[0]:
                return NEED_DRAWS, draw_at
            if draws[draw_at] < p_flip:
                return HAND_BACK, draw_at
            draw_at += 1
        _count(regs, slot, ip, n, window)
        cells[dest] = cells[regs[slot, BX]]
        regs[slot, IP] = (ip + 1) % n
    elif op == INC_A:
        _count(regs, slot, ip, n, window)
        regs[slot, AX] = (regs[slot, AX] + 1) % n
        regs[slot, IP] = (ip + 1) % n
    elif op == INC_B:
        _count(regs, slot, ip, n, window)
        regs[slot, BX] = (regs[slot, BX] + 1) % n
        regs[slot, IP] = (ip + 1) % n
    elif op == DEC_C:
        _count(regs, slot, ip, n, window)
        regs[slot, CX] = (regs[slot, CX] - 1) % n
        regs[slot, IP] = (ip + 1) % n
    elif op == PUSH_AX:
        depth = regs[slot, DEPTH]
        if depth >= STACK_DEPTH:
            return HAND_BACK, draw_at
        _count(regs, slot, ip, n, window)
        stacks[slot, depth] = regs[slot, AX]
        regs[slot, DEPTH] = depth + 1
        regs[slot, IP] = (ip + 1) % n
    elif op == POP_AX:
        depth = regs[slot, DEPTH]
        if depth == 0:
            return HAND_BACK, draw_at
        _count(regs, slot, ip, n, window)
        regs[slot, AX] = stacks[slot, depth - 1]
        regs[slot, DEPTH] = depth - 1
        regs[slot, IP] = (ip + 1) % n
    else:
        # mal and divide touch the population
        return HAND_BACK, draw_at
    return _EXECUTED, draw_at


@njit(cache=True)
def soup_turns(cells, regs, stacks, ring, ring_size, index, slot_of, draws, draw_at, p_flip,
               window, search_limit, max_turns, remaining, stop_on_wrap, reap_pending, out):
    """Run up to ``max_turns`` scheduler turns starting at ring position ``index``.

    ``remaining`` is the unspent budget of a turn already under way, or -1 to
    start a fresh one. Returns a status code; counters go to ``out``.
    """
    n = cells.shape[0]
    limit = min(search_limit, n - 1)
    template = np.empty(max(limit, 1), dtype=np.int64)
    turns = 0
    executed = 0
    status = TURNS_DONE
    while turns < max_turns:
        slot = slot_of[ring[index]]
        if remaining < 0:
            remaining = regs[slot, BUDGET]
        while remaining > 0:
            code, draw_at = _execute(cells, regs, stacks, slot, template, limit, search_limit,
                                     window, draws, draw_at, p_flip)
            if code != _EXECUTED:
                status = code
                break
            executed += 1
            remaining -= 1
        if status != TURNS_DONE:
            break
        wraps = index + 1 >= ring_size
        if reap_pending or (stop_on_wrap and wraps):
            remaining = 0
            status = END_OF_TURN
            break
        index = 0 if wraps else index + 1
        turns += 1
        remaining = -1
    out[OUT_TURNS] = turns
    out[OUT_INDEX] = index
    out[OUT_EXECUTED] = executed
    out[OUT_DRAWS] = draw_at
    out[OUT_REMAINING] = remaining
    return status


@njit(cache=True)
def _neighbours(ax, ay, bx, by, width, height):
    dx = abs(ax - bx)
    dy = abs(ay - by)
    dx = min(dx, width - dx)
    dy = min(dy, height - dy)
    return dx <= 1 and dy <= 1


@njit(cache=True)
def move_atoms(xs, ys, grid, barrier, order, directions, offsets, partners, width, height):
    """Try one Moore step per atom in ``order``; returns how many moved.

    A move needs an empty target and must keep every bonded partner within
    one cell (toroidal). ``offsets``/``partners`` is a CSR adjacency list.
    """
    moved = 0
    for k in range(order.shape[0]):
        atom = order[k]
        if barrier[atom]:
            continue
        nx = (xs[atom] + DX[directions[k]]) % width
        ny = (ys[atom] + DY[directions[k]]) % height
        if grid[ny, nx] >= 0:
            continue
        keeps = True
        for e in range(offsets[atom], offsets[atom + 1]):
            other = partners[e]
            if not _neighbours(nx, ny, xs[other], ys[other], width, height):
                keeps = False
                break
        if not keeps:
            continue
        grid[ys[atom], xs[atom]] = -1
        grid[ny, nx] = atom
        xs[atom] = nx
        ys[atom] = ny
        moved += 1
    return moved
