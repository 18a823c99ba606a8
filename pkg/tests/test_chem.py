"""Tests for chem.py - reactions, motion, perturbation and the conservation law."""

import numpy as np
import pytest

from openmedium.utils.config import RunConfig
from openmedium.utils.errors import PlacementError
from openmedium.utils.rng import RngStreams
from openmedium.worlds import kernels, make_world
from openmedium.worlds.chem import EMPTY, MOORE, ChemWorld
from openmedium.worlds.rules import TYPE_LETTERS, build_table, parse_rules

A, B, E = (TYPE_LETTERS.index(ch) for ch in "abe")


def bare_world(rules="a1+b1 -> a2#b2", seed=0, **overrides):
    cfg = RunConfig(world_kind="atoms", grid_width=16, grid_height=16, seed=seed, **overrides)
    table = parse_rules(rules) if rules else build_table([])
    return ChemWorld(cfg, RngStreams(seed), table)


def test_adjacent_pair_reacts():
    world = bare_world()
    a, b = world.add_atoms([A, B], [1, 1], [3, 4], [5, 5]).tolist()
    assert world.apply_reactions() == 1
    assert world.states.tolist() == [2, 2]
    assert world.bonds == {(a, b)}


def test_diagonal_and_wrapped_neighbours_react():
    world = bare_world()
    world.add_atoms([A, B], [1, 1], [0, 15], [0, 15])
    assert world.apply_reactions() == 1


def test_two_cells_apart_do_not_react():
    world = bare_world()
    world.add_atoms([A, B], [1, 1], [3, 5], [5, 5])
    assert world.apply_reactions() == 0
    assert world.states.tolist() == [1, 1]


def test_row_reacts_once_and_both_sides_occur():
    outcomes = set()
    for seed in range(100):
        world = bare_world(seed=seed)
        left, middle, right = world.add_atoms([A, B, A], [1, 1, 1], [2, 3, 4], [5, 5, 5]).tolist()
        assert world.apply_reactions() == 1
        assert world.states[middle] == 2
        if world.states[left] == 2:
            assert world.bonds == {(left, middle)} and world.states[right] == 1
            outcomes.add("left")
        else:
            assert world.bonds == {(middle, right)} and world.states[right] == 2
            outcomes.add("right")
    assert outcomes == {"left", "right"}


def test_bonded_rule_breaks_bond():
    world = bare_world("x3#x4 -> x0+x0")
    a, b = world.add_atoms([A, A], [3, 4], [3, 3], [4, 5]).tolist()
    world.bond(a, b)
    world.apply_reactions()
    assert world.bonds == set()
    assert world.states.tolist() == [0, 0]


def test_barriers_never_react():
    world = bare_world("x0+y0 -> x1#y1")
    world.place_barriers([(0, 0, 0, 15)])
    world.add_atoms([A], [0], [1], [4])
    assert world.apply_reactions() == 0


def test_single_atom_moves_to_a_neighbour():
    world = bare_world(rules="")
    (atom,) = world.add_atoms([A], [0], [7], [7]).tolist()
    world.move_atoms()
    allowed = {(7, 7)} | {((7 + dx) % 16, (7 + dy) % 16) for dx, dy in MOORE}
    x, y = int(world.xs[atom]), int(world.ys[atom])
    assert (x, y) in allowed
    assert world.grid[y, x] == atom
    assert (world.grid != EMPTY).sum() == 1


def test_motion_keeps_bonds_local_and_cells_single(atoms_config):
    world = make_world(atoms_config.replace(p_bond_break=0.0, p_state_reset=0.0), RngStreams(1))
    for _ in range(200):
        world.move_atoms()
        assert world.bond_violations() == []
        assert int((world.grid != EMPTY).sum()) == world.atom_count
        assert np.array_equal(world.grid[world.ys, world.xs], np.arange(world.atom_count))


def test_barriers_do_not_move():
    world = bare_world(rules="")
    world.place_barriers([(4, 4, 5, 5)])
    before = (world.xs.copy(), world.ys.copy())
    for _ in range(20):
        world.move_atoms()
    assert np.array_equal(world.xs, before[0]) and np.array_equal(world.ys, before[1])


def test_perturb_at_zero_changes_nothing():
    world = bare_world(p_bond_break=0.0, p_state_reset=0.0)
    a, b = world.add_atoms([A, B], [2, 2], [3, 4], [5, 5]).tolist()
    world.bond(a, b)
    assert world.perturb() == (0, 0)
    assert world.bonds == {(a, b)}
    assert world.states.tolist() == [2, 2]


def test_perturb_at_one_breaks_every_bond_and_resets_states():
    world = bare_world(p_bond_break=1.0, p_state_reset=1.0)
    ids = world.add_atoms([A, B, E], [2, 3, 4], [3, 4, 5], [5, 5, 5]).tolist()
    world.bond(ids[0], ids[1])
    world.bond(ids[1], ids[2])
    census = world.census().tolist()
    world.perturb()
    assert world.bonds == set()
    assert world.states.tolist() == [0, 0, 0]
    assert world.census().tolist() == census


def test_step_without_rules_motion_or_noise_is_identity():
    world = bare_world(rules="", motion_enabled=False, p_bond_break=0.0, p_state_reset=0.0,
                       food_count=20, cap_food_count=0)
    world.seed_replicator("ab")
    before = world.snapshot()
    world.step()
    after = world.snapshot()
    assert after.step == before.step + 1
    assert after.bonds == before.bonds
    for name in ("types", "states", "xs", "ys"):
        assert np.array_equal(getattr(after, name), getattr(before, name))


def test_seed_chain_layout():
    world = bare_world(food_count=10, cap_food_count=2)
    ids = world.seed_replicator("ab")
    assert [TYPE_LETTERS[t] for t in world.types[ids]] == ["e", "a", "b", "e"]
    assert world.states[ids].tolist() == [8, 1, 1, 1]
    assert world.bonds == {(ids[0], ids[1]), (ids[1], ids[2]), (ids[2], ids[3])}
    assert world.atom_count == 4 + 12
    food = np.setdiff1d(np.arange(world.atom_count), ids)
    assert set(world.types[food].tolist()) <= {A, B, E}
    assert not world.states[food].any()


def test_seed_without_room():
    world = bare_world(food_count=300)
    with pytest.raises(PlacementError):
        world.seed_replicator("ab")


def test_seed_on_barrier():
    world = bare_world(food_count=0, cap_food_count=0, seed_x=2, seed_y=2)
    world.place_barriers([(0, 2, 15, 2)])
    with pytest.raises(PlacementError, match="no room"):
        world.seed_replicator("ab", (2, 2))


def test_census_is_constant_over_a_full_run(atoms_config):
    world = make_world(atoms_config.replace(p_bond_break=0.01, p_state_reset=0.01), RngStreams(2))
    census = world.expected_census().tolist()
    for _ in range(300):
        world.step()
        assert world.census().tolist() == census
        assert world.bond_violations() == []


def test_state_round_trip_continues_identically(atoms_config):
    rngs = RngStreams(4)
    world = make_world(atoms_config.replace(seed=4), rngs)
    for _ in range(100):
        world.step()
    restored = ChemWorld.from_bytes(world.config, RngStreams.from_states(4, rngs.states()), world.rules, world.to_bytes())
    for _ in range(100):
        world.step()
        restored.step()
    assert restored.to_bytes() == world.to_bytes()
    assert restored.bonds == world.bonds


def sequential_sweep(world, order, directions):
    """Motion one atom at a time over plain lists."""
    xs, ys = world.xs.tolist(), world.ys.tolist()
    grid = world.grid.copy()
    partners = world.snapshot().partners()
    moved = 0
    for atom, d in zip(order.tolist(), directions.tolist()):
        dx, dy = MOORE[d]
        nx, ny = (xs[atom] + dx) % world.width, (ys[atom] + dy) % world.height
        if grid[ny, nx] != EMPTY:
            continue
        if not all(world._adjacent(nx, ny, xs[p], ys[p]) for p in partners[atom]):
            continue
        grid[ys[atom], xs[atom]] = EMPTY
        grid[ny, nx] = atom
        xs[atom], ys[atom] = nx, ny
        moved += 1
    return moved, xs, ys, grid


def test_compiled_motion_matches_a_sequential_sweep(atoms_config):
    world = make_world(atoms_config.replace(seed=9), RngStreams(9))
    gen = np.random.default_rng(9)
    for _ in range(20):
        world.step()
        order = gen.permutation(np.flatnonzero(~world.barrier))
        directions = gen.integers(0, len(MOORE), size=order.size)
        expected, xs, ys, grid = sequential_sweep(world, order, directions)
        offsets, partners = world.adjacency()
        moved = kernels.move_atoms(world.xs, world.ys, world.grid, world.barrier, order, directions,
                                   offsets, partners, world.width, world.height)
        assert moved == expected
        assert world.xs.tolist() == xs and world.ys.tolist() == ys
        assert np.array_equal(world.grid, grid)


def test_adjacency_lists_every_partner(atoms_config):
    world = make_world(atoms_config, RngStreams(0))
    world.bond(5, 9)
    world.bond(9, 30)
    offsets, partners = world.adjacency()
    listed = [sorted(partners[offsets[a]:offsets[a + 1]].tolist()) for a in range(world.atom_count)]
    assert listed == [sorted(p) for p in world.snapshot().partners()]
