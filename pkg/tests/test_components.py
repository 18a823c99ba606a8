"""Tests for components.py - bond-graph partitioning."""

from collections import deque

import numpy as np

from openmedium.observatory.components import UnionFind, connected_components
from openmedium.utils.config import RunConfig
from openmedium.utils.rng import RngStreams
from openmedium.worlds import make_world
from openmedium.worlds.chem import ChemWorld
from openmedium.worlds.rules import build_table


def bfs_components(snapshot):
    partners = snapshot.partners()
    seen, groups = set(), []
    for atom in range(snapshot.atom_count):
        if atom in seen or snapshot.barrier[atom]:
            continue
        group, queue = [], deque([atom])
        seen.add(atom)
        while queue:
            a = queue.popleft()
            group.append(a)
            for b in partners[a]:
                if b not in seen and not snapshot.barrier[b]:
                    seen.add(b)
                    queue.append(b)
        groups.append(sorted(group))
    return sorted(groups, key=lambda g: g[0])


def test_union_find_counts_components():
    uf = UnionFind(6)
    assert uf.union(0, 1)
    assert uf.union(1, 2)
    assert not uf.union(0, 2)
    uf.union(4, 5)
    assert uf.num_components == 3
    assert uf.find(2) == uf.find(0)
    assert uf.find(3) != uf.find(4)


def test_components_match_breadth_first_search(atoms_config):
    world = make_world(atoms_config.replace(barrier_spec=((0, 0, 0, 31),)), RngStreams(5))
    gen = np.random.default_rng(5)
    movable = np.flatnonzero(~world.barrier)
    for _ in range(150):
        a, b = (int(v) for v in gen.choice(movable, size=2, replace=False))
        world.bond(a, b)
    snapshot = world.snapshot()
    assert connected_components(snapshot) == bfs_components(snapshot)


def test_seed_chain_is_one_component(atoms_world):
    components = connected_components(atoms_world.snapshot())
    assert [0, 1, 2, 3] in components
    assert sum(len(c) for c in components) == atoms_world.atom_count


def test_components_match_breadth_first_search_on_random_graphs():
    gen = np.random.default_rng(17)
    cfg = RunConfig(world_kind="atoms", grid_width=16, grid_height=16)
    for _ in range(1000):
        world = ChemWorld(cfg, RngStreams(0), build_table([]))
        count = int(gen.integers(1, 51))
        cells = gen.choice(256, size=count, replace=False)
        world.add_atoms(gen.integers(0, 6, size=count), np.zeros(count), cells % 16, cells // 16)
        world.barrier[:] = gen.random(count) < 0.1
        for _ in range(int(gen.integers(0, 2 * count))):
            a, b = gen.integers(0, count, size=2).tolist()
            if a != b:
                world.bond(a, b)
        snapshot = world.snapshot()
        assert connected_components(snapshot) == bfs_components(snapshot)
