"""Bond-graph components of an atom snapshot."""


class UnionFind:
    """Union-find over 0..size-1 with path compression and union by size."""

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.sizes = [1] * size
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]
        self.num_components -= 1
        return True


def connected_components(snapshot) -> list[list[int]]:
    """Partition non-barrier atoms by bonds.

    Components are sorted atom-index lists, ordered by their smallest atom.
    """
    uf = UnionFind(snapshot.atom_count)
    barrier = snapshot.barrier
    for a, b in snapshot.bonds:
        if not barrier[a] and not barrier[b]:
            uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for atom in range(snapshot.atom_count):
        if not barrier[atom]:
            groups.setdefault(uf.find(atom), []).append(atom)
    return sorted(groups.values(), key=lambda group: group[0])
