"""
Union-find over the pieces of a periodic domain. Each element remembers the
lattice translation between itself and its parent, so merging a component
with a translated copy of itself records a cycle (a wrapping vector).
"""
import math

Vector = tuple[int, int]


def _add(a: Vector, b: Vector) -> Vector:
    return a[0] + b[0], a[1] + b[1]


def _sub(a: Vector, b: Vector) -> Vector:
    return a[0] - b[0], a[1] - b[1]


class TranslationUnionFind:
    """
    offsets[x] = d means x translated by d touches parent[x] in place
    """

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.offsets: list[Vector] = [(0, 0)] * size
        self.sizes = [1] * size
        self.cycles: dict[int, list[Vector]] = {}

    def find(self, x: int) -> tuple[int, Vector]:
        path = []
        root = x
        while self.parents[root] != root:
            path.append(root)
            root = self.parents[root]
        # compress, accumulating offsets from the root side down
        total = (0, 0)
        for node in reversed(path):
            total = _add(self.offsets[node], total)
            self.offsets[node] = total
            self.parents[node] = root
        return root, self.offsets[x] if x != root else (0, 0)

    def union(self, a: int, b: int, translation: Vector = (0, 0)):
        """a in place touches b translated by `translation`"""
        ra, da = self.find(a)
        rb, db = self.find(b)
        if ra == rb:
            cycle = _add(_sub(translation, db), da)
            if cycle != (0, 0):
                self.cycles.setdefault(ra, []).append(cycle)
            return
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
            da, db = db, da
            translation = (-translation[0], -translation[1])
        self.parents[rb] = ra
        self.offsets[rb] = _sub(_add(da, translation), db)
        self.sizes[ra] += self.sizes[rb]
        moved = self.cycles.pop(rb, [])
        if moved:
            self.cycles.setdefault(ra, []).extend(moved)


def normalize_class(vector: Vector) -> Vector:
    """Primitive representative with a positive leading coordinate"""
    p, q = vector
    g = math.gcd(p, q)
    if g == 0:
        return 0, 0
    p, q = p // g, q // g
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    return p, q


def wrapping_class(cycles: list[Vector]) -> tuple[int, Vector]:
    """(rank, class) of the translation group generated by the cycles"""
    nonzero = [c for c in cycles if c != (0, 0)]
    if not nonzero:
        return 0, (0, 0)
    first = nonzero[0]
    for c in nonzero[1:]:
        if first[0] * c[1] - first[1] * c[0] != 0:
            return 2, normalize_class(first)
    return 1, normalize_class(first)
