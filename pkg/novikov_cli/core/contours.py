"""
Marching squares on sampled grids with saddle cells split by the
cell-center value, stitched across the seams of periodic grids.
"""
from dataclasses import dataclass

import numpy as np

from novikov_cli.core.grid import ScalarGrid

# cell edges: bottom (x-edge at j), right (y-edge at i+1),
# top (x-edge at j+1), left (y-edge at i)
_BOTTOM, _RIGHT, _TOP, _LEFT = range(4)


@dataclass(frozen=True, eq=False)
class Polyline:
    """
    Vertices in plane coordinates along one level line. Closed lines on a
    torus carry the period translation between their two ends
    """
    vertices: np.ndarray
    closed: bool
    winding: tuple[int, int] | None
    below_sample: tuple[int, int]
    above_sample: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            'vertices': self.vertices.tolist(),
            'closed': self.closed,
            'winding': list(self.winding) if self.winding else None,
        }


def _saddle_pairs(case: int, center_below: bool):
    if case == 5:
        if center_below:
            return ((_BOTTOM, _RIGHT), (_TOP, _LEFT))
        return ((_LEFT, _BOTTOM), (_RIGHT, _TOP))
    if center_below:
        return ((_LEFT, _BOTTOM), (_RIGHT, _TOP))
    return ((_BOTTOM, _RIGHT), (_TOP, _LEFT))


class _Tracer:
    def __init__(self, grid: ScalarGrid, level: float):
        self.grid = grid
        self.level = level
        self.nx, self.ny = grid.nx, grid.ny
        self.below = grid.values < level
        self.segments: list[tuple[tuple, tuple]] = []
        self.adjacent: dict[tuple, list[tuple[int, int]]] = {}

    def _edge(self, i: int, j: int, side: int):
        """(edge key, seam shift of the edge relative to the cell)"""
        nx, ny = self.nx, self.ny
        if side == _BOTTOM:
            return ('x', i, j), (0, 0)
        if side == _LEFT:
            return ('y', i, j), (0, 0)
        if side == _RIGHT:
            return ('y', (i + 1) % nx, j), (int(i + 1 == nx), 0)
        return ('x', i, (j + 1) % ny), (0, int(j + 1 == ny))

    def _crossing(self, key) -> tuple[float, float]:
        """Fractional sample coordinates of the level crossing on an edge"""
        kind, i, j = key
        values = self.grid.values
        if kind == 'x':
            v0, v1 = values[i, j], values[(i + 1) % self.nx, j]
        else:
            v0, v1 = values[i, j], values[i, (j + 1) % self.ny]
        t = (self.level - v0) / (v1 - v0)
        return (i + t, j) if kind == 'x' else (i, j + t)

    def build(self):
        if self.grid.periodic:
            b = np.roll(self.below, -1, axis=0)
            corners = [self.below, b, np.roll(b, -1, axis=1),
                       np.roll(self.below, -1, axis=1)]
        else:
            s = self.below
            corners = [s[:-1, :-1], s[1:, :-1], s[1:, 1:], s[:-1, 1:]]
        case = sum(c.astype(int) << k for k, c in enumerate(corners))
        center_below = self.grid.centers < self.level
        a, b, c, d = corners
        crossing = {
            _BOTTOM: a != b, _RIGHT: b != c, _TOP: d != c, _LEFT: a != d,
        }
        for i, j in zip(*np.nonzero((case != 0) & (case != 15))):
            i, j = int(i), int(j)
            k = int(case[i, j])
            if k in (5, 10):
                pairs = _saddle_pairs(k, bool(center_below[i, j]))
            else:
                sides = [s for s in range(4) if crossing[s][i, j]]
                pairs = (tuple(sides),)
            for s0, s1 in pairs:
                self._add(self._edge(i, j, s0), self._edge(i, j, s1))
        return self

    def _add(self, end0, end1):
        index = len(self.segments)
        self.segments.append((end0, end1))
        self.adjacent.setdefault(end0[0], []).append((index, 0))
        self.adjacent.setdefault(end1[0], []).append((index, 1))

    def _vertex(self, key, copy) -> np.ndarray:
        u, v = self._crossing(key)
        return self.grid.point(u + self.nx * copy[0], v + self.ny * copy[1])

    def _sides(self, key) -> tuple[tuple[int, int], tuple[int, int]]:
        kind, i, j = key
        if kind == 'x':
            other = ((i + 1) % self.nx, j)
        else:
            other = (i, (j + 1) % self.ny)
        if self.below[i, j]:
            return (i, j), other
        return other, (i, j)

    def trace(self, visited: np.ndarray, start: int, entry: int) -> Polyline:
        cell_copy = (0, 0)
        key, shift = self.segments[start][entry]
        start_copy = shift
        vertices = [self._vertex(key, start_copy)]
        seg = start
        while True:
            visited[seg] = True
            key, shift = self.segments[seg][1 - entry]
            copy = (cell_copy[0] + shift[0], cell_copy[1] + shift[1])
            vertices.append(self._vertex(key, copy))
            following = [(s, e) for s, e in self.adjacent[key] if s != seg]
            if not following:
                closed, winding = False, None
                break
            seg, entry = following[0]
            if visited[seg]:
                vertices.pop()
                closed = True
                winding = (copy[0] - start_copy[0], copy[1] - start_copy[1])
                break
            next_shift = self.segments[seg][entry][1]
            cell_copy = (copy[0] - next_shift[0], copy[1] - next_shift[1])
        below, above = self._sides(self.segments[start][0][0])
        if not self.grid.periodic:
            winding = None
        return Polyline(np.array(vertices), closed, winding, below, above)

    def polylines(self) -> list[Polyline]:
        visited = np.zeros(len(self.segments), dtype=bool)
        result = []
        # open chains start at boundary edges touched once
        for key, ends in self.adjacent.items():
            if len(ends) == 1 and not visited[ends[0][0]]:
                result.append(self.trace(visited, *ends[0]))
        for index in range(len(self.segments)):
            if not visited[index]:
                result.append(self.trace(visited, index, 0))
        return result


def extract_contours(grid: ScalarGrid, c: float) -> list[Polyline]:
    if not grid.min < c < grid.max:
        return []
    return _Tracer(grid, grid.level(c)).build().polylines()
