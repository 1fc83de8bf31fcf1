"""
Connected components of {V < c} and {V > c} on sampled grids.

Samples are joined by 4-connectivity and, inside saddle cells, by the
diagonal whose sign matches the cell-center value, which is the rule
marching squares uses to split saddles. On periodic grids the pieces found
by scipy are glued across the torus seams with a translation-tracking
union-find; a component glued to a translated copy of itself wraps.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from novikov_cli.core.grid import ScalarGrid, Sign
from novikov_cli.core.union_find import TranslationUnionFind, wrapping_class
from novikov_cli.utils.logger import get_logger

_LOG = get_logger(__name__)

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class ComponentStats:
    label: int
    cell_count: int
    bbox: tuple[float, float, float, float]
    diameter: float
    wrapping: tuple[int, int]
    wrap_rank: int

    @property
    def wraps(self) -> bool:
        return self.wrap_rank > 0

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'cell_count': self.cell_count,
            'bbox': list(self.bbox),
            'diameter': self.diameter,
            'wrapping': list(self.wrapping),
            'wrap_rank': self.wrap_rank,
        }


@dataclass(frozen=True, eq=False)
class RawLabeling:
    """
    labels[i, j] is 0 outside the set, otherwise the component id (1-based).
    copies[i, j] is the translation (in periods) placing the sample in the
    connected lift of its component
    """
    level: float
    sign: Sign
    labels: np.ndarray
    copies: np.ndarray
    ranks: tuple[int, ...]
    classes: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.ranks)

    def rank_of(self, label: int) -> int:
        return self.ranks[label - 1] if label > 0 else 0

    def wrapping_classes(self) -> list[tuple[int, int, int]]:
        """Distinct (p, q, rank) of wrapping components"""
        found = {(p, q, r) for r, (p, q) in zip(self.ranks, self.classes)
                 if r > 0}
        return sorted(found)

    @property
    def any_wraps(self) -> bool:
        return any(r > 0 for r in self.ranks)


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    level: float
    sign: Sign
    labels: np.ndarray
    copies: np.ndarray
    component_stats: tuple[ComponentStats, ...]

    def to_dict(self) -> dict:
        return {
            'level': self.level,
            'sign': self.sign.value,
            'components': [s.to_dict() for s in self.component_stats],
        }


def _corner_views(arr: np.ndarray, periodic: bool):
    """Values at the four corners (i,j), (i+1,j), (i+1,j+1), (i,j+1)"""
    if periodic:
        b = np.roll(arr, -1, axis=0)
        return arr, b, np.roll(b, -1, axis=1), np.roll(arr, -1, axis=1)
    return arr[:-1, :-1], arr[1:, :-1], arr[1:, 1:], arr[:-1, 1:]


def _saddle_links(grid: ScalarGrid, mask: np.ndarray, center_in: np.ndarray,
                  pieces: np.ndarray):
    """(label_from, label_to, tx, ty) for the diagonals of saddle cells"""
    a, b, c, d = _corner_views(mask, grid.periodic)
    la, lb, lc, ld = _corner_views(pieces, grid.periodic)
    nx, ny = grid.nx, grid.ny
    if grid.periodic:
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing='ij')
        seam_x = (ii == nx - 1).astype(int)
        seam_y = (jj == ny - 1).astype(int)
    else:
        seam_x = np.zeros(a.shape, dtype=int)
        seam_y = np.zeros(a.shape, dtype=int)
    links = []
    # corners a, c in the set joined across the cell
    sel = a & c & ~b & ~d & center_in
    links.append(np.stack([la[sel], lc[sel], seam_x[sel], seam_y[sel]],
                          axis=1))
    # corners b, d: b sits at (+seam_x, 0), d at (0, +seam_y)
    sel = b & d & ~a & ~c & center_in
    links.append(np.stack([lb[sel], ld[sel], -seam_x[sel], seam_y[sel]],
                          axis=1))
    return links


def _seam_links(grid: ScalarGrid, mask: np.ndarray, pieces: np.ndarray):
    links = []
    rows = mask[-1, :] & mask[0, :]
    links.append(np.stack([pieces[-1, rows], pieces[0, rows],
                           np.ones(rows.sum(), dtype=int),
                           np.zeros(rows.sum(), dtype=int)], axis=1))
    cols = mask[:, -1] & mask[:, 0]
    links.append(np.stack([pieces[cols, -1], pieces[cols, 0],
                           np.zeros(cols.sum(), dtype=int),
                           np.ones(cols.sum(), dtype=int)], axis=1))
    return links


def label_raw(grid: ScalarGrid, c: float, sign: Sign | str) -> RawLabeling:
    sign = Sign(sign)
    level = grid.level(c)
    mask = sign.select(grid.values, level)
    center_in = sign.select(grid.centers, level)
    pieces, count = ndimage.label(mask, structure=_CROSS)

    links = _saddle_links(grid, mask, center_in, pieces)
    if grid.periodic:
        links.extend(_seam_links(grid, mask, pieces))
    links = [x for x in links if len(x)]
    uf = TranslationUnionFind(count + 1)
    if links:
        for la, lb, tx, ty in np.unique(np.concatenate(links), axis=0):
            uf.union(int(la), int(lb), (int(tx), int(ty)))

    # final ids in order of first appearance, row-major
    first_seen = np.unique(pieces[mask], return_index=True)
    order = np.argsort(first_seen[1])
    root_ids: dict[int, int] = {}
    piece_ids = np.zeros(count + 1, dtype=np.int64)
    piece_copies = np.zeros((count + 1, 2), dtype=np.int64)
    for piece in first_seen[0][order]:
        root, offset = uf.find(int(piece))
        if root not in root_ids:
            root_ids[root] = len(root_ids) + 1
        piece_ids[piece] = root_ids[root]
        piece_copies[piece] = offset
    ranks, classes = [], []
    for root in root_ids:
        rank, cls = wrapping_class(uf.cycles.get(root, []))
        ranks.append(rank)
        classes.append(cls)
    labels = piece_ids[pieces]
    copies = piece_copies[pieces]
    labels.setflags(write=False)
    copies.setflags(write=False)
    return RawLabeling(level, sign, labels, copies, tuple(ranks),
                       tuple(classes))


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if len(points) > 3:
        try:
            points = points[ConvexHull(points).vertices]
        except (QhullError, ValueError):
            pass
    return float(pdist(points).max())


def lifted_points(grid: ScalarGrid, raw: RawLabeling,
                  label: int) -> np.ndarray:
    ii, jj = np.nonzero(raw.labels == label)
    shift = raw.copies[ii, jj]
    return grid.point(ii + grid.nx * shift[:, 0], jj + grid.ny * shift[:, 1])


def _stats(grid: ScalarGrid, raw: RawLabeling) -> tuple[ComponentStats, ...]:
    flat = raw.labels.ravel()
    order = np.argsort(flat, kind='stable')
    bounds = np.searchsorted(flat[order], np.arange(1, raw.count + 2))
    ii_all, jj_all = np.unravel_index(order, raw.labels.shape)
    result = []
    for label in range(1, raw.count + 1):
        sl = slice(bounds[label - 1], bounds[label])
        ii, jj = ii_all[sl], jj_all[sl]
        shift = raw.copies[ii, jj]
        points = grid.point(ii + grid.nx * shift[:, 0],
                            jj + grid.ny * shift[:, 1])
        rank = raw.ranks[label - 1]
        if rank:
            diameter = math.inf
        else:
            diameter = _diameter(points)
        lo, hi = points.min(axis=0), points.max(axis=0)
        result.append(ComponentStats(
            label=label,
            cell_count=len(ii),
            bbox=(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])),
            diameter=diameter,
            wrapping=raw.classes[label - 1],
            wrap_rank=rank,
        ))
    return tuple(result)


def label_components(grid: ScalarGrid, c: float,
                     sign: Sign | str) -> ComponentLabeling:
    raw = label_raw(grid, c, sign)
    stats = _stats(grid, raw)
    _LOG.debug(f'{raw.sign.value} c={raw.level:.6g}: {raw.count} components, '
               f'{sum(s.wraps for s in stats)} wrapping')
    return ComponentLabeling(raw.level, raw.sign, raw.labels, raw.copies,
                             stats)
