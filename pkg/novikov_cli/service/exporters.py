import csv
import json
import struct
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Polygon

from novikov_cli.core.contours import Polyline
from novikov_cli.core.grid import ScalarGrid, Window
from novikov_cli.utils.exceptions import NovikovCliValidationException
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.variables import GRID_MAGIC, SVG_HASH_SALT

_LOG = get_logger(__name__)

_GRID_HEADER = struct.Struct('<8sii')
CONTOUR_CSV_COLUMNS = ('polyline_id', 'x', 'y', 'closed', 'p', 'q')
PPM_COLORMAP = 'viridis'


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def dumps_json(payload: dict) -> str:
    return json.dumps(payload, indent=4, allow_nan=True)


def write_json(payload: dict, path: str | Path):
    path = _prepare(path)
    path.write_text(dumps_json(payload) + '\n')
    _LOG.debug(f'Report written to {path}')


def write_rows_csv(rows: list[dict], path: str | Path):
    path = _prepare(path)
    columns = list(dict.fromkeys(k for row in rows for k in row))
    with open(path, 'w', newline='') as file:
        writer = csv.DictWriter(file, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)


def write_contours_csv(polylines: list[Polyline], path: str | Path):
    path = _prepare(path)
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(CONTOUR_CSV_COLUMNS)
        for index, line in enumerate(polylines):
            p, q = line.winding if line.winding else ('', '')
            for x, y in line.vertices:
                writer.writerow([index, repr(float(x)), repr(float(y)),
                                 int(line.closed), p, q])


def write_grid(grid: ScalarGrid, path: str | Path):
    """Header (magic, nx, ny) followed by row-major float64 values"""
    path = _prepare(path)
    with open(path, 'wb') as file:
        file.write(_GRID_HEADER.pack(GRID_MAGIC, grid.nx, grid.ny))
        file.write(np.ascontiguousarray(grid.values, dtype='<f8').tobytes())


def read_grid(path: str | Path, window: Window | None = None,
              periodic: bool = False) -> ScalarGrid:
    """
    Values only: the binary format keeps no geometry or cell centers, so
    centers are approximated by corner averages
    """
    data = Path(path).read_bytes()
    if len(data) < _GRID_HEADER.size:
        raise NovikovCliValidationException(f'{path} is too short')
    magic, nx, ny = _GRID_HEADER.unpack_from(data)
    if magic != GRID_MAGIC:
        raise NovikovCliValidationException(
            f'{path} is not a grid file: bad magic {magic!r}')
    expected = _GRID_HEADER.size + 8 * nx * ny
    if len(data) != expected:
        raise NovikovCliValidationException(
            f'{path} holds {len(data)} bytes, expected {expected}')
    values = np.frombuffer(data, dtype='<f8', offset=_GRID_HEADER.size)
    values = values.reshape(nx, ny).astype(float)
    if periodic:
        b = np.roll(values, -1, axis=0)
        centers = (values + b + np.roll(b, -1, axis=1)
                   + np.roll(values, -1, axis=1)) / 4
    else:
        centers = (values[:-1, :-1] + values[1:, :-1] + values[1:, 1:]
                   + values[:-1, 1:]) / 4
    window = window or Window((0.0, 0.0), (float(nx), 0.0), (0.0, float(ny)))
    values.setflags(write=False)
    centers.setflags(write=False)
    return ScalarGrid(window, values, centers, periodic)


def write_ppm(grid: ScalarGrid, path: str | Path):
    """Binary P6 heatmap, row j of the grid as image row from the top"""
    path = _prepare(path)
    values = grid.values
    span = grid.max - grid.min
    scaled = (values - grid.min) / span if span > 0 else np.zeros_like(values)
    rgb = matplotlib.colormaps[PPM_COLORMAP](scaled.T[::-1], bytes=True)
    pixels = np.ascontiguousarray(rgb[..., :3], dtype=np.uint8)
    with open(path, 'wb') as file:
        file.write(f'P6\n{grid.nx} {grid.ny}\n255\n'.encode('ascii'))
        file.write(pixels.tobytes())


def render_svg(grid: ScalarGrid, level: float, polylines: list[Polyline],
               path: str | Path, title: str | None = None):
    """
    Fundamental parallelogram, {V < c} and {V > c} hatched differently and
    the given level lines in black, winding annotated
    """
    path = _prepare(path)
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot()
    points = grid.point(*np.meshgrid(np.arange(grid.nx), np.arange(grid.ny),
                                     indexing='ij'))
    below = grid.values < level
    ax.contourf(points[..., 0], points[..., 1], below.astype(float),
                levels=[-0.5, 0.5, 1.5], colors='none',
                hatches=['\\\\', '//'])
    origin = grid.origin
    a1, a2 = grid.axes
    ax.add_patch(Polygon([origin, origin + a1, origin + a1 + a2,
                          origin + a2], closed=True, fill=False,
                         edgecolor='grey', linewidth=1.0))
    for line in polylines:
        xy = line.vertices
        if line.closed:
            xy = np.vstack([xy, xy[:1]])
        ax.plot(xy[:, 0], xy[:, 1], color='black', linewidth=1.2)
        if line.winding not in (None, (0, 0)):
            ax.annotate(f'({line.winding[0]},{line.winding[1]})',
                        xy[0], fontsize=7)
    ax.set_aspect('equal')
    if title:
        ax.set_title(title)
    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    _LOG.debug(f'SVG written to {path}')
