"""
Level-set topology of sampled potentials: situations A(-)/A(+), critical
levels by bisection, singular nets and finite-window classification.

Unboundedness on a periodic grid is decided by torus wrapping. A level line
with nonzero winding always has wrapping samples on both of its sides, so
the labelings alone decide the OPEN situation.
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from novikov_cli.core.components import (
    ComponentLabeling, label_components, label_raw,
)
from novikov_cli.core.contours import Polyline, extract_contours
from novikov_cli.core.grid import ScalarGrid, Sign, Window
from novikov_cli.core.potential import (
    Potential, periodicity_defect, symmetry_defect,
)
from novikov_cli.utils.exceptions import (
    IntervalNotDegenerateError, NonMonotoneClassificationError,
    NotPeriodicError, NotSymmetricError, NovikovCliValidationException,
)
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.runner import run_ordered
from novikov_cli.utils.variables import (
    DEFAULT_SAMPLES_PER_WAVELENGTH, DEFAULT_TOL_FRACTION,
    MAX_BISECTION_STEPS, MAX_REFINEMENTS, MIN_GRID_SIZE,
    NOT_DEGENERATE_FACTOR, PERIODICITY_PROBES, PERIODICITY_TOL,
    SYMMETRY_PROBES, SYMMETRY_TOL,
)

__all__ = [
    'ComponentLabeling', 'CriticalLevelReport', 'NetResult', 'Polyline',
    'Probe', 'ScalarGrid', 'Sign', 'Situation', 'Window',
    'classify_growing_window', 'classify_situation', 'classify_window',
    'component_diameters', 'critical_interval', 'critical_interval_on_grid',
    'default_resolution', 'extract_contours', 'label_components', 'sample',
    'singular_net',
]

_LOG = get_logger(__name__)


class Situation(str, Enum):
    A_MINUS = 'A_MINUS'
    A_PLUS = 'A_PLUS'
    OPEN = 'OPEN'
    UNDETERMINED = 'UNDETERMINED'

    @property
    def rank(self) -> int:
        """Position along increasing c"""
        if self is Situation.A_MINUS:
            return 0
        if self is Situation.A_PLUS:
            return 2
        return 1


@dataclass(frozen=True)
class Probe:
    """Wrapping classes (p, q, rank) found at one probed level"""
    level: float
    situation: Situation
    below: tuple[tuple[int, int, int], ...]
    above: tuple[tuple[int, int, int], ...]

    def to_dict(self) -> dict:
        return {
            'level': self.level,
            'situation': self.situation.value,
            'below': [list(x) for x in self.below],
            'above': [list(x) for x in self.above],
        }


@dataclass(frozen=True)
class CriticalLevelReport:
    c_hat_1: float
    c_hat_2: float
    tol: float
    resolution: tuple[int, int]
    evidence: tuple[Probe, ...]
    degenerate: bool
    steps: int = 0

    @property
    def width(self) -> float:
        return self.c_hat_2 - self.c_hat_1

    @property
    def c0(self) -> float:
        return (self.c_hat_1 + self.c_hat_2) / 2

    def to_dict(self) -> dict:
        return {
            'c_hat_1': self.c_hat_1,
            'c_hat_2': self.c_hat_2,
            'c0': self.c0,
            'width': self.width,
            'tol': self.tol,
            'resolution': list(self.resolution),
            'degenerate': self.degenerate,
            'steps': self.steps,
            'evidence': [p.to_dict() for p in self.evidence],
        }


@dataclass(frozen=True, eq=False)
class NetResult:
    c0: float
    net: list[Polyline]
    report: CriticalLevelReport
    grid: ScalarGrid

    def to_dict(self) -> dict:
        return {
            'c0': self.c0,
            'report': self.report.to_dict(),
            'net': [p.to_dict() for p in self.net],
        }


def _period_vectors(periods) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(periods, 'b1'):
        return np.asarray(periods.b1), np.asarray(periods.b2)
    b1, b2 = periods
    return np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def sample(potential: Potential, window: Window, nx: int, ny: int,
           periodic: bool, jobs: int = 1) -> ScalarGrid:
    if nx < MIN_GRID_SIZE or ny < MIN_GRID_SIZE:
        raise NovikovCliValidationException(
            f'Grid must be at least {MIN_GRID_SIZE}x{MIN_GRID_SIZE}, '
            f'got {nx}x{ny}')
    axes = np.array([window.axis1, window.axis2], dtype=float)
    if periodic:
        defect = periodicity_defect(potential, axes, PERIODICITY_PROBES)
        if defect > PERIODICITY_TOL:
            raise NotPeriodicError(
                f'Window axes are not periods: defect {defect:.3e}')
    origin = np.asarray(window.origin, dtype=float)

    def rows(bounds):
        start, stop, offset, count_y = bounds
        u = (np.arange(start, stop) + offset) / nx
        v = (np.arange(count_y) + offset) / ny
        points = (origin + u[:, None, None] * axes[0]
                  + v[None, :, None] * axes[1])
        return potential.evaluate(points)

    def blocks(count_x, count_y, offset):
        step = max(1, math.ceil(count_x / max(jobs, 1)))
        return [(s, min(s + step, count_x), offset, count_y)
                for s in range(0, count_x, step)]

    values = np.concatenate(run_ordered(rows, blocks(nx, ny, 0.0), jobs))
    if periodic:
        center_shape = (nx, ny)
    else:
        center_shape = (nx - 1, ny - 1)
    centers = np.concatenate(run_ordered(
        rows, blocks(center_shape[0], center_shape[1], 0.5), jobs))
    _LOG.debug(f'Sampled {nx}x{ny} grid, periodic={periodic}')
    return ScalarGrid(window, _readonly(values), _readonly(centers), periodic)


def default_resolution(potential: Potential, periods,
                       samples_per_wavelength: int =
                       DEFAULT_SAMPLES_PER_WAVELENGTH) -> tuple[int, int]:
    b1, b2 = _period_vectors(periods)
    length = max(np.linalg.norm(b1), np.linalg.norm(b2))
    n = math.ceil(samples_per_wavelength * length
                  / potential.smallest_wavelength)
    n = max(MIN_GRID_SIZE, n)
    return n, n


def probe(grid: ScalarGrid, c: float) -> Probe:
    if not grid.periodic:
        raise NovikovCliValidationException(
            'Situations are defined on periodic grids; use classify_window')
    below = label_raw(grid, c, Sign.BELOW).wrapping_classes()
    above = label_raw(grid, c, Sign.ABOVE).wrapping_classes()
    if below and above:
        situation = Situation.OPEN
    elif above:
        situation = Situation.A_MINUS
    elif below:
        situation = Situation.A_PLUS
    else:
        situation = Situation.UNDETERMINED
    return Probe(float(c), situation, tuple(below), tuple(above))


def classify_situation(grid: ScalarGrid, c: float) -> Situation:
    return probe(grid, c).situation


def _assert_monotone(probes: dict[float, Probe]):
    ordered = sorted(probes.values(), key=lambda p: p.level)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.situation.rank < prev.situation.rank:
            raise NonMonotoneClassificationError(
                f'{prev.situation.value} at c={prev.level:.9g} is followed '
                f'by {cur.situation.value} at c={cur.level:.9g}; refine '
                f'the grid')


def _bisect(grid: ScalarGrid, probes: dict[float, Probe], inside,
            tol: float) -> tuple[float, int]:
    """Boundary of the levels satisfying `inside`, which hold below it"""
    low = max((p.level for p in probes.values() if inside(p)), default=None)
    high = min((p.level for p in probes.values()
                if not inside(p) and (low is None or p.level > low)),
               default=None)
    if low is None:
        return grid.min, 0
    if high is None:
        return grid.max, 0
    steps = 0
    while high - low > tol and steps < MAX_BISECTION_STEPS:
        mid = (low + high) / 2
        if mid in (low, high):
            break
        result = probes.setdefault(mid, probe(grid, mid))
        if inside(result):
            low = mid
        else:
            high = mid
        steps += 1
    return (low + high) / 2, steps


def critical_interval_on_grid(grid: ScalarGrid,
                              tol: float | None = None
                              ) -> CriticalLevelReport:
    lo, hi = grid.min, grid.max
    resolution = (grid.nx, grid.ny)
    if hi - lo == 0:
        _LOG.debug('Constant field: degenerate interval by convention')
        return CriticalLevelReport(lo, lo, 0.0, resolution, (), True)
    if tol is None:
        tol = (hi - lo) * DEFAULT_TOL_FRACTION
    probes = {lo: probe(grid, lo), hi: probe(grid, hi)}
    c1, steps1 = _bisect(
        grid, probes, lambda p: p.situation is Situation.A_MINUS, tol)
    _assert_monotone(probes)
    c2, steps2 = _bisect(
        grid, probes, lambda p: p.situation is not Situation.A_PLUS, tol)
    _assert_monotone(probes)
    evidence = tuple(sorted(probes.values(), key=lambda p: p.level))
    report = CriticalLevelReport(
        c_hat_1=c1,
        c_hat_2=c2,
        tol=tol,
        resolution=resolution,
        evidence=evidence,
        degenerate=c2 - c1 <= tol,
        steps=steps1 + steps2,
    )
    _LOG.debug(f'Critical interval [{c1:.9g}, {c2:.9g}] at {resolution}, '
               f'{report.steps} bisection steps')
    return report


def critical_interval(potential: Potential, periods, nx: int | None = None,
                      ny: int | None = None, tol: float | None = None,
                      jobs: int = 1) -> CriticalLevelReport:
    """
    With nx omitted, starts from the default resolution and doubles it
    while either bracket end moves by more than the previous tolerance
    """
    b1, b2 = _period_vectors(periods)
    window = Window.from_vectors(b1, b2)
    if nx is not None:
        grid = sample(potential, window, nx, ny or nx, True, jobs)
        return critical_interval_on_grid(grid, tol)
    n, _ = default_resolution(potential, (b1, b2))
    report = None
    for _ in range(MAX_REFINEMENTS + 1):
        grid = sample(potential, window, n, n, True, jobs)
        current = critical_interval_on_grid(grid, tol)
        if report is not None:
            moved = max(abs(current.c_hat_1 - report.c_hat_1),
                        abs(current.c_hat_2 - report.c_hat_2))
            if moved < report.tol:
                return current
        report = current
        n *= 2
    return report


def _check_symmetric(potential: Potential):
    angle = potential.symmetry.group_angle
    defect = symmetry_defect(potential, angle, SYMMETRY_PROBES)
    if defect > SYMMETRY_TOL:
        raise NotSymmetricError(
            f'Potential is not invariant under rotation by {angle:.6f} '
            f'about the origin: defect {defect:.3e}')


def singular_net(potential: Potential, periods, nx: int | None = None,
                 ny: int | None = None, tol: float | None = None,
                 jobs: int = 1) -> NetResult:
    """
    Level lines at c0 separating a below-component that wraps just above
    c0 from an above-component that wraps just below c0
    """
    _check_symmetric(potential)
    b1, b2 = _period_vectors(periods)
    if nx is None:
        nx, _ = default_resolution(potential, (b1, b2))
    if ny is not None and ny != nx:
        raise NovikovCliValidationException(
            'Singular nets need a square sampling (nx == ny) to keep the '
            'grid symmetric')
    grid = sample(potential, Window.from_vectors(b1, b2), nx, nx, True, jobs)
    report = critical_interval_on_grid(grid, tol)
    if report.width > NOT_DEGENERATE_FACTOR * report.tol:
        raise IntervalNotDegenerateError(
            f'Symmetric potential gives a nondegenerate interval '
            f'[{report.c_hat_1:.9g}, {report.c_hat_2:.9g}]; refine the grid')
    c0 = report.c0
    delta = max(report.width, 0.0) + report.tol
    below = label_raw(grid, c0 + delta, Sign.BELOW)
    above = label_raw(grid, c0 - delta, Sign.ABOVE)
    net = []
    for line in extract_contours(grid, c0):
        if line.winding not in (None, (0, 0)):
            net.append(line)
            continue
        if (below.rank_of(below.labels[line.below_sample])
                and above.rank_of(above.labels[line.above_sample])):
            net.append(line)
    _LOG.debug(f'Singular net at c0={c0:.9g}: {len(net)} polylines')
    return NetResult(c0, net, report, grid)


def _window_profile(grid: ScalarGrid, c: float,
                    sign: Sign) -> tuple[bool, float]:
    """(some component touches all four sides, largest interior diameter)"""
    labeling = label_components(grid, c, sign)
    labels = labeling.labels
    sides = [set(np.unique(side)) - {0} for side in
             (labels[0], labels[-1], labels[:, 0], labels[:, -1])]
    touching = set().union(*sides)
    spanning = set.intersection(*sides)
    interior = [s.diameter for s in labeling.component_stats
                if s.label not in touching]
    return bool(spanning), max(interior, default=0.0)


def classify_window(potential: Potential, center, size: float, nx: int,
                    ny: int, c: float, jobs: int = 1) -> Situation:
    """
    Finite-window heuristic for aperiodic potentials: a spanning component
    of one sign with only small interior components of the other
    """
    if not size > 0:
        raise NovikovCliValidationException(
            f'Window size must be positive, got {size}')
    grid = sample(potential, Window.square(center, size), nx, ny, False,
                  jobs)
    below_spans, below_diameter = _window_profile(grid, c, Sign.BELOW)
    above_spans, above_diameter = _window_profile(grid, c, Sign.ABOVE)
    if below_spans and above_spans:
        return Situation.OPEN
    if above_spans and below_diameter < size / 4:
        return Situation.A_MINUS
    if below_spans and above_diameter < size / 4:
        return Situation.A_PLUS
    return Situation.UNDETERMINED


def classify_growing_window(potential: Potential, center, sizes,
                            samples_per_length: float, c: float,
                            jobs: int = 1) -> list[tuple[float, Situation]]:
    result = []
    for size in sizes:
        n = max(MIN_GRID_SIZE, math.ceil(samples_per_length * size))
        situation = classify_window(potential, center, size, n, n, c, jobs)
        _LOG.debug(f'Window {size:.4g} ({n}x{n}): {situation.value}')
        result.append((float(size), situation))
    return result


def component_diameters(grid: ScalarGrid, c: float,
                        sign: Sign | str) -> list[float]:
    labeling = label_components(grid, c, sign)
    return [s.diameter for s in labeling.component_stats if not s.wraps]
