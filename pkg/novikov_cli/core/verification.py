"""
Empirical checks of the interval-width, diameter and convergence bounds
for superpositions of symmetric periodic potentials.

Every harness is deterministic given its arguments: random shifts come from
a seeded generator drawn before any work is fanned out, and results are
aggregated in input order.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from novikov_cli.core.grid import Sign, Window
from novikov_cli.core.lattice_angles import (
    LatticeBasis, MagicAngle, PeriodicApproximant, SymmetryOrder,
    approximate_angle, build_approximant_sequence, dirichlet_residual_oracle,
    equivalence_lattice, superposition_periods,
)
from novikov_cli.core.levelsets import (
    CriticalLevelReport, NetResult, component_diameters, critical_interval,
    default_resolution, sample, singular_net,
)
from novikov_cli.core.potential import (
    BivariatePolynomial, CompositionKind, Potential, PotentialSpec,
    SuperpositionSpec, bound_constants, periodicity_defect,
)
from novikov_cli.utils.exceptions import (
    BracketsDoNotOverlapError, CommensurateCollisionError,
    NovikovCliValidationException,
)
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.runner import run_ordered
from novikov_cli.utils.variables import (
    APPROXIMANT_PERIODICITY_TOL, DEFAULT_MAX_ORDER_SUM,
    DEFAULT_SAMPLES_PER_WAVELENGTH,
    IRRATIONALITY_MAX_DENOMINATOR, IRRATIONALITY_TOL, MAGIC_ANGLE_TOL,
)

_LOG = get_logger(__name__)

SQRT2 = math.sqrt(2.0)
# C̃ = (3 + 2√2)·C1 for the stretched and rotated approximants
APPROXIMANT_CONSTANT_FACTOR = 3 + 2 * SQRT2


@dataclass(frozen=True)
class Family:
    """The two layers of a superposition, without angle and shift"""
    v1: PotentialSpec
    u: PotentialSpec
    kind: CompositionKind = CompositionKind.LINEAR
    q: BivariatePolynomial | None = None

    def at(self, alpha: float, a=(0.0, 0.0), lam: float = 1.0
           ) -> SuperpositionSpec:
        return SuperpositionSpec(self.v1, self.u, self.kind, alpha, a, lam,
                                 self.q)


def diameter_constant(symmetry: SymmetryOrder, c1: float) -> float:
    """D = √5·C1/2 for square lattices, C1 for triangular ones"""
    if symmetry.triangular:
        return c1
    return math.sqrt(5) * c1 / 2


def width_bound(angle: MagicAngle, c1: float, T: float) -> float:
    """Width of every interval at the angle, whatever the shift"""
    norm = angle.order_sum
    if angle.symmetry.triangular:
        return c1 * T / math.sqrt(3 * norm)
    return c1 * T / math.sqrt(2 * norm)


def union_bound(angle: MagicAngle, c1: float, T: float) -> float:
    """Width of the union of the intervals over all shifts"""
    norm = angle.order_sum
    if angle.symmetry.triangular:
        return 2 * c1 * T / math.sqrt(3 * norm)
    return SQRT2 * c1 * T / math.sqrt(norm)


@dataclass(frozen=True)
class ShiftSample:
    a: tuple[float, float]
    c_hat_1: float
    c_hat_2: float

    @property
    def width(self) -> float:
        return self.c_hat_2 - self.c_hat_1

    def to_dict(self) -> dict:
        return {'a': list(self.a), 'c_hat_1': self.c_hat_1,
                'c_hat_2': self.c_hat_2}


@dataclass(frozen=True)
class IntervalWidthReport:
    angle: MagicAngle
    samples: tuple[ShiftSample, ...]
    C1: float
    bound: float
    union_bound: float
    max_width: float
    union_width: float
    symmetric_width: float
    equivalence_defect: float
    tol: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            'angle': self.angle.to_dict(),
            'C1': self.C1,
            'bound': self.bound,
            'union_bound': self.union_bound,
            'max_width': self.max_width,
            'union_width': self.union_width,
            'symmetric_width': self.symmetric_width,
            'equivalence_defect': self.equivalence_defect,
            'tol': self.tol,
            'slack': self.slack,
            'pass': self.passed,
            'samples': [s.to_dict() for s in self.samples],
        }


@dataclass(frozen=True)
class DiameterRow:
    delta_c: float
    max_diameter: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {'delta_c': self.delta_c, 'max_diameter': self.max_diameter,
                'bound': self.bound, 'pass': self.passed}


@dataclass(frozen=True)
class DiameterReport:
    c0: float
    period_length: float
    C1: float
    D: float
    slack: float
    rows: tuple[DiameterRow, ...]
    net: NetResult | None = field(default=None, compare=False, repr=False)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            'c0': self.c0,
            'L': self.period_length,
            'C1': self.C1,
            'D': self.D,
            'slack': self.slack,
            'pass': self.passed,
            'rows': [r.to_dict() for r in self.rows],
        }


@dataclass(frozen=True)
class ConvergenceEntry:
    approximant: dict
    c0: float
    delta: float
    tol: float
    resolution: tuple[int, int]
    extra: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    net: NetResult | None = field(default=None, compare=False, repr=False)

    @property
    def lower(self) -> float:
        return self.c0 - self.delta

    @property
    def upper(self) -> float:
        return self.c0 + self.delta

    @property
    def width(self) -> float:
        return 2 * self.delta

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            'approximant': self.approximant,
            'c0': self.c0,
            'delta': self.delta,
            'bracket': [self.lower, self.upper],
            'width': self.width,
            'tol': self.tol,
            'resolution': list(self.resolution),
            **self.extra,
            'checks': dict(self.checks),
        }


@dataclass(frozen=True)
class ConvergenceReport:
    alpha: float
    entries: tuple[ConvergenceEntry, ...]
    nesting_violations: int
    widths_decreasing: bool
    consistent: bool

    @property
    def passed(self) -> bool:
        return (self.nesting_violations == 0 and self.widths_decreasing
                and self.consistent and all(e.passed for e in self.entries))

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'nesting_violations': self.nesting_violations,
            'widths_decreasing': self.widths_decreasing,
            'consistent': self.consistent,
            'pass': self.passed,
            'approximants': [e.to_dict() for e in self.entries],
        }


# -- interval widths --------------------------------------------------------

def verify_interval_width(family: Family, angle: MagicAngle, n_shifts: int,
                          nx: int | None = None, tol: float | None = None,
                          seed: int = 0, jobs: int = 1
                          ) -> IntervalWidthReport:
    """
    Intervals of open levels for random shifts at a magic angle against
    the per-shift and union bounds. Also measures the symmetric shift and
    one pair of equivalent shifts
    """
    if n_shifts < 1:
        raise NovikovCliValidationException(
            f'Number of shifts must be positive, got {n_shifts}')
    T = family.v1.period_T
    periods = superposition_periods(angle, T)
    lattice = equivalence_lattice(angle, T)
    rng = np.random.default_rng(seed)
    cell = rng.uniform(0.0, 1.0, size=(n_shifts, 2))
    shifts = [tuple(float(x) for x in s[0] * lattice.v1 + s[1] * lattice.v2)
              for s in cell]
    twin = tuple(float(x) for x in np.asarray(shifts[0]) + lattice.v1)
    tasks = [(0.0, 0.0), twin] + shifts

    def measure(a) -> CriticalLevelReport:
        spec = family.at(angle.angle_radians, a)
        return critical_interval(spec, periods, nx, nx, tol)

    reports = run_ordered(measure, tasks, jobs)
    symmetric, twin_report, *shift_reports = reports
    samples = tuple(ShiftSample(a, r.c_hat_1, r.c_hat_2)
                    for a, r in zip(shifts, shift_reports))

    spec = family.at(angle.angle_radians)
    c1 = bound_constants(spec).C1
    longest = max(np.linalg.norm(periods.b1), np.linalg.norm(periods.b2))
    grid_step = float(longest) / reports[0].resolution[0]
    worst_tol = max(r.tol for r in reports)
    slack = 2 * worst_tol + c1 * grid_step * SQRT2
    max_width = max(s.width for s in samples)
    union_width = (max(s.c_hat_2 for s in samples)
                   - min(s.c_hat_1 for s in samples))
    bound = width_bound(angle, c1, T)
    u_bound = union_bound(angle, c1, T)
    first = shift_reports[0]
    equivalence_defect = max(abs(first.c_hat_1 - twin_report.c_hat_1),
                             abs(first.c_hat_2 - twin_report.c_hat_2))
    # twin shifts sample on translated grids and agree up to one cell
    passed = bool(max_width <= bound + slack
                  and union_width <= u_bound + slack
                  and symmetric.width <= 2 * worst_tol
                  and equivalence_defect <= slack)
    _LOG.info(f'Interval widths at ({angle.m},{angle.n}): max '
              f'{max_width:.4g} vs bound {bound:.4g}, union '
              f'{union_width:.4g} vs {u_bound:.4g}')
    return IntervalWidthReport(
        angle=angle,
        samples=samples,
        C1=c1,
        bound=bound,
        union_bound=u_bound,
        max_width=max_width,
        union_width=union_width,
        symmetric_width=symmetric.width,
        equivalence_defect=equivalence_defect,
        tol=worst_tol,
        slack=slack,
        passed=passed,
    )


# -- diameters --------------------------------------------------------------

def _lattice_periods(potential: Potential, periods):
    if periods is not None:
        return periods
    if isinstance(potential, PotentialSpec):
        lattice = potential.lattice
        return lattice.e1, lattice.e2
    raise NovikovCliValidationException(
        'Periods are required for superpositions')


def verify_diameter_bound(potential: Potential, delta_cs, periods=None,
                          nx: int | None = None, n_periods: int = 2,
                          tol: float | None = None, jobs: int = 1
                          ) -> DiameterReport:
    """
    Diameters of the bounded components of {V < c0 - Δc} and
    {V > c0 + Δc} on an n_periods x n_periods patch of the torus
    """
    periods = _lattice_periods(potential, periods)
    net = singular_net(potential, periods, nx, tol=tol, jobs=jobs)
    grid = net.grid
    b1, b2 = (np.asarray(v, dtype=float) for v in
              (grid.window.axis1, grid.window.axis2))
    patch = sample(potential, Window.from_vectors(n_periods * b1,
                                                  n_periods * b2),
                   n_periods * grid.nx, n_periods * grid.ny, True, jobs)
    L = float(np.linalg.norm(b1))
    c1 = bound_constants(potential).C1
    D = diameter_constant(potential.symmetry, c1)
    slack = grid.cell_diagonal
    c0 = net.c0

    def measure(delta_c: float) -> DiameterRow:
        if not delta_c > 0:
            raise NovikovCliValidationException(
                f'Level offsets must be positive, got {delta_c}')
        diameters = (component_diameters(patch, c0 - delta_c, Sign.BELOW)
                     + component_diameters(patch, c0 + delta_c, Sign.ABOVE))
        measured = max(diameters, default=0.0)
        bound = math.sqrt(D * L / delta_c) * L
        return DiameterRow(float(delta_c), measured, bound,
                           measured <= bound + slack)

    rows = tuple(run_ordered(measure, list(delta_cs), jobs))
    _LOG.info(f'Diameter bound at c0={c0:.6g}: '
              f'{sum(r.passed for r in rows)}/{len(rows)} pass')
    return DiameterReport(c0, L, c1, D, slack, rows, net)


# -- convergence ------------------------------------------------------------

def _bracket_checks(entries: list[ConvergenceEntry]):
    """(nesting violations, widths strictly decreasing, c0 consistency)"""
    for prev, cur in zip(entries, entries[1:]):
        slack = 2 * max(prev.tol, cur.tol)
        if (cur.lower > prev.upper + slack
                or prev.lower > cur.upper + slack):
            raise BracketsDoNotOverlapError(
                f'Brackets [{prev.lower:.6g}, {prev.upper:.6g}] and '
                f'[{cur.lower:.6g}, {cur.upper:.6g}] are disjoint')
    violations = 0
    for i, earlier in enumerate(entries):
        for later in entries[i + 1:]:
            slack = 2 * max(earlier.tol, later.tol)
            if not (earlier.lower - slack <= later.c0
                    <= earlier.upper + slack):
                violations += 1
    decreasing = all(cur.width < prev.width
                     for prev, cur in zip(entries, entries[1:]))
    consistent = all(abs(prev.c0 - cur.c0) <= prev.delta + cur.delta
                     for prev, cur in zip(entries, entries[1:]))
    return violations, decreasing, consistent


def _convergence_report(alpha: float, entries: list[ConvergenceEntry]
                        ) -> ConvergenceReport:
    violations, decreasing, consistent = _bracket_checks(entries)
    report = ConvergenceReport(alpha, tuple(entries), violations, decreasing,
                               consistent)
    _LOG.info(f'Convergence at alpha={alpha:.9g}: widths '
              f'{[round(e.width, 6) for e in entries]}, '
              f'{violations} nesting violations')
    return report


def magic_delta(angle: MagicAngle, c1: float, c2: float, T: float) -> float:
    """Half-width of the bracket around c0 of the approximating angle"""
    norm = angle.order_sum
    n2 = angle.n ** 2
    D = diameter_constant(angle.symmetry, c1)
    return (D * T / norm ** (1 / 6)
            + c1 * norm ** (5 / 6) * T / n2
            + c2 / n2
            + width_bound(angle, c1, T))


def verify_theorem_convergence(family: Family, alpha: float, depth: int,
                               nx: int | None = None,
                               samples_per_wavelength: int =
                               DEFAULT_SAMPLES_PER_WAVELENGTH,
                               tol: float | None = None,
                               max_order_sum: int = DEFAULT_MAX_ORDER_SUM,
                               jobs: int = 1) -> ConvergenceReport:
    """
    c0 of the symmetric superposition at each rational approximation of
    alpha, bracketed by c0 ± Δ
    """
    symmetry = family.v1.symmetry
    angles = approximate_angle(alpha, symmetry, depth)
    kept = [a for a in angles if a.order_sum <= max_order_sum]
    if len(kept) < len(angles):
        _LOG.warning(f'Dropping {len(angles) - len(kept)} approximants with '
                     f'order sum above {max_order_sum}')
    if not kept:
        raise NovikovCliValidationException(
            f'No approximant of {alpha} has order sum <= {max_order_sum}')
    T = family.v1.period_T

    def measure(angle: MagicAngle) -> ConvergenceEntry:
        spec = family.at(angle.angle_radians)
        periods = superposition_periods(angle, T)
        n = nx or default_resolution(spec, periods,
                                     samples_per_wavelength)[0]
        net = singular_net(spec, periods, n, tol=tol)
        constants = bound_constants(spec)
        delta = magic_delta(angle, constants.C1, constants.C2, T)
        return ConvergenceEntry(angle.to_dict(), net.c0, delta,
                                net.report.tol, net.report.resolution,
                                net=net)

    entries = run_ordered(measure, kept, jobs)
    return _convergence_report(alpha, entries)


def check_irrational(ratio: float):
    close = Fraction(ratio).limit_denominator(IRRATIONALITY_MAX_DENOMINATOR)
    if abs(ratio - float(close)) <= IRRATIONALITY_TOL:
        raise CommensurateCollisionError(
            f'Period ratio {ratio!r} is within {IRRATIONALITY_TOL} of '
            f'{close.numerator}/{close.denominator}')


def approximant_spec(family: Family, approximant: PeriodicApproximant
                     ) -> SuperpositionSpec:
    return family.at(approximant.alpha_s, lam=approximant.lambda_s)


def verify_incommensurate(family: Family, alpha: float, s_max: int,
                          lam: float = 1.0, nx: int | None = None,
                          samples_per_wavelength: int =
                          DEFAULT_SAMPLES_PER_WAVELENGTH,
                          tol: float | None = None, jobs: int = 1
                          ) -> ConvergenceReport:
    """
    Periodic approximants of a pair with incommensurate periods T' < T,
    bracketed by c0 ± (C + C̃)·T/|n|^(1/3)
    """
    T = family.v1.period_T
    T_prime = family.u.period_T / lam
    if not T_prime < T:
        raise NovikovCliValidationException(
            f'Expected T\' < T, got {T_prime} and {T}')
    check_irrational(T_prime / T)
    if abs(alpha) <= MAGIC_ANGLE_TOL:
        raise NovikovCliValidationException('Angle must be nonzero')
    approximants = build_approximant_sequence(
        family.v1.lattice, family.u.lattice, alpha, s_max, lam)

    def measure(approximant: PeriodicApproximant) -> ConvergenceEntry:
        spec = approximant_spec(family, approximant)
        periods = approximant.periods
        defect = periodicity_defect(spec, (periods.b1, periods.b2))
        n = nx or default_resolution(spec, periods,
                                     samples_per_wavelength)[0]
        net = singular_net(spec, periods, n, tol=tol)
        c1 = bound_constants(spec).C1
        C = diameter_constant(family.v1.symmetry, c1)
        C_tilde = APPROXIMANT_CONSTANT_FACTOR * c1
        delta = (C + C_tilde) * T / approximant.norm_n ** (1 / 3)
        plane2 = LatticeBasis(T_prime, family.u.symmetry, alpha)
        oracle = dirichlet_residual_oracle(family.v1.lattice, plane2,
                                           approximant.q)
        residual_bound = SQRT2 * T / approximant.q
        extra = {
            'periodicity_defect': defect,
            'residual_bound': residual_bound,
            'oracle_residual': oracle,
        }
        checks = {
            'periodic': bool(defect <= APPROXIMANT_PERIODICITY_TOL),
            'residual_within_bound': bool(oracle < residual_bound),
        }
        return ConvergenceEntry(approximant.to_dict(), net.c0, delta,
                                net.report.tol, net.report.resolution,
                                extra, checks, net)

    entries = run_ordered(measure, approximants, jobs)
    return _convergence_report(alpha, entries)

