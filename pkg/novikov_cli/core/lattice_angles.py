"""
Exact arithmetic for commensurate rotation angles of square and triangular
lattices: magic angles, superposition periods, shift-equivalence lattices,
rational approximation of generic angles and Dirichlet pairs of
incommensurate lattices.

Lattice vectors are kept as integer (or Fraction) coordinates in the basis
{e1, e2} of the underlying lattice; plane coordinates are derived from them.
"""
import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import cached_property

import mpmath
import numpy as np

from novikov_cli.utils.exceptions import (
    AngleIsMagicError, CommensurateCollisionError,
    NovikovCliNonConvergenceException, NovikovCliValidationException,
)
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.variables import (
    CF_PRECISION_DIGITS, MAGIC_ANGLE_TOL, MAX_DIRICHLET_Q,
)

_LOG = get_logger(__name__)

SQRT3 = math.sqrt(3.0)

Matrix = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
Coords = tuple[int, int]


class SymmetryOrder(IntEnum):
    SQUARE = 4
    TRIGONAL = 3
    HEXAGONAL = 6

    @classmethod
    def parse(cls, value) -> 'SymmetryOrder':
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise NovikovCliValidationException(
                f'Unsupported symmetry order: {value}. Expected 4, 3 or 6'
            )

    @property
    def triangular(self) -> bool:
        return self is not SymmetryOrder.SQUARE

    @property
    def base_angle(self) -> float:
        """Angle between e1 and e2"""
        return math.pi / 3 if self.triangular else math.pi / 2

    @property
    def group_angle(self) -> float:
        """Smallest rotation leaving a potential of this order invariant"""
        return 2 * math.pi / int(self)

    @property
    def angle_range(self) -> tuple[float, float]:
        if self is SymmetryOrder.SQUARE:
            return 0.0, math.pi / 2
        if self is SymmetryOrder.HEXAGONAL:
            return 0.0, math.pi / 3
        return -math.pi / 3, math.pi / 3

    @property
    def base_rotation(self) -> Matrix:
        """Rotation by the base angle in e-coordinates (e1 -> e2)"""
        if self.triangular:
            return _matrix(((0, -1), (1, 1)))
        return _matrix(((0, -1), (1, 0)))

    @property
    def group_rotation(self) -> Matrix:
        """Generator of the rotation group in e-coordinates"""
        if self is SymmetryOrder.TRIGONAL:
            return _mat_mul(self.base_rotation, self.base_rotation)
        return self.base_rotation

    @property
    def gram(self) -> Matrix:
        """Gram matrix of {e1, e2} in units of T²"""
        if self.triangular:
            return _matrix(((1, Fraction(1, 2)), (Fraction(1, 2), 1)))
        return _matrix(((1, 0), (0, 1)))

    @property
    def norm_denominator(self) -> int:
        """2 for square lattices, 3 for triangular ones"""
        return 3 if self.triangular else 2


# -- exact 2x2 helpers ------------------------------------------------------

def _matrix(rows) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


def _mat_vec(a: Matrix, v) -> tuple[Fraction, Fraction]:
    return (a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1])


def _mat_inv(a: Matrix) -> Matrix:
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    return ((a[1][1] / det, -a[0][1] / det),
            (-a[1][0] / det, a[0][0] / det))


def _columns(u, v) -> Matrix:
    return _matrix(((u[0], v[0]), (u[1], v[1])))


def _quad(gram: Matrix, u, v) -> Fraction:
    return (u[0] * (gram[0][0] * v[0] + gram[0][1] * v[1])
            + u[1] * (gram[1][0] * v[0] + gram[1][1] * v[1]))


def _as_int_coords(v) -> Coords:
    x, y = (Fraction(c) for c in v)
    if x.denominator != 1 or y.denominator != 1:
        raise ValueError(f'Non-integer lattice coordinates: {v}')
    return int(x), int(y)


# -- lattices ---------------------------------------------------------------

@dataclass(frozen=True)
class LatticeBasis:
    """
    Basis {e1, e2} of a square or triangular lattice of period `period_T`,
    rotated as a whole by `angle`
    """
    period_T: float
    symmetry: SymmetryOrder
    angle: float = 0.0

    def __post_init__(self):
        if not self.period_T > 0:
            raise NovikovCliValidationException(
                f'Lattice period must be positive, got {self.period_T}'
            )

    @cached_property
    def matrix(self) -> np.ndarray:
        """Columns are e1, e2"""
        t = self.period_T
        if self.symmetry.triangular:
            raw = np.array([[t, t / 2], [0.0, SQRT3 * t / 2]])
        else:
            raw = np.array([[t, 0.0], [0.0, t]])
        return rotation_matrix(self.angle) @ raw

    @property
    def e1(self) -> np.ndarray:
        return self.matrix[:, 0].copy()

    @property
    def e2(self) -> np.ndarray:
        return self.matrix[:, 1].copy()

    def vector(self, coords) -> np.ndarray:
        return self.matrix @ np.asarray(
            [float(coords[0]), float(coords[1])]
        )

    def coords_of(self, points) -> np.ndarray:
        """Real coordinates of plane points in this basis"""
        points = np.asarray(points, dtype=float)
        return points @ np.linalg.inv(self.matrix).T

    def coord_norm(self, c1, c2):
        """Length in units of the period: the quadratic form of the lattice"""
        c1 = np.asarray(c1, dtype=float)
        c2 = np.asarray(c2, dtype=float)
        if self.symmetry.triangular:
            return np.sqrt(c1 * c1 + c2 * c2 + c1 * c2)
        return np.sqrt(c1 * c1 + c2 * c2)


@dataclass(frozen=True)
class SurdValue:
    """rational * sqrt(surd)"""
    rational: Fraction
    surd: int = 1

    def __float__(self) -> float:
        return float(self.rational) * math.sqrt(self.surd)

    def __str__(self) -> str:
        if self.surd == 1:
            return str(self.rational)
        num, den = self.rational.numerator, self.rational.denominator
        head = f'{num}√{self.surd}'
        return head if den == 1 else f'{head}/{den}'


@dataclass(frozen=True)
class MagicAngle:
    """
    Commensurate rotation angle alpha_{m,n}. For order 3 a negative `sign`
    selects the series -alpha_{m,n}
    """
    m: int
    n: int
    symmetry: SymmetryOrder
    sign: int = 1
    m0: int = field(init=False)
    n0: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'symmetry', SymmetryOrder.parse(
            self.symmetry))
        if self.sign not in (1, -1):
            raise NovikovCliValidationException(
                f'Sign must be +1 or -1, got {self.sign}')
        if self.sign == -1 and self.symmetry is not SymmetryOrder.TRIGONAL:
            raise NovikovCliValidationException(
                'The negative series exists only for symmetry order 3')
        m0, n0 = reduce_pair(self.m, self.n, self.symmetry)
        object.__setattr__(self, 'm0', m0)
        object.__setattr__(self, 'n0', n0)
        low, high = self.symmetry.angle_range
        if not low < self.angle_radians < high:
            raise NovikovCliValidationException(
                f'Angle of ({self.m},{self.n}) lies outside the range '
                f'({low:.6f}, {high:.6f}) of symmetry order '
                f'{int(self.symmetry)}'
            )

    @property
    def tan_value(self) -> SurdValue:
        m, n = self.m, self.n
        if self.symmetry.triangular:
            return SurdValue(
                self.sign * Fraction(m * m - n * n, m * m + n * n + 4 * m * n),
                3)
        return SurdValue(Fraction(m * m - n * n, 2 * m * n))

    @property
    def tan_triple(self) -> tuple[int, int, int]:
        return self.m * self.m, self.n * self.n, self.m * self.n

    @property
    def angle_radians(self) -> float:
        m, n = self.m, self.n
        if self.symmetry.triangular:
            angle = math.atan2(SQRT3 * (m * m - n * n),
                               m * m + n * n + 4 * m * n)
        else:
            angle = math.atan2(m * m - n * n, 2 * m * n)
        return self.sign * angle

    @property
    def minimal(self) -> bool:
        """True when the formula period pair is already minimal"""
        if self.symmetry.triangular:
            return (self.m - self.n) % 3 != 0
        return (self.m - self.n) % 2 == 1

    @property
    def order_sum(self) -> int:
        """m0² + n0² (square) or m0² + n0² + m0·n0 (triangular)"""
        s = self.m0 ** 2 + self.n0 ** 2
        if self.symmetry.triangular:
            s += self.m0 * self.n0
        return s

    @property
    def approximation_factor(self) -> float:
        """Constant k in |alpha_{m,n} - alpha| < k/n² for convergents"""
        return 2 / SQRT3 if self.symmetry.triangular else 1.0

    def rotation_matrix(self) -> Matrix:
        """Exact rotation by `angle_radians` in e-coordinates"""
        if self.sign > 0:
            src, dst = (self.m, self.n), (self.n, self.m)
        else:
            src, dst = (self.n, self.m), (self.m, self.n)
        j = self.symmetry.base_rotation
        m_from = _columns(src, _mat_vec(j, src))
        m_to = _columns(dst, _mat_vec(j, dst))
        return _mat_mul(m_to, _mat_inv(m_from))

    def to_dict(self) -> dict:
        return {
            'm': self.m,
            'n': self.n,
            'm0': self.m0,
            'n0': self.n0,
            'symmetry': int(self.symmetry),
            'sign': self.sign,
            'tan': str(self.tan_value),
            'angle': self.angle_radians,
        }


@dataclass(frozen=True)
class PeriodPair:
    """Two lattice vectors spanning the periods of a periodic potential"""
    coords1: Coords
    coords2: Coords
    basis: LatticeBasis
    minimal: bool = True

    @property
    def b1(self) -> np.ndarray:
        return self.basis.vector(self.coords1)

    @property
    def b2(self) -> np.ndarray:
        return self.basis.vector(self.coords2)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b1))

    @property
    def area(self) -> float:
        b1, b2 = self.b1, self.b2
        return abs(float(b1[0] * b2[1] - b1[1] * b2[0]))

    def to_dict(self) -> dict:
        return {
            'b1': [float(x) for x in self.b1],
            'b2': [float(x) for x in self.b2],
            'coords1': list(self.coords1),
            'coords2': list(self.coords2),
            'minimal': self.minimal,
        }


@dataclass(frozen=True)
class EquivalenceLattice:
    """
    Lattice of shift vectors a producing equivalent superpositions. With
    symmetry centers, the lattice of shifts producing exactly symmetric ones
    """
    coords1: tuple[Fraction, Fraction]
    coords2: tuple[Fraction, Fraction]
    basis: LatticeBasis
    with_symmetry_centers: bool

    @property
    def v1(self) -> np.ndarray:
        return self.basis.vector(self.coords1)

    @property
    def v2(self) -> np.ndarray:
        return self.basis.vector(self.coords2)

    @property
    def step(self) -> float:
        return float(min(np.linalg.norm(self.v1), np.linalg.norm(self.v2)))

    @property
    def covering_radius(self) -> float:
        """Largest distance from a plane point to the nearest lattice point"""
        if self.basis.symmetry.triangular:
            return self.step / SQRT3
        return self.step / math.sqrt(2)

    def reduce(self, a) -> np.ndarray:
        """
        Equivalent shift closest to the origin; ties go to the
        lexicographically smallest candidate
        """
        a = np.asarray(a, dtype=float)
        mat = np.column_stack([self.v1, self.v2])
        coords = np.linalg.solve(mat, a)
        base = np.floor(coords)
        offsets = np.arange(-2, 4)
        ii, jj = np.meshgrid(offsets, offsets, indexing='ij')
        cand = np.stack([base[0] + ii.ravel(), base[1] + jj.ravel()], axis=1)
        shifted = a - cand @ mat.T
        norms = np.hypot(shifted[:, 0], shifted[:, 1])
        best = norms.min()
        tied = shifted[norms <= best + 1e-12 * (1.0 + best)]
        order = np.lexsort((tied[:, 1], tied[:, 0]))
        return tied[order[0]] + 0.0

    def to_dict(self) -> dict:
        return {
            'v1': [float(x) for x in self.v1],
            'v2': [float(x) for x in self.v2],
            'step': self.step,
            'covering_radius': self.covering_radius,
            'with_symmetry_centers': self.with_symmetry_centers,
        }


@dataclass(frozen=True)
class DirichletPair:
    """m·e' ≈ n·e with the plane residual |m·e' - n·e|"""
    m: Coords
    n: Coords
    residual: float
    q: int

    def __iter__(self):
        yield self.m
        yield self.n


@dataclass(frozen=True)
class PeriodicApproximant:
    """
    Periodic potential approximating an incommensurate pair: the second layer
    is rotated by -delta_alpha and stretched by 1 + delta_lambda, which makes
    n_s·e and its companion exact periods
    """
    n_s: Coords
    m_s: Coords
    delta_alpha: float
    delta_lambda: float
    T_s: float
    norm_n: float
    alpha_s: float
    lambda_s: float
    q: int
    residual: float
    basis: LatticeBasis

    def __post_init__(self):
        bound_alpha = 3 / self.norm_n ** 2
        bound_lambda = 2 * math.sqrt(2) / self.norm_n ** 2
        if not abs(self.delta_alpha) < bound_alpha:
            raise NovikovCliValidationException(
                f'Rotation {self.delta_alpha:.3e} exceeds {bound_alpha:.3e} '
                f'for n={self.n_s}')
        if not abs(self.delta_lambda) < bound_lambda:
            raise NovikovCliValidationException(
                f'Stretch {self.delta_lambda:.3e} exceeds '
                f'{bound_lambda:.3e} for n={self.n_s}')

    @property
    def periods(self) -> PeriodPair:
        companion = _as_int_coords(
            _mat_vec(self.basis.symmetry.base_rotation, self.n_s))
        return PeriodPair(self.n_s, companion, self.basis, minimal=False)

    def to_dict(self) -> dict:
        return {
            'n': list(self.n_s),
            'm': list(self.m_s),
            'norm_n': self.norm_n,
            'T_s': self.T_s,
            'delta_alpha': self.delta_alpha,
            'delta_lambda': self.delta_lambda,
            'alpha_s': self.alpha_s,
            'lambda_s': self.lambda_s,
            'q': self.q,
            'residual': self.residual,
        }


# -- operations -------------------------------------------------------------

def rotation_matrix(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def rotate(v, alpha: float) -> np.ndarray:
    """Counterclockwise rotation of a vector (or an (..., 2) array)"""
    return np.asarray(v, dtype=float) @ rotation_matrix(alpha).T


def reduce_pair(m: int, n: int, symmetry) -> tuple[int, int]:
    symmetry = SymmetryOrder.parse(symmetry)
    if not (isinstance(m, (int, np.integer))
            and isinstance(n, (int, np.integer))):
        raise NovikovCliValidationException(
            f'Indices must be integers, got ({m!r}, {n!r})')
    m, n = int(m), int(n)
    if n < 0 or m <= n:
        raise NovikovCliValidationException(
            f'Expected m > n >= 0, got ({m}, {n})')
    if math.gcd(m, n) != 1:
        raise NovikovCliValidationException(
            f'({m}, {n}) are not coprime')
    if symmetry.triangular:
        if (m - n) % 3 == 0:
            return (2 * n + m) // 3, (m - n) // 3
        return m, n
    if (m - n) % 2 == 0:
        return (m + n) // 2, (m - n) // 2
    return m, n


def enumerate_magic_angles(symmetry, max_m: int) -> list[MagicAngle]:
    symmetry = SymmetryOrder.parse(symmetry)
    if max_m < 2:
        raise NovikovCliValidationException(
            f'max_m must be at least 2, got {max_m}')
    signs = (1, -1) if symmetry is SymmetryOrder.TRIGONAL else (1,)
    seen = set()
    result = []
    for m in range(2, max_m + 1):
        for n in range(1, m):
            if math.gcd(m, n) != 1:
                continue
            for sign in signs:
                angle = MagicAngle(m, n, symmetry, sign)
                key = (sign, angle.tan_value)
                if key in seen:
                    continue
                seen.add(key)
                result.append(angle)
    result.sort(key=lambda a: a.angle_radians)
    _LOG.debug(f'Enumerated {len(result)} magic angles of order '
               f'{int(symmetry)} up to m={max_m}')
    return result


def superposition_periods(angle: MagicAngle, T: float,
                          minimal: bool = True) -> PeriodPair:
    """
    Periods of the superposition at a magic angle. The formula pair
    b1 = J⁻¹b2 with b2 = e_{n,m} (e_{m,n} for the negative series) is
    returned as is when `minimal` is false; otherwise its γ-reduced
    sublattice basis
    """
    basis = LatticeBasis(T, angle.symmetry)
    j = angle.symmetry.base_rotation
    j_inv = _mat_inv(j)
    m, n = angle.m, angle.n
    b2 = (n, m) if angle.sign > 0 else (m, n)
    b1 = _as_int_coords(_mat_vec(j_inv, b2))
    if not minimal or angle.minimal:
        return PeriodPair(b1, b2, basis, minimal=angle.minimal)
    gamma = angle.symmetry.norm_denominator
    mid = _as_int_coords((Fraction(b1[0] + b2[0], gamma),
                          Fraction(b1[1] + b2[1], gamma)))
    if angle.sign > 0:
        c2 = mid
        c1 = _as_int_coords(_mat_vec(j_inv, c2))
    else:
        c1 = mid
        c2 = _as_int_coords(_mat_vec(j, c1))
    return PeriodPair(c1, c2, basis, minimal=True)


def _integer_lattice_basis(vectors: list[tuple[int, int]]) -> list[Coords]:
    rows = [list(v) for v in vectors if v != (0, 0)]
    while sum(1 for r in rows if r[0] != 0) > 1:
        pivot = min((r for r in rows if r[0] != 0), key=lambda r: abs(r[0]))
        for r in rows:
            if r is not pivot and r[0] != 0:
                k = r[0] // pivot[0]
                r[0] -= k * pivot[0]
                r[1] -= k * pivot[1]
    pivots = [r for r in rows if r[0] != 0]
    d = 0
    for r in rows:
        if r[0] == 0:
            d = math.gcd(d, r[1])
    if len(pivots) != 1 or d == 0:
        raise ValueError('Generators do not span a full-rank lattice')
    return [tuple(pivots[0]), (0, d)]


def _gauss_reduce(u, v, gram: Matrix):
    while True:
        if _quad(gram, u, u) > _quad(gram, v, v):
            u, v = v, u
        mu = round(_quad(gram, u, v) / _quad(gram, u, u))
        if mu == 0:
            return u, v
        v = (v[0] - mu * u[0], v[1] - mu * u[1])


def _rational_lattice_basis(generators, gram: Matrix):
    den = 1
    for g in generators:
        for x in g:
            den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [(int(g[0] * den), int(g[1] * den)) for g in generators]
    u, v = _integer_lattice_basis(ints)
    u, v = _gauss_reduce(u, v, gram)
    return ((Fraction(u[0], den), Fraction(u[1], den)),
            (Fraction(v[0], den), Fraction(v[1], den)))


def equivalence_lattice(angle: MagicAngle, T: float,
                        with_symmetry_centers: bool = False
                        ) -> EquivalenceLattice:
    """
    Lattice generated by e_i and π_α(e_i). With symmetry centers, e_i are
    replaced by the generators of the rotation-center set (I - J)⁻¹L of the
    symmetry group, so that shifts in the lattice give exactly symmetric
    superpositions
    """
    symmetry = angle.symmetry
    gens = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
    if with_symmetry_centers:
        j = symmetry.group_rotation
        eye = _matrix(((1, 0), (0, 1)))
        diff = tuple(tuple(eye[i][k] - j[i][k] for k in range(2))
                     for i in range(2))
        centers = _mat_inv(diff)
        gens = [_mat_vec(centers, g) for g in gens]
    rot = angle.rotation_matrix()
    gens = gens + [_mat_vec(rot, g) for g in gens]
    c1, c2 = _rational_lattice_basis(gens, symmetry.gram)
    return EquivalenceLattice(c1, c2, LatticeBasis(T, symmetry),
                              with_symmetry_centers)


def reduce_shift(a, angle: MagicAngle, T: float,
                 to_symmetric: bool = False) -> np.ndarray:
    return equivalence_lattice(angle, T, to_symmetric).reduce(a)


def _continued_fraction_variable(tan_alpha, triangular: bool):
    root = mpmath.sqrt(tan_alpha ** 2 + 1)
    if triangular:
        sqrt3 = mpmath.sqrt(3)
        return (sqrt3 * root + 2 * tan_alpha) / (sqrt3 - tan_alpha)
    return root + tan_alpha


def approximate_angle(alpha: float, symmetry, count: int) -> list[MagicAngle]:
    """
    Magic angles from the convergents m/n of the auxiliary variable x(alpha),
    so that |alpha_{m,n} - alpha| < k/n²
    """
    symmetry = SymmetryOrder.parse(symmetry)
    if count < 1:
        raise NovikovCliValidationException(
            f'count must be positive, got {count}')
    low, high = symmetry.angle_range
    if not low < alpha < high or alpha == 0:
        raise NovikovCliValidationException(
            f'Angle {alpha} is outside the generic range ({low:.6f}, '
            f'{high:.6f}) of symmetry order {int(symmetry)}')
    sign = 1 if alpha > 0 else -1
    result: list[MagicAngle] = []
    with mpmath.workdps(CF_PRECISION_DIGITS):
        x = _continued_fraction_variable(mpmath.tan(mpmath.mpf(abs(alpha))),
                                         symmetry.triangular)
        p_prev, q_prev = 1, 0
        a0 = int(mpmath.floor(x))
        p, q = a0, 1
        rest = x - a0
        for _ in range(4 * CF_PRECISION_DIGITS):
            if p > q >= 1 and math.gcd(p, q) == 1:
                candidate = MagicAngle(p, q, symmetry, sign)
                if abs(candidate.angle_radians - alpha) <= MAGIC_ANGLE_TOL:
                    raise AngleIsMagicError(
                        f'Angle {alpha} equals the magic angle '
                        f'({p},{q}) of order {int(symmetry)}')
                if result and result[-1].n == q:
                    result[-1] = candidate
                else:
                    result.append(candidate)
                if len(result) == count:
                    break
            if rest == 0:
                raise AngleIsMagicError(
                    f'Angle {alpha} is commensurate: the continued fraction '
                    f'terminates at {p}/{q}')
            x = 1 / rest
            a = int(mpmath.floor(x))
            rest = x - a
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
    if len(result) < count:
        raise NovikovCliNonConvergenceException(
            f'Only {len(result)} convergents are resolvable at the working '
            f'precision for angle {alpha}')
    for angle in result:
        bound = angle.approximation_factor / angle.n ** 2
        if not abs(angle.angle_radians - alpha) < bound:
            raise NovikovCliNonConvergenceException(
                f'Convergent ({angle.m},{angle.n}) misses its approximation '
                f'bound {bound:.3e} at the working precision')
    return result


def _search_box(basis: LatticeBasis, radius: int):
    span = np.arange(-radius, radius + 1)
    ii, jj = np.meshgrid(span, span, indexing='ij')
    ii, jj = ii.ravel(), jj.ravel()
    keep = (basis.coord_norm(ii, jj) <= radius) & ((ii != 0) | (jj != 0))
    return ii[keep], jj[keep]


def dirichlet_pair(basis1: LatticeBasis, basis2: LatticeBasis,
                   q: int) -> DirichletPair:
    """
    Integer vectors with |m·e' - n·e| < √2·T/q, |m| <= 2q, found by
    exhaustive search over m minimizing the residual. `m` always refers to
    basis2, `n` to basis1; n = 0 is excluded
    """
    if basis1.symmetry.triangular != basis2.symmetry.triangular:
        raise NovikovCliValidationException(
            'Both lattices must share the same symmetry type')
    if q < 1:
        raise NovikovCliValidationException(f'q must be positive, got {q}')
    if basis2.period_T > basis1.period_T:
        swapped = dirichlet_pair(basis2, basis1, q)
        return DirichletPair(swapped.n, swapped.m, swapped.residual, q)

    ii, jj = _search_box(basis2, 2 * q)
    w = np.stack([ii, jj], axis=1) @ basis2.matrix.T
    floor = np.floor(basis1.coords_of(w))
    best_res = np.full(len(ii), np.inf)
    best_n = np.zeros((len(ii), 2))
    for di in (-1, 0, 1, 2):
        for dj in (-1, 0, 1, 2):
            n = floor + np.array([di, dj])
            nonzero = (n[:, 0] != 0) | (n[:, 1] != 0)
            diff = w - n @ basis1.matrix.T
            res = np.where(nonzero, np.hypot(diff[:, 0], diff[:, 1]), np.inf)
            better = res < best_res
            best_res[better] = res[better]
            best_n[better] = n[better]
    norms = basis2.coord_norm(ii, jj)
    order = np.lexsort((-jj, -ii, norms, best_res))
    k = order[0]
    residual = float(best_res[k])
    T = basis1.period_T
    if residual <= 1e-12 * T:
        raise CommensurateCollisionError(
            f'Lattices are commensurate: m=({ii[k]},{jj[k]}) lands exactly '
            f'on n=({int(best_n[k, 0])},{int(best_n[k, 1])})')
    bound = math.sqrt(2) * T / q
    if not residual < bound:
        raise NovikovCliNonConvergenceException(
            f'Dirichlet residual {residual:.3e} reaches the bound '
            f'{bound:.3e} at q={q}')
    return DirichletPair((int(ii[k]), int(jj[k])),
                         (int(best_n[k, 0]), int(best_n[k, 1])),
                         residual, q)


def dirichlet_residual_oracle(basis1: LatticeBasis, basis2: LatticeBasis,
                              q: int) -> float:
    """Minimal residual by brute force over both integer vectors"""
    if basis2.period_T > basis1.period_T:
        basis1, basis2 = basis2, basis1
    radius = 2 * q
    e1x, e1y = (float(x) for x in basis1.e1)
    e2x, e2y = (float(x) for x in basis1.e2)
    det = e1x * e2y - e1y * e2x
    best = math.inf
    for i in range(-radius, radius + 1):
        for j in range(-radius, radius + 1):
            if (i, j) == (0, 0) or basis2.coord_norm(i, j) > radius:
                continue
            wx, wy = (float(x) for x in basis2.vector((i, j)))
            ck = round((wx * e2y - wy * e2x) / det)
            cl = round((e1x * wy - e1y * wx) / det)
            for k in range(ck - 3, ck + 4):
                for l in range(cl - 3, cl + 4):
                    if (k, l) == (0, 0):
                        continue
                    best = min(best, math.hypot(wx - k * e1x - l * e2x,
                                                wy - k * e1y - l * e2y))
    return best


def _wrap_angle(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def make_approximant(pair: DirichletPair, basis1: LatticeBasis,
                     plane2: LatticeBasis, alpha: float,
                     lam: float = 1.0) -> PeriodicApproximant:
    """
    `plane2` is the second lattice as it lies in the plane (rotated by alpha
    and scaled by 1/lam)
    """
    w = plane2.vector(pair.m)
    v = basis1.vector(pair.n)
    delta_alpha = _wrap_angle(math.atan2(w[1], w[0]) - math.atan2(v[1], v[0]))
    delta_lambda = float(np.linalg.norm(w) / np.linalg.norm(v)) - 1.0
    norm_n = float(basis1.coord_norm(*pair.n))
    return PeriodicApproximant(
        n_s=pair.n,
        m_s=pair.m,
        delta_alpha=delta_alpha,
        delta_lambda=delta_lambda,
        T_s=norm_n * basis1.period_T,
        norm_n=norm_n,
        alpha_s=alpha - delta_alpha,
        lambda_s=lam * (1.0 + delta_lambda),
        q=pair.q,
        residual=pair.residual,
        basis=basis1,
    )


def build_approximant_sequence(basis1: LatticeBasis, basis2: LatticeBasis,
                               alpha: float, s_max: int,
                               lam: float = 1.0
                               ) -> list[PeriodicApproximant]:
    """
    Approximants with strictly increasing |n_s|. basis2 is the unrotated
    lattice of the second layer
    """
    if s_max < 1:
        raise NovikovCliValidationException(
            f's_max must be positive, got {s_max}')
    plane2 = LatticeBasis(basis2.period_T / lam, basis2.symmetry,
                          basis2.angle + alpha)
    result: list[PeriodicApproximant] = []
    for q in range(1, MAX_DIRICHLET_Q + 1):
        try:
            pair = dirichlet_pair(basis1, plane2, q)
        except NovikovCliNonConvergenceException as e:
            _LOG.debug(f'Skipping q={q}: {e}')
            continue
        norm_n = float(basis1.coord_norm(*pair.n))
        if result and norm_n <= result[-1].norm_n + 1e-12:
            continue
        try:
            approximant = make_approximant(pair, basis1, plane2, alpha, lam)
        except NovikovCliValidationException as e:
            _LOG.debug(f'Skipping q={q}: {e}')
            continue
        _LOG.debug(f'Approximant {len(result) + 1}: n={pair.n}, m={pair.m}, '
                   f'residual={pair.residual:.3e}')
        result.append(approximant)
        if len(result) == s_max:
            return result
    raise NovikovCliNonConvergenceException(
        f'Found {len(result)} of {s_max} approximants with q <= '
        f'{MAX_DIRICHLET_Q}')
