"""
Rotation-symmetric periodic potentials as finite Fourier series, their
superpositions V(r, alpha, a, lambda) and the 4-periodic lift F(z).

The second layer is V2(r) = U(lambda·π_{-alpha}(r - a)), so that the
embedding of the plane into the 4-torus is r -> (r, lambda·π_{-alpha}(r - a)).
"""
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np

from novikov_cli.core.lattice_angles import (
    LatticeBasis, SymmetryOrder, rotate, rotation_matrix,
)
from novikov_cli.utils.exceptions import NovikovCliValidationException
from novikov_cli.utils.logger import get_logger

_LOG = get_logger(__name__)

# points per evaluation block
_CHUNK = 1 << 15
MAX_Q_DEGREE = 4

# reciprocal-lattice rotation by the base angle, integer coordinates
_RECIPROCAL_BASE_ROTATION = {
    False: np.array([[0, -1], [1, 0]]),
    True: np.array([[1, -1], [1, 0]]),
}


def _reciprocal_group_rotation(symmetry: SymmetryOrder) -> np.ndarray:
    base = _RECIPROCAL_BASE_ROTATION[symmetry.triangular]
    if symmetry is SymmetryOrder.TRIGONAL:
        return base @ base
    return base


@dataclass(frozen=True)
class FourierTerm:
    k: tuple[int, int]
    coeff: complex


@dataclass(frozen=True)
class PotentialSpec:
    """
    V(r) = Re Σ c_k exp(i K_k·r) with K_k = k1·g1 + k2·g2 on the reciprocal
    lattice of the period-T square or triangular lattice. Symmetric about
    the origin under the rotation group of `symmetry`
    """
    symmetry: SymmetryOrder
    period_T: float
    terms: tuple[FourierTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, 'symmetry',
                           SymmetryOrder.parse(self.symmetry))
        if not self.period_T > 0:
            raise NovikovCliValidationException(
                f'Period must be positive, got {self.period_T}')

    @property
    def lattice(self) -> LatticeBasis:
        return LatticeBasis(self.period_T, self.symmetry)

    @cached_property
    def reciprocal(self) -> np.ndarray:
        """Rows are g1, g2 with g_i·e_j = 2π δ_ij"""
        return 2 * math.pi * np.linalg.inv(self.lattice.matrix)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, 2))
        k = np.array([t.k for t in self.terms], dtype=float)
        return k @ self.reciprocal

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coeff for t in self.terms], dtype=complex)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    @property
    def value_bound(self) -> float:
        """sup |V| <= Σ|c_k|"""
        return float(np.abs(self.coefficients).sum())

    @property
    def gradient_bound(self) -> float:
        """sup |∇V| <= Σ|c_k||K_k|"""
        norms = np.linalg.norm(self.wavevectors, axis=1)
        return float((np.abs(self.coefficients) * norms).sum())

    @property
    def smallest_wavelength(self) -> float:
        if self.is_zero:
            return self.period_T
        norms = np.linalg.norm(self.wavevectors, axis=1)
        return float(2 * math.pi / norms[np.abs(self.coefficients) > 0].max())

    def is_symmetric(self) -> bool:
        """Coefficient-level check of rotation invariance and reality"""
        table = {t.k: t.coeff for t in self.terms}
        rot = _reciprocal_group_rotation(self.symmetry)
        for k, c in table.items():
            rk = tuple(int(x) for x in rot @ np.array(k))
            if table.get(rk, 0) != c:
                return False
            if table.get((-k[0], -k[1]), 0) != np.conj(c):
                return False
        return True

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 2)
        out = np.zeros(len(flat))
        if self.terms:
            for start in range(0, len(flat), _CHUNK):
                phase = flat[start:start + _CHUNK] @ self.wavevectors.T
                out[start:start + _CHUNK] = (
                    np.exp(1j * phase) @ self.coefficients).real
        return out.reshape(points.shape[:-1])

    def gradient(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 2)
        out = np.zeros((len(flat), 2))
        if self.terms:
            weighted = 1j * self.coefficients[:, None] * self.wavevectors
            for start in range(0, len(flat), _CHUNK):
                phase = flat[start:start + _CHUNK] @ self.wavevectors.T
                out[start:start + _CHUNK] = (np.exp(1j * phase)
                                             @ weighted).real
        return out.reshape(points.shape)

    def scaled(self, factor: float) -> 'PotentialSpec':
        return replace(self, terms=tuple(
            FourierTerm(t.k, t.coeff * factor) for t in self.terms))


def _symmetrize(table: dict, symmetry: SymmetryOrder) -> dict:
    """
    Group-orbit average. Every orbit gets one value, its negative orbit the
    conjugate, so the result is exactly symmetric and real
    """
    rot = _reciprocal_group_rotation(symmetry)
    order = int(symmetry)
    result = {}
    for k in sorted(table):
        if k in result:
            continue
        orbit = [k]
        for _ in range(order - 1):
            nxt = tuple(int(x) for x in rot @ np.array(orbit[-1]))
            orbit.append(nxt)
        value = sum(table.get(o, 0) for o in orbit) / order
        negative = [(-o[0], -o[1]) for o in orbit]
        if set(negative) == set(orbit):
            value = complex(value.real, 0.0)
        for o in orbit:
            result[o] = complex(value)
        for o in negative:
            if o not in orbit:
                result[o] = complex(value).conjugate()
    return result


def _realify(table: dict) -> dict:
    keys = set(table) | {(-k[0], -k[1]) for k in table}
    result = {}
    for k in sorted(keys):
        if k in result:
            continue
        neg = (-k[0], -k[1])
        value = (complex(table.get(k, 0))
                 + complex(table.get(neg, 0)).conjugate()) / 2
        if neg == k:
            value = complex(value.real, 0.0)
        result[k] = value
        result[neg] = value.conjugate()
    return result


def _coefficient_table(coefficients) -> dict:
    if isinstance(coefficients, Mapping):
        items = coefficients.items()
    else:
        items = coefficients
    table = {}
    for k, c in items:
        key = (int(k[0]), int(k[1]))
        table[key] = table.get(key, 0) + complex(c)
    return table


def make_symmetric_potential(seed: int | None = None,
                             symmetry=SymmetryOrder.SQUARE,
                             cutoff: int = 2,
                             T: float = 2 * math.pi,
                             coefficients: Mapping | Iterable | None = None
                             ) -> PotentialSpec:
    """
    Seeded random Fourier series with |c_k| <= 1/(1+|k|)³, or explicit
    coefficients {(k1, k2): c}, symmetrized over the rotation group
    """
    symmetry = SymmetryOrder.parse(symmetry)
    if cutoff < 1:
        raise NovikovCliValidationException(
            f'Harmonic cutoff must be at least 1, got {cutoff}')
    if coefficients is not None:
        table = _coefficient_table(coefficients)
        table.pop((0, 0), None)
        if not table:
            raise NovikovCliValidationException(
                'Explicit coefficient set is empty')
    else:
        rng = np.random.default_rng(seed)
        g_norm = LatticeBasis(1.0, symmetry)
        table = {}
        for k1 in range(-cutoff, cutoff + 1):
            for k2 in range(-cutoff, cutoff + 1):
                if (k1, k2) <= (0, 0):
                    continue
                size = float(np.linalg.norm(
                    np.array([k1, k2]) @ np.linalg.inv(g_norm.matrix)))
                amplitude = rng.uniform(0.0, 1.0) / (1.0 + size) ** 3
                phase = rng.uniform(0.0, 2 * math.pi)
                table[(k1, k2)] = amplitude * complex(math.cos(phase),
                                                      math.sin(phase))
    table = _symmetrize(_realify(table), symmetry)
    terms = tuple(FourierTerm(k, c) for k, c in sorted(table.items())
                  if c != 0)
    spec = PotentialSpec(symmetry, T, terms)
    _LOG.debug(f'Built potential of order {int(symmetry)} with '
               f'{len(terms)} terms')
    return spec


def cosine_potential(symmetry=SymmetryOrder.SQUARE,
                     T: float = 2 * math.pi) -> PotentialSpec:
    """cos x + cos y, or the three-wave field of a triangular lattice"""
    symmetry = SymmetryOrder.parse(symmetry)
    if symmetry.triangular:
        waves = [(1, 0), (0, 1), (1, 1)]
    else:
        waves = [(1, 0), (0, 1)]
    coefficients = {}
    for k in waves:
        coefficients[k] = 0.5
        coefficients[(-k[0], -k[1])] = 0.5
    return make_symmetric_potential(symmetry=symmetry, T=T, cutoff=1,
                                    coefficients=coefficients)


def zero_potential(symmetry=SymmetryOrder.SQUARE,
                   T: float = 2 * math.pi) -> PotentialSpec:
    return PotentialSpec(SymmetryOrder.parse(symmetry), T, ())


@dataclass(frozen=True)
class BivariatePolynomial:
    """Q(u, v) = Σ c_ij u^i v^j with i + j <= 4"""
    monomials: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        for i, j, _ in self.monomials:
            if i < 0 or j < 0 or i + j > MAX_Q_DEGREE:
                raise NovikovCliValidationException(
                    f'Monomial u^{i} v^{j} exceeds degree {MAX_Q_DEGREE}')

    @classmethod
    def product(cls) -> 'BivariatePolynomial':
        return cls(((1, 1, 1.0),))

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        total = np.zeros(np.broadcast(u, v).shape)
        for i, j, c in self.monomials:
            total = total + c * u ** i * v ** j
        return total

    def du(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        total = np.zeros(np.broadcast(u, v).shape)
        for i, j, c in self.monomials:
            if i:
                total = total + c * i * u ** (i - 1) * v ** j
        return total

    def dv(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        total = np.zeros(np.broadcast(u, v).shape)
        for i, j, c in self.monomials:
            if j:
                total = total + c * j * u ** i * v ** (j - 1)
        return total

    def du_bound(self, su: float, sv: float) -> float:
        """sup |∂Q/∂u| over [-su, su] x [-sv, sv]"""
        return sum(abs(c) * i * su ** (i - 1) * sv ** j
                   for i, j, c in self.monomials if i)

    def dv_bound(self, su: float, sv: float) -> float:
        return sum(abs(c) * j * su ** i * sv ** (j - 1)
                   for i, j, c in self.monomials if j)


class CompositionKind(str, Enum):
    LINEAR = 'linear'
    POINTWISE = 'pointwise'


@dataclass(frozen=True)
class SuperpositionSpec:
    v1: PotentialSpec
    u: PotentialSpec
    kind: CompositionKind = CompositionKind.LINEAR
    alpha: float = 0.0
    a: tuple[float, float] = (0.0, 0.0)
    lam: float = 1.0
    q: BivariatePolynomial | None = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', CompositionKind(self.kind))
        object.__setattr__(self, 'a', (float(self.a[0]), float(self.a[1])))
        if self.v1.symmetry.triangular != self.u.symmetry.triangular:
            raise NovikovCliValidationException(
                'Both layers must share the lattice type')
        if not self.lam > 0:
            raise NovikovCliValidationException(
                f'Stretch must be positive, got {self.lam}')
        if (self.kind is CompositionKind.POINTWISE) != (self.q is not None):
            raise NovikovCliValidationException(
                'Pointwise composition requires Q and linear forbids it')

    @property
    def symmetry(self) -> SymmetryOrder:
        """Common rotation group of both layers"""
        if self.v1.symmetry == self.u.symmetry:
            return self.v1.symmetry
        return SymmetryOrder.TRIGONAL

    @property
    def period_T(self) -> float:
        return self.v1.period_T

    @property
    def smallest_wavelength(self) -> float:
        return min(self.v1.smallest_wavelength,
                   self.u.smallest_wavelength / self.lam)

    def with_params(self, **changes) -> 'SuperpositionSpec':
        return replace(self, **changes)

    def embed(self, points) -> np.ndarray:
        """Second-layer coordinates lambda·π_{-alpha}(r - a)"""
        points = np.asarray(points, dtype=float)
        return self.lam * rotate(points - np.asarray(self.a), -self.alpha)

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        first = self.v1.evaluate(points)
        second = self.u.evaluate(self.embed(points))
        if self.kind is CompositionKind.LINEAR:
            return first + second
        return self.q(first, second)

    def gradient(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        z = self.embed(points)
        g1 = self.v1.gradient(points)
        # chain rule through lambda·π_{-alpha}: transpose is lambda·π_{alpha}
        g2 = self.lam * (self.u.gradient(z) @ rotation_matrix(-self.alpha))
        if self.kind is CompositionKind.LINEAR:
            return g1 + g2
        first = self.v1.evaluate(points)
        second = self.u.evaluate(z)
        return (self.q.du(first, second)[..., None] * g1
                + self.q.dv(first, second)[..., None] * g2)


Potential = PotentialSpec | SuperpositionSpec


@dataclass(frozen=True)
class LiftedFunction:
    """F on R⁴, periodic in (z1, z2) and (z3, z4) separately"""
    spec: SuperpositionSpec

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        first = self.spec.v1.evaluate(z[..., :2])
        second = self.spec.u.evaluate(z[..., 2:])
        if self.spec.kind is CompositionKind.LINEAR:
            return first + second
        return self.spec.q(first, second)

    def gradient(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        g1 = self.spec.v1.gradient(z[..., :2])
        g2 = self.spec.u.gradient(z[..., 2:])
        if self.spec.kind is CompositionKind.POINTWISE:
            first = self.spec.v1.evaluate(z[..., :2])
            second = self.spec.u.evaluate(z[..., 2:])
            g1 = self.spec.q.du(first, second)[..., None] * g1
            g2 = self.spec.q.dv(first, second)[..., None] * g2
        return np.concatenate([g1, g2], axis=-1)

    def embed(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.concatenate([points, self.spec.embed(points)], axis=-1)


@dataclass(frozen=True)
class BoundConstants:
    C1: float
    C2: float
    C3: float

    def to_dict(self) -> dict:
        return {'C1': self.C1, 'C2': self.C2, 'C3': self.C3}


def evaluate(spec: Potential, r) -> np.ndarray | float:
    value = spec.evaluate(r)
    return float(value) if np.ndim(value) == 0 else value


def evaluate_grad(spec: Potential, r) -> np.ndarray:
    return spec.gradient(r)


def lift(spec: SuperpositionSpec) -> LiftedFunction:
    return LiftedFunction(spec)


def bound_constants(spec: Potential, radius: float = 0.0) -> BoundConstants:
    """
    Certified coefficient-sum bounds: C1 >= |∇_z F|; C2, C3 bound the
    alpha- and lambda-derivatives of V on a disk of `radius` around a
    """
    if isinstance(spec, PotentialSpec):
        return BoundConstants(spec.gradient_bound, 0.0, 0.0)
    g1 = spec.v1.gradient_bound
    g2 = spec.u.gradient_bound
    if spec.kind is CompositionKind.POINTWISE:
        s1, s2 = spec.v1.value_bound, spec.u.value_bound
        g1 *= spec.q.du_bound(s1, s2)
        g2 *= spec.q.dv_bound(s1, s2)
    return BoundConstants(
        C1=g1 + g2,
        C2=g2 * spec.lam * radius,
        C3=g2 * radius,
    )


def symmetry_defect(spec: Potential, angle: float, n_points: int = 64,
                    seed: int = 0) -> float:
    """max |V(π_angle r) - V(r)| over random points within a few periods"""
    rng = np.random.default_rng(seed)
    T = spec.period_T
    points = rng.uniform(-3 * T, 3 * T, size=(n_points, 2))
    return float(np.max(np.abs(spec.evaluate(rotate(points, angle))
                               - spec.evaluate(points))))


def periodicity_defect(spec: Potential, vectors, n_points: int = 32,
                       seed: int = 0) -> float:
    """max |V(r + b) - V(r)| over the given vectors and random points"""
    rng = np.random.default_rng(seed)
    T = spec.period_T
    points = rng.uniform(-2 * T, 2 * T, size=(n_points, 2))
    base = spec.evaluate(points)
    worst = 0.0
    for b in vectors:
        shifted = spec.evaluate(points + np.asarray(b, dtype=float))
        worst = max(worst, float(np.max(np.abs(shifted - base))))
    return worst


def shift_identity_check(spec: SuperpositionSpec, which: int,
                         multiple: float = 1.0, n_points: int = 1000,
                         tol: float = 1e-10, seed: int = 0) -> bool:
    """
    V(r, a + e_i) = V(r - e_i, a) and V(r, a + e'_i) = V(r, a), where e'_i
    is the i-th period of the second layer as it lies in the plane
    """
    if which not in (1, 2):
        raise NovikovCliValidationException(
            f'Basis index must be 1 or 2, got {which}')
    column = which - 1
    e = spec.v1.lattice.matrix[:, column] * multiple
    e_prime = rotate(spec.u.lattice.matrix[:, column],
                     spec.alpha) / spec.lam * multiple
    rng = np.random.default_rng(seed)
    T = spec.period_T
    points = rng.uniform(-2 * T, 2 * T, size=(n_points, 2))
    a = np.asarray(spec.a)

    moved = spec.with_params(a=tuple(a + e)).evaluate(points)
    translated = spec.evaluate(points - e)
    first = np.max(np.abs(moved - translated)) <= tol

    moved = spec.with_params(a=tuple(a + e_prime)).evaluate(points)
    second = np.max(np.abs(moved - spec.evaluate(points))) <= tol
    return bool(first and second)
