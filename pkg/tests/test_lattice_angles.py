import math
from fractions import Fraction

import numpy as np
import pytest

from novikov_cli.core import lattice_angles
from novikov_cli.core.lattice_angles import (
    LatticeBasis, MagicAngle, SurdValue, SymmetryOrder, approximate_angle,
    build_approximant_sequence, dirichlet_pair, dirichlet_residual_oracle,
    enumerate_magic_angles, equivalence_lattice, reduce_pair, reduce_shift,
    rotate, superposition_periods,
)
from novikov_cli.core.potential import (
    cosine_potential, make_symmetric_potential, periodicity_defect,
    symmetry_defect,
)
from novikov_cli.core.verification import Family
from novikov_cli.utils.exceptions import (
    AngleIsMagicError, CommensurateCollisionError,
    NovikovCliNonConvergenceException, NovikovCliValidationException,
)

TWO_PI = 2 * math.pi
GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.mark.parametrize('m, n, tan', [
    (2, 1, Fraction(3, 4)),
    (3, 1, Fraction(4, 3)),
    (3, 2, Fraction(5, 12)),
])
def test_square_tangents(m, n, tan):
    angle = MagicAngle(m, n, SymmetryOrder.SQUARE)
    assert angle.tan_value == SurdValue(tan)
    assert math.tan(angle.angle_radians) == pytest.approx(float(tan))


def test_hexagonal_tangent():
    angle = MagicAngle(2, 1, 6)
    assert str(angle.tan_value) == '3√3/13'
    assert angle.angle_radians == pytest.approx(math.atan(3 * math.sqrt(3) / 13))
    assert angle.angle_radians == pytest.approx(0.38025, abs=1e-5)


def test_reduction_of_even_difference():
    angle = MagicAngle(3, 1, 4)
    assert (angle.m0, angle.n0) == (2, 1)
    assert not angle.minimal
    assert angle.order_sum == 5
    assert reduce_pair(2, 1, 4) == (2, 1)


def test_triangular_reduction():
    # m - n divisible by 3
    assert reduce_pair(4, 1, 3) == (2, 1)
    assert MagicAngle(4, 1, 6).order_sum == 7


@pytest.mark.parametrize('m, n, symmetry, sign', [
    (1, 2, 4, 1),
    (4, 2, 4, 1),
    (2, 1, 4, -1),
    (2, 1, 5, 1),
])
def test_invalid_angles(m, n, symmetry, sign):
    with pytest.raises(NovikovCliValidationException):
        MagicAngle(m, n, symmetry, sign)


def test_enumeration_sorted_and_distinct():
    angles = enumerate_magic_angles(4, 3)
    assert [str(a.tan_value) for a in angles] == ['5/12', '3/4', '4/3']
    radians = [a.angle_radians for a in angles]
    assert radians == sorted(radians)


def test_trigonal_enumeration_has_both_series():
    angles = enumerate_magic_angles(3, 3)
    signs = {a.sign for a in angles}
    assert signs == {1, -1}
    assert all(-math.pi / 3 < a.angle_radians < math.pi / 3 for a in angles)


def test_enumeration_rejects_small_bound():
    with pytest.raises(NovikovCliValidationException):
        enumerate_magic_angles(4, 1)


def test_exact_rotation_matrix():
    rot = MagicAngle(2, 1, 4).rotation_matrix()
    assert rot == ((Fraction(4, 5), Fraction(-3, 5)),
                   (Fraction(3, 5), Fraction(4, 5)))


@pytest.mark.parametrize('m, n, symmetry', [
    (2, 1, 4), (3, 1, 4), (5, 2, 4), (2, 1, 6), (4, 1, 6), (2, 1, 3),
])
def test_superposition_periods_are_periods(m, n, symmetry):
    angle = MagicAngle(m, n, symmetry)
    layer = cosine_potential(symmetry, TWO_PI)
    spec = Family(layer, layer).at(angle.angle_radians)
    periods = superposition_periods(angle, TWO_PI)
    assert periodicity_defect(spec, (periods.b1, periods.b2)) < 1e-9
    assert periods.length == pytest.approx(
        float(np.linalg.norm(periods.b2)))


def test_minimal_pair_halves_formula_area():
    angle = MagicAngle(3, 1, 4)
    formula = superposition_periods(angle, TWO_PI, minimal=False)
    reduced = superposition_periods(angle, TWO_PI)
    assert formula.coords1 == (3, -1)
    assert formula.coords2 == (1, 3)
    assert reduced.area * 2 == pytest.approx(formula.area)
    assert reduced.length == pytest.approx(math.sqrt(5) * TWO_PI)


def test_minimal_pair_length_matches_order_sum():
    angle = MagicAngle(2, 1, 6)
    periods = superposition_periods(angle, 1.0)
    assert periods.length == pytest.approx(math.sqrt(angle.order_sum))


def test_equivalence_lattice_step():
    lattice = equivalence_lattice(MagicAngle(2, 1, 4), TWO_PI)
    assert lattice.step == pytest.approx(TWO_PI / math.sqrt(5))
    assert lattice.covering_radius == pytest.approx(
        lattice.step / math.sqrt(2))


def test_reduce_shift_to_origin():
    lattice = equivalence_lattice(MagicAngle(2, 1, 4), TWO_PI)
    a = 3 * lattice.v1 - 2 * lattice.v2 + np.array([0.01, -0.02])
    assert lattice.reduce(a) == pytest.approx([0.01, -0.02], abs=1e-12)


def test_rotated_symmetry_center_shift_is_symmetric():
    angle = MagicAngle(2, 1, 4)
    layer = make_symmetric_potential(7, 4, 2, TWO_PI)
    # (e1 + e2)/2 is a rotation center of the square lattice
    a = rotate((TWO_PI / 2, TWO_PI / 2), angle.angle_radians)
    spec = Family(layer, layer).at(angle.angle_radians, tuple(a))
    assert symmetry_defect(spec, math.pi / 2) < 1e-9
    cos_layer = cosine_potential(4, TWO_PI)
    shifted = Family(cos_layer, cos_layer).at(angle.angle_radians, (0.3, 0.1))
    assert symmetry_defect(shifted, math.pi / 2) > 1e-2


def test_reduce_shift_onto_symmetry_center():
    angle = MagicAngle(2, 1, 4)
    a = rotate((TWO_PI / 2, TWO_PI / 2), angle.angle_radians)
    assert reduce_shift(a, angle, TWO_PI, to_symmetric=True) == \
        pytest.approx([0.0, 0.0], abs=1e-9)
    assert np.linalg.norm(reduce_shift(a, angle, TWO_PI)) > 1e-3


def test_symmetry_centers_refine_equivalence_lattice():
    angle = MagicAngle(2, 1, 4)
    plain = equivalence_lattice(angle, TWO_PI)
    centers = equivalence_lattice(angle, TWO_PI, with_symmetry_centers=True)
    assert centers.step < plain.step
    ratio = plain.v1[0] * plain.v2[1] - plain.v1[1] * plain.v2[0]
    ratio /= centers.v1[0] * centers.v2[1] - centers.v1[1] * centers.v2[0]
    assert abs(ratio) == pytest.approx(2.0)


def test_pi_over_four_convergents():
    angles = approximate_angle(math.pi / 4, 4, 3)
    assert [(a.m, a.n) for a in angles] == [(2, 1), (5, 2), (12, 5)]
    errors = [abs(a.angle_radians - math.pi / 4) for a in angles]
    assert errors == sorted(errors, reverse=True)
    for angle, error in zip(angles, errors):
        assert error < 1 / angle.n ** 2


def test_triangular_convergents_within_bound():
    alpha = 0.3
    for angle in approximate_angle(alpha, 6, 3):
        assert abs(angle.angle_radians - alpha) < 2 / math.sqrt(3) / angle.n ** 2


def test_magic_angle_is_not_approximated():
    alpha = MagicAngle(2, 1, 4).angle_radians
    with pytest.raises(AngleIsMagicError):
        approximate_angle(alpha, 4, 2)


@pytest.mark.parametrize('alpha', [0.0, -0.1, 2.0])
def test_approximation_range(alpha):
    with pytest.raises(NovikovCliValidationException):
        approximate_angle(alpha, 4, 2)


def test_dirichlet_pair_matches_oracle():
    basis1 = LatticeBasis(TWO_PI, SymmetryOrder.SQUARE)
    basis2 = LatticeBasis(TWO_PI * GOLDEN, SymmetryOrder.SQUARE, 0.3)
    for q in (2, 5, 8):
        pair = dirichlet_pair(basis1, basis2, q)
        assert pair.residual < math.sqrt(2) * TWO_PI / q
        assert pair.residual == pytest.approx(
            dirichlet_residual_oracle(basis1, basis2, q), abs=1e-9)


def test_dirichlet_pair_detects_commensurate_lattices():
    basis = LatticeBasis(TWO_PI, SymmetryOrder.SQUARE)
    with pytest.raises(CommensurateCollisionError):
        dirichlet_pair(basis, basis, 3)


def test_approximant_sequence():
    basis1 = LatticeBasis(TWO_PI, SymmetryOrder.SQUARE)
    basis2 = LatticeBasis(TWO_PI * GOLDEN, SymmetryOrder.SQUARE)
    approximants = build_approximant_sequence(basis1, basis2, 0.3, 3)
    norms = [a.norm_n for a in approximants]
    assert norms == sorted(set(norms))
    layer1 = cosine_potential(4, TWO_PI)
    layer2 = cosine_potential(4, TWO_PI * GOLDEN)
    for approximant in approximants:
        assert abs(approximant.delta_alpha) < 3 / approximant.norm_n ** 2
        spec = Family(layer1, layer2).at(approximant.alpha_s,
                                         lam=approximant.lambda_s)
        periods = approximant.periods
        assert periodicity_defect(spec, (periods.b1, periods.b2)) < 1e-8
        assert symmetry_defect(spec, math.pi / 2) < 1e-9


def _hypotenuse_identity(angle: MagicAngle) -> bool:
    m, n = angle.m, angle.n
    t = angle.tan_value.rational
    if angle.symmetry.triangular:
        return 1 + 3 * t * t == Fraction(2 * (m * m + n * n + m * n),
                                         m * m + n * n + 4 * m * n) ** 2
    return 1 + t * t == Fraction(m * m + n * n, 2 * m * n) ** 2


@pytest.mark.parametrize('symmetry', [3, 4, 6])
def test_every_angle_up_to_one_hundred(symmetry):
    basis = LatticeBasis(1.0, SymmetryOrder.parse(symmetry))
    for angle in enumerate_magic_angles(symmetry, 100):
        m, n = angle.m, angle.n
        assert _hypotenuse_identity(angle)

        if angle.symmetry.triangular:
            norm = m * m + n * n + m * n
            assert angle.order_sum * (1 if angle.minimal else 3) == norm
            assert (angle.m0 - angle.n0) % 3 != 0
        else:
            norm = m * m + n * n
            assert angle.order_sum * (1 if angle.minimal else 2) == norm
            assert (angle.m0 - angle.n0) % 2 == 1
        assert math.gcd(angle.m0, angle.n0) == 1

        src, dst = ((m, n), (n, m)) if angle.sign > 0 else ((n, m), (m, n))
        rot = angle.rotation_matrix()
        assert tuple(row[0] * src[0] + row[1] * src[1] for row in rot) == dst
        assert rotate(basis.vector(src), angle.angle_radians) == \
            pytest.approx(basis.vector(dst), abs=1e-9)


def test_reduced_shifts_are_short_and_stable():
    angle = MagicAngle(2, 1, 4)
    shifts = np.random.default_rng(5).uniform(-30.0, 30.0, size=(200, 2))
    for a in shifts:
        reduced = reduce_shift(a, angle, TWO_PI)
        assert np.linalg.norm(reduced) <= TWO_PI / math.sqrt(10) + 1e-12
        assert reduce_shift(reduced, angle, TWO_PI) == \
            pytest.approx(reduced, abs=1e-12)


def test_convergent_outside_its_bound(monkeypatch):
    monkeypatch.setattr(MagicAngle, 'approximation_factor',
                        property(lambda self: 1e-12))
    with pytest.raises(NovikovCliNonConvergenceException):
        approximate_angle(math.pi / 4, 4, 2)


def test_dirichlet_residual_outside_its_bound(monkeypatch):
    basis1 = LatticeBasis(TWO_PI, SymmetryOrder.SQUARE)
    basis2 = LatticeBasis(TWO_PI * GOLDEN, SymmetryOrder.SQUARE)
    # only m = (1, 0) is searched, 0.382·T away from the nearest n
    monkeypatch.setattr(lattice_angles, '_search_box',
                        lambda basis, radius: (np.array([1]), np.array([0])))
    with pytest.raises(NovikovCliNonConvergenceException):
        dirichlet_pair(basis1, basis2, 5)
