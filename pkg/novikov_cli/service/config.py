import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import click
import yaml

from novikov_cli.core.lattice_angles import MagicAngle, SymmetryOrder
from novikov_cli.core.potential import (
    BivariatePolynomial, CompositionKind, PotentialSpec, SuperpositionSpec,
    cosine_potential, make_symmetric_potential,
)
from novikov_cli.core.verification import Family
from novikov_cli.service.serialization import load_potential
from novikov_cli.utils.exceptions import NovikovCliValidationException
from novikov_cli.utils.logger import get_logger
from novikov_cli.utils.variables import MIN_GRID_SIZE

SYSTEM_LOG = get_logger(__name__)

COSINE_FAMILY = 'cosine'
RANDOM_FAMILY = 'random'


def load_config_file(path: str | Path) -> dict:
    """
    JSON or YAML mapping whose keys mirror long flag names, with dashes or
    underscores
    """
    try:
        with open(path) as file:
            data = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as e:
        raise NovikovCliValidationException(
            f'Cannot read configuration file {path}: {e}')
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise NovikovCliValidationException(
            f'Configuration file {path} must hold a mapping')
    return {str(k).replace('-', '_'): v for k, v in data.items()}


def build_default_map(command: click.Command, data: dict) -> dict:
    """click default_map giving every (sub)command the keys it declares"""
    if isinstance(command, click.Group):
        return {name: build_default_map(sub, data)
                for name, sub in command.commands.items()}
    names = {p.name for p in command.params}
    return {k: v for k, v in data.items() if k in names}


def _positive(name: str, value):
    if value is not None and not value > 0:
        raise NovikovCliValidationException(
            f'{name} must be positive, got {value}')


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one command, validated"""
    subcommand: str
    symmetry: SymmetryOrder = SymmetryOrder.SQUARE
    T: float = 2 * math.pi
    T_prime: float | None = None
    alpha: float | None = None
    m: int | None = None
    n: int | None = None
    negative: bool = False
    degrees: bool = False
    a: tuple[float, float] = (0.0, 0.0)
    lam: float = 1.0
    kind: CompositionKind = CompositionKind.LINEAR
    q: tuple[tuple[int, int, float], ...] = ()
    family: str = COSINE_FAMILY
    potential: str | None = None
    seed: int = 0
    cutoff: int = 2
    nx: int | None = None
    ny: int | None = None
    tol: float | None = None
    center: tuple[float, float] = (0.0, 0.0)
    window: float | None = None
    out: str | None = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'symmetry',
                           SymmetryOrder.parse(self.symmetry))
        object.__setattr__(self, 'kind', CompositionKind(self.kind))
        if self.alpha is not None and (self.m is not None
                                       or self.n is not None):
            raise NovikovCliValidationException(
                '--alpha and --m/--n are mutually exclusive')
        if (self.m is None) != (self.n is None):
            raise NovikovCliValidationException(
                '--m and --n must be given together')
        for name in ('T', 'T_prime', 'lam', 'tol', 'window'):
            _positive(name, getattr(self, name))
        for name in ('nx', 'ny'):
            value = getattr(self, name)
            if value is not None and value < MIN_GRID_SIZE:
                raise NovikovCliValidationException(
                    f'{name} must be at least {MIN_GRID_SIZE}, got {value}')
        if self.jobs < 1:
            raise NovikovCliValidationException(
                f'jobs must be positive, got {self.jobs}')
        if self.cutoff < 1:
            raise NovikovCliValidationException(
                f'cutoff must be positive, got {self.cutoff}')
        if self.family not in (COSINE_FAMILY, RANDOM_FAMILY):
            raise NovikovCliValidationException(
                f'Unknown family {self.family!r}')
        if (self.kind is CompositionKind.POINTWISE) != bool(self.q):
            raise NovikovCliValidationException(
                '--kind pointwise requires --q monomials and linear '
                'forbids them')

    @classmethod
    def from_params(cls, subcommand: str, **params) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        values = {k: v for k, v in params.items()
                  if k in known and v is not None}
        extra = {k: v for k, v in params.items() if k not in known}
        SYSTEM_LOG.debug(f'{subcommand}: {values}')
        return cls(subcommand=subcommand, extra=extra, **values)

    @property
    def has_magic_angle(self) -> bool:
        return self.m is not None

    def magic_angle(self) -> MagicAngle:
        if not self.has_magic_angle:
            raise NovikovCliValidationException(
                'A magic angle (--m/--n) is required')
        return MagicAngle(self.m, self.n, self.symmetry,
                          -1 if self.negative else 1)

    def angle(self) -> float:
        """Rotation angle in radians from --alpha or --m/--n"""
        if self.has_magic_angle:
            return self.magic_angle().angle_radians
        if self.alpha is None:
            raise NovikovCliValidationException(
                'An angle (--alpha or --m/--n) is required')
        return math.radians(self.alpha) if self.degrees else self.alpha

    def _layer(self, period: float, offset: int) -> PotentialSpec:
        if self.family == COSINE_FAMILY:
            return cosine_potential(self.symmetry, period)
        return make_symmetric_potential(self.seed + offset, self.symmetry,
                                        self.cutoff, period)

    def build_family(self) -> Family:
        if self.potential:
            loaded = load_potential(self.potential)
            if isinstance(loaded, SuperpositionSpec):
                return Family(loaded.v1, loaded.u, loaded.kind, loaded.q)
            return Family(loaded, loaded)
        q = BivariatePolynomial(self.q) if self.q else None
        return Family(self._layer(self.T, 0),
                      self._layer(self.T_prime or self.T, 1),
                      self.kind, q)

    def superposition(self) -> SuperpositionSpec:
        return self.build_family().at(self.angle(), self.a, self.lam)
