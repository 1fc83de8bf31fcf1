"""Sampled scalar fields on parallelograms and tori."""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class Sign(str, Enum):
    BELOW = 'below'
    ABOVE = 'above'

    def select(self, values: np.ndarray, level: float) -> np.ndarray:
        if self is Sign.BELOW:
            return values < level
        return values > level


@dataclass(frozen=True)
class Window:
    """Sampled parallelogram: origin + u·axis1 + v·axis2, u, v in [0, 1)"""
    origin: tuple[float, float]
    axis1: tuple[float, float]
    axis2: tuple[float, float]

    @classmethod
    def from_vectors(cls, axis1, axis2, origin=(0.0, 0.0)) -> 'Window':
        return cls(tuple(float(x) for x in origin),
                   tuple(float(x) for x in axis1),
                   tuple(float(x) for x in axis2))

    @classmethod
    def square(cls, center, size: float) -> 'Window':
        cx, cy = (float(x) for x in center)
        half = size / 2
        return cls((cx - half, cy - half), (float(size), 0.0),
                   (0.0, float(size)))


@dataclass(frozen=True, eq=False)
class ScalarGrid:
    """
    values[i, j] is the field at origin + (i/nx)·axis1 + (j/ny)·axis2;
    centers hold the field at the centers of the grid cells
    """
    window: Window
    values: np.ndarray
    centers: np.ndarray
    periodic: bool

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.window.origin)

    @property
    def axes(self) -> np.ndarray:
        """Rows are axis1, axis2"""
        return np.array([self.window.axis1, self.window.axis2])

    @cached_property
    def min(self) -> float:
        return float(min(self.values.min(), self.centers.min()))

    @cached_property
    def max(self) -> float:
        return float(max(self.values.max(), self.centers.max()))

    @property
    def cell_diagonal(self) -> float:
        step1 = np.asarray(self.window.axis1) / self.nx
        step2 = np.asarray(self.window.axis2) / self.ny
        return float(max(np.linalg.norm(step1 + step2),
                         np.linalg.norm(step1 - step2)))

    def point(self, u, v) -> np.ndarray:
        """Plane position of fractional sample indices (u, v)"""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        axes = self.axes
        return (self.origin
                + (u / self.nx)[..., None] * axes[0]
                + (v / self.ny)[..., None] * axes[1])

    def level(self, c: float) -> float:
        """c moved upward by whole ulps until no sample equals it"""
        c = float(c)
        while np.any(self.values == c) or np.any(self.centers == c):
            c = float(np.nextafter(c, np.inf))
        return c
