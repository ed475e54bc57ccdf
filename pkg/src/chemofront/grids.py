"""Uniform 1-D grids and sampled fields with constant extensions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 points")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def index_of(self, x: float) -> int:
        """Index of the grid node nearest to x (x must lie on the grid)."""
        i = round((x - self.x_min) / self.dx)
        if not 0 <= i < self.n or abs(self.x_min + i * self.dx - x) > 1e-9 * max(1.0, self.dx):
            raise ValueError(f"{x} is not a grid node")
        return int(i)

    @staticmethod
    def from_spacing(x_min: float, x_max: float, dx: float) -> "Grid1D":
        n = round((x_max - x_min) / dx) + 1
        return Grid1D(x_min, x_min + (n - 1) * dx, n)


@dataclass
class Field:
    """Samples on a uniform grid plus constant left/right extension values."""

    grid: Grid1D
    values: np.ndarray
    left_ext: float = 0.0
    right_ext: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def extended(self, pad: int) -> np.ndarray:
        """Values padded by `pad` extension samples on each side."""
        return np.concatenate(
            [
                np.full(pad, self.left_ext),
                self.values,
                np.full(pad, self.right_ext),
            ]
        )

    def with_values(self, values: np.ndarray) -> "Field":
        return replace(self, values=np.asarray(values, dtype=float))

    def sup_norm(self) -> float:
        """Sup norm of the extended profile (extensions included)."""
        return max(
            float(np.max(np.abs(self.values))), abs(self.left_ext), abs(self.right_ext)
        )


def constant_field(grid: Grid1D, value: float) -> Field:
    return Field(grid, np.full(grid.n, float(value)), left_ext=value, right_ext=value)


def step_field(grid: Grid1D, x_jump: float = 0.0) -> Field:
    """1 for x < x_jump, 0 for x >= x_jump, with matching (1, 0) extensions."""
    values = np.where(grid.x < x_jump, 1.0, 0.0)
    return Field(grid, values, left_ext=1.0, right_ext=0.0)


def smoothed_step_field(grid: Grid1D, width: float = 2.0) -> Field:
    """(1 + tanh(-x/width))/2 with (1, 0) extensions."""
    values = 0.5 * (1.0 + np.tanh(-grid.x / width))
    return Field(grid, values, left_ext=1.0, right_ext=0.0)
