"""Uniform rectangular sample grids carrying their semiclassical metadata."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("an axis needs at least two samples")
        if not self.hi > self.lo:
            raise ValueError("axis maximum must exceed its minimum")

    @property
    def step(self):
        return (self.hi - self.lo) / (self.count - 1)

    def points(self):
        return np.linspace(self.lo, self.hi, self.count)

    def weights(self):
        w = np.full(self.count, self.step)
        w[[0, -1]] *= 0.5
        return w

    def as_tuple(self):
        return (self.lo, self.hi, self.count)


def parse_grid(text):
    """Parse ``min:max:count[,min:max:count]`` into an (x, y) pair of axes.

    A single axis is used for both directions.
    """
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) not in (1, 2):
        raise ValueError(f"grid needs one or two axes, got {text!r}")
    axes = []
    for part in parts:
        fields = part.split(":")
        if len(fields) != 3:
            raise ValueError(f"axis must be min:max:count, got {part!r}")
        try:
            lo, hi, count = float(fields[0]), float(fields[1]), int(fields[2])
        except ValueError as exc:
            raise ValueError(f"malformed axis {part!r}") from exc
        axes.append(Axis(lo, hi, count))
    if len(axes) == 1:
        axes.append(axes[0])
    return tuple(axes)


def square_axes(half_width, count):
    ax = Axis(-half_width, half_width, count)
    return ax, ax


@dataclass(frozen=True, eq=False)
class SampledGrid:
    """Complex field on an x-major grid: ``values[i, j]`` sits at ``(x_i, y_j)``."""

    h: float
    x_axis: Axis
    y_axis: Axis
    values: np.ndarray
    quantity: str = "field"
    time: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.x_axis.count, self.y_axis.count):
            raise ValueError(
                f"values shape {vals.shape} does not match axes "
                f"({self.x_axis.count}, {self.y_axis.count})"
            )

    def mesh(self):
        return np.meshgrid(self.x_axis.points(), self.y_axis.points(), indexing="ij")

    def integrate(self, values=None):
        v = self.values if values is None else values
        return self.x_axis.weights() @ v @ self.y_axis.weights()

    def l2_norm(self, values=None):
        v = self.values if values is None else values
        return float(np.sqrt(np.real(self.integrate(np.abs(v) ** 2))))

    def sup_norm(self, values=None):
        v = self.values if values is None else values
        return float(np.max(np.abs(v)))

    def with_values(self, values, quantity=None):
        return SampledGrid(self.h, self.x_axis, self.y_axis, values,
                           quantity or self.quantity, self.time, dict(self.extra))
