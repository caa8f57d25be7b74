"""Uniform grids and sampled functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symexpr import DomainError


class PoleError(DomainError):
    """A sampled function is singular somewhere on the grid."""


@dataclass(frozen=True)
class Grid:
    """``n`` equally spaced points from ``xmin`` to ``xmax`` inclusive."""

    xmin: float
    xmax: float
    n: int

    def __post_init__(self):
        if not self.xmin < self.xmax:
            raise ValueError(f"grid needs xmin < xmax, got [{self.xmin}, {self.xmax}]")
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.n}")

    @classmethod
    def from_spacing(cls, xmin, xmax, dx):
        n = int(round((xmax - xmin) / dx)) + 1
        return cls(xmin, xmin + (n - 1) * dx, n)

    @property
    def dx(self):
        return (self.xmax - self.xmin) / (self.n - 1)

    @property
    def x(self):
        return self.xmin + self.dx * np.arange(self.n)


@dataclass
class GridFunction:
    """Samples of a real function on a uniform grid starting at ``x0``."""

    x0: float
    dx: float
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.dx <= 0:
            raise ValueError("grid spacing must be positive")
        if self.values.ndim != 1 or len(self.values) < 3:
            raise ValueError("need a 1-D array of at least 3 samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite samples in {self.label or 'grid function'}")

    @classmethod
    def on(cls, grid: Grid, values, label="", **meta):
        return cls(grid.xmin, grid.dx, values, label, dict(meta))

    @classmethod
    def from_samples(cls, x, values, label="", rtol=1e-6, **meta):
        """Build from explicit abscissae, rejecting non-uniform spacing."""
        x = np.asarray(x, dtype=float)
        steps = np.diff(x)
        if len(steps) == 0 or np.any(steps <= 0):
            raise ValueError("abscissae must be strictly increasing")
        dx = (x[-1] - x[0]) / (len(x) - 1)
        if np.max(np.abs(steps - dx)) > rtol * dx:
            raise ValueError("non-uniform grid")
        return cls(float(x[0]), dx, values, label, dict(meta))

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(len(self.values))

    @property
    def grid(self):
        return Grid(self.x0, self.x0 + self.dx * (len(self.values) - 1), len(self.values))

    def __len__(self):
        return len(self.values)


def trapezoid(y, dx):
    """Composite trapezoid rule on a uniform grid."""
    y = np.asarray(y, dtype=float)
    return dx * (y.sum(axis=-1) - 0.5 * (y[..., 0] + y[..., -1]))


def derivative(y, dx):
    """First derivative with 4th-order stencils (one-sided near the ends)."""
    y = np.asarray(y, dtype=float)
    if len(y) < 5:
        raise ValueError("need at least 5 samples for the 4th-order stencil")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dx)
    # forward/backward 5-point formulas
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * dx)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * dx)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * dx)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * dx)
    return d
