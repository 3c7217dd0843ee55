"""
Periodic worldvolume grids and their finite-difference operators.

Grid axes come first in every field array. When the grid has a time axis it
is axis 0; spatial axes follow. Periodic axes use 4th-order centered
differences, a stacked (non-periodic) time axis uses 2nd-order centered
differences with 2nd-order one-sided ends.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.errors import ConfigError, ContractViolation

MIN_POINTS = 8
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TimeAxis:
    levels: int
    step: float
    periodic: bool = False
    origin: float = 0.0

    def __post_init__(self):
        if self.periodic and self.levels < MIN_POINTS:
            raise ConfigError(f"periodic time axis needs >= {MIN_POINTS} levels")
        if not self.periodic and self.levels < 3:
            raise ConfigError("stacked time axis needs >= 3 levels")
        if self.step == 0:
            raise ConfigError("time step must be nonzero")

    @classmethod
    def full_period(cls, levels):
        return cls(levels=levels, step=TWO_PI / levels, periodic=True)

    def coordinates(self):
        return self.origin + self.step * np.arange(self.levels)


@dataclass(frozen=True)
class WorldvolumeGrid:
    spatial: Tuple[int, ...]
    time: Optional[TimeAxis] = None

    def __post_init__(self):
        if len(self.spatial) < 1:
            raise ConfigError("spatial_dim must be >= 1")
        for n in self.spatial:
            if n < MIN_POINTS:
                raise ConfigError(
                    f"grid size {n} below the {MIN_POINTS}-point stencil minimum"
                )

    @property
    def spatial_dim(self):
        return len(self.spatial)

    @property
    def has_time(self):
        return self.time is not None

    @property
    def ndim(self):
        """Number of worldvolume directions sampled by the grid."""
        return self.spatial_dim + (1 if self.has_time else 0)

    @property
    def shape(self):
        if self.has_time:
            return (self.time.levels,) + tuple(self.spatial)
        return tuple(self.spatial)

    @property
    def spatial_axes(self):
        offset = 1 if self.has_time else 0
        return tuple(range(offset, offset + self.spatial_dim))

    @property
    def spatial_spacing(self):
        return tuple(TWO_PI / n for n in self.spatial)

    @property
    def cell_measure(self):
        """dσ: product of the spatial spacings."""
        return float(np.prod(self.spatial_spacing))

    def spacing(self, axis):
        if self.has_time and axis == 0:
            return self.time.step
        return self.spatial_spacing[axis - (1 if self.has_time else 0)]

    def is_periodic(self, axis):
        if self.has_time and axis == 0:
            return self.time.periodic
        return True

    def axis_coordinates(self, axis):
        if self.has_time and axis == 0:
            return self.time.coordinates()
        n = self.shape[axis]
        return self.spacing(axis) * np.arange(n)

    def mesh(self):
        """Coordinate arrays for every grid axis, each with the grid's shape."""
        return np.meshgrid(
            *[self.axis_coordinates(ax) for ax in range(self.ndim)], indexing="ij"
        )

    def slice_grid(self):
        """The spatial grid of one τ = const slice."""
        return WorldvolumeGrid(spatial=self.spatial)

    def _check(self, field, axis):
        if field.shape[: self.ndim] != self.shape:
            raise ContractViolation(
                f"field shape {field.shape} does not start with grid shape {self.shape}"
            )
        if not 0 <= axis < self.ndim:
            raise ContractViolation(f"axis {axis} out of range for {self.ndim}-d grid")

    def _ramp(self, field, axis, winding):
        shape = [1] * field.ndim
        shape[axis] = self.shape[axis]
        xi = self.axis_coordinates(axis).reshape(shape)
        return xi * np.asarray(winding) / (self.shape[axis] * self.spacing(axis))

    def derivative(self, field, axis, winding=None):
        """
        First derivative along a grid axis.

        winding: shift of the field over one period of a periodic axis,
        broadcast over the field's trailing (non-grid) axes.
        """
        field = np.asarray(field, dtype=float)
        self._check(field, axis)
        h = self.spacing(axis)
        if not self.is_periodic(axis):
            return np.gradient(field, h, axis=axis, edge_order=2)

        slope = 0.0
        if winding is not None:
            field = field - self._ramp(field, axis, winding)
            slope = np.asarray(winding) / (self.shape[axis] * h)

        fp1 = np.roll(field, -1, axis=axis)
        fm1 = np.roll(field, 1, axis=axis)
        fp2 = np.roll(field, -2, axis=axis)
        fm2 = np.roll(field, 2, axis=axis)
        return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h) + slope

    def stencil(self, axis):
        """
        The first-derivative operator along an axis as (shift, weights) pairs,
        derivative(f)[i] = Σ weights[i]·f[i + shift]. Weights are scalars on
        periodic axes and per-level arrays on a stacked time axis.
        """
        h = self.spacing(axis)
        if self.is_periodic(axis):
            return [(-2, 1.0 / (12.0 * h)), (-1, -8.0 / (12.0 * h)), (1, 8.0 / (12.0 * h)), (2, -1.0 / (12.0 * h))]
        n = self.shape[axis]
        w = {s: np.zeros(n) for s in (-2, -1, 0, 1, 2)}
        w[-1][1:-1] = -0.5 / h
        w[1][1:-1] = 0.5 / h
        w[0][0], w[1][0], w[2][0] = -1.5 / h, 2.0 / h, -0.5 / h
        w[0][-1], w[-1][-1], w[-2][-1] = 1.5 / h, -2.0 / h, 0.5 / h
        return sorted(w.items())

    def shifted(self, field, axis, shift):
        """field[i + shift] along an axis; a stacked axis clamps at its ends."""
        if self.is_periodic(axis):
            return np.roll(field, -shift, axis=axis)
        n = self.shape[axis]
        return np.take(field, np.clip(np.arange(n) + shift, 0, n - 1), axis=axis)

    def stencil_weight(self, weight, axis, ndim):
        """Reshape a stencil weight to broadcast against an ndim-array along axis."""
        if np.isscalar(weight):
            return weight
        shape = [1] * ndim
        shape[axis] = weight.shape[0]
        return weight.reshape(shape)

    def second_derivative(self, field, axis, winding=None):
        """4th-order second derivative along a periodic axis."""
        field = np.asarray(field, dtype=float)
        self._check(field, axis)
        if not self.is_periodic(axis):
            raise ContractViolation("second_derivative needs a periodic axis")
        h = self.spacing(axis)
        if winding is not None:
            field = field - self._ramp(field, axis, winding)
        fp1 = np.roll(field, -1, axis=axis)
        fm1 = np.roll(field, 1, axis=axis)
        fp2 = np.roll(field, -2, axis=axis)
        fm2 = np.roll(field, 2, axis=axis)
        return (-fp2 + 16.0 * fp1 - 30.0 * field + 16.0 * fm1 - fm2) / (12.0 * h * h)

    def gradient(self, field, winding=None):
        """
        Derivatives along every grid axis, stacked right after the grid axes.

        winding: per-axis windings with shape (ndim, *trailing) or None.
        """
        parts = []
        for ax in range(self.ndim):
            w = None if winding is None else winding[ax]
            parts.append(self.derivative(field, ax, w))
        return np.stack(parts, axis=self.ndim)

    def slice_sum(self, field):
        """Σ field·dσ over the spatial axes of a single-slice field."""
        axes = tuple(range(self.spatial_dim))
        return np.sum(field, axis=axes) * self.cell_measure
