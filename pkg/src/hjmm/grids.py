"""Uniform space-time grids and discrete forward-rate fields.

Fields are stored in standard coordinates on the rectangle
[0, t_star] x [0, t_max] with a common step delta, so the node set of the
time axis is a prefix of the maturity axis and Musiela slices
r(t_i, x) = f(t_i, t_i + x) are plain diagonal re-indexings.  Below the
diagonal (t > T) fields carry the flat extension f(t, T) = f(T, T), which
is what the discounted-bond identity uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["GridSpec", "RateField"]


def _divisible(total: float, step: float) -> int:
    n = round(total / step)
    if n < 1 or abs(n * step - total) > 1e-9 * max(1.0, abs(total)):
        raise DomainError(
            f"step {step} must divide horizon {total} into whole panels")
    return n


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid parameters.

    Parameters
    ----------
    delta : common step of the time and maturity axes.
    t_star : time horizon (rows run over [0, t_star]).
    t_max : maturity horizon (columns run over [0, t_max]), >= t_star.
    gamma : exponential weight of the maturity norms.
    """

    delta: float
    t_star: float
    t_max: float
    gamma: float

    def __post_init__(self) -> None:
        if self.delta <= 0.0 or not math.isfinite(self.delta):
            raise DomainError(f"delta must be positive, got {self.delta}")
        if self.t_star <= 0.0:
            raise DomainError(f"t_star must be positive, got {self.t_star}")
        if self.t_max < self.t_star:
            raise DomainError(
                f"t_max ({self.t_max}) must be >= t_star ({self.t_star})")
        if self.gamma <= 0.0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        _divisible(self.t_star, self.delta)
        _divisible(self.t_max, self.delta)

    @property
    def n_t(self) -> int:
        return round(self.t_star / self.delta)

    @property
    def n_cols(self) -> int:
        return round(self.t_max / self.delta)

    def t_nodes(self) -> np.ndarray:
        return self.delta * np.arange(self.n_t + 1)

    def T_nodes(self) -> np.ndarray:
        return self.delta * np.arange(self.n_cols + 1)

    def index_of_time(self, t: float) -> int:
        i = round(t / self.delta)
        if not 0 <= i <= self.n_t or abs(i * self.delta - t) > 1e-9:
            raise DomainError(f"time {t} is not a grid node")
        return i

    def index_of_maturity(self, T: float) -> int:
        j = round(T / self.delta)
        if not 0 <= j <= self.n_cols or abs(j * self.delta - T) > 1e-9:
            raise DomainError(f"maturity {T} is not a grid node")
        return j

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.delta / factor, self.t_star, self.t_max, self.gamma)


def flat_extend(values: np.ndarray) -> np.ndarray:
    """Copy values and overwrite the below-diagonal cells with f(T, T)."""
    out = np.array(values, dtype=float, copy=True)
    n_rows, n_cols = out.shape
    for j in range(min(n_rows, n_cols) - 1):
        out[j + 1:, j] = out[j, j]
    return out


@dataclass(eq=False)
class RateField:
    """Forward rates f(t_i, T_j) on a :class:`GridSpec` rectangle.

    ``values[i, j]`` holds f at time node i and maturity node j; below the
    diagonal the values carry the flat extension f(t, T) = f(T, T).
    """

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self) -> None:
        expected = (self.grid.n_t + 1, self.grid.n_cols + 1)
        if self.values.shape != expected:
            raise DomainError(
                f"field shape {self.values.shape} does not match grid {expected}")

    @classmethod
    def from_triangle(cls, values: np.ndarray, grid: GridSpec) -> "RateField":
        """Build a field from upper-triangle values, applying the extension."""
        return cls(flat_extend(values), grid)

    def musiela_slice(self, i: int) -> np.ndarray:
        """r(t_i, x) over the truncated gap range x in [0, t_max - t_i]."""
        return self.values[i, i:]

    def x_nodes(self, i: int) -> np.ndarray:
        return self.grid.delta * np.arange(self.grid.n_cols - i + 1)

    def short_rates(self) -> np.ndarray:
        """r(t_i) = f(t_i, t_i) along the diagonal."""
        n = self.grid.n_t + 1
        return self.values[np.arange(n), np.arange(n)]

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sup_distance(self, other: "RateField") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def extension_defect(self) -> float:
        """Max deviation of below-diagonal cells from their diagonal value."""
        worst = 0.0
        n_rows, n_cols = self.values.shape
        for j in range(min(n_rows, n_cols) - 1):
            col = self.values[j + 1:, j]
            if col.size:
                worst = max(worst, float(np.max(np.abs(col - self.values[j, j]))))
        return worst
