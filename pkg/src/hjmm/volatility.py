"""Separable linear-volatility specifications.

The relative volatility has the separable form

    lambda(t, x) = sum_n a_n(t) * b_n(t + x)

in gap coordinates, equivalently lambda(t, T) = sum_n a_n(t) * b_n(T) in
standard coordinates, with continuous a_n on [0, t_star] and bounded
differentiable b_n on [0, inf).  Declared bounds 0 < lambda_lower <=
lambda <= lambda_upper and a bound on the gap derivative are part of the
specification and are validated against grid samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .grids import GridSpec

__all__ = [
    "VolatilitySpec",
    "constant_volatility",
    "time_affine_volatility",
    "grid_violations",
]

Term = tuple[Callable, Callable]


@dataclass(frozen=True)
class VolatilitySpec:
    """Separable volatility with declared bounds.

    Parameters
    ----------
    terms : pairs (a_n, b_n) of vectorized callables; a_n takes times,
        b_n takes maturities.
    lambda_lower, lambda_upper : declared positive bounds of the values.
    x_derivative_bound : declared bound of |d lambda / dx|.
    time_only : the volatility depends on time alone (all b_n constant);
        required by the strong-form residual check.
    """

    terms: tuple[Term, ...]
    lambda_lower: float
    lambda_upper: float
    x_derivative_bound: float = 0.0
    time_only: bool = False

    def __post_init__(self) -> None:
        if not self.terms:
            raise DomainError("at least one separable term is required")
        if not (0.0 < self.lambda_lower <= self.lambda_upper):
            raise DomainError(
                f"need 0 < lambda_lower <= lambda_upper, got "
                f"({self.lambda_lower}, {self.lambda_upper})")
        if not math.isfinite(self.lambda_upper):
            raise DomainError("lambda_upper must be finite")
        if self.x_derivative_bound < 0.0 or not math.isfinite(self.x_derivative_bound):
            raise DomainError(
                f"x_derivative_bound must be finite and >= 0, got "
                f"{self.x_derivative_bound}")

    def standard(self, t, T):
        """lambda(t, T), broadcasting over array arguments."""
        t = np.asarray(t, dtype=float)
        T = np.asarray(T, dtype=float)
        total = np.zeros(np.broadcast_shapes(t.shape, T.shape))
        for a_fn, b_fn in self.terms:
            total = total + np.asarray(a_fn(t)) * np.asarray(b_fn(T))
        return total if total.shape else float(total)

    def musiela(self, t, x):
        """lambda in gap coordinates: lambda(t, x) = standard(t, t + x)."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return self.standard(t, t + x)

    def matrix(self, t_values: np.ndarray, T_values: np.ndarray) -> np.ndarray:
        """Tensor-grid values lambda(t_i, T_j) of shape (len(t), len(T))."""
        t_values = np.asarray(t_values, dtype=float)
        T_values = np.asarray(T_values, dtype=float)
        total = np.zeros((t_values.size, T_values.size))
        for a_fn, b_fn in self.terms:
            total += np.outer(np.asarray(a_fn(t_values), dtype=float),
                              np.asarray(b_fn(T_values), dtype=float))
        return total

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        return self.matrix(grid.t_nodes(), grid.T_nodes())


def grid_violations(vol: VolatilitySpec, grid: GridSpec) -> list[str]:
    """Check the declared bounds against samples on a refinement of the grid.

    Returns human-readable violation messages; empty when all checks pass.
    """
    t = np.linspace(0.0, grid.t_star, 4 * grid.n_t + 1)
    T = np.linspace(0.0, grid.t_max, 4 * grid.n_cols + 1)
    values = vol.matrix(t, T)
    problems: list[str] = []
    tol = 1e-9 * max(1.0, vol.lambda_upper)
    lo, hi = float(values.min()), float(values.max())
    if lo < vol.lambda_lower - tol:
        problems.append(
            f"volatility drops to {lo:.6g}, below the declared lower bound "
            f"{vol.lambda_lower:.6g}")
    if hi > vol.lambda_upper + tol:
        problems.append(
            f"volatility reaches {hi:.6g}, above the declared upper bound "
            f"{vol.lambda_upper:.6g}")
    h = grid.delta / 16.0
    dbound = float(np.max(np.abs(vol.matrix(t, T + h) - vol.matrix(t, T - h)))) / (2 * h)
    if dbound > vol.x_derivative_bound + 1e-6 * max(1.0, dbound):
        problems.append(
            f"gap derivative reaches {dbound:.6g}, above the declared bound "
            f"{vol.x_derivative_bound:.6g}")
    if vol.time_only:
        spread = float(np.max(values.max(axis=1) - values.min(axis=1)))
        if spread > 1e-12 * max(1.0, vol.lambda_upper):
            problems.append(
                f"time_only is set but values vary by {spread:.3g} across maturities")
    return problems


def constant_volatility(level: float) -> VolatilitySpec:
    """lambda identically equal to ``level``."""
    if level <= 0.0:
        raise DomainError(f"volatility level must be positive, got {level}")

    def a_fn(t):
        return np.full_like(np.asarray(t, dtype=float), level)

    def b_fn(T):
        return np.ones_like(np.asarray(T, dtype=float))

    return VolatilitySpec(terms=((a_fn, b_fn),), lambda_lower=level,
                          lambda_upper=level, x_derivative_bound=0.0,
                          time_only=True)


def time_affine_volatility(intercept: float, slope: float,
                           t_star: float) -> VolatilitySpec:
    """lambda(t) = intercept + slope * t on [0, t_star], maturity-independent."""
    ends = (intercept, intercept + slope * t_star)
    lo, hi = min(ends), max(ends)
    if lo <= 0.0:
        raise DomainError(
            f"affine volatility must stay positive on [0, {t_star}], "
            f"reaches {lo:.6g}")

    def a_fn(t):
        return intercept + slope * np.asarray(t, dtype=float)

    def b_fn(T):
        return np.ones_like(np.asarray(T, dtype=float))

    return VolatilitySpec(terms=((a_fn, b_fn),), lambda_lower=lo,
                          lambda_upper=hi, x_derivative_bound=0.0,
                          time_only=True)
