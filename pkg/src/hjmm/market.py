"""Bond prices, discounted prices and no-arbitrage diagnostics.

Prices come from the solved forward-rate field by trapezoid integration
in the maturity variable:

    P(t, T)    = exp(-int_t^T f(t, u) du),        T >= t,
    P_hat(t,T) = exp(-int_0^t r(s) ds) * P(t, T)
               = exp(-int_0^T f(t, u) du),

where the second equality uses the flat extension f(t, u) = f(u, u) for
u <= t.  On the grid the two P_hat routes sum the same trapezoid panels,
so they agree to rounding; the discounted price should be a martingale
in t under the risk-neutral dynamics, which the Monte Carlo test checks
through z-scores against the time-zero price.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .curves import InitialCurve
from .errors import DomainError, NonPositiveFactor, PathDiverged
from .grids import GridSpec, RateField
from .levy import LevyModelSpec, exponent, exponent_derivative
from .paths import field_a, field_b, simulate_path
from .solver import solve_fixed_point
from .volatility import VolatilitySpec

__all__ = [
    "BondSurface",
    "bond_surface",
    "CheckpointResult",
    "MartingaleReport",
    "martingale_test",
    "default_checkpoints",
    "drift_identity_check",
]


@dataclass(eq=False)
class BondSurface:
    """Grid of bond prices derived from one forward-rate field."""

    prices: np.ndarray
    discounted: np.ndarray
    short_rates: np.ndarray
    grid: GridSpec

    def price(self, t: float, T: float) -> float:
        i = self.grid.index_of_time(t)
        j = self.grid.index_of_maturity(T)
        return float(self.prices[i, j])

    def discounted_price(self, t: float, T: float) -> float:
        i = self.grid.index_of_time(t)
        j = self.grid.index_of_maturity(T)
        return float(self.discounted[i, j])


def bond_surface(rate_field: RateField, grid: GridSpec) -> BondSurface:
    """Price surfaces from a nonnegative rate field.

    ``prices[i, j]`` is NaN for maturities before the observation time
    (j < i); ``discounted[i, j]`` is defined everywhere because the flat
    extension turns the discount factor into the same row integral.
    """
    if rate_field.grid != grid:
        raise DomainError("field and grid do not match")
    values = rate_field.values
    if np.min(values) < 0.0:
        raise DomainError("bond prices need a nonnegative rate field")
    dx = grid.delta
    ct = np.zeros_like(values)
    np.cumsum(0.5 * dx * (values[:, 1:] + values[:, :-1]), axis=1, out=ct[:, 1:])
    discounted = np.exp(-ct)
    prices = np.exp(-(ct - np.take_along_axis(
        ct, np.arange(values.shape[0])[:, None], axis=1)))
    rows, cols = np.indices(values.shape)
    prices[cols < rows] = np.nan
    return BondSurface(prices=prices, discounted=discounted,
                       short_rates=rate_field.short_rates(), grid=grid)


def default_checkpoints(grid: GridSpec) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Default checkpoint tensor: fractions of the horizon and of max maturity."""
    t_points = tuple(f * grid.t_star for f in (0.25, 0.5, 0.75))
    T_points = tuple(f * grid.t_max for f in (0.5, 0.75, 1.0))
    return t_points, T_points


@dataclass
class CheckpointResult:
    t: float
    T: float
    mean_discounted: float
    reference: float
    deviation: float
    std: float
    z_score: float
    degenerate: bool = False


@dataclass
class MartingaleReport:
    """Aggregate of the per-path discounted prices at every checkpoint."""

    results: list
    n_paths: int
    n_excluded: int
    master_seed: int
    valid: bool
    notes: str = ""

    @property
    def max_abs_z(self) -> float:
        finite = [abs(r.z_score) for r in self.results if math.isfinite(r.z_score)]
        return max(finite) if finite else math.nan

    @property
    def mean_abs_deviation(self) -> float:
        return float(np.mean([abs(r.deviation) for r in self.results]))

    @property
    def passed(self) -> bool:
        if not self.valid:
            return False
        if any(math.isnan(r.z_score) for r in self.results):
            return False
        return all(abs(r.z_score) <= 4.0 for r in self.results)


_WORKER_CTX: dict = {}


def _run_one_path(path_index: int):
    ctx = _WORKER_CTX
    seed = [ctx["master_seed"], path_index]
    try:
        path = simulate_path(ctx["spec"], ctx["grid"].t_star, seed,
                             eps=ctx["eps"])
        b_vals = field_b(ctx["vol"], path, ctx["grid"])
        a_vals = field_a(ctx["curve"], b_vals, ctx["grid"])
        report = solve_fixed_point(a_vals, ctx["vol"], ctx["spec"], ctx["grid"],
                                   tol=ctx["tol"], max_iter=ctx["max_iter"],
                                   explosion_threshold=ctx["explosion_threshold"])
        if not report.converged:
            return path_index, None
        surface = bond_surface(report.final_field, ctx["grid"])
        out = surface.discounted[np.ix_(ctx["t_idx"], ctx["T_idx"])]
        return path_index, out.ravel()
    except (PathDiverged, NonPositiveFactor):
        return path_index, None


def martingale_test(spec: LevyModelSpec, vol: VolatilitySpec,
                    curve: InitialCurve, grid: GridSpec, *,
                    n_paths: int, master_seed: int, eps: float = 1e-3,
                    t_checkpoints=None, T_checkpoints=None,
                    tol: float = 1e-9, max_iter: int = 200,
                    explosion_threshold: float = 1e8,
                    threads: int = 1) -> MartingaleReport:
    """Monte Carlo check that discounted bond prices are constant in mean.

    Each path gets its own generator seeded by (master_seed, path index),
    so results are identical for any worker count.  The reference price
    P(0,T) integrates the initial curve by adaptive quadrature, so the
    deviations carry the grid's own discretization bias and must shrink
    under refinement.  Paths whose solve diverges are excluded; more than
    1% exclusions invalidates the test.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be at least 1")
    t_pts, T_pts = default_checkpoints(grid)
    if t_checkpoints is not None:
        t_pts = tuple(float(v) for v in t_checkpoints)
    if T_checkpoints is not None:
        T_pts = tuple(float(v) for v in T_checkpoints)
    t_idx = np.array([grid.index_of_time(v) for v in t_pts], dtype=int)
    T_idx = np.array([grid.index_of_maturity(v) for v in T_pts], dtype=int)

    ctx = {
        "spec": spec, "vol": vol, "curve": curve, "grid": grid,
        "master_seed": int(master_seed), "eps": float(eps),
        "tol": tol, "max_iter": max_iter,
        "explosion_threshold": explosion_threshold,
        "t_idx": t_idx, "T_idx": T_idx,
    }
    global _WORKER_CTX
    _WORKER_CTX = ctx

    n_ckpt = len(t_pts) * len(T_pts)
    samples = np.full((n_paths, n_ckpt), np.nan)
    excluded = 0
    if threads > 1 and n_paths > 1:
        # fork start method shares the context without pickling closures
        mp_ctx = multiprocessing.get_context("fork")
        chunk = max(1, n_paths // (threads * 8))
        with mp_ctx.Pool(processes=threads) as pool:
            for idx, row in pool.imap_unordered(_run_one_path,
                                                range(n_paths), chunk):
                if row is None:
                    excluded += 1
                else:
                    samples[idx] = row
    else:
        for idx in range(n_paths):
            _, row = _run_one_path(idx)
            if row is None:
                excluded += 1
            else:
                samples[idx] = row

    reference = _reference_prices(curve, grid, T_idx)
    kept = samples[~np.isnan(samples[:, 0])]
    n_kept = kept.shape[0]
    valid = excluded <= 0.01 * n_paths
    notes = ""
    if excluded:
        notes = f"{excluded} of {n_paths} paths excluded"

    results = []
    pos = 0
    for i, t_val in enumerate(t_pts):
        for j, T_val in enumerate(T_pts):
            ref = reference[j]
            col = kept[:, pos] if n_kept else np.empty(0)
            mean = float(np.mean(col)) if n_kept else math.nan
            dev = mean - ref
            if n_kept >= 2:
                std = float(np.std(col, ddof=1))
            else:
                std = math.nan
            degenerate = not (n_kept >= 2 and std > 0.0)
            if degenerate:
                # deterministic samples: quadrature-size deviations count
                # as zero, anything larger is unexplained
                quad_tol = 100.0 * grid.delta ** 2 * max(abs(ref), 1.0)
                z = 0.0 if abs(dev) <= quad_tol else math.nan
            else:
                z = dev / (std / math.sqrt(n_kept))
            results.append(CheckpointResult(
                t=t_val, T=T_val, mean_discounted=mean, reference=ref,
                deviation=dev, std=std, z_score=z, degenerate=degenerate))
            pos += 1
    if n_kept < 2:
        valid = False
        notes = (notes + "; " if notes else "") + "fewer than 2 valid paths"
    return MartingaleReport(results=results, n_paths=n_paths,
                            n_excluded=excluded, master_seed=int(master_seed),
                            valid=valid, notes=notes)


def _reference_prices(curve: InitialCurve, grid: GridSpec,
                      T_idx: np.ndarray) -> np.ndarray:
    # adaptive quadrature so the reference carries no grid bias of its own
    out = np.empty(T_idx.size)
    for k, j in enumerate(T_idx):
        T_val = grid.T_nodes()[j]
        integral, _ = integrate.quad(lambda u: float(curve(u)), 0.0, T_val,
                                     epsabs=1e-13, epsrel=1e-12, limit=200)
        out[k] = math.exp(-integral)
    return out


def drift_identity_check(spec: LevyModelSpec, vol: VolatilitySpec,
                         rate_field: RateField, grid: GridSpec,
                         s: float, t: float, T: float) -> float:
    """Residual of the no-arbitrage drift identity at one checkpoint.

    With sigma(s, u) = lambda(s, u) f(s, u) taken from the solved field,
    compares the integrated differential form

        int_t^T J'(int_s^u sigma(s, v) dv) sigma(s, u) du

    with the antiderivative form J(int_s^T sigma) - J(int_s^t sigma).
    Both sides use the adaptive-quadrature exponent routines; the
    discrepancy is pure maturity-grid discretization, O(delta^2).
    """
    if not (0.0 <= s <= t <= T <= grid.t_max):
        raise DomainError("need 0 <= s <= t <= T <= t_max")
    if s > grid.t_star:
        raise DomainError("s must lie in the solver time range")
    i_s = grid.index_of_time(s)
    j_t = grid.index_of_maturity(t)
    j_T = grid.index_of_maturity(T)
    if j_t < i_s:
        raise DomainError("t must not precede s")
    T_nodes = grid.T_nodes()
    lam_row = np.asarray(vol.standard(grid.t_nodes()[i_s], T_nodes), dtype=float)
    sigma = lam_row * rate_field.values[i_s]
    ct = np.concatenate([[0.0], np.cumsum(
        0.5 * grid.delta * (sigma[1:] + sigma[:-1]))])
    inner = ct - ct[i_s]

    cols = np.arange(j_t, j_T + 1)
    dj_vals = np.array([exponent_derivative(spec, max(inner[j], 0.0), 1)
                        for j in cols])
    left = float(np.trapezoid(dj_vals * sigma[cols], dx=grid.delta))
    right = (exponent(spec, max(inner[j_T], 0.0))
             - exponent(spec, max(inner[j_t], 0.0)))
    return abs(left - right)
