"""Brute-force references certifying the analytic solvers.

These deliberately avoid the production code paths: the level-update
oracle scans a dense one-dimensional grid of the clamped cost, the sphere
oracle polishes random unit starts by projected gradient descent, and the
secular oracle finds every real root by sign-change scanning.  They are
desk-scale tools; full-scale runs are checked against published values
instead.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError

__all__ = [
    "OracleReport",
    "clamped_cost_wosc",
    "clamped_cost_wsc",
    "oracle_g0_grid_wosc",
    "oracle_g0_grid_wsc",
    "oracle_secular_scan",
    "oracle_sphere",
    "secular_cost",
]


@dataclass
class OracleReport:
    """Engine-versus-oracle comparison, persisted with inputs for replay."""

    name: str
    oracle_cost: float
    engine_cost: float
    samples_or_gridstep: str
    inputs: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        """Signed gap; positive means the engine did worse than the oracle."""
        return self.engine_cost - self.oracle_cost

    def to_json_line(self) -> str:
        payload = {
            "name": self.name,
            "oracle_cost": self.oracle_cost,
            "engine_cost": self.engine_cost,
            "gap": self.gap,
            "samples_or_gridstep": self.samples_or_gridstep,
            "inputs": self.inputs,
        }
        return json.dumps(payload, sort_keys=True)


def clamped_cost_wosc(g0, y, rho: float):
    """Cost of the mainlobe level update after clamping g optimally.

    Vectorized over g0: ``-g0 + sum(max(g0 - |y|, 0)^2) / (2 rho)``.
    """
    g0 = np.asarray(g0, dtype=float)
    moduli = np.abs(np.asarray(y, dtype=complex))
    excess = np.maximum(g0[..., None] - moduli, 0.0)
    return -g0 + np.sum(excess * excess, axis=-1) / (2.0 * rho)


def clamped_cost_wsc(g0, z1, z2, rho1: float, rho2: float, gamma: float):
    """Joint clamped cost with the sidelobe cap term, vectorized over g0."""
    g0 = np.asarray(g0, dtype=float)
    m1 = np.abs(np.asarray(z1, dtype=complex))
    m2 = np.abs(np.asarray(z2, dtype=complex))
    sqrt_gamma = np.sqrt(gamma)
    up = np.maximum(g0[..., None] - m1, 0.0)
    down = np.maximum(m2 - sqrt_gamma * g0[..., None], 0.0)
    return (
        -g0
        + np.sum(up * up, axis=-1) / (2.0 * rho1)
        + np.sum(down * down, axis=-1) / (2.0 * rho2)
    )


def _grid_minimize(cost_fn, breakpoints, g0_max, step):
    """Dense scan plus one ternary-search pass around the grid minimum."""
    breakpoints = np.asarray(breakpoints, dtype=float)
    top = float(np.max(breakpoints)) if breakpoints.size else 1.0
    if g0_max is None:
        g0_max = 1.2 * max(top, 1e-12)
    if g0_max < top:
        warnings.warn(
            f"g0_max {g0_max:.3g} below the largest breakpoint; widened",
            stacklevel=3,
        )
        g0_max = 1.2 * top
    if step is None:
        step = 1e-3 * g0_max
    if step > 1e-3 * g0_max:
        raise DomainError("oracle grid step too coarse for the requested range")
    grid = np.arange(step, g0_max + step, step)
    inside = breakpoints[(breakpoints > 0) & (breakpoints < g0_max)]
    if inside.size:
        midpoints = 0.5 * (np.sort(inside)[1:] + np.sort(inside)[:-1])
        grid = np.unique(np.concatenate((grid, inside, midpoints)))
    costs = cost_fn(grid)
    best = int(np.argmin(costs))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    for _ in range(200):
        third = (hi - lo) / 3.0
        m1, m2 = lo + third, hi - third
        if cost_fn(np.asarray([m1]))[0] < cost_fn(np.asarray([m2]))[0]:
            hi = m2
        else:
            lo = m1
        if hi - lo < 1e-13 * (1.0 + hi):
            break
    refined = 0.5 * (lo + hi)
    refined_cost = float(cost_fn(np.asarray([refined]))[0])
    if refined_cost <= costs[best]:
        return float(refined), refined_cost
    return float(grid[best]), float(costs[best])


def oracle_g0_grid_wosc(y, rho: float, g0_max=None, step=None):
    """Grid-scan the mainlobe level cost; returns the minimizing (g0, cost)."""
    y = np.asarray(y, dtype=complex)
    moduli = np.abs(y)
    stationary_top = (rho + float(np.sum(moduli))) / y.size
    breakpoints = np.concatenate((moduli, [stationary_top]))
    return _grid_minimize(
        lambda g: clamped_cost_wosc(g, y, rho), breakpoints, g0_max, step
    )


def oracle_g0_grid_wsc(z1, z2, rho1: float, rho2: float, gamma: float,
                       g0_max=None, step=None):
    """Grid-scan the joint level cost; returns the minimizing (g0, cost)."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    stationary_top = (rho1 + float(np.sum(np.abs(z1)))) / z1.size
    breakpoints = np.concatenate(
        (np.abs(z1), np.abs(z2) / np.sqrt(gamma), [stationary_top])
    )
    return _grid_minimize(
        lambda g: clamped_cost_wsc(g, z1, z2, rho1, rho2, gamma),
        breakpoints,
        g0_max,
        step,
    )


def oracle_sphere(m, d, n_restarts: int = 20000, n_polish: int = 8,
                  seed: int | None = None):
    """Best unit vector for ``||m^T x - d||^2`` from sampled + polished starts.

    Samples ``n_restarts`` random unit vectors, then runs projected gradient
    descent with renormalization on the best ``n_polish`` until the step
    falls below 1e-10.  Returns ``(x, cost)``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    d = np.asarray(d, dtype=float)
    dim = m.shape[0]
    rng = np.random.default_rng(seed)
    starts = rng.normal(size=(dim, n_restarts))
    starts /= np.linalg.norm(starts, axis=0)
    residuals = m.T @ starts - d[:, None]
    costs = np.sum(residuals * residuals, axis=0)
    keep = np.argsort(costs)[: max(1, n_polish)]
    x = starts[:, keep].copy()
    lipschitz = 2.0 * np.linalg.norm(m, 2) ** 2
    rate = 1.0 / max(lipschitz, 1e-30)
    for _ in range(20000):
        gradient = 2.0 * (m @ (m.T @ x - d[:, None]))
        x_new = x - rate * gradient
        x_new /= np.linalg.norm(x_new, axis=0)
        movement = np.max(np.linalg.norm(x_new - x, axis=0))
        x = x_new
        if movement < 1e-10:
            break
    residuals = m.T @ x - d[:, None]
    costs = np.sum(residuals * residuals, axis=0)
    best = int(np.argmin(costs))
    return x[:, best], float(costs[best])


def secular_cost(lambdas, beta, nu: float) -> float:
    """Quadratic cost of the eigenbasis coefficients implied by a root nu."""
    lambdas = np.asarray(lambdas, dtype=float)
    beta = np.asarray(beta, dtype=float)
    alpha = beta / (lambdas - nu)
    return float(alpha @ (lambdas * alpha) - 2.0 * beta @ alpha)


def oracle_secular_scan(lambdas, beta, step=None) -> NDArray[np.float64]:
    """All real roots of the secular function by sign-change scanning.

    Scans ``[min(lambda) - sqrt(M) max|beta| - 1, max(lambda) + sqrt(M)
    max|beta| + 1]`` and refines each bracket by bisection.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    beta = np.asarray(beta, dtype=float)
    nonzero = beta != 0.0
    lam = lambdas[nonzero]
    b_sq = beta[nonzero] ** 2
    if lam.size == 0:
        return np.zeros(0)
    reach = np.sqrt(lambdas.size) * float(np.max(np.abs(beta)))
    lo = float(np.min(lambdas)) - reach - 1.0
    hi = float(np.max(lambdas)) + reach + 1.0
    if step is None:
        step = 1e-5 * (hi - lo)
    if step > 1e-5 * (hi - lo):
        raise DomainError("oracle scan step too coarse for the range")
    grid = np.arange(lo, hi + step, step)
    with np.errstate(divide="ignore"):
        values = np.sum(b_sq[None, :] / (grid[:, None] - lam[None, :]) ** 2, axis=1) - 1.0
    values[~np.isfinite(values)] = np.inf

    def f(nu):
        with np.errstate(divide="ignore"):
            return float(np.sum(b_sq / (nu - lam) ** 2) - 1.0)

    roots = []
    signs = np.sign(values)
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        a, b = float(grid[i]), float(grid[i + 1])
        fa = f(a)
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = f(mid)
            if not np.isfinite(fm):
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
            if b - a < 1e-13 * (1.0 + abs(mid)):
                break
        root = 0.5 * (a + b)
        if np.isfinite(f(root)):
            roots.append(root)
    for i in np.nonzero(values == 0.0)[0]:
        roots.append(float(grid[i]))
    return np.unique(np.asarray(sorted(roots)))
