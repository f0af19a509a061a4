"""Piecewise-analytic minimizers for the gain auxiliary variables.

Both updates minimize a cost of the form

    -g0 + (1/(2 rho1)) ||z1 - g||^2 + (1/(2 rho2)) ||z2 - h||^2

subject to ``|g_l| >= g0`` (mainlobe levels at least g0) and
``|h_s| <= sqrt(gamma) g0`` (sidelobe levels capped).  For a fixed g0 the
optimal g and h are modulus clamps that keep the input phases, so the cost
collapses to a piecewise quadratic in g0 whose breakpoints are the clamp
thresholds.  Each closed subdomain contributes one candidate (its interior
stationary point clipped to the subdomain) and the least-cost candidate is
the global minimizer.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError

__all__ = ["update_g_wosc", "update_gh_wsc"]


def _checked_complex(name: str, values) -> NDArray[np.complex128]:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def update_g_wosc(
    y, rho: float
) -> tuple[float, NDArray[np.complex128]]:
    """Minimize ``-g0 + ||y - g||^2 / (2 rho)`` over ``|g_l| >= g0 > 0``.

    The sorted moduli of y split (0, inf) into len(y)+1 subdomains.  Inside
    each, the clamp set is the entries below g0 and the restricted cost is a
    quadratic with unconstrained minimizer ``(rho + sum of clamped moduli) /
    count``, clipped to the subdomain.  Returns the winning ``(g0, g)`` with
    ``g = max(g0, |y|) * exp(1j angle(y))``.
    """
    y = _checked_complex("y", y)
    if y.size == 0:
        raise DomainError("y must have at least one entry")
    if not rho > 0:
        raise DomainError("rho must be positive")
    moduli = np.sort(np.abs(y))
    count = np.arange(moduli.size + 1)
    clamped_sum = np.concatenate(([0.0], np.cumsum(moduli)))
    clamped_sumsq = np.concatenate(([0.0], np.cumsum(moduli * moduli)))
    lower = np.concatenate(([0.0], moduli))
    upper = np.concatenate((moduli, [np.inf]))
    with np.errstate(divide="ignore", invalid="ignore"):
        stationary = (rho + clamped_sum) / count
    candidates = np.clip(stationary, lower, upper)
    candidates[0] = upper[0]
    cost = -candidates + (
        count * candidates**2 - 2.0 * candidates * clamped_sum + clamped_sumsq
    ) / (2.0 * rho)
    g0 = float(candidates[np.argmin(cost)])
    g = np.maximum(np.abs(y), g0) * np.exp(1j * np.angle(y))
    return g0, g


def update_gh_wsc(
    z1, z2, rho1: float, rho2: float, gamma: float
) -> tuple[float, NDArray[np.complex128], NDArray[np.complex128]]:
    """Joint minimizer with mainlobe floor and sidelobe cap constraints.

    Breakpoints are the merged ascending values of ``|z1|`` and
    ``|z2|/sqrt(gamma)``.  Within a subdomain the mainlobe clamp set is the
    entries with threshold below g0 and the sidelobe clamp set those with
    threshold above g0; the stationary point of the restricted quadratic is

        (rho1 rho2 + rho2 S1 + rho1 sqrt(gamma) S2) /
        (rho2 k1 + rho1 gamma k2)

    with S1, k1 the clamped mainlobe modulus sum/count and S2, k2 the
    clamped sidelobe ones.  An empty sidelobe vector reduces to
    :func:`update_g_wosc`.
    """
    z1 = _checked_complex("z1", z1)
    z2 = _checked_complex("z2", z2)
    if z1.size == 0:
        raise DomainError("z1 must have at least one entry")
    if not (rho1 > 0 and rho2 > 0):
        raise DomainError("rho1 and rho2 must be positive")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if z2.size == 0:
        g0, g = update_g_wosc(z1, rho1)
        return g0, g, np.zeros(0, dtype=complex)

    sqrt_gamma = float(np.sqrt(gamma))
    abs1 = np.abs(z1)
    abs2 = np.abs(z2)
    thresholds = np.concatenate((abs1, abs2 / sqrt_gamma))
    is_sidelobe = np.concatenate(
        (np.zeros(abs1.size, dtype=bool), np.ones(abs2.size, dtype=bool))
    )
    moduli = np.concatenate((abs1, abs2))
    order = np.argsort(thresholds, kind="stable")
    thresholds = thresholds[order]
    is_sidelobe = is_sidelobe[order]
    moduli = moduli[order]

    ml_moduli = np.where(is_sidelobe, 0.0, moduli)
    k1 = np.concatenate(([0], np.cumsum(~is_sidelobe)))
    s1 = np.concatenate(([0.0], np.cumsum(ml_moduli)))
    q1 = np.concatenate(([0.0], np.cumsum(ml_moduli * ml_moduli)))

    sl_moduli = np.where(is_sidelobe, moduli, 0.0)
    sl_prefix = np.concatenate(([0], np.cumsum(is_sidelobe)))
    k2 = sl_prefix[-1] - sl_prefix
    s2 = np.sum(sl_moduli) - np.concatenate(([0.0], np.cumsum(sl_moduli)))
    q2 = np.sum(sl_moduli * sl_moduli) - np.concatenate(
        ([0.0], np.cumsum(sl_moduli * sl_moduli))
    )

    lower = np.concatenate(([0.0], thresholds))
    upper = np.concatenate((thresholds, [np.inf]))
    numerator = rho1 * rho2 + rho2 * s1 + rho1 * sqrt_gamma * s2
    denominator = rho2 * k1 + rho1 * gamma * k2
    with np.errstate(divide="ignore", invalid="ignore"):
        stationary = numerator / denominator
    candidates = np.where(denominator > 0, stationary, upper)
    candidates = np.clip(candidates, lower, upper)
    cost = (
        -candidates
        + (k1 * candidates**2 - 2.0 * candidates * s1 + q1) / (2.0 * rho1)
        + (gamma * k2 * candidates**2 - 2.0 * sqrt_gamma * candidates * s2 + q2)
        / (2.0 * rho2)
    )
    g0 = float(candidates[np.argmin(cost)])
    g = np.maximum(abs1, g0) * np.exp(1j * np.angle(z1))
    h = np.minimum(abs2, sqrt_gamma * g0) * np.exp(1j * np.angle(z2))
    return g0, g, h
