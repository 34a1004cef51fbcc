"""Closed-form bounds for the clock/shift (mutually unbiased) steering family.

For the family built from ``Z_d^k`` and ``X_d^k``, ``k = 1..d-1``, the local
bound is ``sqrt(2)(d-1)``, the quantum bound ``2(d-1)``, and when every
measured operator deviates by at most ``eps`` from the ideal one the local
bound grows to at most ``(d-1)(sqrt(2) + sqrt(eps))``. Bob's observables
never enter these expressions and are not modelled.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import OutOfRange
from .operators import build_clock_shift
from .trust import epsilon_from_gamma, gamma_from_epsilon

SQRT2 = math.sqrt(2.0)
# eps at which (sqrt(2) + sqrt(eps)) / 2 reaches 1
CRITICAL_EPSILON = (2.0 - SQRT2) ** 2

CURVE_HEADER = ("d", "gamma", "epsilon", "ratio_raw", "ratio_clamped", "beta_L", "beta_Q", "beta_L_corr")


@dataclass(frozen=True)
class BdAnalysis:
    d: int
    epsilon: float
    gamma: float
    beta_L: float
    beta_Q: float
    beta_L_corr: float
    ratio: float

    def as_dict(self) -> dict:
        return asdict(self)


def _check(d, epsilon=0.0):
    if int(d) != d or d < 2:
        raise OutOfRange(f"dimension must be an integer >= 2, got {d!r}")
    if epsilon < 0 or not math.isfinite(epsilon):
        raise OutOfRange(f"epsilon must be finite and nonnegative, got {epsilon!r}")


def bd_bounds(d: int, epsilon: float) -> BdAnalysis:
    _check(d, epsilon)
    d = int(d)
    corr = (d - 1) * (SQRT2 + math.sqrt(epsilon))
    return BdAnalysis(
        d=d,
        epsilon=float(epsilon),
        gamma=gamma_from_epsilon(epsilon, d),
        beta_L=SQRT2 * (d - 1),
        beta_Q=2.0 * (d - 1),
        beta_L_corr=corr,
        ratio=(SQRT2 + math.sqrt(epsilon)) / 2.0,
    )


def bd_trust_threshold(d: int) -> float:
    """Smallest trust for which the corrected local bound stays below ``2(d-1)``."""
    _check(d)
    return 1.0 - CRITICAL_EPSILON / (2.0 * d)


@dataclass(frozen=True)
class CurveRow:
    d: int
    gamma: float
    epsilon: float
    ratio_raw: float
    ratio_clamped: float
    beta_L: float
    beta_Q: float
    beta_L_corr: float

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in CURVE_HEADER)


def _row(d: int, gamma: float, epsilon: float) -> CurveRow:
    b = bd_bounds(d, epsilon)
    return CurveRow(d, gamma, epsilon, b.ratio, min(1.0, b.ratio), b.beta_L, b.beta_Q, b.beta_L_corr)


def bd_curve(d_list: Iterable[int], gamma_grid: Iterable[float]) -> list[CurveRow]:
    """Ratio of corrected local bound to quantum bound over a trust grid.

    Each trust value is converted with ``eps = 2 d (1 - gamma)``. Rows are
    sorted by ``(d, gamma)``.
    """
    d_list, gamma_grid = list(d_list), list(gamma_grid)
    if not d_list or not gamma_grid:
        raise OutOfRange("dimension and trust grids must be nonempty")
    rows = []
    for d in sorted(set(d_list)):
        _check(d)
        for g in sorted(set(gamma_grid)):
            rows.append(_row(int(d), float(g), epsilon_from_gamma(g, d)))
    return rows


def bd_curve_epsilon(d_list: Iterable[int], epsilon_grid: Iterable[float]) -> list[CurveRow]:
    """Same table parametrized directly by the deviation budget."""
    d_list, epsilon_grid = list(d_list), list(epsilon_grid)
    if not d_list or not epsilon_grid:
        raise OutOfRange("dimension and epsilon grids must be nonempty")
    rows = []
    for d in sorted(set(d_list)):
        for e in sorted(set(epsilon_grid)):
            _check(d, e)
            rows.append(_row(int(d), gamma_from_epsilon(e, d), float(e)))
    return rows


def bd_alice_operators(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs ``(Z_d^k, X_d^k)`` for ``k = 1..d-1``."""
    cs = build_clock_shift(d)
    return [
        (np.linalg.matrix_power(cs.Z, k), np.linalg.matrix_power(cs.X, k))
        for k in range(1, cs.dim)
    ]
