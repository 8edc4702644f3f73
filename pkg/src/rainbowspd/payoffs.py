"""Rainbow payoff family and its analytic strike derivatives.

The payoff takes per-asset strikes ``kbar`` and an outer strike ``k``:

    finite p:  ((sum_i ((x_i - kbar_i)^+)^p)^(1/p) - k)^+
    p = inf:   (max_i (x_i - kbar_i)^+ - k)^+

Large finite exponents are evaluated with max-factoring so the inner sum
never overflows (p up to a few hundred is routine).  The one-sided and
directional derivative helpers return the analytic indicator values and
refuse, rather than guess, on their measure-zero undefined sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, UndefinedOnDiagonal, UndefinedOnLevelSet

INFINITY = math.inf


def validate_pnorm(p) -> float:
    """Coerce and check a payoff exponent: finite positive, or INFINITY."""
    p = float(p)
    if math.isnan(p) or p <= 0.0:
        raise ValueError(f"payoff exponent must be positive or INFINITY, got {p}")
    return p


@dataclass(frozen=True)
class StrikeSpec:
    """Per-asset strikes plus the outer strike of the rainbow payoff."""

    component_strikes: tuple
    outer_strike: float = 0.0

    def __post_init__(self):
        comps = tuple(float(v) for v in self.component_strikes)
        if len(comps) == 0:
            raise ValueError("component_strikes must be non-empty")
        if any(not math.isfinite(v) or v < 0.0 for v in comps):
            raise ValueError("component strikes must be finite and nonnegative")
        outer = float(self.outer_strike)
        if not math.isfinite(outer) or outer < 0.0:
            raise ValueError("outer strike must be finite and nonnegative")
        object.__setattr__(self, "component_strikes", comps)
        object.__setattr__(self, "outer_strike", outer)

    @property
    def dimension(self) -> int:
        return len(self.component_strikes)

    @property
    def kbar(self) -> np.ndarray:
        return np.asarray(self.component_strikes, dtype=float)


def _check_dim(x, strikes: StrikeSpec) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[-1] != strikes.dimension:
        raise DimensionMismatch(
            f"point has dimension {x.shape[-1]}, strikes have {strikes.dimension}"
        )
    return x


def eval_payoff_many(points, strikes: StrikeSpec, p) -> np.ndarray:
    """Vectorized payoff over rows of ``points`` (shape (count, n))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != strikes.dimension:
        raise DimensionMismatch(
            f"points have dimension {pts.shape[1]}, strikes have {strikes.dimension}"
        )
    p = validate_pnorm(p)
    if p == INFINITY:
        return _kernels.payoff_max(pts, strikes.kbar, strikes.outer_strike)
    return _kernels.payoff_lp(pts, strikes.kbar, strikes.outer_strike, p)


def eval_payoff(x, strikes: StrikeSpec, p) -> float:
    """Payoff at a single point ``x`` in R+^n."""
    x = _check_dim(x, strikes)
    return float(eval_payoff_many(x[None, :], strikes, p)[0])


def payoff_right_derivative_in_kj(x, strikes: StrikeSpec, j: int) -> float:
    """Right derivative of the p=1, zero-outer-strike payoff in strike j.

    Equals -1 on the closed event {x_j >= kbar_j} and 0 otherwise.
    ``j`` is a 0-based coordinate index.
    """
    x = _check_dim(x, strikes)
    if strikes.outer_strike != 0.0:
        raise ValueError("right strike derivative requires outer_strike == 0")
    return -1.0 if x[j] >= strikes.component_strikes[j] else 0.0


def payoff_directional_derivative_ones(x, strikes: StrikeSpec) -> float:
    """Derivative of the max-payoff (p=inf, outer strike 0) along ones in kbar.

    Equals -1 when any coordinate exceeds its strike, 0 when all fall below.
    Undefined (raises) when some coordinate sits exactly on its strike.
    """
    x = _check_dim(x, strikes)
    if strikes.outer_strike != 0.0:
        raise ValueError("directional derivative requires outer_strike == 0")
    kbar = strikes.kbar
    if np.any(x == kbar):
        raise UndefinedOnDiagonal("some coordinate equals its strike")
    return -1.0 if np.any(x > kbar) else 0.0


def payoff_k_derivative(x, strikes: StrikeSpec, p) -> float:
    """Derivative of the payoff in the outer strike.

    Equals -1 where the zero-outer-strike payoff exceeds the outer strike,
    0 where it falls short; undefined exactly on the level set.
    """
    x = _check_dim(x, strikes)
    p = validate_pnorm(p)
    base = eval_payoff(x, StrikeSpec(strikes.component_strikes, 0.0), p)
    if base == strikes.outer_strike:
        raise UndefinedOnLevelSet(
            f"payoff value {base} equals the outer strike"
        )
    return -1.0 if base > strikes.outer_strike else 0.0
