"""Rainbow option pricing by quadrature or common-random-number Monte Carlo.

Monte Carlo prices for a fixed (law, sample count, seed descriptor) reuse the
identical sample across strikes -- a hard contract that makes bump-and-
revalue finite differences of Monte Carlo prices usable at all.  Quadrature
prices are deterministic and smooth in the strikes (see quadrature.py), which
is what the recovery formulas differentiate.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import DimensionMismatch
from .models import PointMass, TerminalLaw
from .payoffs import INFINITY, StrikeSpec, eval_payoff, eval_payoff_many, validate_pnorm

_METHODS = ("quadrature", "monte-carlo")


@dataclass(frozen=True)
class PricerConfig:
    """Numerical controls for the pricing backends."""

    method: str = "quadrature"
    nodes_per_dim: int = 64
    truncation_tail_mass: float = 1e-7
    mc_samples: int = 1_000_000
    seed_descriptor: str = "pricer-default"

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.nodes_per_dim < 8:
            raise ValueError("nodes_per_dim must be >= 8")
        if self.mc_samples < 1_000:
            raise ValueError("mc_samples must be >= 1000")
        if not 0.0 < self.truncation_tail_mass <= 1e-3:
            raise ValueError("truncation_tail_mass must lie in (0, 1e-3]")


@dataclass(frozen=True)
class PriceEstimate:
    """A price with an attached error bound.

    ``error_bound`` is a 3-sigma statistical bound for Monte Carlo, an
    absolute cubature estimate (refinement gap + truncation tail) for
    quadrature, and 0 for closed-form atom evaluation.
    """

    value: float
    error_bound: float
    method: str
    diagnostics: dict = field(default_factory=dict)


# Monte Carlo samples are cached so that every strike bump reuses the same
# draws (common random numbers) and repeated pricing is cheap.
_sample_lock = threading.Lock()
_sample_cache: dict[tuple, tuple] = {}
_SAMPLE_CACHE_MAX = 8


def _crn_sample(law: TerminalLaw, count: int, seed_descriptor: str):
    key = (law.digest(), int(count), str(seed_descriptor))
    with _sample_lock:
        hit = _sample_cache.get(key)
    if hit is not None:
        return hit
    sample = law.sample(count, seed_descriptor)
    entry = (sample.points, sample.digest())
    with _sample_lock:
        if len(_sample_cache) >= _SAMPLE_CACHE_MAX:
            _sample_cache.pop(next(iter(_sample_cache)))
        _sample_cache[key] = entry
    return entry


def _check_dims(law: TerminalLaw, strikes: StrikeSpec):
    if law.dimension != strikes.dimension:
        raise DimensionMismatch(
            f"law dimension {law.dimension} != strikes dimension {strikes.dimension}"
        )


def price(law: TerminalLaw, strikes: StrikeSpec, p, cfg: PricerConfig | None = None) -> PriceEstimate:
    """E_Q[payoff(X, strikes, p)] with an error bound."""
    cfg = cfg or PricerConfig()
    _check_dims(law, strikes)
    p = validate_pnorm(p)
    if isinstance(law, PointMass):
        value = eval_payoff(law.atom, strikes, p)
        return PriceEstimate(value, 0.0, "closed-form", {"atom": law.atom.tolist()})
    if cfg.method == "quadrature" and law.dimension <= 3:
        value, err, info = quadrature.price_quadrature(
            law, strikes, p, cfg.nodes_per_dim, cfg.truncation_tail_mass
        )
        return PriceEstimate(value, err, "quadrature", info)
    # Monte Carlo path: explicit request, or quadrature unavailable in n >= 4.
    points, digest = _crn_sample(law, cfg.mc_samples, cfg.seed_descriptor)
    vals = eval_payoff_many(points, strikes, p)
    value = float(vals.mean())
    std = float(vals.std(ddof=1))
    err = 3.0 * std / math.sqrt(vals.size)
    diag = {
        "sample_count": int(vals.size),
        "seed_descriptor": str(cfg.seed_descriptor),
        "sample_digest": digest,
    }
    if cfg.method == "quadrature":
        diag["note"] = "quadrature unsupported for n >= 4; fell back to monte-carlo"
    return PriceEstimate(max(value, 0.0), err, "monte-carlo", diag)


def digital_joint_price(law: TerminalLaw, k, cfg: PricerConfig | None = None) -> PriceEstimate:
    """Estimate Q(all X_j <= k_j) with the pricing machinery."""
    cfg = cfg or PricerConfig()
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size != law.dimension:
        raise DimensionMismatch(f"k has dimension {k.size}, law has {law.dimension}")
    if isinstance(law, PointMass):
        value = law.joint_cdf(k)
        return PriceEstimate(value, 0.0, "closed-form", {"atom": law.atom.tolist()})
    if cfg.method == "quadrature" and law.dimension <= 3:
        value, err, info = quadrature.digital_quadrature(
            law, k, cfg.nodes_per_dim, cfg.truncation_tail_mass
        )
        return PriceEstimate(value, err, "quadrature", info)
    points, digest = _crn_sample(law, cfg.mc_samples, cfg.seed_descriptor)
    hits = np.all(points <= k, axis=1)
    value = float(hits.mean())
    n = hits.size
    err = 3.0 * math.sqrt(max(value * (1.0 - value), 1.0 / n) / n)
    return PriceEstimate(
        value,
        err,
        "monte-carlo",
        {"sample_count": int(n), "seed_descriptor": str(cfg.seed_descriptor), "sample_digest": digest},
    )


@dataclass(frozen=True)
class PriceLimitResult:
    """Prices along an exponent ladder plus the directly priced limit."""

    exponents: tuple
    prices: tuple
    direct_infinity: PriceEstimate
    tail_deviation: float

    @property
    def deviations(self):
        return tuple(
            abs(est.value - self.direct_infinity.value) for est in self.prices
        )


def price_limit_p_to_infinity(
    law: TerminalLaw, strikes: StrikeSpec, cfg: PricerConfig | None = None, p_sequence=(1, 2, 4, 8, 16, 32, 64, 128)
) -> PriceLimitResult:
    """Price V^p along an increasing exponent ladder and compare with p = inf.

    ``tail_deviation`` is the largest gap |V^p - V^inf| over ladder entries
    with p >= 64 (the ladder must reach at least 64).
    """
    seq = tuple(float(p) for p in p_sequence)
    if len(seq) == 0 or any(b <= a for a, b in zip(seq[:-1], seq[1:])):
        raise ValueError("p_sequence must be strictly increasing")
    if seq[-1] < 64:
        raise ValueError("p_sequence must reach at least 64")
    cfg = cfg or PricerConfig()
    estimates = tuple(price(law, strikes, p, cfg) for p in seq)
    direct = price(law, strikes, INFINITY, cfg)
    tail = max(
        abs(est.value - direct.value) for est, p in zip(estimates, seq) if p >= 64
    )
    return PriceLimitResult(seq, estimates, direct, float(tail))
