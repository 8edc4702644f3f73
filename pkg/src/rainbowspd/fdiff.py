"""Finite-difference operators for high-order mixed partials of price functions.

Central tensor-product stencils (2 nodes per differentiated coordinate) with
Richardson extrapolation over halved steps; one-sided quotients along a
halving sequence for right derivatives at kinks, where extrapolation is not
admissible; and a shrink-sequence limit operator for outer-strike limits.
Every operator returns the extrapolated value together with an error
estimate, because downstream consumers compose several of these and must
propagate uncertainty honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import NonFiniteEvaluation, NoStabilization, StencilOutOfDomain


@dataclass(frozen=True)
class DiffSpec:
    """Which partial to take and how.

    ``orders`` holds one 0/1 flag per coordinate (total order >= 1); the
    ``right`` scheme is only admissible for a single first derivative.
    ``base_step`` is a scalar or per-coordinate sequence; Richardson halves
    it ``richardson_levels`` times.  ``stabilization_tol`` and
    ``max_halvings`` control one-sided quotient settling.
    """

    orders: tuple
    scheme: str = "central"
    base_step: float | tuple = 1e-2
    richardson_levels: int = 2
    stabilization_tol: float = 1e-4
    max_halvings: int = 30

    def __post_init__(self):
        orders = tuple(int(o) for o in self.orders)
        if any(o not in (0, 1) for o in orders):
            raise ValueError("orders entries must be 0 or 1")
        if sum(orders) < 1:
            raise ValueError("total derivative order must be >= 1")
        if self.scheme not in ("central", "right"):
            raise ValueError("scheme must be 'central' or 'right'")
        if self.scheme == "right" and sum(orders) != 1:
            raise ValueError("right scheme only supports single first derivatives")
        steps = np.atleast_1d(np.asarray(self.base_step, dtype=float))
        if np.any(steps <= 0.0):
            raise ValueError("base_step must be positive")
        if self.richardson_levels < 0:
            raise ValueError("richardson_levels must be >= 0")
        object.__setattr__(self, "orders", orders)

    def steps_for(self, dim: int) -> np.ndarray:
        steps = np.atleast_1d(np.asarray(self.base_step, dtype=float))
        if steps.size == 1:
            return np.full(dim, float(steps[0]))
        if steps.size != dim:
            raise ValueError(f"base_step has {steps.size} entries for {dim} coordinates")
        return steps.astype(float)


@dataclass(frozen=True)
class LimitSpec:
    """Shrink sequence for outer-strike limits, with optional extrapolation."""

    shrink_sequence: tuple
    extrapolation: str = "linear-in-k"

    def __post_init__(self):
        seq = tuple(float(v) for v in self.shrink_sequence)
        if len(seq) == 0 or any(v <= 0.0 for v in seq):
            raise ValueError("shrink sequence must be positive")
        if any(b >= a for a, b in zip(seq[:-1], seq[1:])):
            raise ValueError("shrink sequence must be strictly decreasing")
        if self.extrapolation not in ("none", "linear-in-k"):
            raise ValueError("extrapolation must be 'none' or 'linear-in-k'")
        object.__setattr__(self, "shrink_sequence", seq)

    @classmethod
    def geometric(cls, scale: float, first_fraction=0.1, ratio=0.5, count=6, extrapolation="linear-in-k"):
        first = first_fraction * scale
        seq = tuple(first * ratio**m for m in range(count))
        return cls(seq, extrapolation)


@dataclass(frozen=True)
class DiffResult:
    value: float
    error_estimate: float
    evaluations: int


def _eval(f, node) -> float:
    v = float(f(node))
    if not math.isfinite(v):
        raise NonFiniteEvaluation(f"f({node}) = {v}")
    return v


def _check_domain(nodes, domain):
    if domain is None:
        return
    lo, hi = domain
    for node in nodes:
        if (lo is not None and np.any(node < lo)) or (
            hi is not None and np.any(node > hi)
        ):
            raise StencilOutOfDomain(f"stencil node {node} outside domain")


def _richardson(levels: list[float]) -> tuple[float, float]:
    """Extrapolate central-difference values computed at h, h/2, h/4, ...

    Error expansion is in even powers of h, so each Richardson column gains
    a factor 4 in order.  Returns the table diagonal and the gap between its
    last two entries (nan with a single level).
    """
    diag = [levels[0]]
    prev = [levels[0]]
    for m in range(1, len(levels)):
        row = [levels[m]]
        for j in range(1, m + 1):
            fac = 4.0**j
            row.append((fac * row[j - 1] - prev[j - 1]) / (fac - 1.0))
        diag.append(row[-1])
        prev = row
    if len(diag) == 1:
        return diag[0], math.nan
    return diag[-1], abs(diag[-1] - diag[-2])


def mixed_partial(f, point, spec: DiffSpec, domain=None) -> DiffResult:
    """Mixed partial of total order sum(spec.orders) by central differences."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    steps = spec.steps_for(point.size)
    idx = [i for i, o in enumerate(spec.orders) if o == 1]
    if len(spec.orders) != point.size:
        raise ValueError("orders length must match point dimension")
    k = len(idx)
    h0 = steps[idx]

    # widest stencil (base level) determines the domain requirement
    widest = []
    for signs in product((-1.0, 1.0), repeat=k):
        node = point.copy()
        node[idx] += np.asarray(signs) * h0 / 2.0
        widest.append(node)
    _check_domain(widest, domain)

    evals = 0
    levels = []
    for m in range(spec.richardson_levels + 1):
        h = h0 / 2.0**m
        acc = 0.0
        for signs in product((-1.0, 1.0), repeat=k):
            node = point.copy()
            node[idx] += np.asarray(signs) * h / 2.0
            acc += math.prod(signs) * _eval(f, node)
            evals += 1
        levels.append(acc / float(np.prod(h)))
    value, err = _richardson(levels)
    return DiffResult(value, err, evals)


def directional_derivative(f, point, direction, spec: DiffSpec, domain=None) -> DiffResult:
    """Derivative along ``direction`` by central differences with Richardson."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    direction = np.atleast_1d(np.asarray(direction, dtype=float))
    if direction.size != point.size:
        raise ValueError("direction length must match point dimension")
    if not np.any(direction != 0.0):
        raise ValueError("direction must be nonzero")
    h0 = float(np.min(spec.steps_for(point.size)))
    _check_domain([point - 0.5 * h0 * direction, point + 0.5 * h0 * direction], domain)
    evals = 0
    levels = []
    for m in range(spec.richardson_levels + 1):
        h = h0 / 2.0**m
        hi = _eval(f, point + 0.5 * h * direction)
        lo = _eval(f, point - 0.5 * h * direction)
        evals += 2
        levels.append((hi - lo) / h)
    value, err = _richardson(levels)
    return DiffResult(value, err, evals)


def right_derivative(f, point, j: int, spec: DiffSpec) -> DiffResult:
    """One-sided (from above) derivative in coordinate ``j``.

    Halves the step until two consecutive quotients agree within
    ``stabilization_tol``; kinked functions settle immediately because the
    quotient is exactly constant on the smooth side.  No extrapolation is
    applied -- right derivatives at kinks do not admit it.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    base = _eval(f, point)
    h = float(spec.steps_for(point.size)[j])
    prev = None
    evals = 1
    for _ in range(spec.max_halvings):
        node = point.copy()
        node[j] += h
        q = (_eval(f, node) - base) / h
        evals += 1
        if prev is not None and abs(q - prev) <= spec.stabilization_tol:
            return DiffResult(q, abs(q - prev), evals)
        prev = q
        h *= 0.5
        if h < 1e-14 * max(1.0, abs(point[j])):
            break
    raise NoStabilization(
        f"one-sided quotients did not settle within {spec.stabilization_tol}"
    )


def limit_to_zero(g, spec: LimitSpec) -> DiffResult:
    """Limit of g(K) as K -> 0+ along the shrink sequence."""
    seq = spec.shrink_sequence
    vals = [_eval(g, k) for k in seq]
    if len(vals) == 1:
        return DiffResult(vals[0], math.nan, 1)
    increment = abs(vals[-1] - vals[-2])
    if spec.extrapolation == "none":
        return DiffResult(vals[-1], increment, len(vals))
    ka, kb = seq[-2], seq[-1]
    ga, gb = vals[-2], vals[-1]
    value = (gb * ka - ga * kb) / (ka - kb)
    return DiffResult(value, increment, len(vals))
