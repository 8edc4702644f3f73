"""State-price density recovery by differentiating option prices.

Four routes are implemented, named by their formula tags:

    main            n mixed strike partials of the summed first partials of
                    the max-payoff price at zero outer strike
    cp              outer-strike limit of the (n+1)-order mixed partial of
                    the finite-p (or max) payoff price
    cdf             n mixed partials of the joint CDF (reference route; no
                    payoff kinks, so it carries the tightest tolerance)
    n2-alternative  two-asset route through the joint survival probability

plus ladder recovery of marginal survival probabilities, the sum
decomposition identity check, and one-dimensional pricing through a
recovered second-derivative density.

All density routes require deterministic prices: finite differences of
total order >= 2 amplify Monte Carlo noise beyond repair, so Monte Carlo
pricer configs are rejected up front.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import fdiff, quadrature
from .errors import (
    DimensionNotTwo,
    MonteCarloUnsupported,
    NonFiniteEvaluation,
    NotAbsolutelyContinuous,
    StencilOutOfDomain,
)
from .fdiff import DiffSpec, LimitSpec
from .models import TerminalLaw
from .payoffs import INFINITY, StrikeSpec, validate_pnorm
from .pricers import PricerConfig, digital_joint_price, price

FORMULA_TAGS = ("main", "cp", "cdf", "n2-alternative")


def make_grid_axes(lo, hi, shape):
    """Rectangular lattice axes from per-coordinate bounds and counts."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    shape = [int(s) for s in np.atleast_1d(shape)]
    if not (lo.size == hi.size == len(shape)):
        raise ValueError("lo, hi and shape must have equal length")
    if any(s < 1 for s in shape):
        raise ValueError("grid shape entries must be >= 1")
    return tuple(np.linspace(a, b, s) for a, b, s in zip(lo, hi, shape))


def _lattice(axes) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _grid_mass(axes, values) -> float:
    acc = np.asarray(values, dtype=float)
    for j in range(len(axes) - 1, -1, -1):
        acc = np.trapezoid(acc, axes[j], axis=j)
    return float(acc)


@dataclass
class DensityGrid:
    """Recovered density values on a rectangular lattice with diagnostics."""

    axes: tuple
    values: np.ndarray
    per_point_error: np.ndarray
    formula_tag: str

    @property
    def shape(self):
        return tuple(a.size for a in self.axes)

    def lattice_points(self) -> np.ndarray:
        return _lattice(self.axes)

    @property
    def negativity_report(self) -> dict:
        neg = self.values[self.values < 0.0]
        return {
            "count": int(neg.size),
            "worst": float(-neg.min()) if neg.size else 0.0,
        }

    def to_dict(self) -> dict:
        return {
            "axes": [a.tolist() for a in self.axes],
            "values": self.values.tolist(),
            "per_point_error": self.per_point_error.tolist(),
            "formula_tag": self.formula_tag,
            "negativity_report": self.negativity_report,
        }


@dataclass
class RecoveryReport:
    """A recovered grid plus oracle comparison and bookkeeping."""

    density_grid: DensityGrid
    oracle_comparison: dict | None
    mass: float
    diagnostics: dict = field(default_factory=dict)
    runtime_seconds: float | None = None
    oracle_values: np.ndarray | None = None

    def to_dict(self, include_runtime: bool = False) -> dict:
        doc = {
            "density_grid": self.density_grid.to_dict(),
            "oracle_comparison": self.oracle_comparison,
            "mass": self.mass,
            "diagnostics": self.diagnostics,
        }
        if self.oracle_values is not None:
            doc["oracle_values"] = self.oracle_values.tolist()
        if include_runtime and self.runtime_seconds is not None:
            doc["runtime_seconds"] = self.runtime_seconds
        return doc

    def csv_rows(self):
        """Rows (K_1, ..., K_n, recovered, analytic, error, formula_tag)."""
        pts = self.density_grid.lattice_points()
        rec = self.density_grid.values.ravel()
        err = self.density_grid.per_point_error.ravel()
        analytic = (
            self.oracle_values.ravel()
            if self.oracle_values is not None
            else np.full(rec.size, math.nan)
        )
        for i in range(rec.size):
            yield (
                *pts[i].tolist(),
                float(rec[i]),
                float(analytic[i]),
                float(err[i]),
                self.density_grid.formula_tag,
            )


class _Tracker:
    """Accumulates the worst error bound, the value scale and the count."""

    def __init__(self):
        self.worst = 0.0
        self.scale = 0.0
        self.count = 0

    def note(self, bound: float, value: float = 0.0):
        self.worst = max(self.worst, bound)
        self.scale = max(self.scale, abs(value))
        self.count += 1

    @property
    def jitter(self) -> float:
        """Incoherent evaluation noise: rounding on the observed value scale.

        The systematic parts of a quadrature error bound (truncation tail,
        refinement gap) vary smoothly with the strikes and essentially cancel
        in difference stencils; only rounding-level jitter amplifies at the
        full 1/h^k rate, so that is what stencil amplification is applied to.
        """
        return 5e-15 * (1.0 + self.scale)


def _truncation_density_bias(law: TerminalLaw, cfg: PricerConfig) -> float:
    """Density-scale bias from integrating over a truncated box.

    Differentiating a price moves payoff kink surfaces; their intersection
    with the neglected tail region contributes on the order of the density at
    the box boundary.  Zero for laws whose support the box covers exactly.
    """
    if law.support_upper() is not None:
        return 0.0
    lo, hi = quadrature.truncation_box(law, cfg.truncation_tail_mass)
    n = law.dimension
    corners = []
    center = 0.5 * (lo + hi)
    for j in range(n):
        for edge in (lo[j], hi[j]):
            pt = center.copy()
            pt[j] = edge
            corners.append(pt)
    worst = float(np.max(law.density_many(np.asarray(corners))))
    return 4.0 * n * worst


def _require_recoverable(law: TerminalLaw, cfg: PricerConfig):
    if not law.absolutely_continuous:
        raise NotAbsolutelyContinuous(f"{law.kind} law has no density to recover")
    if cfg.method == "monte-carlo":
        raise MonteCarloUnsupported(
            "density recovery differentiates prices at total order >= 2; "
            "Monte Carlo noise amplification makes this unsupported"
        )
    if law.dimension > 3:
        raise MonteCarloUnsupported(
            "deterministic pricing (and hence recovery) supports n <= 3"
        )


def _default_diff(axes, richardson_levels=2) -> DiffSpec:
    scale = np.array([max(abs(a).max(), 1e-8) for a in axes])
    return DiffSpec(
        orders=(1,) * len(axes),
        base_step=tuple(0.01 * scale),
        richardson_levels=richardson_levels,
    )


def _default_limit(axes) -> LimitSpec:
    scale = float(np.mean([abs(a).mean() for a in axes]))
    return LimitSpec.geometric(max(scale, 1e-8))


def _check_margins(law, cfg, axes, margin):
    lo, hi = quadrature.truncation_box(law, cfg.truncation_tail_mass)
    margin = np.asarray(margin, dtype=float)
    for j, a in enumerate(axes):
        if a[0] < lo[j] + margin[j] or a[-1] > hi[j] - margin[j]:
            raise StencilOutOfDomain(
                f"grid axis {j} spans [{a[0]}, {a[-1]}] but must stay inside "
                f"[{lo[j] + margin[j]}, {hi[j] - margin[j]}] "
                "(truncation box shrunk by the stencil radius)"
            )


def _finalize(law, axes, values, errors, tag, diagnostics, t0) -> RecoveryReport:
    shape = tuple(a.size for a in axes)
    grid = DensityGrid(
        axes=tuple(axes),
        values=values.reshape(shape),
        per_point_error=errors.reshape(shape),
        formula_tag=tag,
    )
    oracle = law.density_many(_lattice(axes)).reshape(shape)
    comparison = {
        "linf": float(np.max(np.abs(grid.values - oracle))),
        "l1": float(np.mean(np.abs(grid.values - oracle))),
    }
    return RecoveryReport(
        density_grid=grid,
        oracle_comparison=comparison,
        mass=_grid_mass(axes, grid.values),
        diagnostics=diagnostics,
        runtime_seconds=time.perf_counter() - t0,
        oracle_values=oracle,
    )


def recover_density_main(
    law: TerminalLaw,
    axes,
    pricer_cfg: PricerConfig | None = None,
    diff_spec: DiffSpec | None = None,
    operator_order: str = "sum-then-mixed",
) -> RecoveryReport:
    """Density via n mixed partials of the summed strike partials of the
    max-payoff price at zero outer strike.

    The inner sum of partials is evaluated as a directional derivative along
    the all-ones direction.  ``operator_order`` defaults to applying the
    directional derivative first; ``mixed-then-sum`` composes the operators
    the other way around, exposed for conditioning diagnostics only.
    """
    t0 = time.perf_counter()
    cfg = pricer_cfg or PricerConfig()
    _require_recoverable(law, cfg)
    if operator_order not in ("sum-then-mixed", "mixed-then-sum"):
        raise ValueError("operator_order must be 'sum-then-mixed' or 'mixed-then-sum'")
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    n = law.dimension
    spec = diff_spec or _default_diff(axes)
    steps = spec.steps_for(n)
    h_inner = float(np.min(steps))
    _check_margins(law, cfg, axes, 0.5 * (steps + h_inner))

    prices = _Tracker()
    ones = np.ones(n)
    bias = _truncation_density_bias(law, cfg)

    def v_inf(kbar):
        est = price(law, StrikeSpec(tuple(kbar), 0.0), INFINITY, cfg)
        prices.note(est.error_bound, est.value)
        return est.value

    inner_spec = DiffSpec(
        orders=(1,) * n, base_step=h_inner, richardson_levels=spec.richardson_levels
    )
    pts = _lattice(axes)
    values = np.empty(pts.shape[0])
    errors = np.empty(pts.shape[0])
    h_fin = steps / 2.0**spec.richardson_levels
    amp_outer = 2.0**n / float(np.prod(h_fin))
    amp_inner = 2.0 / (h_inner / 2.0**spec.richardson_levels)
    for i, pt in enumerate(pts):
        inner_gaps = _Tracker()
        if operator_order == "sum-then-mixed":

            def summed(kbar):
                res = fdiff.directional_derivative(v_inf, kbar, ones, inner_spec)
                inner_gaps.note(0.0 if math.isnan(res.error_estimate) else res.error_estimate)
                return res.value

            res = fdiff.mixed_partial(summed, pt, spec)
        else:

            def mixed(kbar):
                r = fdiff.mixed_partial(v_inf, kbar, spec)
                inner_gaps.note(0.0 if math.isnan(r.error_estimate) else r.error_estimate)
                return r.value

            res = fdiff.directional_derivative(mixed, pt, ones, inner_spec)
        values[i] = res.value
        gap = 0.0 if math.isnan(res.error_estimate) else res.error_estimate
        errors[i] = (
            gap
            + amp_outer * inner_gaps.worst
            + amp_outer * amp_inner * prices.jitter
            + bias
        )
    diagnostics = {
        "formula": "main",
        "operator_order": operator_order,
        "price_evaluations": prices.count,
        "pricer_method": cfg.method,
        "worst_price_error_bound": prices.worst,
    }
    return _finalize(law, axes, values, errors, "main", diagnostics, t0)


def recover_density_cp(
    law: TerminalLaw,
    axes,
    p=1.0,
    pricer_cfg: PricerConfig | None = None,
    diff_spec: DiffSpec | None = None,
    limit_spec: LimitSpec | None = None,
) -> RecoveryReport:
    """Density via the outer-strike limit of the (n+1)-order mixed partial.

    For each outer strike K in the shrink sequence the mixed partial in all
    strike coordinates plus K is formed; the sequence is then extrapolated
    to K -> 0+.  Valid for any exponent p in (0, inf]; the recovered grid is
    p-invariant up to numerical error.
    """
    t0 = time.perf_counter()
    cfg = pricer_cfg or PricerConfig()
    _require_recoverable(law, cfg)
    p = validate_pnorm(p)
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    n = law.dimension
    spec = diff_spec or _default_diff(axes)
    steps = spec.steps_for(n)
    _check_margins(law, cfg, axes, 0.5 * steps)
    limit = limit_spec or _default_limit(axes)

    prices = _Tracker()
    bias = _truncation_density_bias(law, cfg)

    def v_of(vec):
        est = price(law, StrikeSpec(tuple(vec[:n]), float(vec[n])), p, cfg)
        prices.note(est.error_bound, est.value)
        return est.value

    pts = _lattice(axes)
    values = np.empty(pts.shape[0])
    errors = np.empty(pts.shape[0])
    base_k_step = float(np.min(steps))
    for i, pt in enumerate(pts):
        gaps = _Tracker()

        def mixed_at(k_outer):
            h_k = min(base_k_step, k_outer)  # stencil must keep K > 0
            full_spec = DiffSpec(
                orders=(1,) * (n + 1),
                base_step=(*steps, h_k),
                richardson_levels=spec.richardson_levels,
            )
            res = fdiff.mixed_partial(v_of, np.append(pt, k_outer), full_spec)
            gaps.note(0.0 if math.isnan(res.error_estimate) else res.error_estimate)
            return res.value

        lim = fdiff.limit_to_zero(mixed_at, limit)
        values[i] = lim.value
        h_fin = np.append(steps, min(base_k_step, limit.shrink_sequence[-1]))
        h_fin = h_fin / 2.0**spec.richardson_levels
        amp = 2.0 ** (n + 1) / float(np.prod(h_fin))
        lim_err = 0.0 if math.isnan(lim.error_estimate) else lim.error_estimate
        errors[i] = lim_err + gaps.worst + amp * prices.jitter + bias
    diagnostics = {
        "formula": "cp",
        "p": p,
        "price_evaluations": prices.count,
        "pricer_method": cfg.method,
        "shrink_sequence": list(limit.shrink_sequence),
        "worst_price_error_bound": prices.worst,
    }
    return _finalize(law, axes, values, errors, "cp", diagnostics, t0)


def recover_density_cdf(
    law: TerminalLaw,
    axes,
    pricer_cfg: PricerConfig | None = None,
    diff_spec: DiffSpec | None = None,
    source: str = "analytic",
) -> RecoveryReport:
    """Density as the n-order mixed partial of the joint CDF.

    ``source='analytic'`` differentiates the law's own CDF (reference route);
    ``source='digital'`` differentiates digital prices produced by the
    pricing machinery, cross-checking the two.
    """
    t0 = time.perf_counter()
    cfg = pricer_cfg or PricerConfig()
    if source not in ("analytic", "digital"):
        raise ValueError("source must be 'analytic' or 'digital'")
    if not law.absolutely_continuous:
        raise NotAbsolutelyContinuous(f"{law.kind} law has no density to recover")
    if source == "digital" and cfg.method == "monte-carlo":
        raise MonteCarloUnsupported(
            "digital-price CDF recovery needs deterministic prices"
        )
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    n = law.dimension
    spec = diff_spec or _default_diff(axes)
    steps = spec.steps_for(n)
    _check_margins(law, cfg, axes, 0.5 * steps)

    src = _Tracker()
    if source == "analytic":

        def f_cdf(k):
            val, err = law.joint_cdf_with_error(k)
            src.note(err, val)
            return val

    else:

        def f_cdf(k):
            est = digital_joint_price(law, k, cfg)
            src.note(est.error_bound, est.value)
            return est.value

    pts = _lattice(axes)
    values = np.empty(pts.shape[0])
    errors = np.empty(pts.shape[0])
    h_fin = steps / 2.0**spec.richardson_levels
    amp = 2.0**n / float(np.prod(h_fin))
    for i, pt in enumerate(pts):
        res = fdiff.mixed_partial(f_cdf, pt, spec)
        values[i] = res.value
        gap = 0.0 if math.isnan(res.error_estimate) else res.error_estimate
        # src.worst is a smooth bias; 100x allows for its strike derivatives
        errors[i] = gap + amp * src.jitter + 100.0 * src.worst
    diagnostics = {
        "formula": "cdf",
        "source": source,
        "cdf_evaluations": src.count,
        "worst_source_error_bound": src.worst,
    }
    return _finalize(law, axes, values, errors, "cdf", diagnostics, t0)


def recover_density_n2_alternative(
    law: TerminalLaw,
    axes,
    pricer_cfg: PricerConfig | None = None,
    diff_spec: DiffSpec | None = None,
    limit_spec: LimitSpec | None = None,
) -> RecoveryReport:
    """Two-asset density route through the joint survival probability.

    The inner combination phi = dV/dK1 + dV/dK2 - dV/dK (outer-strike partial
    taken as a K -> 0+ limit) equals minus the joint survival probability
    Q(X1 >= K1, X2 >= K2); the identity is verified against the analytic
    survival at every grid point.  The density is then the mixed partial of
    the joint survival, i.e. of -phi.  (Stated with the inner combination's
    sign as given, the direction form of this identity requires the direction
    (1, 1, -1); the opposite published orientation fails the uniform-box
    ground truth, which fixes the sign used here.)
    """
    t0 = time.perf_counter()
    cfg = pricer_cfg or PricerConfig()
    _require_recoverable(law, cfg)
    if law.dimension != 2:
        raise DimensionNotTwo("the alternative route is specific to n = 2")
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    spec = diff_spec or _default_diff(axes)
    steps = spec.steps_for(2)
    h_inner = float(np.min(steps))
    _check_margins(law, cfg, axes, 0.5 * (steps + h_inner))
    limit = limit_spec or _default_limit(axes)

    prices = _Tracker()
    bias = _truncation_density_bias(law, cfg)

    def v1(kbar, k_outer=0.0):
        est = price(law, StrikeSpec(tuple(kbar), float(k_outer)), 1.0, cfg)
        prices.note(est.error_bound, est.value)
        return est.value

    inner_levels = max(1, spec.richardson_levels - 1)
    part_specs = [
        DiffSpec(orders=(1, 0), base_step=tuple(steps), richardson_levels=inner_levels),
        DiffSpec(orders=(0, 1), base_step=tuple(steps), richardson_levels=inner_levels),
    ]

    def dv_dk(kbar, k_outer):
        h_k = min(h_inner, k_outer)
        return fdiff.mixed_partial(
            lambda vec: v1(vec[:2], vec[2]),
            np.array([kbar[0], kbar[1], k_outer]),
            DiffSpec(orders=(0, 0, 1), base_step=(1.0, 1.0, h_k),
                     richardson_levels=inner_levels),
        )

    def phi(kbar):
        """dV/dK1 + dV/dK2 - dV/dK at K -> 0+; equals minus joint survival."""
        total = 0.0
        for ps in part_specs:
            total += fdiff.mixed_partial(lambda kb: v1(kb), kbar, ps).value
        lim = fdiff.limit_to_zero(lambda k: dv_dk(kbar, k).value, limit)
        return total - lim.value

    pts = _lattice(axes)
    values = np.empty(pts.shape[0])
    errors = np.empty(pts.shape[0])
    direction_values = np.empty(pts.shape[0])
    identity_gaps = np.empty(pts.shape[0])
    h_fin = steps / 2.0**spec.richardson_levels
    amp = 4.0 / float(np.prod(h_fin))
    amp_inner = 2.0 / (h_inner / 2.0**inner_levels)
    for i, pt in enumerate(pts):
        ab_gaps = _Tracker()
        w_gaps = _Tracker()

        # the strike-partial contribution does not depend on the outer strike
        def summed_parts(kb):
            total = 0.0
            for ps in part_specs:
                res = fdiff.mixed_partial(lambda q: v1(q), kb, ps)
                ab_gaps.note(0.0 if math.isnan(res.error_estimate) else res.error_estimate)
                total += res.value
            return total

        d_ab = fdiff.mixed_partial(summed_parts, pt, spec)

        # K-limit applied after the mixed partial, as in the cp route
        def w_at(k_outer):
            res = fdiff.mixed_partial(
                lambda kb: dv_dk(kb, k_outer).value, pt, spec
            )
            w_gaps.note(0.0 if math.isnan(res.error_estimate) else res.error_estimate)
            return res.value

        lim = fdiff.limit_to_zero(w_at, limit)
        values[i] = -d_ab.value + lim.value
        gap = 0.0 if math.isnan(d_ab.error_estimate) else d_ab.error_estimate
        lim_err = 0.0 if math.isnan(lim.error_estimate) else lim.error_estimate
        errors[i] = (
            gap + lim_err + w_gaps.worst + amp * ab_gaps.worst
            + amp * amp_inner * prices.jitter + bias
        )
        direction_values[i] = phi(pt)
        identity_gaps[i] = abs(direction_values[i] - (-law.joint_survival(pt)))
    diagnostics = {
        "formula": "n2-alternative",
        "price_evaluations": prices.count,
        "pricer_method": cfg.method,
        "direction_derivative_values": direction_values.tolist(),
        "survival_identity_gaps": identity_gaps.tolist(),
        "survival_identity_worst_gap": float(identity_gaps.max()),
        "worst_price_error_bound": prices.worst,
    }
    return _finalize(law, axes, values, errors, "n2-alternative", diagnostics, t0)


@dataclass(frozen=True)
class LadderRung:
    strike: float
    recovered: float
    analytic: float
    abs_error: float
    error_estimate: float


def recover_marginal_survival(
    law: TerminalLaw,
    j: int,
    strike_ladder,
    pricer_cfg: PricerConfig | None = None,
    diff_spec: DiffSpec | None = None,
    fixed_strikes=None,
) -> list[LadderRung]:
    """Marginal survival probabilities from right strike-derivatives of V^1.

    The identity holds for any fixed strikes in the other coordinates
    (``fixed_strikes``, default all zeros).
    """
    cfg = pricer_cfg or PricerConfig()
    n = law.dimension
    ladder = [float(k) for k in strike_ladder]
    if any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
        raise ValueError("strike ladder must be strictly increasing")
    base = np.zeros(n) if fixed_strikes is None else np.asarray(fixed_strikes, dtype=float)
    spec = diff_spec or DiffSpec(
        orders=tuple(1 if i == j else 0 for i in range(n)),
        base_step=0.01 * max(abs(ladder[-1]), 1.0),
        richardson_levels=0,
    )

    def v1(kvec):
        return price(law, StrikeSpec(tuple(kvec), 0.0), 1.0, cfg).value

    rows = []
    for k in ladder:
        pt = base.copy()
        pt[j] = k
        res = fdiff.right_derivative(v1, pt, j, spec)
        recovered = -res.value
        analytic = law.marginal_survival(j, k)
        rows.append(
            LadderRung(k, recovered, analytic, abs(recovered - analytic), res.error_estimate)
        )
    return rows


def far_strike(law: TerminalLaw, j: int, quantile: float = 1.0 - 1e-8) -> float:
    """Surrogate for an infinite strike: the support edge when finite,
    otherwise a far marginal quantile."""
    upper = law.support_upper()
    if upper is not None:
        return float(upper[j])
    return float(law.marginal_quantile(j, quantile))


def check_sum_decomposition(
    law: TerminalLaw, kbar, p=INFINITY, pricer_cfg: PricerConfig | None = None
) -> dict:
    """Check that single-asset price limits sum to the p=1 basket price.

    Strikes of the other assets are pushed to ``far_strike``; the residual
    payoff beyond those strikes is bounded by first-moment tails and folded
    into ``tail_bound``.
    """
    cfg = pricer_cfg or PricerConfig()
    p = validate_pnorm(p)
    kbar = np.atleast_1d(np.asarray(kbar, dtype=float))
    n = law.dimension
    far = np.array([far_strike(law, j) for j in range(n)])
    lhs_terms = []
    err = 0.0
    tail = 0.0
    for i in range(n):
        strikes = np.where(np.arange(n) == i, kbar, far)
        est = price(law, StrikeSpec(tuple(strikes), 0.0), p, cfg)
        lhs_terms.append(est.value)
        err += est.error_bound
        tail += sum(law.expected_call(jj, far[jj]) for jj in range(n) if jj != i)
    rhs = price(law, StrikeSpec(tuple(kbar), 0.0), 1.0, cfg)
    err += rhs.error_bound
    gap = abs(sum(lhs_terms) - rhs.value)
    return {
        "lhs": float(sum(lhs_terms)),
        "lhs_terms": [float(v) for v in lhs_terms],
        "rhs": float(rhs.value),
        "gap": float(gap),
        "tail_bound": float(tail),
        "error_bounds": float(err),
        "far_strikes": far.tolist(),
        "passed": bool(gap <= tail + err),
    }


def price_by_density_1d(
    call_price_curve,
    payoff_fn,
    domain,
    fd_step: float = 5e-3,
    num_points: int = 801,
) -> float:
    """Price a payoff against the density recovered from a call price curve.

    The density is the second central strike-difference of the curve,
    integrated against the payoff with the trapezoid rule over ``domain``.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if hi <= lo:
        raise ValueError("domain must be an increasing interval")
    grid = np.linspace(lo, hi, int(num_points))
    h = float(fd_step)

    def c(a):
        v = float(call_price_curve(a))
        if not math.isfinite(v):
            raise NonFiniteEvaluation(f"call curve returned {v} at {a}")
        return v

    dens = np.array([(c(a + h) - 2.0 * c(a) + c(a - h)) / (h * h) for a in grid])
    pays = np.array([float(payoff_fn(a)) for a in grid])
    if not np.all(np.isfinite(pays)):
        raise NonFiniteEvaluation("payoff function returned a non-finite value")
    return float(np.trapezoid(pays * dens, grid))
