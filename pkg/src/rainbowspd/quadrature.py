"""Kink-split Gauss-Legendre quadrature for rainbow option prices.

The integrand density * payoff is piecewise smooth: the payoff kinks on the
coordinate hyperplanes x_i = kbar_i, on the outer-strike level surface, and
(for the max payoff and very large exponents) on the ridge where the leading
asset switches.  In one and two dimensions every kink location is solved in
closed form and integration panels never straddle one, so Gauss-Legendre
converges spectrally and the computed price is a smooth function of the
strikes -- the property the finite-difference recovery layers depend on.
In three dimensions cells are split at coordinate hyperplanes only; with a
zero outer strike that is still exact, otherwise accuracy is reduced and the
embedded error estimate reports it.

Each price is computed twice (full and half node count); the difference plus
an analytic tail bound for the truncated orthant forms the error estimate.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import payoffs
from .errors import QuadratureUnavailable
from .gaussian import leggauss
from .models import PointMass, TerminalLaw

# relative rounding floor for reported quadrature error bounds
_ERR_FLOOR = 1e-13


def truncation_box(law: TerminalLaw, tail_mass: float):
    """Integration box: exact support when bounded, marginal quantiles otherwise."""
    upper = law.support_upper()
    if upper is not None:
        return law.support_lower().copy(), np.asarray(upper, dtype=float)
    n = law.dimension
    lo = np.array([law.marginal_quantile(j, tail_mass) for j in range(n)])
    hi = np.array([law.marginal_quantile(j, 1.0 - tail_mass) for j in range(n)])
    return lo, hi


def payoff_tail_bound(law: TerminalLaw, box, tail_mass: float) -> float:
    """Upper bound on the payoff expectation lost to truncation.

    The complement of the box is covered by 2n half-slabs; on each, the payoff
    is at most sum_i X_i and E[X_i 1_slab] <= E[(X_i - hi_i)^+] + hi_i P(slab).
    Zero when the box covers the full support.
    """
    lo, hi = box
    upper = law.support_upper()
    if upper is not None and np.all(hi >= upper) and np.all(lo <= law.support_lower()):
        return 0.0
    n = law.dimension
    per_slab = sum(
        law.expected_call(i, hi[i]) + hi[i] * tail_mass for i in range(n)
    )
    return float(2 * n * per_slab)


def _gl_panel(lo, hi, nodes):
    """Map Gauss-Legendre nodes to [lo, hi] (arrays broadcast elementwise)."""
    x, w = leggauss(nodes)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    pts = lo[..., None] + half[..., None] * (x + 1.0)
    wts = half[..., None] * w
    return pts, wts


def _split_edges(lo: float, hi: float, cuts) -> np.ndarray:
    interior = sorted({float(c) for c in cuts if lo < c < hi})
    return np.array([lo, *interior, hi])


def _integrand(law, strikes, p):
    def f(points):
        return law.density_many(points) * payoffs.eval_payoff_many(points, strikes, p)

    return f


def _quad_1d(law, strikes, p, box, nodes: int) -> float:
    lo, hi = float(box[0][0]), float(box[1][0])
    k1 = strikes.component_strikes[0]
    edges = _split_edges(lo, hi, [k1, k1 + strikes.outer_strike])
    f = _integrand(law, strikes, p)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        pts, wts = _gl_panel(a, b, nodes)
        total += float(wts @ f(pts[:, None]))
    return total


def _inner_candidates(u1, k2, kout, p):
    """Inner-dimension kink locations as functions of the outer excess u1."""
    cands = [np.full_like(u1, k2), np.full_like(u1, k2 + kout), k2 + u1]
    if p != payoffs.INFINITY and kout > 0.0:
        base = np.maximum(kout**p - u1**p, 0.0)
        cands.append(k2 + base ** (1.0 / p))
    return np.column_stack(cands)


def _outer_breaks(strikes, p, box):
    (lo1, lo2), (hi1, hi2) = box[0], box[1]
    k1, k2 = strikes.component_strikes
    kout = strikes.outer_strike
    breaks = [k1, k1 + kout]
    for edge in (lo2, hi2):
        e = edge - k2
        if e >= 0.0:
            breaks.append(k1 + e)  # ridge crosses the inner edge
            if p != payoffs.INFINITY and kout > 0.0 and e <= kout:
                breaks.append(k1 + (kout**p - e**p) ** (1.0 / p))
    return _split_edges(lo1, hi1, breaks)


def _quad_2d(law, strikes, p, box, nodes: int) -> float:
    lo, hi = box
    kout = strikes.outer_strike
    k1, k2 = strikes.component_strikes
    edges1 = _outer_breaks(strikes, p, box)
    glx, glw = leggauss(nodes)
    all_pts = []
    all_wts = []
    for a, b in zip(edges1[:-1], edges1[1:]):
        if b - a <= 0.0:
            continue
        x1, w1 = _gl_panel(a, b, nodes)
        u1 = np.maximum(x1 - k1, 0.0)
        cands = np.clip(_inner_candidates(u1, k2, kout, p), lo[1], hi[1])
        cands.sort(axis=1)
        edges2 = np.column_stack(
            [np.full_like(x1, lo[1]), cands, np.full_like(x1, hi[1])]
        )
        widths = np.diff(edges2, axis=1)  # (N, panels)
        x2 = edges2[:, :-1, None] + 0.5 * widths[:, :, None] * (glx + 1.0)
        w2 = 0.5 * widths[:, :, None] * glw
        all_wts.append((w1[:, None, None] * w2).ravel())
        all_pts.append(
            np.column_stack(
                [np.broadcast_to(x1[:, None, None], x2.shape).ravel(), x2.ravel()]
            )
        )
    pts = np.concatenate(all_pts, axis=0)
    wts = np.concatenate(all_wts)
    f = _integrand(law, strikes, p)
    return float(wts @ f(pts))


def _quad_3d(law, strikes, p, box, nodes: int) -> float:
    lo, hi = box
    f = _integrand(law, strikes, p)
    per_dim = []
    for j in range(3):
        cuts = [strikes.component_strikes[j]]
        if p != payoffs.INFINITY:
            cuts.append(strikes.component_strikes[j] + strikes.outer_strike)
        edges = _split_edges(lo[j], hi[j], cuts)
        pts, wts = _gl_panel(edges[:-1], edges[1:], nodes)
        per_dim.append((pts.ravel(), wts.ravel()))
    total = 0.0
    x0, w0 = per_dim[0]
    x1, w1 = per_dim[1]
    x2, w2 = per_dim[2]
    # block over the first axis to bound peak memory
    block = max(1, 262144 // (x1.size * x2.size) + 1)
    for start in range(0, x0.size, block):
        xs = x0[start : start + block]
        ws = w0[start : start + block]
        grid = np.stack(
            np.meshgrid(xs, x1, x2, indexing="ij"), axis=-1
        ).reshape(-1, 3)
        wt = (ws[:, None, None] * w1[None, :, None] * w2[None, None, :]).ravel()
        total += float(wt @ f(grid))
    return total


_QUADS = {1: _quad_1d, 2: _quad_2d, 3: _quad_3d}


def price_quadrature(law: TerminalLaw, strikes, p, nodes: int, tail_mass: float):
    """Deterministic price of the rainbow payoff; returns (value, error, info)."""
    if isinstance(law, PointMass) or not law.absolutely_continuous:
        raise QuadratureUnavailable("law has no density to integrate against")
    n = law.dimension
    if n not in _QUADS:
        raise QuadratureUnavailable("deterministic quadrature supports n <= 3")
    box = truncation_box(law, tail_mass)
    quad = _QUADS[n]
    full = quad(law, strikes, p, box, nodes)
    half = quad(law, strikes, p, box, max(nodes // 2, 8))
    tail = payoff_tail_bound(law, box, tail_mass)
    err = abs(full - half) + tail + _ERR_FLOOR * (1.0 + abs(full))
    info = {
        "nodes_per_dim": int(nodes),
        "box_lower": box[0].tolist(),
        "box_upper": box[1].tolist(),
        "refinement_gap": abs(full - half),
        "tail_bound": tail,
    }
    return max(full, 0.0), err, info


def digital_quadrature(law: TerminalLaw, k, nodes: int, tail_mass: float):
    """Q(all X_j <= k_j) by integrating the density over the clipped box."""
    if isinstance(law, PointMass) or not law.absolutely_continuous:
        raise QuadratureUnavailable("law has no density to integrate against")
    n = law.dimension
    if n > 3:
        raise QuadratureUnavailable("deterministic quadrature supports n <= 3")
    lo, hi = truncation_box(law, tail_mass)
    k = np.asarray(k, dtype=float)
    top = np.minimum(k, hi)
    if np.any(top <= lo):
        return 0.0, 2 * n * tail_mass + _ERR_FLOOR, {"nodes_per_dim": nodes}

    def mass(nn):
        per_dim = [_gl_panel(lo[j], top[j], nn) for j in range(n)]
        grids = np.meshgrid(*[pd[0] for pd in per_dim], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        wts = per_dim[0][1]
        for j in range(1, n):
            wts = np.multiply.outer(wts, per_dim[j][1])
        return float(wts.ravel() @ law.density_many(pts))

    full = mass(nodes)
    half = mass(max(nodes // 2, 8))
    err = abs(full - half) + 2 * n * tail_mass + _ERR_FLOOR
    return float(min(max(full, 0.0), 1.0)), err, {"nodes_per_dim": int(nodes)}
