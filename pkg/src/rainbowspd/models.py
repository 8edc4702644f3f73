"""Analytic joint terminal laws: pricing inputs and ground-truth oracles.

Every law exposes density / joint CDF / marginal survival / sampling under a
zero-rate martingale convention (each lognormal marginal has mean equal to
its spot).  Laws are immutable after construction and all operations are
pure, so concurrent evaluation is safe; sampling determinism is anchored to
a seed descriptor string, never to shared generator state.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from . import _kernels, gaussian
from .errors import ConfigError, NotAbsolutelyContinuous


def rng_from_descriptor(descriptor: str) -> np.random.Generator:
    """Deterministic generator derived from a seed descriptor string."""
    digest = hashlib.sha256(str(descriptor).encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 8], "little") for i in range(0, 32, 8)]
    return np.random.default_rng(np.random.SeedSequence(words))


@dataclass(frozen=True)
class Sample:
    """Draws from a terminal law; rows are realizations of the asset vector."""

    points: np.ndarray
    seed_descriptor: str

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.points).tobytes()).hexdigest()


class TerminalLaw:
    """Base class for the terminal asset-price laws."""

    kind = "abstract"
    absolutely_continuous = True

    dimension: int

    # -- density ----------------------------------------------------------
    def density_many(self, points) -> np.ndarray:
        raise NotImplementedError

    def density(self, x) -> float:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return float(self.density_many(pts)[0])

    # -- distribution functions -------------------------------------------
    def joint_cdf_with_error(self, k) -> tuple[float, float]:
        raise NotImplementedError

    def joint_cdf(self, k) -> float:
        return self.joint_cdf_with_error(k)[0]

    def marginal_survival(self, j: int, k: float) -> float:
        raise NotImplementedError

    def marginal_cdf(self, j: int, k: float) -> float:
        return 1.0 - self.marginal_survival(j, k)

    def joint_survival(self, k) -> float:
        """Q(all X_j >= k_j) via inclusion-exclusion over the joint CDF."""
        k = np.asarray(k, dtype=float)
        n = self.dimension
        total = 0.0
        for mask in range(1 << n):
            idx = [j for j in range(n) if mask >> j & 1]
            if not idx:
                total += 1.0
                continue
            if len(idx) == n:
                term = self.joint_cdf(k)
            else:
                # marginalize out coordinates not in idx by sending them high
                kk = np.array([k[j] if j in idx else np.inf for j in range(n)])
                term = self._cdf_allowing_inf(kk)
            total += (-1.0) ** len(idx) * term
        return float(min(max(total, 0.0), 1.0))

    def _cdf_allowing_inf(self, k) -> float:
        hi = self.support_upper()
        k = np.asarray(k, dtype=float)
        if hi is None:
            cap = np.array([self.marginal_quantile(j, 1.0 - 1e-15) for j in range(self.dimension)])
        else:
            cap = np.asarray(hi, dtype=float)
        return self.joint_cdf(np.minimum(k, cap * (1.0 + 1e-9) + 1.0))

    # -- support and moments ------------------------------------------------
    def support_lower(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def support_upper(self):
        """Finite upper support box, or None when unbounded."""
        return None

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    def marginal_quantile(self, j: int, q: float) -> float:
        raise NotImplementedError

    def expected_call(self, j: int, strike: float) -> float:
        """E[(X_j - strike)^+], the one-sided first-moment tail."""
        raise NotImplementedError

    # -- sampling -----------------------------------------------------------
    def sample(self, count: int, seed_descriptor: str) -> Sample:
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = rng_from_descriptor(f"{self.digest()}|{seed_descriptor}")
        return Sample(self._draw(rng, int(count)), str(seed_descriptor))

    def _draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    # -- serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        raise NotImplementedError

    def digest(self) -> str:
        doc = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(doc.encode("utf-8")).hexdigest()

    def box_mass(self, lo, hi) -> float:
        """Q(lo <= X <= hi) via inclusion-exclusion over the joint CDF."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        n = self.dimension
        total = 0.0
        for mask in range(1 << n):
            corner = np.where([mask >> j & 1 for j in range(n)], lo, hi)
            sign = (-1.0) ** bin(mask).count("1")
            total += sign * self.joint_cdf(corner)
        return float(min(max(total, 0.0), 1.0))


class CorrelatedLognormal(TerminalLaw):
    """Joint lognormal with a Gaussian copula and zero-rate martingale drift."""

    kind = "correlated-lognormal"
    absolutely_continuous = True

    def __init__(self, spot, vol, corr=None, maturity=1.0):
        spot = np.atleast_1d(np.asarray(spot, dtype=float))
        vol = np.atleast_1d(np.asarray(vol, dtype=float))
        n = spot.size
        if vol.size != n:
            raise ValueError("spot and vol must have equal length")
        if np.any(spot <= 0.0) or np.any(vol <= 0.0):
            raise ValueError("spot and vol must be strictly positive")
        if corr is None:
            corr = np.eye(n)
        corr = np.asarray(corr, dtype=float)
        if corr.shape != (n, n):
            raise ValueError("correlation matrix has wrong shape")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        maturity = float(maturity)
        if maturity <= 0.0:
            raise ValueError("maturity must be positive")
        try:
            chol = cholesky(corr, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError("correlation matrix must be positive definite") from exc

        self.dimension = n
        self.spot = spot
        self.vol = vol
        self.corr = corr
        self.maturity = maturity
        self.sigma_sqrt_t = vol * math.sqrt(maturity)
        # martingale convention: E[X_i] = spot_i under rate 0
        self.log_mean = np.log(spot) - 0.5 * self.sigma_sqrt_t**2
        self._chol = chol
        self._chol_inv = solve_triangular(chol, np.eye(n), lower=True)
        det_l = float(np.prod(np.diag(chol)))
        self._norm_const = 1.0 / (
            (2.0 * math.pi) ** (n / 2.0) * det_l * float(np.prod(self.sigma_sqrt_t))
        )

    def _z(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(
                k > 0.0,
                (np.log(np.maximum(k, 1e-300)) - self.log_mean) / self.sigma_sqrt_t,
                -np.inf,
            )

    def density_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return _kernels.lognormal_density(
            pts, self.log_mean, self.sigma_sqrt_t, self._chol_inv, self._norm_const
        )

    def joint_cdf_with_error(self, k) -> tuple[float, float]:
        z = self._z(k)
        if np.any(np.isneginf(z)):
            return 0.0, 0.0
        n = self.dimension
        if n <= 3:
            z = np.minimum(z, gaussian._Z_CUT)
            err = {1: 1e-15, 2: 1e-13, 3: 1e-9}[n]
            return gaussian.mvn_cdf(z, self.corr), err
        return self._joint_cdf_mc(k)

    def _joint_cdf_mc(self, k, count: int = 1 << 17) -> tuple[float, float]:
        k = np.asarray(k, dtype=float)
        tag = hashlib.sha256(k.tobytes()).hexdigest()[:16]
        pts = self.sample(count, f"joint-cdf-mc-{tag}").points
        hits = np.all(pts <= k, axis=1)
        p = float(hits.mean())
        se = math.sqrt(max(p * (1.0 - p), 1.0 / count) / count)
        return p, 3.0 * se

    def marginal_survival(self, j: int, k: float) -> float:
        if k <= 0.0:
            return 1.0
        z = (math.log(k) - self.log_mean[j]) / self.sigma_sqrt_t[j]
        return float(ndtr(-z))

    def marginal_quantile(self, j: int, q: float) -> float:
        return float(np.exp(self.log_mean[j] + self.sigma_sqrt_t[j] * ndtri(q)))

    def expected_call(self, j: int, strike: float) -> float:
        s0 = float(self.spot[j])
        if strike <= 0.0:
            return s0 - strike
        s = float(self.sigma_sqrt_t[j])
        d1 = (math.log(s0 / strike) + 0.5 * s * s) / s
        return s0 * float(ndtr(d1)) - strike * float(ndtr(d1 - s))

    def mean(self) -> np.ndarray:
        return self.spot.copy()

    def _draw(self, rng, count):
        z = rng.standard_normal((count, self.dimension)) @ self._chol.T
        return np.exp(self.log_mean + self.sigma_sqrt_t * z)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": {
                "spot": self.spot.tolist(),
                "vol": self.vol.tolist(),
                "correlation": self.corr.tolist(),
                "maturity": self.maturity,
            },
        }


class LognormalMixture(TerminalLaw):
    """Finite mixture of correlated lognormal components."""

    kind = "lognormal-mixture"
    absolutely_continuous = True

    def __init__(self, components):
        comps = []
        weights = []
        for w, law in components:
            w = float(w)
            if w <= 0.0:
                raise ValueError("mixture weights must be positive")
            if not isinstance(law, CorrelatedLognormal):
                raise ValueError("mixture components must be correlated-lognormal laws")
            weights.append(w)
            comps.append(law)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1 within 1e-12")
        dims = {law.dimension for law in comps}
        if len(dims) != 1:
            raise ValueError("mixture components must share one dimension")
        self.dimension = comps[0].dimension
        self.weights = np.asarray(weights, dtype=float)
        self.components = tuple(comps)

    def density_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0])
        for w, law in zip(self.weights, self.components):
            out += w * law.density_many(pts)
        return out

    def joint_cdf_with_error(self, k):
        val = 0.0
        err = 0.0
        for w, law in zip(self.weights, self.components):
            v, e = law.joint_cdf_with_error(k)
            val += w * v
            err += w * e
        return float(val), float(err)

    def marginal_survival(self, j, k):
        return float(
            sum(w * law.marginal_survival(j, k) for w, law in zip(self.weights, self.components))
        )

    def marginal_quantile(self, j, q):
        lo = min(law.marginal_quantile(j, min(q, 1e-12)) for law in self.components)
        hi = max(law.marginal_quantile(j, max(q, 1.0 - 1e-12)) for law in self.components)
        return float(brentq(lambda k: self.marginal_cdf(j, k) - q, lo, hi, xtol=1e-12))

    def expected_call(self, j, strike):
        return float(
            sum(w * law.expected_call(j, strike) for w, law in zip(self.weights, self.components))
        )

    def mean(self):
        return sum(w * law.mean() for w, law in zip(self.weights, self.components))

    def _draw(self, rng, count):
        idx = rng.choice(len(self.components), size=count, p=self.weights)
        z = rng.standard_normal((count, self.dimension))
        out = np.empty((count, self.dimension))
        for c, law in enumerate(self.components):
            rows = idx == c
            if rows.any():
                zc = z[rows] @ law._chol.T
                out[rows] = np.exp(law.log_mean + law.sigma_sqrt_t * zc)
        return out

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": {
                "components": [
                    {"weight": float(w), **law.to_dict()["parameters"]}
                    for w, law in zip(self.weights, self.components)
                ]
            },
        }


class UniformBox(TerminalLaw):
    """Uniform law on a box [a, b]^n contained in the nonnegative orthant."""

    kind = "uniform-box"
    absolutely_continuous = True

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.size != upper.size:
            raise ValueError("lower and upper must have equal length")
        if np.any(lower < 0.0):
            raise ValueError("box must sit in the nonnegative orthant")
        if np.any(lower >= upper):
            raise ValueError("lower must be strictly below upper componentwise")
        self.dimension = lower.size
        self.lower = lower
        self.upper = upper
        self._density_value = float(1.0 / np.prod(upper - lower))

    def density_many(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        return np.where(inside, self._density_value, 0.0)

    def joint_cdf_with_error(self, k):
        k = np.asarray(k, dtype=float)
        frac = np.clip((k - self.lower) / (self.upper - self.lower), 0.0, 1.0)
        return float(np.prod(frac)), 0.0

    def marginal_survival(self, j, k):
        a, b = self.lower[j], self.upper[j]
        return float(np.clip((b - k) / (b - a), 0.0, 1.0))

    def marginal_quantile(self, j, q):
        return float(self.lower[j] + q * (self.upper[j] - self.lower[j]))

    def expected_call(self, j, strike):
        a, b = self.lower[j], self.upper[j]
        if strike <= a:
            return 0.5 * (a + b) - strike
        if strike >= b:
            return 0.0
        return float((b - strike) ** 2 / (2.0 * (b - a)))

    def mean(self):
        return 0.5 * (self.lower + self.upper)

    def support_lower(self):
        return self.lower.copy()

    def support_upper(self):
        return self.upper.copy()

    def _draw(self, rng, count):
        u = rng.random((count, self.dimension))
        return self.lower + u * (self.upper - self.lower)

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": {"lower": self.lower.tolist(), "upper": self.upper.tolist()},
        }


def _hat_partial(axis: np.ndarray, c: float) -> np.ndarray:
    """Integrals of the tensor-hat basis over [axis[0], c], one per node."""
    m = axis.size
    w = np.zeros(m)
    if c <= axis[0]:
        return w
    d = np.diff(axis)
    tau = np.clip((c - axis[:-1]) / d, 0.0, 1.0)
    left = d * (tau - 0.5 * tau**2)  # falling hat on each segment
    right = d * 0.5 * tau**2  # rising hat
    w[:-1] += left
    w[1:] += right
    return w


def _hat_full(axis: np.ndarray) -> np.ndarray:
    return _hat_partial(axis, axis[-1])


def _hat_call_weights(axis: np.ndarray, strike: float) -> np.ndarray:
    """Integrals of hat_i(x) * (x - strike)^+ over the axis (exact)."""
    m = axis.size
    w = np.zeros(m)
    gl_x, gl_w = gaussian.leggauss(2)
    for seg in range(m - 1):
        lo, hi = axis[seg], axis[seg + 1]
        if hi <= strike:
            continue
        pieces = [(max(lo, strike), hi)] if lo < strike < hi else [(lo, hi)]
        for a, b in pieces:
            if b <= a:
                continue
            x = a + 0.5 * (b - a) * (gl_x + 1.0)
            ww = 0.5 * (b - a) * gl_w
            theta = (x - lo) / (hi - lo)
            pay = np.maximum(x - strike, 0.0)
            w[seg] += float(ww @ ((1.0 - theta) * pay))
            w[seg + 1] += float(ww @ (theta * pay))
    return w


class GridDensity(TerminalLaw):
    """Density given by values on a rectangular grid, interpolated multilinearly.

    The trapezoidal mass over the grid must equal 1 within ``mass_tolerance``;
    values are then rescaled so the interpolant integrates to exactly 1.
    """

    kind = "grid-density"
    absolutely_continuous = True

    def __init__(self, axes, values, mass_tolerance=1e-6):
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        values = np.asarray(values, dtype=float)
        if values.shape != tuple(a.size for a in axes):
            raise ValueError("values shape must match the grid axes")
        for a in axes:
            if a.size < 2 or np.any(np.diff(a) <= 0.0):
                raise ValueError("axes must be strictly increasing with >= 2 nodes")
            if a[0] < 0.0:
                raise ValueError("grid must sit in the nonnegative orthant")
        if np.any(values < 0.0):
            raise ValueError("grid values must be nonnegative")
        mass = values
        for a in axes:
            mass = np.tensordot(_hat_full(a), mass, axes=(0, 0))
        mass = float(mass)
        if abs(mass - 1.0) > mass_tolerance:
            raise ValueError(
                f"grid mass {mass} deviates from 1 beyond tolerance {mass_tolerance}"
            )
        self.dimension = len(axes)
        self.axes = axes
        self.values = values / mass
        self.mass_tolerance = float(mass_tolerance)
        self._interp = RegularGridInterpolator(
            axes, self.values, method="linear", bounds_error=False, fill_value=0.0
        )
        # per-coordinate marginal node values (all other dims integrated out)
        self._marginals = []
        for j in range(self.dimension):
            marg = self.values
            for d in range(self.dimension - 1, -1, -1):
                if d == j:
                    continue
                marg = np.tensordot(marg, _hat_full(self.axes[d]), axes=(d, 0))
            self._marginals.append(marg)

    def density_many(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self._interp(pts), dtype=float)

    def joint_cdf_with_error(self, k):
        k = np.asarray(k, dtype=float)
        acc = self.values
        for j in range(self.dimension - 1, -1, -1):
            acc = np.tensordot(acc, _hat_partial(self.axes[j], k[j]), axes=(j, 0))
        return float(np.clip(acc, 0.0, 1.0)), 0.0

    def marginal_survival(self, j, k):
        full = _hat_full(self.axes[j]) @ self._marginals[j]
        part = _hat_partial(self.axes[j], k) @ self._marginals[j]
        return float(np.clip(full - part, 0.0, 1.0))

    def marginal_quantile(self, j, q):
        a, b = self.axes[j][0], self.axes[j][-1]
        if q <= 0.0:
            return float(a)
        if q >= 1.0:
            return float(b)
        return float(brentq(lambda k: self.marginal_cdf(j, k) - q, a, b, xtol=1e-12))

    def expected_call(self, j, strike):
        return float(_hat_call_weights(self.axes[j], strike) @ self._marginals[j])

    def mean(self):
        return np.array(
            [
                _hat_call_weights(self.axes[j], 0.0) @ self._marginals[j]
                for j in range(self.dimension)
            ]
        )

    def support_lower(self):
        return np.array([a[0] for a in self.axes])

    def support_upper(self):
        return np.array([a[-1] for a in self.axes])

    def _draw(self, rng, count):
        lo = self.support_lower()
        hi = self.support_upper()
        bound = float(self.values.max())
        out = np.empty((count, self.dimension))
        filled = 0
        while filled < count:
            block = max(count - filled, 1024)
            x = lo + rng.random((block, self.dimension)) * (hi - lo)
            u = rng.random(block)
            keep = x[u * bound <= self.density_many(x)]
            take = min(keep.shape[0], count - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": {
                "axes": [a.tolist() for a in self.axes],
                "values": self.values.tolist(),
                "mass_tolerance": self.mass_tolerance,
            },
        }


class PointMass(TerminalLaw):
    """A single atom; kept to exercise the not-absolutely-continuous paths."""

    kind = "point-mass"
    absolutely_continuous = False

    def __init__(self, atom):
        atom = np.atleast_1d(np.asarray(atom, dtype=float))
        if np.any(atom < 0.0):
            raise ValueError("atom must be in the nonnegative orthant")
        self.dimension = atom.size
        self.atom = atom

    def density_many(self, points):
        raise NotAbsolutelyContinuous("point-mass law has no Lebesgue density")

    def density(self, x):
        raise NotAbsolutelyContinuous("point-mass law has no Lebesgue density")

    def joint_cdf_with_error(self, k):
        k = np.asarray(k, dtype=float)
        return (1.0 if np.all(self.atom <= k) else 0.0), 0.0

    def marginal_survival(self, j, k):
        return 1.0 if self.atom[j] >= k else 0.0

    def marginal_quantile(self, j, q):
        return float(self.atom[j])

    def expected_call(self, j, strike):
        return float(max(self.atom[j] - strike, 0.0))

    def mean(self):
        return self.atom.copy()

    def support_lower(self):
        return self.atom.copy()

    def support_upper(self):
        return self.atom.copy()

    def _draw(self, rng, count):
        return np.tile(self.atom, (count, 1))

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "parameters": {"atom": self.atom.tolist()},
        }


# ---------------------------------------------------------------------------
# construction from configuration documents


def _require(params: dict, field: str, prefix: str):
    if field not in params:
        raise ConfigError(f"{prefix}.{field}", "missing required field")
    return params[field]


def law_from_dict(doc: dict, prefix: str = "law") -> TerminalLaw:
    """Build a law from the JSON document {dimension, kind, parameters}."""
    if not isinstance(doc, dict):
        raise ConfigError(prefix, "law document must be an object")
    kind = _require(doc, "kind", prefix)
    params = _require(doc, "parameters", prefix)
    dim = _require(doc, "dimension", prefix)
    try:
        if kind == "correlated-lognormal":
            law = CorrelatedLognormal(
                _require(params, "spot", f"{prefix}.parameters"),
                _require(params, "vol", f"{prefix}.parameters"),
                params.get("correlation"),
                params.get("maturity", 1.0),
            )
        elif kind == "lognormal-mixture":
            comps = []
            for i, c in enumerate(_require(params, "components", f"{prefix}.parameters")):
                cp = f"{prefix}.parameters.components[{i}]"
                comps.append(
                    (
                        _require(c, "weight", cp),
                        CorrelatedLognormal(
                            _require(c, "spot", cp),
                            _require(c, "vol", cp),
                            c.get("correlation"),
                            c.get("maturity", 1.0),
                        ),
                    )
                )
            law = LognormalMixture(comps)
        elif kind == "uniform-box":
            law = UniformBox(
                _require(params, "lower", f"{prefix}.parameters"),
                _require(params, "upper", f"{prefix}.parameters"),
            )
        elif kind == "grid-density":
            if "csv" in params:
                law = grid_density_from_csv(
                    params["csv"], params.get("mass_tolerance", 1e-6)
                )
            else:
                law = GridDensity(
                    _require(params, "axes", f"{prefix}.parameters"),
                    _require(params, "values", f"{prefix}.parameters"),
                    params.get("mass_tolerance", 1e-6),
                )
        elif kind == "point-mass":
            law = PointMass(_require(params, "atom", f"{prefix}.parameters"))
        else:
            raise ConfigError(f"{prefix}.kind", f"unknown law kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"{prefix}.parameters", str(exc)) from exc
    if law.dimension != int(dim):
        raise ConfigError(
            f"{prefix}.dimension",
            f"declared dimension {dim} does not match parameters ({law.dimension})",
        )
    return law


def load_law(path) -> TerminalLaw:
    with open(path, encoding="utf-8") as fh:
        return law_from_dict(json.load(fh))


def grid_density_from_csv(path, mass_tolerance=1e-6) -> GridDensity:
    """Read (x_1, ..., x_n, value) rows covering a full rectangular lattice."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 1
        if n < 1 or header[-1] != "value":
            raise ConfigError("grid-csv.header", "expected columns x1,...,xn,value")
        rows = [[float(v) for v in row] for row in reader if row]
    pts = np.asarray(rows, dtype=float)
    axes = [np.unique(pts[:, j]) for j in range(n)]
    shape = tuple(a.size for a in axes)
    if pts.shape[0] != int(np.prod(shape)):
        raise ConfigError("grid-csv.rows", "rows do not cover a full lattice")
    values = np.zeros(shape)
    idx = tuple(
        np.searchsorted(axes[j], pts[:, j]) for j in range(n)
    )
    values[idx] = pts[:, n]
    return GridDensity(axes, values, mass_tolerance)
