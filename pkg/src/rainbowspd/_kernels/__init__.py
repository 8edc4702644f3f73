"""Hot evaluation kernels with a compiled core and a NumPy fallback.

The Cython extension (``_hot``) is preferred when it imported cleanly; set
``RAINBOWSPD_PURE_PYTHON=1`` to force the NumPy implementation (used by the
benchmark and the backend-parity tests).  Both backends implement the same
three functions and must agree to rounding:

    payoff_lp(points, kbar, kout, p)    rainbow payoff, finite p
    payoff_max(points, kbar, kout)      rainbow payoff, p = infinity
    lognormal_density(points, mu, s, linv, norm_const)
"""

import os

import numpy as np

from . import _ref

if os.environ.get("RAINBOWSPD_PURE_PYTHON", "") == "1":
    _impl = _ref
    BACKEND = "numpy"
else:
    try:
        from . import _hot as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "numpy"


def _clean_points(points):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array of shape (count, dimension)")
    return pts


def payoff_lp(points, kbar, kout, p, backend=None):
    pts = _clean_points(points)
    kbar = np.ascontiguousarray(kbar, dtype=np.float64)
    mod = _backend(backend)
    return mod.payoff_lp(pts, kbar, float(kout), float(p))


def payoff_max(points, kbar, kout, backend=None):
    pts = _clean_points(points)
    kbar = np.ascontiguousarray(kbar, dtype=np.float64)
    mod = _backend(backend)
    return mod.payoff_max(pts, kbar, float(kout))


def lognormal_density(points, mu, s, linv, norm_const, backend=None):
    pts = _clean_points(points)
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.float64)
    linv = np.ascontiguousarray(linv, dtype=np.float64)
    mod = _backend(backend)
    return mod.lognormal_density(pts, mu, s, linv, float(norm_const))


def _backend(name):
    if name is None:
        return _impl
    if name == "numpy":
        return _ref
    if name == "compiled":
        if BACKEND != "compiled":
            raise RuntimeError("compiled kernels are not available")
        return _impl
    raise ValueError(f"unknown backend {name!r}")
