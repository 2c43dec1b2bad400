"""Weierstrass elliptic kernels wp, wp', zeta, sigma with backend selection.

The theta-series inner loops live in a backend module: a compiled Cython
extension (helikon._kernels_cy) when it has been built, otherwise the pure
Python twin (helikon._kernels_py).  Set HELIKON_KERNEL_BACKEND=python to
force the fallback.
"""

import os

from .errors import PoleAt

if os.environ.get("HELIKON_KERNEL_BACKEND", "").lower() == "python":
    from . import _kernels_py as _backend
else:
    try:
        from . import _kernels_cy as _backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _backend

BACKEND = _backend.BACKEND

POLE_RADIUS = 1e-10


def _check_pole(u, tau):
    u0, _, _ = _backend.reduce_to_cell(complex(u), complex(tau))
    if abs(u0) < POLE_RADIUS:
        raise PoleAt(u)
    return u0


def wp(u, lat):
    """Weierstrass p-function on lat's lattice <1, tau>."""
    _check_pole(u, lat.tau)
    return _backend.wp_raw(complex(u), lat.tau, lat.q, lat.eta1, lat.series_tol)


def wp_prime(u, lat):
    """Derivative of the p-function."""
    _check_pole(u, lat.tau)
    return _backend.wp_prime_raw(
        complex(u), lat.tau, lat.q, lat.eta1, lat.eta2, lat.series_tol
    )


def zeta_w(u, lat):
    """Weierstrass zeta function (quasi-periodic, increments eta1/eta2)."""
    _check_pole(u, lat.tau)
    return _backend.zeta_raw(
        complex(u), lat.tau, lat.q, lat.eta1, lat.eta2, lat.series_tol
    )


def sigma_w(u, lat):
    """Weierstrass sigma function (entire)."""
    return _backend.sigma_raw(
        complex(u), lat.tau, lat.q, lat.eta1, lat.eta2, lat.series_tol
    )


def reduce_to_cell(u, tau):
    """Reduce u modulo <1, tau> to the centered fundamental cell."""
    return _backend.reduce_to_cell(complex(u), complex(tau))
