"""Backend selection for the numerical inner loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy versions in ``_pykernels`` are used. Set ``NILSPHERE_PURE=1`` to
force the numpy backend.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("NILSPHERE_PURE"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

laguerre_norm = _impl.laguerre_norm
laguerre_norm_table = _impl.laguerre_norm_table
bessel_series = _impl.bessel_series
hermite_poly_table = _impl.hermite_poly_table
theta_samples = _impl.theta_samples
laguerre_moments = _impl.laguerre_moments

MAX_SERIES_TERMS = _pykernels.MAX_SERIES_TERMS

__all__ = [
    "BACKEND",
    "MAX_SERIES_TERMS",
    "laguerre_norm",
    "laguerre_norm_table",
    "bessel_series",
    "hermite_poly_table",
    "theta_samples",
    "laguerre_moments",
]
