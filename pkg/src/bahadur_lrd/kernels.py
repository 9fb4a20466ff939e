"""Hot loops, compiled when possible.

The Cython extension ``_kernels`` is used when it was built; otherwise the
numpy versions from ``_kernels_py`` are used. Set ``BAHADUR_LRD_PURE=1`` to
force the fallback. ``BACKEND`` names the active implementation.
"""
import os

from . import _kernels_py as pure

compiled = None
if not os.environ.get("BAHADUR_LRD_PURE"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

select_and_count = _impl.select_and_count
hermite_table = _impl.hermite_table
lag_series_sum = _impl.lag_series_sum
lagged_products = _impl.lagged_products

__all__ = [
    "BACKEND",
    "compiled",
    "pure",
    "select_and_count",
    "hermite_table",
    "lag_series_sum",
    "lagged_products",
]
