"""Backend selection for the summation kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy implementation in ``_fallback`` takes over. Setting the environment
variable ``XASKEY_PURE=1`` forces the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("XASKEY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

terminating_sum = _impl.terminating_sum
q_product = _impl.q_product

__all__ = ["BACKEND", "terminating_sum", "q_product"]
