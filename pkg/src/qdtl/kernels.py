"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``QDTL_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("QDTL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if _active is compiled_backend else "python"

fwht = _active.fwht
parity_vector = _active.parity_vector
parity_batch = _active.parity_batch
