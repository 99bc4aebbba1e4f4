"""Batched numerical kernels with a compiled core and a NumPy fallback.

The compiled extension is used when it imports cleanly. Setting the
environment variable ``PONDEROMOTIVE_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("PONDEROMOTIVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = _pykernels
    BACKEND = "python"

negativity_batch = _active.negativity_batch
transfer_batch = _active.transfer_batch
covariance_batch = _active.covariance_batch

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "negativity_batch",
    "transfer_batch",
    "covariance_batch",
]
