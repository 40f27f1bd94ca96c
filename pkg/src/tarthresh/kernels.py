"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels are used. Set ``TARTHRESH_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

python_backend = _pykernels

if os.environ.get("TARTHRESH_PURE_PYTHON", "") not in ("", "0"):
    compiled_backend = None
else:
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

tar_path = backend.tar_path
drop_walk = backend.drop_walk
plateau_scan = backend.plateau_scan
