"""Selects the compiled sweep kernel when available, else the NumPy one."""

import os

from . import _sweep_py

BACKEND = "python"
magnus_sweep = _sweep_py.magnus_sweep

if os.environ.get("HIROTA_PURE_PYTHON") != "1":
    try:
        from . import _sweep
    except ImportError:
        pass
    else:
        magnus_sweep = _sweep.magnus_sweep
        BACKEND = "cython"
