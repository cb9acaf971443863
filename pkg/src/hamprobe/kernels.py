"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``HAMPROBE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HAMPROBE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

fwht = _impl.fwht
pauli_coefficients = _impl.pauli_coefficients
pauli_synthesize = _impl.pauli_synthesize
symplectic_syndromes = _impl.symplectic_syndromes

__all__ = ["BACKEND", "fwht", "pauli_coefficients", "pauli_synthesize", "symplectic_syndromes"]
