"""Simulation kernel backend selection.

The JIT backend is the default; set ``VERIDESIGN_BACKEND=numpy`` to force the
pure-numpy kernels (or ``numba`` to insist on JIT, failing loudly if numba is
unavailable).  Both backends produce bit-identical results; they differ only
in speed.  See benchmarks/backend_bench.py for the comparison.
"""

from __future__ import annotations

import os
import warnings

ENV_VAR = "VERIDESIGN_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def _requested() -> str:
    value = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
    if value not in _CHOICES:
        raise ValueError(f"{ENV_VAR} must be one of {_CHOICES}, got {value!r}")
    return value


def resolve_backend(backend: str | None = None) -> str:
    """Pick the active backend name: explicit argument > environment > auto."""
    choice = backend if backend is not None else _requested()
    if choice not in _CHOICES:
        raise ValueError(f"backend must be one of {_CHOICES}, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        import importlib

        importlib.import_module("numba")
        return "numba"
    try:
        import importlib

        importlib.import_module("numba")
        return "numba"
    except ImportError:
        warnings.warn("numba unavailable; falling back to pure-numpy simulation kernels",
                      RuntimeWarning, stacklevel=2)
        return "numpy"


def kernels(backend: str | None = None):
    """Return the kernel module for the resolved backend."""
    name = resolve_backend(backend)
    if name == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod
