"""Kernel backend selection.

Two interchangeable implementations of the hot kernels exist: a compiled
Cython extension (``_ckernels``) and a pure-NumPy fallback. The active one
is chosen once at import time; set ``CONFORMAL_KIT_BACKEND`` to ``c``,
``numpy`` or ``auto`` (default) to override. Requesting ``c`` when the
extension did not build raises immediately rather than silently degrading.
"""

import os

from ..errors import ConfigurationError
from . import numpy_backend

try:
    from . import _ckernels
except ImportError:
    _ckernels = None


def available_backends():
    """Name -> kernel module for every backend importable here."""
    out = {"numpy": numpy_backend}
    if _ckernels is not None:
        out["c"] = _ckernels
    return out


def _select():
    choice = os.environ.get("CONFORMAL_KIT_BACKEND", "auto").lower()
    if choice == "numpy":
        return numpy_backend
    if choice == "c":
        if _ckernels is None:
            raise ConfigurationError(
                "CONFORMAL_KIT_BACKEND=c but the compiled extension is not available"
            )
        return _ckernels
    if choice != "auto":
        raise ConfigurationError(f"unknown backend {choice!r}")
    return _ckernels if _ckernels is not None else numpy_backend


kernels = _select()


def active_backend() -> str:
    return kernels.NAME
