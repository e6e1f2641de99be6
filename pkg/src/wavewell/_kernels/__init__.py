"""Pointwise nonlinearity kernels with a compiled fast path.

The compiled extension is preferred when importable; the pure-NumPy fallback
is selected otherwise, or when the environment variable
``WAVEWELL_PURE_KERNELS`` is set to a non-empty value.
"""

from __future__ import annotations

import os

_FORCE_PURE = bool(os.environ.get("WAVEWELL_PURE_KERNELS"))

if _FORCE_PURE:
    from . import pure as _impl

    _BACKEND = "pure"
else:
    try:
        from . import _pointwise as _impl  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build environment
        from . import pure as _impl

        _BACKEND = "pure"

log_source = _impl.log_source
damping = _impl.damping
abs_pow = _impl.abs_pow
abs_pow_log = _impl.abs_pow_log
rhs_pointwise = _impl.rhs_pointwise


def backend_name() -> str:
    """Name of the kernel implementation selected at import time."""
    return _BACKEND


__all__ = [
    "abs_pow",
    "abs_pow_log",
    "backend_name",
    "damping",
    "log_source",
    "rhs_pointwise",
]
