"""Pure-NumPy implementations of the pointwise nonlinearity kernels.

These mirror the compiled extension module exactly; the package selects one
of the two at import time.  All functions operate elementwise on 1-D float64
arrays and write into ``out`` when given.
"""

from __future__ import annotations

import numpy as np


def log_source(u, q, out=None):
    """|u|**(q-2) * u * log|u|, continued by 0 at u = 0."""
    u = np.asarray(u, dtype=np.float64)
    if out is None:
        out = np.empty_like(u)
    mag = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.multiply(mag ** (q - 2.0) * u, np.log(mag), out=out)
    out[mag == 0.0] = 0.0
    return out


def damping(v, p, out=None):
    """|v|**p * v (the monotone polynomial friction law)."""
    v = np.asarray(v, dtype=np.float64)
    if out is None:
        out = np.empty_like(v)
    if p == 0.0:
        np.copyto(out, v)
    else:
        np.multiply(np.abs(v) ** p, v, out=out)
    return out


def abs_pow(u, r, out=None):
    """|u|**r."""
    u = np.asarray(u, dtype=np.float64)
    if out is None:
        out = np.empty_like(u)
    np.power(np.abs(u), r, out=out)
    return out


def abs_pow_log(u, q, out=None):
    """|u|**q * log|u|, continued by 0 at u = 0."""
    u = np.asarray(u, dtype=np.float64)
    if out is None:
        out = np.empty_like(u)
    mag = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.multiply(mag**q, np.log(mag), out=out)
    out[mag == 0.0] = 0.0
    return out


def rhs_pointwise(u, v, q, p, out_force=None, out_power=None):
    """Fused forcing evaluation for the semi-discrete system.

    Returns ``(force, power)`` where ``force = log_source(u, q) - damping(v, p)``
    and ``power = |v|**(p+2)`` (the pointwise friction power density).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if out_force is None:
        out_force = np.empty_like(u)
    if out_power is None:
        out_power = np.empty_like(v)
    log_source(u, q, out=out_force)
    gv = damping(v, p)
    np.subtract(out_force, gv, out=out_force)
    np.multiply(gv, v, out=out_power)
    return out_force, out_power
