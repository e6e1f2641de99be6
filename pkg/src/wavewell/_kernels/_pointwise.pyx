# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pointwise nonlinearity kernels (hot loops of the time stepper).

Signatures match ``wavewell._kernels.pure`` one for one.  Small-integer
exponents — the common configurations — skip the generic ``pow`` and keep a
single transcendental (the logarithm) per element.
"""

import numpy as np

from libc.math cimport fabs, log, pow


cdef inline int _small_int_class(double e) nogil:
    """1..4 when the exponent is exactly that integer, else 0 (generic)."""
    if e == 1.0:
        return 1
    if e == 2.0:
        return 2
    if e == 3.0:
        return 3
    if e == 4.0:
        return 4
    return 0


cdef inline double _ipow(double m, int k) nogil:
    if k == 1:
        return m
    if k == 2:
        return m * m
    if k == 3:
        return m * m * m
    return (m * m) * (m * m)


cdef inline double _abs_pow_scalar(double m, double e, int cls) nogil:
    return _ipow(m, cls) if cls else pow(m, e)


cdef inline double _log_source_scalar(double x, double qm2, int cls) nogil:
    cdef double m = fabs(x)
    if m == 0.0:
        return 0.0
    return _abs_pow_scalar(m, qm2, cls) * x * log(m)


cdef inline double _damping_scalar(double x, double p) nogil:
    if p == 0.0:
        return x
    if p == 1.0:
        return fabs(x) * x
    if p == 2.0:
        return x * x * x
    return pow(fabs(x), p) * x


def log_source(u, double q, out=None):
    """|u|**(q-2) * u * log|u|, continued by 0 at u = 0."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    out_arr = np.empty(uv.shape[0]) if out is None else out
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    cdef double qm2 = q - 2.0
    cdef int cls = _small_int_class(qm2)
    for i in range(uv.shape[0]):
        ov[i] = _log_source_scalar(uv[i], qm2, cls)
    return out_arr


def damping(v, double p, out=None):
    """|v|**p * v (the monotone polynomial friction law)."""
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    out_arr = np.empty(vv.shape[0]) if out is None else out
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    for i in range(vv.shape[0]):
        ov[i] = _damping_scalar(vv[i], p)
    return out_arr


def abs_pow(u, double r, out=None):
    """|u|**r."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    out_arr = np.empty(uv.shape[0]) if out is None else out
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    cdef int cls = _small_int_class(r)
    for i in range(uv.shape[0]):
        ov[i] = _abs_pow_scalar(fabs(uv[i]), r, cls)
    return out_arr


def abs_pow_log(u, double q, out=None):
    """|u|**q * log|u|, continued by 0 at u = 0."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    out_arr = np.empty(uv.shape[0]) if out is None else out
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i
    cdef double m
    cdef int cls = _small_int_class(q)
    for i in range(uv.shape[0]):
        m = fabs(uv[i])
        ov[i] = 0.0 if m == 0.0 else _abs_pow_scalar(m, q, cls) * log(m)
    return out_arr


def rhs_pointwise(u, v, double q, double p, out_force=None, out_power=None):
    """Fused forcing evaluation: force = log_source(u) - damping(v), power = |v|**(p+2)."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    force_arr = np.empty(uv.shape[0]) if out_force is None else out_force
    power_arr = np.empty(vv.shape[0]) if out_power is None else out_power
    cdef double[::1] fv = force_arr
    cdef double[::1] pv = power_arr
    cdef Py_ssize_t i
    cdef double qm2 = q - 2.0
    cdef int cls = _small_int_class(qm2)
    cdef double gv
    for i in range(uv.shape[0]):
        gv = _damping_scalar(vv[i], p)
        fv[i] = _log_source_scalar(uv[i], qm2, cls) - gv
        pv[i] = gv * vv[i]
    return force_arr, power_arr
