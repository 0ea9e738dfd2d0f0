# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled twins of shormagic._kernels_py (same semantics, same API)."""

from libc.math cimport sqrt, cos, sin, M_PI

import numpy as np

DEF PRUNE_TOL = 1e-14
DEF PRUNE_TOL2 = 1e-28


cdef int _run_loop(
    Py_ssize_t r,
    Py_ssize_t t,
    const long long[::1] shifts,
    const double[::1] u,
    const signed char[::1] forced,
    bint have_forced,
    bint trace,
    double complex[::1] v,
    double complex[::1] b1,
    signed char[::1] mout,
    double[::1] pout,
    long long[::1] n0v,
    long long[::1] n1v,
    long long[::1] nuv,
    double complex[::1] crossv,
) nogil:
    cdef Py_ssize_t i, j, sh, m
    cdef double theta = 0.0
    cdef double phi, q0, q1, p1, p, q, scale, mag0, mag1
    cdef double complex rot, w0j, w1j, acc
    cdef long long c0, c1, cu
    for i in range(t):
        sh = <Py_ssize_t> (shifts[i] % r)
        if theta != 0.0:
            phi = -M_PI * theta
            rot = cos(phi) + 1j * sin(phi)
        else:
            rot = 1.0
        for j in range(r - sh):
            b1[j + sh] = v[j] * rot
        for j in range(r - sh, r):
            b1[j + sh - r] = v[j] * rot
        if trace:
            c0 = 0
            c1 = 0
            cu = 0
            acc = 0.0
            for j in range(r):
                mag0 = v[j].real * v[j].real + v[j].imag * v[j].imag
                mag1 = b1[j].real * b1[j].real + b1[j].imag * b1[j].imag
                if mag0 > PRUNE_TOL2:
                    c0 += 1
                if mag1 > PRUNE_TOL2:
                    c1 += 1
                if mag0 > PRUNE_TOL2 or mag1 > PRUNE_TOL2:
                    cu += 1
                acc = acc + (v[j].real - 1j * v[j].imag) * b1[j]
            n0v[i] = c0
            n1v[i] = c1
            nuv[i] = cu
            crossv[i] = acc
        q0 = 0.0
        q1 = 0.0
        for j in range(r):
            w0j = 0.5 * (v[j] + b1[j])
            w1j = 0.5 * (v[j] - b1[j])
            q0 += w0j.real * w0j.real + w0j.imag * w0j.imag
            q1 += w1j.real * w1j.real + w1j.imag * w1j.imag
        p1 = q1 / (q0 + q1)
        if have_forced and forced[i] >= 0:
            m = forced[i]
        else:
            m = 1 if u[i] < p1 else 0
        if m:
            p = p1
            q = q1
        else:
            p = 1.0 - p1
            q = q0
        if q <= 0.0:
            return <int> (i + 1)  # forced outcome with zero probability
        scale = 1.0 / sqrt(q)
        if m:
            for j in range(r):
                v[j] = 0.5 * (v[j] - b1[j]) * scale
        else:
            for j in range(r):
                v[j] = 0.5 * (v[j] + b1[j]) * scale
        for j in range(r):
            if v[j].real * v[j].real + v[j].imag * v[j].imag < PRUNE_TOL2:
                v[j] = 0.0
        mout[i] = <signed char> m
        pout[i] = p
        theta = 0.5 * (theta + m)
    return 0


def run_orbit(r, shifts, u, forced=None, trace=False):
    """See shormagic._kernels_py.run_orbit."""
    cdef Py_ssize_t rr = r
    cdef Py_ssize_t t = len(shifts)
    shifts_arr = np.ascontiguousarray(shifts, dtype=np.int64)
    u_arr = np.ascontiguousarray(u, dtype=np.float64)
    outcomes = np.empty(t, dtype=np.int8)
    probs = np.empty(t, dtype=np.float64)
    n0 = np.empty(t, dtype=np.int64)
    n1 = np.empty(t, dtype=np.int64)
    n_union = np.empty(t, dtype=np.int64)
    cross = np.empty(t, dtype=np.complex128)
    v = np.zeros(rr, dtype=np.complex128)
    b1 = np.empty(rr, dtype=np.complex128)
    v[0] = 1.0
    cdef bint have_forced = forced is not None
    if forced is None:
        forced_arr = np.empty(0, dtype=np.int8)
    else:
        forced_arr = np.ascontiguousarray(forced, dtype=np.int8)
    cdef int status = _run_loop(
        rr,
        t,
        shifts_arr,
        u_arr,
        forced_arr,
        have_forced,
        bool(trace),
        v,
        b1,
        outcomes,
        probs,
        n0,
        n1,
        n_union,
        cross,
    )
    if status:
        raise ZeroDivisionError(f"forced outcome has zero probability at step {status}")
    if trace:
        return outcomes, probs, n0, n1, n_union, cross
    return outcomes, probs


def xor_pair_lambda(values, int width):
    """See shormagic._kernels_py.xor_pair_lambda (table path, width <= 22)."""
    if width > 22:
        raise ValueError("compiled xor_pair_lambda supports width <= 22")
    values_arr = np.ascontiguousarray(values, dtype=np.int64)
    cdef const long long[::1] vv = values_arr
    cdef Py_ssize_t D = vv.shape[0]
    if D < 4:
        return 0
    counts_arr = np.zeros(1 << width, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t i, j, size
    cdef long long vi, lam, c
    size = 1 << width
    lam = 0
    with nogil:
        for i in range(D):
            vi = vv[i]
            for j in range(i + 1, D):
                counts[vi ^ vv[j]] += 1
        for i in range(1, size):
            c = counts[i]
            if c > 1:
                lam += 4 * c * (c - 1)
    return lam
