# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled summation kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, NAN

cnp.import_array()


cdef inline void _neumaier(double *s, double *c, double t) noexcept nogil:
    cdef double u = s[0] + t
    if fabs(s[0]) >= fabs(t):
        c[0] += (s[0] - u) + t
    else:
        c[0] += (t - u) + s[0]
    s[0] = u


cdef inline double complex _factor(double complex a, int k, double q, double *qk) noexcept nogil:
    if q == 0.0:
        return a + k
    return 1.0 - a * qk[k]


def terminating_sum(num, den, z, double q, int n, bint scaled):
    cdef double complex[:, ::1] A = np.ascontiguousarray(num, dtype=np.complex128)
    cdef double complex[:, ::1] B = np.ascontiguousarray(den, dtype=np.complex128)
    cdef Py_ssize_t npts = A.shape[0]
    cdef Py_ssize_t p = A.shape[1]
    cdef Py_ssize_t r = B.shape[1]
    cdef double complex zz = complex(z)

    out_arr = np.empty(npts, dtype=np.complex128)
    bad_arr = np.zeros(npts, dtype=np.bool_)
    cdef double complex[::1] out = out_arr
    cdef cnp.npy_bool[::1] bad = bad_arr

    terms_arr = np.empty(n + 1, dtype=np.complex128)
    qk_arr = np.empty(n + 2, dtype=np.float64)
    cdef double complex[::1] terms = terms_arr
    cdef double[::1] qk = qk_arr
    cdef int k
    for k in range(n + 2):
        qk[k] = pow(q, k) if q != 0.0 else 0.0

    cdef Py_ssize_t i, j
    cdef double complex t, ratio, d, tail
    cdef double kfac, sr, cr, si, ci
    cdef bint hit

    with nogil:
        for i in range(npts):
            t = 1.0
            terms[0] = t
            hit = False
            for k in range(n):
                if q == 0.0:
                    kfac = k + 1.0
                else:
                    kfac = 1.0 - qk[k + 1]
                ratio = zz / kfac
                for j in range(p):
                    ratio = ratio * _factor(A[i, j], k, q, &qk[0])
                if not scaled:
                    d = 1.0
                    for j in range(r):
                        d = d * _factor(B[i, j], k, q, &qk[0])
                    if d == 0:
                        hit = True
                    else:
                        ratio = ratio / d
                t = t * ratio
                terms[k + 1] = t
            if scaled:
                tail = 1.0
                k = n
                while k >= 0:
                    if k < n:
                        for j in range(r):
                            tail = tail * _factor(B[i, j], k, q, &qk[0])
                    terms[k] = terms[k] * tail
                    k -= 1
            sr = 0.0
            cr = 0.0
            si = 0.0
            ci = 0.0
            for k in range(n + 1):
                _neumaier(&sr, &cr, terms[k].real)
                _neumaier(&si, &ci, terms[k].imag)
            if hit:
                bad[i] = True
                out[i] = NAN
            else:
                out[i] = (sr + cr) + 1j * (si + ci)
    return out_arr, bad_arr


def q_product(a, double q, int terms):
    cdef double complex[::1] arr = np.ascontiguousarray(np.ravel(a), dtype=np.complex128)
    res = np.empty(arr.shape[0], dtype=np.complex128)
    cdef double complex[::1] out = res
    cdef Py_ssize_t i
    cdef int k
    cdef double complex acc
    cdef double qk
    with nogil:
        for i in range(arr.shape[0]):
            acc = 1.0
            qk = 1.0
            for k in range(terms):
                acc = acc * (1.0 - arr[i] * qk)
                qk = qk * q
            out[i] = acc
    return res.reshape(np.shape(a))
