# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled monodromy path sum."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def path_sum(W):
    """All monodromy entries <b|T_{a,c}|d> from per-site weights.

    Same contract as the numpy fallback: ``W[l, x, b, y, d]`` is
    R(lam, mu_l)_{x,b}^{y,d} (0-based) and the result is ``out[a, c, b, d]``.
    """
    cdef double complex[:, :, :, :, ::1] w = np.ascontiguousarray(W, dtype=np.complex128)
    cdef Py_ssize_t L = w.shape[0], na = w.shape[1], nq = w.shape[2]
    cdef Py_ssize_t D = nq ** L
    out_arr = np.zeros((na, na, D, D), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] out = out_arr
    dig_arr = np.array(np.unravel_index(np.arange(D), (nq,) * L)).T.astype(np.intp)
    cdef Py_ssize_t[:, ::1] dig = np.ascontiguousarray(dig_arr)
    cdef Py_ssize_t c, bi, di, l, x, xn, b, d
    cdef double complex val
    for c in range(na):
        for bi in range(D):
            for di in range(D):
                x = c
                val = 1.0
                for l in range(L):
                    b = dig[bi, l]
                    d = dig[di, l]
                    xn = x + d - b
                    if xn < 0 or xn >= na:
                        val = 0.0
                        break
                    val = val * w[l, xn, b, x, d]
                    if val == 0:
                        break
                    x = xn
                if val != 0:
                    out[x, c, bi, di] = val
    return out_arr
