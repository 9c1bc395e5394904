# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: monomial sum tables and warped-snapshot averages.

Semantics mirror fallback.py; moment accumulation here additionally uses
compensated (Neumaier) summation so order-8 monomial sums stay stable on
large grids.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, floor, sin

cnp.import_array()


cdef inline double _bilinear(const double[:, ::1] pix, double rs, double cs,
                             Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    cdef double r0f = floor(rs)
    cdef double c0f = floor(cs)
    cdef Py_ssize_t r0 = <Py_ssize_t> r0f
    cdef Py_ssize_t c0 = <Py_ssize_t> c0f
    cdef double fr = rs - r0f
    cdef double fc = cs - c0f
    cdef double v = 0.0
    if 0 <= r0 < h:
        if 0 <= c0 < w:
            v += (1.0 - fr) * (1.0 - fc) * pix[r0, c0]
        if 0 <= c0 + 1 < w:
            v += (1.0 - fr) * fc * pix[r0, c0 + 1]
    if 0 <= r0 + 1 < h:
        if 0 <= c0 < w:
            v += fr * (1.0 - fc) * pix[r0 + 1, c0]
        if 0 <= c0 + 1 < w:
            v += fr * fc * pix[r0 + 1, c0 + 1]
    return v


def moment_table(const double[:, ::1] pixels, const double[::1] x,
                 const double[::1] y, Py_ssize_t max_p, Py_ssize_t max_q):
    """Monomial sums table[p, q] = sum over pixels of x^p y^q intensity.

    Every entry is an independent compensated sum over the full grid, so
    its value does not depend on the requested table bounds.
    """
    cdef Py_ssize_t h = pixels.shape[0]
    cdef Py_ssize_t w = pixels.shape[1]
    if x.shape[0] != w or y.shape[0] != h:
        raise ValueError("coordinate arrays do not match the pixel grid")

    xp_arr = np.empty((max_p + 1, w), dtype=np.float64)
    yq_arr = np.empty((max_q + 1, h), dtype=np.float64)
    cdef double[:, ::1] xp = xp_arr
    cdef double[:, ::1] yq = yq_arr
    cdef Py_ssize_t p, q, r, c
    for c in range(w):
        xp[0, c] = 1.0
    for p in range(1, max_p + 1):
        for c in range(w):
            xp[p, c] = xp[p - 1, c] * x[c]
    for r in range(h):
        yq[0, r] = 1.0
    for q in range(1, max_q + 1):
        for r in range(h):
            yq[q, r] = yq[q - 1, r] * y[r]

    table_arr = np.empty((max_p + 1, max_q + 1), dtype=np.float64)
    cdef double[:, ::1] table = table_arr
    cdef double acc, comp, term, t, yq_r
    with nogil:
        for p in range(max_p + 1):
            for q in range(max_q + 1):
                acc = 0.0
                comp = 0.0
                for r in range(h):
                    yq_r = yq[q, r]
                    for c in range(w):
                        term = xp[p, c] * yq_r * pixels[r, c]
                        t = acc + term
                        if fabs(acc) >= fabs(term):
                            comp += (acc - t) + term
                        else:
                            comp += (term - t) + acc
                        acc = t
                table[p, q] = acc + comp
    return table_arr


def mean_shifted(const double[:, ::1] pixels, const double[::1] row_off,
                 const double[::1] col_off):
    """Average of bilinear samples at (r + row_off[k], c + col_off[k])."""
    cdef Py_ssize_t h = pixels.shape[0]
    cdef Py_ssize_t w = pixels.shape[1]
    cdef Py_ssize_t n = row_off.shape[0]
    if col_off.shape[0] != n:
        raise ValueError("offset arrays differ in length")
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, r, c
    cdef double ro, co, rs
    with nogil:
        for k in range(n):
            ro = row_off[k]
            co = col_off[k]
            for r in range(h):
                rs = r + ro
                for c in range(w):
                    out[r, c] += _bilinear(pixels, rs, c + co, h, w)
        for r in range(h):
            for c in range(w):
                out[r, c] /= n
    return out_arr


def mean_rotated(const double[:, ::1] pixels, const double[::1] betas,
                 double pivot_row, double pivot_col):
    """Average of bilinear samples rotated by each beta about the pivot.

    Source position of output pixel (r, c) for angle beta:

        cs = pc + (c - pc) cos(beta) - (pr - r) sin(beta)
        rs = pr - (c - pc) sin(beta) - (pr - r) cos(beta)
    """
    cdef Py_ssize_t h = pixels.shape[0]
    cdef Py_ssize_t w = pixels.shape[1]
    cdef Py_ssize_t n = betas.shape[0]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, r, c
    cdef double cb, sb, dr, dc, rs, cs
    with nogil:
        for k in range(n):
            cb = cos(betas[k])
            sb = sin(betas[k])
            for r in range(h):
                dr = pivot_row - r
                for c in range(w):
                    dc = c - pivot_col
                    cs = pivot_col + dc * cb - dr * sb
                    rs = pivot_row - dc * sb - dr * cb
                    out[r, c] += _bilinear(pixels, rs, cs, h, w)
        for r in range(h):
            for c in range(w):
                out[r, c] /= n
    return out_arr
