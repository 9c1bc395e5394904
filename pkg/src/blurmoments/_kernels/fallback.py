"""Pure NumPy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``BLURMOMENTS_FORCE_BACKEND=python`` is set. Results agree with the
compiled backend to rounding error; see tests/test_kernels.py.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["moment_table", "mean_shifted", "mean_rotated"]


def moment_table(pixels, x, y, max_p, max_q):
    """Monomial sums table[p, q] = sum over pixels of x^p y^q intensity.

    Each entry is computed from the same power recurrence, one
    column-sum contraction per q and one dot per (p, q), so a given
    entry's value is independent of the requested table bounds.
    Summation relies on pairwise/BLAS accumulation.
    """
    xp = np.empty((max_p + 1, x.shape[0]), dtype=np.float64)
    xp[0] = 1.0
    for p in range(1, max_p + 1):
        xp[p] = xp[p - 1] * x
    yq = np.empty((max_q + 1, y.shape[0]), dtype=np.float64)
    yq[0] = 1.0
    for q in range(1, max_q + 1):
        yq[q] = yq[q - 1] * y

    table = np.empty((max_p + 1, max_q + 1), dtype=np.float64)
    for q in range(max_q + 1):
        col_sums = pixels.T @ yq[q]
        for p in range(max_p + 1):
            table[p, q] = xp[p] @ col_sums
    return table


def _bilinear_grid(pixels, rs, cs):
    """Bilinear samples of ``pixels`` at fractional (rs, cs), zero outside."""
    h, w = pixels.shape
    r0 = np.floor(rs)
    c0 = np.floor(cs)
    fr = rs - r0
    fc = cs - c0
    r0 = r0.astype(np.int64)
    c0 = c0.astype(np.int64)
    out = np.zeros(np.broadcast_shapes(rs.shape, cs.shape), dtype=np.float64)
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        rr = r0 + dr
        row_ok = (rr >= 0) & (rr < h)
        rr_safe = np.clip(rr, 0, h - 1)
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            cc = c0 + dc
            ok = row_ok & (cc >= 0) & (cc < w)
            cc_safe = np.clip(cc, 0, w - 1)
            out += np.where(ok, wr * wc * pixels[rr_safe, cc_safe], 0.0)
    return out


def mean_shifted(pixels, row_off, col_off):
    """Average of bilinear samples at (r + row_off[k], c + col_off[k])."""
    h, w = pixels.shape
    rows = np.arange(h, dtype=np.float64)[:, None]
    cols = np.arange(w, dtype=np.float64)[None, :]
    acc = np.zeros((h, w), dtype=np.float64)
    for k in range(row_off.shape[0]):
        acc += _bilinear_grid(pixels, rows + row_off[k], cols + col_off[k])
    acc /= row_off.shape[0]
    return acc


def mean_rotated(pixels, betas, pivot_row, pivot_col):
    """Average of bilinear samples rotated by each beta about the pivot.

    For angle beta the source position of output pixel (r, c) is

        cs = pc + (c - pc) cos(beta) - (pr - r) sin(beta)
        rs = pr - (c - pc) sin(beta) - (pr - r) cos(beta)

    which rotates image content clockwise (in y-up frame coordinates)
    by beta.
    """
    h, w = pixels.shape
    dc = np.arange(w, dtype=np.float64)[None, :] - pivot_col
    dr = pivot_row - np.arange(h, dtype=np.float64)[:, None]
    acc = np.zeros((h, w), dtype=np.float64)
    for k in range(betas.shape[0]):
        cb = math.cos(betas[k])
        sb = math.sin(betas[k])
        cs = pivot_col + dc * cb - dr * sb
        rs = pivot_row - dc * sb - dr * cb
        acc += _bilinear_grid(pixels, rs, cs)
    acc /= betas.shape[0]
    return acc
