"""Hot numeric kernels for the AC engine.

Every frequency point of a sweep produces a small dense complex system
(tens of unknowns).  Two kernels dominate the run time:

* ``scatter_stamps``: accumulate COO stamp triplets into a batch of dense
  nodal matrices;
* ``solve_batch``: Gaussian elimination with partial pivoting over that
  batch, flagging the first numerically singular member.

Each kernel has a numba implementation (explicit loops) and a pure-numpy
implementation (vectorised over the batch axis).  ``scatter_stamps`` and
``solve_batch`` are bound to one of them at import time according to
``LNASYNTH_NUMBA``.  Both variants use the same pivot test so they agree on
what counts as singular.
"""

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

# pivot accepted when |p| > PIVOT_RTOL * n * max|A|
PIVOT_RTOL = 1e-14


def _scatter_stamps_numpy(n, rows, cols, vals):
    m = vals.shape[0]
    out = np.zeros((m, n, n), dtype=np.complex128)
    for k in range(rows.shape[0]):
        out[:, rows[k], cols[k]] += vals[:, k]
    return out


def _solve_batch_numpy(a, b):
    with np.errstate(all="ignore"):
        return _solve_batch_numpy_impl(a, b)


def _solve_batch_numpy_impl(a, b):
    a = np.array(a, dtype=np.complex128, copy=True)
    x = np.array(b, dtype=np.complex128, copy=True)
    m, n, _ = a.shape
    scale = np.abs(a).reshape(m, -1).max(axis=1)
    tol = PIVOT_RTOL * n * scale
    singular = np.zeros(m, dtype=bool)
    batch = np.arange(m)
    for col in range(n):
        piv = col + np.argmax(np.abs(a[:, col:, col]), axis=1)
        pval = np.abs(a[batch, piv, col])
        singular |= ~(pval > tol)
        swap = piv != col
        if swap.any():
            idx = batch[swap]
            prow = piv[swap]
            tmp = a[idx, col, :].copy()
            a[idx, col, :] = a[idx, prow, :]
            a[idx, prow, :] = tmp
            tmp = x[idx, col, :].copy()
            x[idx, col, :] = x[idx, prow, :]
            x[idx, prow, :] = tmp
        p = a[:, col, col]
        p = np.where(singular, 1.0, p)
        if col + 1 < n:
            f = a[:, col + 1 :, col] / p[:, None]
            a[:, col + 1 :, col:] -= f[:, :, None] * a[:, None, col, col:]
            x[:, col + 1 :, :] -= f[:, :, None] * x[:, None, col, :]
    for col in range(n - 1, -1, -1):
        if col + 1 < n:
            x[:, col, :] -= np.einsum("mj,mjk->mk", a[:, col, col + 1 :], x[:, col + 1 :, :])
        p = np.where(singular, 1.0, a[:, col, col])
        x[:, col, :] /= p[:, None]
    bad = np.flatnonzero(singular)
    first = int(bad[0]) if bad.size else -1
    return x, first


def _scatter_stamps_loops(n, rows, cols, vals):
    m = vals.shape[0]
    out = np.zeros((m, n, n), dtype=np.complex128)
    for i in range(m):
        for k in range(rows.shape[0]):
            out[i, rows[k], cols[k]] += vals[i, k]
    return out


def _solve_batch_loops(a, b):
    m, n, _ = a.shape
    nrhs = b.shape[2]
    x = np.empty((m, n, nrhs), dtype=np.complex128)
    work = np.empty((n, n), dtype=np.complex128)
    rhs = np.empty((n, nrhs), dtype=np.complex128)
    first = -1
    for i in range(m):
        scale = 0.0
        for r in range(n):
            for c in range(n):
                work[r, c] = a[i, r, c]
                v = abs(work[r, c])
                if v > scale:
                    scale = v
            for c in range(nrhs):
                rhs[r, c] = b[i, r, c]
        tol = PIVOT_RTOL * n * scale
        ok = True
        for col in range(n):
            piv = col
            best = abs(work[col, col])
            for r in range(col + 1, n):
                v = abs(work[r, col])
                if v > best:
                    best = v
                    piv = r
            if not best > tol:
                ok = False
                break
            if piv != col:
                for c in range(n):
                    t = work[col, c]
                    work[col, c] = work[piv, c]
                    work[piv, c] = t
                for c in range(nrhs):
                    t = rhs[col, c]
                    rhs[col, c] = rhs[piv, c]
                    rhs[piv, c] = t
            p = work[col, col]
            for r in range(col + 1, n):
                f = work[r, col] / p
                if f != 0:
                    for c in range(col, n):
                        work[r, c] -= f * work[col, c]
                    for c in range(nrhs):
                        rhs[r, c] -= f * rhs[col, c]
        if not ok:
            if first < 0:
                first = i
            for r in range(n):
                for c in range(nrhs):
                    x[i, r, c] = np.nan
            continue
        for col in range(n - 1, -1, -1):
            for c in range(nrhs):
                acc = rhs[col, c]
                for j in range(col + 1, n):
                    acc -= work[col, j] * x[i, j, c]
                x[i, col, c] = acc / work[col, col]
    return x, first


if HAVE_NUMBA:
    _scatter_stamps_numba = njit(_scatter_stamps_loops)
    _solve_batch_numba = njit(_solve_batch_loops)
else:  # pragma: no cover
    _scatter_stamps_numba = None
    _solve_batch_numba = None


def _prep(n, rows, cols, vals):
    return (
        int(n),
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(vals, dtype=np.complex128),
    )


if USE_NUMBA:

    def scatter_stamps(n, rows, cols, vals):
        """Sum stamp values ``vals[:, k]`` into ``out[:, rows[k], cols[k]]``; returns (m, n, n)."""
        return _scatter_stamps_numba(*_prep(n, rows, cols, vals))

    def solve_batch(a, b):
        """Solve ``a[i] @ x[i] = b[i]`` for every batch member.

        Returns ``(x, first_singular)`` where ``first_singular`` is the batch
        index of the first system whose pivot test failed, or -1.
        """
        return _solve_batch_numba(
            np.ascontiguousarray(a, dtype=np.complex128),
            np.ascontiguousarray(b, dtype=np.complex128),
        )

    BACKEND = "numba"
else:

    def scatter_stamps(n, rows, cols, vals):
        """Sum stamp values ``vals[:, k]`` into ``out[:, rows[k], cols[k]]``; returns (m, n, n)."""
        return _scatter_stamps_numpy(*_prep(n, rows, cols, vals))

    def solve_batch(a, b):
        """Solve ``a[i] @ x[i] = b[i]`` for every batch member.

        Returns ``(x, first_singular)`` where ``first_singular`` is the batch
        index of the first system whose pivot test failed, or -1.
        """
        return _solve_batch_numpy(a, b)

    BACKEND = "numpy"
