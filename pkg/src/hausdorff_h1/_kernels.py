"""Hot numeric kernels with an optional numba backend.

Each kernel exists twice: a pure-numpy version and an explicit-loop version
compiled with ``numba.njit``.  The compiled set is selected when numba is
importable and the environment variable ``HAUSDORFF_NUMBA`` is not ``"0"``.
Both sets agree to rounding; ``tests/test_kernels.py`` checks them against
each other and ``benchmarks/bench_kernels.py`` times them.

Array conventions: points are C-contiguous ``float64`` arrays of shape
``(N, d)``.  Strictly upper triangular coordinates are stored row-major
over the pairs ``i < j`` and described by the integer arrays ``I``, ``J``.
"""
import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def _env_wants_numba():
    return os.environ.get("HAUSDORFF_NUMBA", "1").strip() not in ("0", "false", "no", "off")


# ----------------------------------------------------------------------------
# pure numpy
# ----------------------------------------------------------------------------


def _heis_distance_np(g, h, n, c):
    dv = g[:, :n] - h[:, :n]
    dw = g[:, n:2 * n] - h[:, n:2 * n]
    dt = (g[:, 2 * n] - h[:, 2 * n]
          - 0.5 * (np.sum(h[:, :n] * g[:, n:2 * n], axis=1)
                   - np.sum(h[:, n:2 * n] * g[:, :n], axis=1)))
    z2 = np.sum(dv * dv, axis=1) + np.sum(dw * dw, axis=1)
    return c * np.sqrt(np.sqrt(z2 * z2 + dt * dt))


def _to_matrices(a, I, J, n):
    mats = np.zeros((a.shape[0], n, n))
    mats[:, np.arange(n), np.arange(n)] = 1.0
    mats[:, I, J] = a
    return mats


def _ut_multiply_np(a, b, I, J, n):
    prod = _to_matrices(a, I, J, n) @ _to_matrices(b, I, J, n)
    return np.ascontiguousarray(prod[:, I, J])


def _ut_inverse_np(a, I, J, n):
    # (1 + N)^-1 = sum_k (-N)^k, N nilpotent of order n
    nil = _to_matrices(a, I, J, n)
    nil[:, np.arange(n), np.arange(n)] = 0.0
    term = -nil
    total = term.copy()
    for _ in range(n - 2):
        term = -term @ nil
        total += term
    return np.ascontiguousarray(total[:, I, J])


def _ut_left_divide_np(h, g, I, J, n):
    # h^-1 g by back substitution of H D = G; exact zero when g == h
    H = _to_matrices(h, I, J, n)
    G = _to_matrices(g, I, J, n)
    D = np.zeros_like(G)
    D[:, np.arange(n), np.arange(n)] = 1.0
    for j in range(n):
        for i in range(j - 1, -1, -1):
            s = np.sum(H[:, i, i + 1:j] * D[:, i + 1:j, j], axis=1)
            D[:, i, j] = (G[:, i, j] - H[:, i, j]) - s
    return np.ascontiguousarray(D[:, I, J])


def _ut_gauge_np(a, I, J, n):
    expo = 1.0 / (J - I).astype(np.float64)
    direct = np.max(np.abs(a) ** expo, axis=1)
    inv = np.max(np.abs(_ut_inverse_np(a, I, J, n)) ** expo, axis=1)
    return np.maximum(direct, inv)


def _arc_overlap(length, d):
    return np.maximum(0.0, length - d) + np.maximum(0.0, length - (1.0 - d))


def _torus_symdiff_sup_np(delta, lengths):
    best = np.zeros(delta.shape[0])
    ndim = delta.shape[1]
    for L in lengths:
        overlap = np.prod(_arc_overlap(L, delta), axis=1)
        best = np.maximum(best, 2.0 * (L ** ndim - overlap))
    return best


def _heis_slice_volume_np(R, m):
    h = 2.0 * R / m
    centers = -R + h * (np.arange(m) + 0.5)
    total = 0.0
    R4 = R ** 4
    # row by row keeps the working set at O(m)
    for v in centers:
        rho2 = v * v + centers * centers
        gap = R4 - rho2 * rho2
        total += np.sum(2.0 * np.sqrt(np.maximum(gap, 0.0)))
    return total * h * h


# ----------------------------------------------------------------------------
# numba loops
# ----------------------------------------------------------------------------

if HAS_NUMBA:
    _njit = numba.njit(cache=True, fastmath=False)

    @_njit
    def _heis_distance_nb(g, h, n, c):
        N = g.shape[0]
        out = np.empty(N)
        for k in range(N):
            z2 = 0.0
            sym = 0.0
            for i in range(n):
                dv = g[k, i] - h[k, i]
                dw = g[k, n + i] - h[k, n + i]
                z2 += dv * dv + dw * dw
                sym += h[k, i] * g[k, n + i] - h[k, n + i] * g[k, i]
            dt = g[k, 2 * n] - h[k, 2 * n] - 0.5 * sym
            out[k] = c * np.sqrt(np.sqrt(z2 * z2 + dt * dt))
        return out

    @_njit
    def _fill(a_row, I, J, n, mat):
        for i in range(n):
            for j in range(n):
                mat[i, j] = 0.0
            mat[i, i] = 1.0
        for p in range(I.shape[0]):
            mat[I[p], J[p]] = a_row[p]

    @_njit
    def _ut_multiply_nb(a, b, I, J, n):
        N = a.shape[0]
        m = I.shape[0]
        out = np.empty((N, m))
        A = np.empty((n, n))
        B = np.empty((n, n))
        for k in range(N):
            _fill(a[k], I, J, n, A)
            _fill(b[k], I, J, n, B)
            for p in range(m):
                i = I[p]
                j = J[p]
                s = 0.0
                for l in range(i, j + 1):
                    s += A[i, l] * B[l, j]
                out[k, p] = s
        return out

    @_njit
    def _ut_inverse_row(a_row, I, J, n, A, X):
        # back substitution for the unitriangular inverse
        _fill(a_row, I, J, n, A)
        for i in range(n):
            for j in range(n):
                X[i, j] = 0.0
            X[i, i] = 1.0
        for j in range(n):
            for i in range(j - 1, -1, -1):
                s = 0.0
                for l in range(i + 1, j + 1):
                    s += A[i, l] * X[l, j]
                X[i, j] = -s

    @_njit
    def _ut_inverse_nb(a, I, J, n):
        N = a.shape[0]
        m = I.shape[0]
        out = np.empty((N, m))
        A = np.empty((n, n))
        X = np.empty((n, n))
        for k in range(N):
            _ut_inverse_row(a[k], I, J, n, A, X)
            for p in range(m):
                out[k, p] = X[I[p], J[p]]
        return out

    @_njit
    def _ut_left_divide_nb(h, g, I, J, n):
        N = h.shape[0]
        m = I.shape[0]
        out = np.empty((N, m))
        H = np.empty((n, n))
        G = np.empty((n, n))
        D = np.empty((n, n))
        for k in range(N):
            _fill(h[k], I, J, n, H)
            _fill(g[k], I, J, n, G)
            for i in range(n):
                for j in range(n):
                    D[i, j] = 0.0
                D[i, i] = 1.0
            for j in range(n):
                for i in range(j - 1, -1, -1):
                    s = 0.0
                    for l in range(i + 1, j):
                        s += H[i, l] * D[l, j]
                    D[i, j] = (G[i, j] - H[i, j]) - s
            for p in range(m):
                out[k, p] = D[I[p], J[p]]
        return out

    @_njit
    def _ut_gauge_nb(a, I, J, n):
        N = a.shape[0]
        m = I.shape[0]
        out = np.empty(N)
        A = np.empty((n, n))
        X = np.empty((n, n))
        for k in range(N):
            _ut_inverse_row(a[k], I, J, n, A, X)
            best = 0.0
            for p in range(m):
                e = 1.0 / (J[p] - I[p])
                v = np.abs(a[k, p]) ** e
                w = np.abs(X[I[p], J[p]]) ** e
                if v > best:
                    best = v
                if w > best:
                    best = w
            out[k] = best
        return out

    @_njit
    def _torus_symdiff_sup_nb(delta, lengths):
        N = delta.shape[0]
        ndim = delta.shape[1]
        out = np.zeros(N)
        for k in range(N):
            best = 0.0
            for q in range(lengths.shape[0]):
                L = lengths[q]
                overlap = 1.0
                full = 1.0
                for i in range(ndim):
                    d = delta[k, i]
                    o = 0.0
                    if L - d > 0.0:
                        o += L - d
                    if L - (1.0 - d) > 0.0:
                        o += L - (1.0 - d)
                    overlap *= o
                    full *= L
                val = 2.0 * (full - overlap)
                if val > best:
                    best = val
            out[k] = best
        return out

    @_njit
    def _heis_slice_volume_nb(R, m):
        h = 2.0 * R / m
        R4 = R ** 4
        total = 0.0
        for i in range(m):
            v = -R + h * (i + 0.5)
            row = 0.0
            for j in range(m):
                w = -R + h * (j + 0.5)
                rho2 = v * v + w * w
                gap = R4 - rho2 * rho2
                if gap > 0.0:
                    row += 2.0 * np.sqrt(gap)
            total += row
        return total * h * h


class _Backend:
    """Named bundle of kernel implementations."""

    def __init__(self, name, **fns):
        self.name = name
        for key, fn in fns.items():
            setattr(self, key, fn)

    def __repr__(self):
        return f"<kernel backend {self.name}>"


numpy_backend = _Backend(
    "numpy",
    heis_distance=_heis_distance_np,
    ut_multiply=_ut_multiply_np,
    ut_inverse=_ut_inverse_np,
    ut_left_divide=_ut_left_divide_np,
    ut_gauge=_ut_gauge_np,
    torus_symdiff_sup=_torus_symdiff_sup_np,
    heis_slice_volume=_heis_slice_volume_np,
)

if HAS_NUMBA:
    numba_backend = _Backend(
        "numba",
        heis_distance=_heis_distance_nb,
        ut_multiply=_ut_multiply_nb,
        ut_inverse=_ut_inverse_nb,
        ut_left_divide=_ut_left_divide_nb,
        ut_gauge=_ut_gauge_nb,
        torus_symdiff_sup=_torus_symdiff_sup_nb,
        heis_slice_volume=_heis_slice_volume_nb,
    )
else:  # pragma: no cover
    numba_backend = None

USE_NUMBA = HAS_NUMBA and _env_wants_numba()
backend = numba_backend if USE_NUMBA else numpy_backend


def as_rows(x):
    """Return ``x`` as a C-contiguous float64 array of shape (N, d)."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr
