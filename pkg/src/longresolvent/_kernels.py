"""Batched evaluation kernels (the hot loops).

Every public function here evaluates one of the package's rational-matrix
formulas at ``N`` points in one call and returns an ``(N, rows, cols)``
array.  Two implementations back each function: a numba ``@njit`` per-point
loop and a pure-numpy stacked-gufunc twin; :mod:`longresolvent._backend`
picks one at import time.  The pair is required to agree to machine
precision (``tests/test_kernels.py`` enforces this).

Point weights: for state dimensions ``(m_1, ..., m_d)`` the diagonal
variable matrix P(z) = Diag[z_1 I_{m_1}, ..., z_d I_{m_d}] acts by row or
column scaling with the expanded weight vector ``w`` (z_k repeated m_k
times), which is how all kernels apply it.

Singular points raise ``numpy.linalg.LinAlgError`` (numpy path, for the
whole batch) or produce non-finite entries; callers that must skip poles
use the per-point evaluators in the domain modules instead.
"""

import numpy as np

from ._backend import USE_NUMBA, njit_or_plain

_C128 = np.complex128


def _as_c(a):
    return np.ascontiguousarray(np.asarray(a, dtype=_C128))


def _expand_weights(pts, dims):
    """(N, d) points -> (N, m) per-state weights, m = sum(dims)."""
    return np.repeat(pts, dims, axis=1)


# ---------------------------------------------------------------------------
# numpy twins


def _pencil_eval_np(A0, Astack, n, pts):
    Az = A0[None, :, :] + np.tensordot(pts, Astack, axes=(1, 0))
    A11 = Az[:, :n, :n]
    if Az.shape[1] == n:
        return A11.copy()
    A12 = Az[:, :n, n:]
    A21 = Az[:, n:, :n]
    A22 = Az[:, n:, n:]
    return A11 - A12 @ np.linalg.solve(A22, A21)


def _gr_transfer_np(A, B, C, D, w):
    m = A.shape[0]
    M = np.eye(m, dtype=_C128)[None, :, :] - w[:, :, None] * A[None, :, :]
    PB = w[:, :, None] * B[None, :, :]
    return D[None, :, :] + C[None, :, :] @ np.linalg.solve(M, PB)


def _state_defect_np(A, B, w):
    # (I - A P(z))^{-1} B : P scales the columns of A.
    m = A.shape[0]
    M = np.eye(m, dtype=_C128)[None, :, :] - A[None, :, :] * w[:, None, :]
    return np.linalg.solve(M, np.broadcast_to(B, (w.shape[0],) + B.shape))


def _herglotz_eval_np(beta, W, V, w):
    m = W.shape[0]
    N = w.shape[0]
    M = np.broadcast_to(W, (N, m, m)).copy()
    R = np.broadcast_to(W @ V, (N, m, V.shape[1])).copy()
    idx = np.arange(m)
    M[:, idx, idx] -= w
    R += w[:, :, None] * V[None, :, :]
    return beta[None, :, :] + V.conj().T[None, :, :] @ np.linalg.solve(M, R)


def _herglotz_defect_np(W, V, w):
    # (I - W* P(z))^{-1} V : W* P scales the columns of W*.
    m = W.shape[0]
    Ws = W.conj().T
    M = np.eye(m, dtype=_C128)[None, :, :] - Ws[None, :, :] * w[:, None, :]
    return np.linalg.solve(M, np.broadcast_to(V, (w.shape[0],) + V.shape))


def _poly_eval_np(exps, coefs, pts):
    mono = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    return np.tensordot(mono, coefs, axes=(1, 0))


# ---------------------------------------------------------------------------
# numba loop twins (plain python when the numpy backend is active)


@njit_or_plain
def _pencil_eval_nb(A0, Astack, n, pts):
    N = pts.shape[0]
    d = Astack.shape[0]
    s = A0.shape[0]
    out = np.empty((N, n, n), dtype=_C128)
    for p in range(N):
        Az = A0.copy()
        for k in range(d):
            Az += pts[p, k] * Astack[k]
        if s == n:
            out[p] = Az
        else:
            A22 = np.ascontiguousarray(Az[n:, n:])
            A21 = np.ascontiguousarray(Az[n:, :n])
            A12 = np.ascontiguousarray(Az[:n, n:])
            X = np.ascontiguousarray(np.linalg.solve(A22, A21))
            out[p] = Az[:n, :n] - A12 @ X
    return out


@njit_or_plain
def _gr_transfer_nb(A, B, C, D, w):
    N = w.shape[0]
    m = A.shape[0]
    n = B.shape[1]
    out = np.empty((N, n, n), dtype=_C128)
    for p in range(N):
        M = np.eye(m, dtype=_C128)
        PB = np.empty((m, n), dtype=_C128)
        for i in range(m):
            for j in range(m):
                M[i, j] -= w[p, i] * A[i, j]
            for j in range(n):
                PB[i, j] = w[p, i] * B[i, j]
        out[p] = D + C @ np.linalg.solve(M, PB)
    return out


@njit_or_plain
def _state_defect_nb(A, B, w):
    N = w.shape[0]
    m = A.shape[0]
    out = np.empty((N, m, B.shape[1]), dtype=_C128)
    for p in range(N):
        M = np.eye(m, dtype=_C128)
        for i in range(m):
            for j in range(m):
                M[i, j] -= A[i, j] * w[p, j]
        out[p] = np.linalg.solve(M, B)
    return out


@njit_or_plain
def _herglotz_eval_nb(beta, W, V, w):
    N = w.shape[0]
    m = W.shape[0]
    n = V.shape[1]
    Vh = V.conj().T.copy()
    WV = W @ V
    out = np.empty((N, n, n), dtype=_C128)
    for p in range(N):
        M = W.copy()
        R = WV.copy()
        for i in range(m):
            M[i, i] -= w[p, i]
            for j in range(n):
                R[i, j] += w[p, i] * V[i, j]
        out[p] = beta + Vh @ np.linalg.solve(M, R)
    return out


@njit_or_plain
def _herglotz_defect_nb(W, V, w):
    N = w.shape[0]
    m = W.shape[0]
    Ws = W.conj().T.copy()
    out = np.empty((N, m, V.shape[1]), dtype=_C128)
    for p in range(N):
        M = np.eye(m, dtype=_C128)
        for i in range(m):
            for j in range(m):
                M[i, j] -= Ws[i, j] * w[p, j]
        out[p] = np.linalg.solve(M, V)
    return out


@njit_or_plain
def _poly_eval_nb(exps, coefs, pts):
    N = pts.shape[0]
    T = exps.shape[0]
    d = exps.shape[1]
    out = np.zeros((N, coefs.shape[1], coefs.shape[2]), dtype=_C128)
    for p in range(N):
        for t in range(T):
            mono = 1.0 + 0.0j
            for k in range(d):
                zk = pts[p, k]
                for _ in range(exps[t, k]):
                    mono *= zk
            out[p] += mono * coefs[t]
    return out


# ---------------------------------------------------------------------------
# dispatchers


def pencil_eval_many(A0, Astack, n, pts):
    """Schur complement A11(z) - A12(z) A22(z)^{-1} A21(z) at each point."""
    A0 = _as_c(A0)
    Astack = _as_c(Astack)
    pts = _as_c(np.atleast_2d(pts))
    if pts.shape[0] == 0:
        return np.empty((0, n, n), dtype=_C128)
    if USE_NUMBA and A0.shape[0] > n:
        return _pencil_eval_nb(A0, Astack, n, pts)
    return _pencil_eval_np(A0, Astack, n, pts)


def gr_transfer_many(A, B, C, D, dims, pts):
    """D + C (I - P(z)A)^{-1} P(z) B at each point."""
    A, B, C, D = map(_as_c, (A, B, C, D))
    pts = _as_c(np.atleast_2d(pts))
    n = D.shape[0]
    if pts.shape[0] == 0:
        return np.empty((0, n, n), dtype=_C128)
    if A.shape[0] == 0:
        return np.broadcast_to(D, (pts.shape[0], n, n)).copy()
    w = _expand_weights(pts, np.asarray(dims, dtype=np.int64))
    if USE_NUMBA:
        return _gr_transfer_nb(A, B, C, D, w)
    return _gr_transfer_np(A, B, C, D, w)


def state_defect_many(A, B, dims, pts):
    """(I - A P(z))^{-1} B at each point; rows split per variable block."""
    A, B = _as_c(A), _as_c(B)
    pts = _as_c(np.atleast_2d(pts))
    if A.shape[0] == 0 or pts.shape[0] == 0:
        return np.empty((pts.shape[0],) + B.shape, dtype=_C128)
    w = _expand_weights(pts, np.asarray(dims, dtype=np.int64))
    if USE_NUMBA:
        return _state_defect_nb(A, B, w)
    return _state_defect_np(A, B, w)


def herglotz_eval_many(beta, W, V, dims, pts):
    """beta + V* (W - P(z))^{-1} (W + P(z)) V at each point."""
    beta, W, V = map(_as_c, (beta, W, V))
    pts = _as_c(np.atleast_2d(pts))
    n = beta.shape[0]
    if pts.shape[0] == 0:
        return np.empty((0, n, n), dtype=_C128)
    if W.shape[0] == 0:
        return np.broadcast_to(beta, (pts.shape[0], n, n)).copy()
    w = _expand_weights(pts, np.asarray(dims, dtype=np.int64))
    if USE_NUMBA:
        return _herglotz_eval_nb(beta, W, V, w)
    return _herglotz_eval_np(beta, W, V, w)


def herglotz_defect_many(W, V, dims, pts):
    """(I - W* P(z))^{-1} V at each point."""
    W, V = _as_c(W), _as_c(V)
    pts = _as_c(np.atleast_2d(pts))
    if W.shape[0] == 0 or pts.shape[0] == 0:
        return np.empty((pts.shape[0],) + V.shape, dtype=_C128)
    w = _expand_weights(pts, np.asarray(dims, dtype=np.int64))
    if USE_NUMBA:
        return _herglotz_defect_nb(W, V, w)
    return _herglotz_defect_np(W, V, w)


def poly_eval_many(exps, coefs, pts):
    """sum_a coefs[a] * z**exps[a] at each point."""
    exps = np.ascontiguousarray(np.asarray(exps, dtype=np.int64))
    coefs = _as_c(coefs)
    pts = _as_c(np.atleast_2d(pts))
    if pts.shape[0] == 0 or exps.shape[0] == 0:
        return np.zeros((pts.shape[0],) + coefs.shape[1:], dtype=_C128)
    if USE_NUMBA:
        return _poly_eval_nb(exps, coefs, pts)
    return _poly_eval_np(exps, coefs, pts)


def warm_up():
    """Trigger one tiny call per kernel so JIT cost is paid up front."""
    pts = np.array([[0.1 + 0.1j, -0.2j]])
    dims = (1, 1)
    A0 = np.array([[1j, 0.0], [0.0, 0.5]], dtype=_C128)
    Ak = np.stack([np.eye(2), np.eye(2)]).astype(_C128)
    pencil_eval_many(A0, Ak, 1, pts)
    U = np.eye(2, dtype=_C128)
    gr_transfer_many(
        np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 2)), np.zeros((1, 1)),
        dims, pts,
    )
    state_defect_many(np.zeros((2, 2)), np.ones((2, 1)), dims, pts)
    herglotz_eval_many(np.zeros((1, 1)), U, np.ones((2, 1)), dims, pts)
    herglotz_defect_many(U, np.ones((2, 1)), dims, pts)
    poly_eval_many(np.array([[1, 0]]), np.ones((1, 1, 1)), pts)
