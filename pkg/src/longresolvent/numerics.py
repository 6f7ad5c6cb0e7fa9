"""Dense complex linear-algebra contracts used by every other module.

Backed by numpy/scipy (LAPACK) factorizations; what this module owns is the
contract around them: tolerance handling, deterministic tie-breaking, and
the completion / factorization conventions the synthesis code relies on.

Conventions fixed here:

* ``rank_factor_psd`` normalizes each factor row so its first nonzero
  entry is real positive, making factors reproducible across runs.
* ``unitary_completion`` orthogonalizes with column pivoting (largest
  residual norm, lowest index on ties) and maps complement basis vectors
  in index order, so the completed unitary is a deterministic function of
  its inputs.
* eigenvalues of a unitary within angular distance ``angular_tol`` of the
  target are clustered into the requested eigenspace.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    GramMismatch,
    HermitianInfeasible,
    NotHermitian,
    NotPSD,
    NotUnitary,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "mnorm",
    "hermitian_eig",
    "psd_sqrt",
    "rank_factor_psd",
    "unitary_completion",
    "eigenspace_of_unitary",
]


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle threaded explicitly through every operation.

    identity_atol: absolute tolerance for algebraic identities.
    rank_rtol: relative singular-value cutoff for rank decisions.
    psd_atol: slack allowed below zero for minimum eigenvalues.
    """

    identity_atol: float = 1e-9
    rank_rtol: float = 1e-10
    psd_atol: float = 1e-10

    def __post_init__(self):
        if not (self.identity_atol > 0 and self.rank_rtol > 0 and self.psd_atol > 0):
            raise ValueError("all tolerances must be strictly positive")


DEFAULT_TOL = Tolerances()


def mnorm(M) -> float:
    """Spectral norm, with the empty matrix measuring 0."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _require_square(M, op):
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian(f"{op}: expected a square matrix, got {M.shape}")


def hermitian_eig(M, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(lam, Q)`` with ``lam`` ascending and ``Q`` unitary such that
    ``M = Q diag(lam) Q*``.  Raises :class:`NotHermitian` when the symmetry
    defect exceeds ``identity_atol * max(1, ||M||)``.
    """
    M = np.asarray(M, dtype=complex)
    _require_square(M, "hermitian_eig")
    scale = max(1.0, mnorm(M))
    defect = mnorm(M - M.conj().T)
    if defect > tol.identity_atol * scale:
        raise NotHermitian(f"symmetry defect {defect:.3e} exceeds tolerance")
    H = (M + M.conj().T) / 2.0
    if np.abs(H.imag).max(initial=0.0) == 0.0:
        # real symmetric input: keep the eigenvectors exactly real
        lam, Q = np.linalg.eigh(H.real)
        Q = Q.astype(complex)
    else:
        lam, Q = np.linalg.eigh(H)
    return lam, Q


def psd_sqrt(M, tol: Tolerances = DEFAULT_TOL):
    """Hermitian PSD square root; eigenvalues within ``psd_atol`` of zero
    are clamped to zero, anything more negative raises :class:`NotPSD`."""
    lam, Q = hermitian_eig(M, tol)
    scale = max(1.0, float(lam[-1]) if lam.size else 0.0)
    if lam.size and lam[0] < -tol.psd_atol * scale:
        raise NotPSD(f"minimum eigenvalue {lam[0]:.3e} below -psd_atol")
    lam = np.clip(lam, 0.0, None)
    return (Q * np.sqrt(lam)) @ Q.conj().T


def _phase_fix_rows(Y):
    """Rotate each row so its first nonzero entry is real positive."""
    Y = Y.copy()
    for i in range(Y.shape[0]):
        row = Y[i]
        mags = np.abs(row)
        big = mags.max() if mags.size else 0.0
        if big == 0.0:
            continue
        j = int(np.argmax(mags > 1e-12 * big))
        ph = row[j] / abs(row[j])
        Y[i] = row * np.conj(ph)
    return Y


def rank_factor_psd(M, tol: Tolerances = DEFAULT_TOL):
    """Full-row-rank factor ``Y`` (r x n) of a PSD matrix: ``Y* Y = M``.

    ``r`` is the numerical rank of ``M`` at ``rank_rtol``; row phases follow
    the first-nonzero-real-positive convention.
    """
    lam, Q = hermitian_eig(M, tol)
    scale = max(1.0, float(lam[-1]) if lam.size else 0.0)
    if lam.size and lam[0] < -tol.psd_atol * scale:
        raise NotPSD(f"minimum eigenvalue {lam[0]:.3e} below -psd_atol")
    lam = np.clip(lam, 0.0, None)
    cutoff = tol.rank_rtol * (float(lam[-1]) if lam.size else 0.0)
    keep = np.nonzero(lam > cutoff)[0]
    # descending eigenvalues, ties kept in eigh order
    keep = keep[np.argsort(-lam[keep], kind="stable")]
    Y = (np.sqrt(lam[keep])[:, None] * Q[:, keep].conj().T)
    return _phase_fix_rows(Y)


def _pivoted_span(M, thresh, max_vecs=None):
    """Column-pivoted modified Gram-Schmidt with coefficient tracking.

    Returns ``(Q, X)`` with ``Q = M @ X`` having orthonormal columns that
    span the column space of ``M`` at threshold ``thresh``.  Pivots choose
    the largest residual norm, then the lowest index.
    """
    s, t = M.shape
    dtype = M.dtype
    resid = M.astype(dtype, copy=True)
    coeff = np.eye(t, dtype=dtype)
    used = np.zeros(t, dtype=bool)
    qs, xs = [], []
    limit = min(s, t) if max_vecs is None else min(s, t, max_vecs)
    for _ in range(limit):
        norms = np.linalg.norm(resid, axis=0)
        norms[used] = -1.0
        j = int(np.argmax(norms))
        if norms[j] <= thresh:
            break
        q = resid[:, j] / norms[j]
        x = coeff[:, j] / norms[j]
        # two projection passes for orthogonality near machine precision
        for _pass in range(2):
            h = q.conj() @ resid
            h[used] = 0.0
            resid -= np.outer(q, h)
            coeff -= np.outer(x, h)
        used[j] = True
        qs.append(q)
        xs.append(x)
    if not qs:
        return np.zeros((s, 0), dtype=dtype), np.zeros((t, 0), dtype=dtype)
    return np.stack(qs, axis=1), np.stack(xs, axis=1)


def _orth_complement(Q, s):
    """Orthonormal basis of the complement of span(Q) in C^s (or R^s)."""
    dtype = Q.dtype
    resid = np.eye(s, dtype=dtype) - Q @ Q.conj().T
    # rank of the projector is exactly s - Q.shape[1]; any genuinely new
    # direction keeps a residual column norm >= 1/sqrt(s)
    C, _ = _pivoted_span(resid, 1e-8, max_vecs=s - Q.shape[1])
    return C


def unitary_completion(L, R, hermitian_wanted: bool = False,
                       tol: Tolerances = DEFAULT_TOL):
    """Unitary ``U`` with ``U L = R``, given the Gram match ``L*L = R*R``.

    Without ``hermitian_wanted`` the completion maps a pivoted basis of
    span(L) onto the matched basis of span(R) and the complement bases onto
    each other in index order.  With it, ``U`` is defined on
    span(L)+span(R) by swapping L and R columns simultaneously (which
    requires the cross Gram ``L*R`` to be Hermitian) and extended by the
    identity, which yields a Hermitian unitary.

    Real inputs produce a real (orthogonal) ``U``.
    """
    L = np.asarray(L)
    R = np.asarray(R)
    if L.shape != R.shape:
        raise GramMismatch(f"shape mismatch {L.shape} vs {R.shape}")
    if not (np.iscomplexobj(L) or np.iscomplexobj(R)):
        L = np.asarray(L, dtype=np.float64)
        R = np.asarray(R, dtype=np.float64)
    else:
        L = np.asarray(L, dtype=complex)
        R = np.asarray(R, dtype=complex)
    s = L.shape[0]
    scale = max(1.0, mnorm(L) ** 2)
    gram_defect = mnorm(L.conj().T @ L - R.conj().T @ R)
    if gram_defect > tol.identity_atol * scale:
        msg = f"Gram defect {gram_defect:.3e} exceeds tolerance"
        if gram_defect <= 100 * tol.identity_atol * scale:
            msg += " (marginally; consider reviewing identity_atol)"
        raise GramMismatch(msg)

    if hermitian_wanted:
        cross = mnorm(L.conj().T @ R - R.conj().T @ L)
        if cross > tol.identity_atol * scale:
            raise HermitianInfeasible(
                f"cross Gram defect {cross:.3e}: no Hermitian completion")
        J = np.concatenate([L, R], axis=1)
        thresh = tol.rank_rtol * (mnorm(J) if J.size else 0.0)
        Q, X = _pivoted_span(J, thresh)
        Qp = np.concatenate([R, L], axis=1) @ X
        U = Qp @ Q.conj().T + (np.eye(s, dtype=L.dtype) - Q @ Q.conj().T)
    else:
        thresh = tol.rank_rtol * (mnorm(L) if L.size else 0.0)
        QL, X = _pivoted_span(L, thresh)
        QR = R @ X
        CL = _orth_complement(QL, s)
        CR = _orth_complement(QR, s)
        U = QR @ QL.conj().T + CR @ CL.conj().T

    udefect = mnorm(U.conj().T @ U - np.eye(s, dtype=U.dtype))
    if udefect > 100 * tol.identity_atol:
        raise GramMismatch(f"completion lost unitarity ({udefect:.3e})")
    map_defect = mnorm(U @ L - R)
    if map_defect > tol.identity_atol * max(1.0, mnorm(L)) * 100:
        raise GramMismatch(f"completion fails to map L to R ({map_defect:.3e})")
    if hermitian_wanted:
        hdefect = mnorm(U - U.conj().T)
        if hdefect > 100 * tol.identity_atol:
            raise HermitianInfeasible(f"completed U not Hermitian ({hdefect:.3e})")
    return U


def eigenspace_of_unitary(W, lam, tol: Tolerances = DEFAULT_TOL,
                          angular_tol: float = 1e-8):
    """Orthonormal basis of the eigenspace of a unitary ``W`` at ``lam``.

    Eigenvalues within (chordal) distance ``angular_tol`` of ``lam`` are
    clustered together; the result may have zero columns.
    """
    W = np.asarray(W, dtype=complex)
    _require_square(W, "eigenspace_of_unitary")
    m = W.shape[0]
    if m == 0:
        return np.zeros((0, 0), dtype=complex)
    defect = mnorm(W.conj().T @ W - np.eye(m))
    if defect > tol.identity_atol * max(1.0, mnorm(W)):
        raise NotUnitary(f"unitarity defect {defect:.3e}")
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("target eigenvalue must be unimodular")
    _, Z, sdim = scipy.linalg.schur(
        W, output="complex", sort=lambda mu: abs(mu - lam) <= angular_tol)
    QH = Z[:, :sdim]
    resid = mnorm(W @ QH - lam * QH)
    if resid > tol.identity_atol * max(1.0, mnorm(W)):
        raise NotUnitary(f"eigenspace residual {resid:.3e} at {lam}")
    return QH
