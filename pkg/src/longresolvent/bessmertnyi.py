"""Long resolvent pencils A(z) = A_0 + z_1 A_1 + ... + z_d A_d and their
Schur-complement functions f = A11 - A12 A22^{-1} A21.

The admissible coefficient classes are

    nonhomogeneous:    A_0 skew-Hermitian, A_k Hermitian PSD (k >= 1)
    homogeneous:       additionally A_0 = 0
    real_homogeneous:  additionally every entry real

Provided here: evaluation, the kernel decomposition
f(w)* + f(z) = sum_k (conj(w_k) + z_k) phi_k(w)* phi_k(z) with
phi_k = Y_k psi, psi(z) = [I_n; -A22(z)^{-1} A21(z)]; synthesis of a pencil
from a Herglotz realization through the partial Cayley transform of W;
normalization f = delta* f_plus delta with f_plus(e) = I; the structure
test for homogeneity of a Herglotz realization; and realification of a
decomposition."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cayley import disk_to_halfplane
from .errors import (
    DimensionMismatch,
    EigenvalueOneResidue,
    InnerBlockSingular,
    LongResolventError,
    NotHermitian,
    NotPSD,
    NotReal,
)
from .herglotz import HerglotzRealization
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    _orth_complement,
    eigenspace_of_unitary,
    hermitian_eig,
    mnorm,
    psd_sqrt,
    rank_factor_psd,
)
from .polyalg import FunctionHandle
from .sampling import SamplePlan

__all__ = [
    "LongResolventPencil",
    "PencilDecomposition",
    "pencil_decomposition",
    "theta_from_phi",
    "herglotz_to_pencil",
    "normalize_homogeneous",
    "homogeneous_structure_check",
    "realify_decomposition",
]

TAGS = ("nonhomogeneous", "homogeneous", "real_homogeneous")

# spectrum of the compressed W0 must keep this distance from 1
EIGENSPACE_GAP = 1e-6


@dataclass(frozen=True)
class LongResolventPencil:
    d: int
    n: int
    m: int
    coefficients: tuple
    tag: str = "nonhomogeneous"

    def __post_init__(self):
        coeffs = tuple(np.asarray(c, dtype=complex) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if self.tag not in TAGS:
            raise DimensionMismatch(f"unknown pencil tag {self.tag!r}")
        if len(coeffs) != self.d + 1:
            raise DimensionMismatch(
                f"expected {self.d + 1} coefficients, got {len(coeffs)}")
        s = self.n + self.m
        if any(c.shape != (s, s) for c in coeffs):
            raise DimensionMismatch(f"coefficients must all be {s}x{s}")
        tol = DEFAULT_TOL
        A0 = coeffs[0]
        scale0 = max(1.0, mnorm(A0))
        if mnorm(A0 + A0.conj().T) > tol.identity_atol * scale0:
            raise NotHermitian("A_0 must be skew-Hermitian")
        for k, Ak in enumerate(coeffs[1:], start=1):
            scale = max(1.0, mnorm(Ak))
            if mnorm(Ak - Ak.conj().T) > tol.identity_atol * scale:
                raise NotHermitian(f"A_{k} must be Hermitian")
            lam = np.linalg.eigvalsh((Ak + Ak.conj().T) / 2.0)
            if lam.size and lam[0] < -tol.psd_atol * scale:
                raise NotPSD(f"A_{k} has eigenvalue {lam[0]:.3e}")
        if self.tag in ("homogeneous", "real_homogeneous"):
            if mnorm(A0) > tol.identity_atol:
                raise NotHermitian("homogeneous pencils require A_0 = 0")
        if self.tag == "real_homogeneous":
            worst = max(float(np.abs(c.imag).max(initial=0.0)) for c in coeffs)
            if worst > tol.identity_atol:
                raise NotReal(f"real pencil has imaginary entry {worst:.3e}")

    @property
    def size(self):
        return self.n + self.m

    def pencil_value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(self.d)
        A = self.coefficients[0].copy()
        for k in range(self.d):
            A += z[k] * self.coefficients[k + 1]
        return A

    def blocks(self, z):
        A = self.pencil_value(z)
        n = self.n
        return A[:n, :n], A[:n, n:], A[n:, :n], A[n:, n:]

    def eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(self.d)
        A11, A12, A21, A22 = self.blocks(z)
        if self.m == 0:
            return A11
        cond = np.linalg.cond(A22)
        if not np.isfinite(cond) or cond > 1e12:
            raise InnerBlockSingular(
                f"A22(z) condition {cond:.3e}", point=tuple(z))
        return A11 - A12 @ np.linalg.solve(A22, A21)

    def eval_many(self, pts) -> np.ndarray:
        return _kernels.pencil_eval_many(
            self.coefficients[0], np.stack(self.coefficients[1:]),
            self.n, pts)

    def handle(self) -> FunctionHandle:
        return FunctionHandle(self.d, self.n, self.n, self.eval,
                              "polyhalfplane", self.eval_many)


def _hermitize(M):
    return (M + M.conj().T) / 2.0


def _skewize(M):
    return (M - M.conj().T) / 2.0


def _psi_many(pcl: LongResolventPencil, pts):
    """psi(z) = [I_n; -A22(z)^{-1} A21(z)] stacked over (N, d) points."""
    pts = np.asarray(pts, dtype=complex)
    N = pts.shape[0]
    n, m = pcl.n, pcl.m
    top = np.broadcast_to(np.eye(n, dtype=complex), (N, n, n))
    if m == 0:
        return top.copy()
    Az = pcl.coefficients[0][None] + np.tensordot(
        pts, np.stack(pcl.coefficients[1:]), axes=(1, 0))
    bottom = -np.linalg.solve(Az[:, n:, n:], Az[:, n:, :n])
    return np.concatenate([top, bottom], axis=1)


def _psi_point(pcl: LongResolventPencil, z):
    z = np.asarray(z, dtype=complex).reshape(pcl.d)
    n = pcl.n
    if pcl.m == 0:
        return np.eye(n, dtype=complex)
    _, _, A21, A22 = pcl.blocks(z)
    cond = np.linalg.cond(A22)
    if not np.isfinite(cond) or cond > 1e12:
        raise InnerBlockSingular(
            f"A22(z) condition {cond:.3e}", point=tuple(z))
    return np.concatenate([np.eye(n, dtype=complex),
                           -np.linalg.solve(A22, A21)])


@dataclass(frozen=True)
class PencilDecomposition:
    """Kernel decomposition data: factors Y_k with Y_k* Y_k = A_k."""

    pencil: LongResolventPencil
    factors: tuple

    @property
    def ranks(self):
        return tuple(Y.shape[0] for Y in self.factors)

    def handles(self):
        """The d functions phi_k(z) = Y_k psi(z), of shape (N_k, n)."""
        pcl = self.pencil
        out = []
        for Y in self.factors:
            Yc = np.asarray(Y, dtype=complex)

            def evaluator(z, Yc=Yc):
                return Yc @ _psi_point(pcl, z)

            def batch(pts, Yc=Yc):
                return Yc[None] @ _psi_many(pcl, pts)

            out.append(FunctionHandle(pcl.d, Yc.shape[0], pcl.n,
                                      evaluator, "polyhalfplane", batch))
        return out


def pencil_decomposition(pcl: LongResolventPencil, use_sqrt_factors=False,
                         tol: Tolerances = DEFAULT_TOL,
                         verify_pairs=6) -> PencilDecomposition:
    """Factor the pencil coefficients and return the decomposition of
    f(w)* + f(z) against the kernels (conj(w_k) + z_k).

    By default each factor is the compressed rank factor of A_k (N_k rows);
    ``use_sqrt_factors`` switches to the full PSD square root A_k^{1/2}.
    """
    factors = []
    for Ak in pcl.coefficients[1:]:
        if use_sqrt_factors:
            factors.append(psd_sqrt(Ak, tol))
        else:
            factors.append(rank_factor_psd(Ak, tol))
    deco = PencilDecomposition(pcl, tuple(factors))

    if verify_pairs:
        plan = SamplePlan("polyhalfplane", seed=23, count=2 * verify_pairs)
        pts = plan.points(pcl.d)
        ws, zs = pts[:verify_pairs], pts[verify_pairs:]
        fw = pcl.eval_many(ws)
        fz = pcl.eval_many(zs)
        phis = [h.eval_many(np.concatenate([ws, zs])) for h in deco.handles()]
        worst = 0.0
        for i in range(verify_pairs):
            lhs = fw[i].conj().T + fz[i]
            rhs = np.zeros_like(lhs)
            for k, pv in enumerate(phis):
                coef = np.conj(ws[i, k]) + zs[i, k]
                rhs += coef * pv[i].conj().T @ pv[verify_pairs + i]
            worst = max(worst, mnorm(lhs - rhs))
        scale = max(1.0, float(max(np.abs(fw).max(), np.abs(fz).max())))
        if worst > 100 * tol.identity_atol * scale:
            raise LongResolventError(
                f"decomposition self-check failed ({worst:.3e})")
    return deco


def theta_from_phi(phis, calF: FunctionHandle, right=None,
                   tol: Tolerances = DEFAULT_TOL):
    """The disk-side defect family matched to a halfplane decomposition:

        theta_k(zeta) = (1 - zeta_k)^{-1} phi_k(C(zeta)) R (I - calF(zeta)),

    with C the disk-to-halfplane map and R an optional right dressing
    (identity by default; the normalized pipeline passes the right inverse
    of delta).  Invertibility of I - calF(zeta) holds on the polydisk for
    Cayley-inner data and is checked by the evaluation itself.
    """
    r = calF.rows
    if calF.cols != r:
        raise DimensionMismatch("calF must be square-valued")
    R = np.eye(r, dtype=complex) if right is None else np.asarray(
        right, dtype=complex)
    eye = np.eye(r, dtype=complex)
    out = []
    for k, phi in enumerate(phis):
        if R.shape != (phi.cols, r):
            raise DimensionMismatch("dressing shape mismatch")

        def evaluator(zeta, k=k, phi=phi):
            zeta = np.asarray(zeta, dtype=complex).reshape(calF.d)
            z = disk_to_halfplane(zeta)
            val = phi(z) @ R @ (eye - calF(zeta))
            return val / (1.0 - zeta[k])

        def batch(pts, k=k, phi=phi):
            pts = np.asarray(pts, dtype=complex)
            z = disk_to_halfplane(pts)
            pv = phi.eval_many(z)
            fv = calF.eval_many(pts)
            core = pv @ R[None] @ (eye[None] - fv)
            return core / (1.0 - pts[:, k])[:, None, None]

        out.append(FunctionHandle(calF.d, phi.rows, r, evaluator,
                                  "polydisk", batch))
    return out


def herglotz_to_pencil(H: HerglotzRealization,
                       tol: Tolerances = DEFAULT_TOL) -> LongResolventPencil:
    """Synthesize a long resolvent pencil from a Herglotz realization.

    Splits C^m into the eigenvalue-1 eigenspace of W and its complement,
    Cayley-transforms the compressed W to the skew matrix
    alpha = (I - W0)^{-1}(I + W0), and assembles

        A_0 = [[beta + V2*(a+I)J(a+I)*V2,  V2*(a+I)], [-(a+I)*V2,  -alpha]]
        A_k = [[V1*(P_k)_11 V1,  V1*(P_k)_12], [(P_k)_21 V1,  (P_k)_22]]

    with J = -alpha (I - alpha^2)^{-1} and (P_k)_ij the blocks of the
    variable projectors in the split basis.  The result is re-checked
    against the halfplane composition of the realization at sample points.
    """
    m, n, d = H.m, H.n, H.d
    QH = eigenspace_of_unitary(H.W, 1.0, tol)
    h = QH.shape[1]
    Qp = _orth_complement(QH, m)
    mprime = m - h

    W0 = Qp.conj().T @ H.W @ Qp
    if mprime:
        gap = float(np.min(np.abs(np.linalg.eigvals(W0) - 1.0)))
        if gap < EIGENSPACE_GAP:
            raise EigenvalueOneResidue(
                f"W0 keeps an eigenvalue within {gap:.3e} of 1")
    eye_p = np.eye(mprime, dtype=complex)
    alpha = np.linalg.solve(eye_p - W0, eye_p + W0)
    skew = mnorm(alpha + alpha.conj().T)
    if skew > 100 * tol.identity_atol * max(1.0, mnorm(alpha) ** 2):
        raise EigenvalueOneResidue(
            f"partial Cayley transform lost skewness ({skew:.3e})")
    alpha = _skewize(alpha)
    J = -alpha @ np.linalg.inv(eye_p - alpha @ alpha)
    J = _skewize(J)

    V1 = QH.conj().T @ H.V
    V2 = Qp.conj().T @ H.V
    ap = alpha + eye_p

    A0 = np.zeros((n + mprime, n + mprime), dtype=complex)
    A0[:n, :n] = H.beta + V2.conj().T @ ap @ J @ ap.conj().T @ V2
    A0[:n, n:] = V2.conj().T @ ap
    A0[n:, :n] = -ap.conj().T @ V2
    A0[n:, n:] = -alpha
    A0 = _skewize(A0)

    offsets = np.concatenate([[0], np.cumsum(H.state_dims)]).astype(int)
    coeffs = [A0]
    for k in range(d):
        sel = np.zeros(m)
        sel[offsets[k]: offsets[k + 1]] = 1.0
        Pk1 = QH.conj().T * sel[None, :]  # QH* P_k, shape (h, m)
        Pk11 = Pk1 @ QH
        Pk12 = Pk1 @ Qp
        Pk2 = Qp.conj().T * sel[None, :]
        Pk21 = Pk2 @ QH
        Pk22 = Pk2 @ Qp
        Ak = np.zeros((n + mprime, n + mprime), dtype=complex)
        Ak[:n, :n] = V1.conj().T @ Pk11 @ V1
        Ak[:n, n:] = V1.conj().T @ Pk12
        Ak[n:, :n] = Pk21 @ V1
        Ak[n:, n:] = Pk22
        coeffs.append(_hermitize(Ak))

    # classify: a vanishing A_0 yields a homogeneous pencil, and fully real
    # data a real one
    tag = "nonhomogeneous"
    if mnorm(A0) <= tol.identity_atol:
        coeffs[0] = np.zeros_like(A0)
        tag = "homogeneous"
        worst_imag = max(float(np.abs(c.imag).max(initial=0.0))
                         for c in coeffs)
        if worst_imag <= tol.identity_atol:
            coeffs = [c.real.astype(complex) for c in coeffs]
            tag = "real_homogeneous"
    pcl = LongResolventPencil(d, n, mprime, tuple(coeffs), tag)

    plan = SamplePlan("polyhalfplane", seed=31, count=25)
    zs = plan.points(d)
    zetas = (zs - 1.0) / (zs + 1.0)
    got = pcl.eval_many(zs)
    want = H.eval_many(zetas)
    resid = float(np.abs(got - want).max(initial=0.0))
    scale = max(1.0, float(np.abs(want).max(initial=0.0)))
    if resid > 100 * tol.identity_atol * scale:
        raise LongResolventError(
            f"pencil synthesis postcondition failed ({resid:.3e})")
    return pcl


def normalize_homogeneous(pcl: LongResolventPencil,
                          tol: Tolerances = DEFAULT_TOL):
    """Normalize a homogeneous pencil: f = delta* f_plus delta with
    f_plus(e) = I on the reduced output space, e = (1, ..., 1).

    Returns ``(delta, pcl_plus)``; delta has full row rank
    r = rank f(e)."""
    if pcl.tag == "nonhomogeneous":
        raise DimensionMismatch("normalization expects a homogeneous pencil")
    e = np.ones(pcl.d, dtype=complex)
    fe = pcl.eval(e)
    lam, Q = hermitian_eig(fe, tol)
    scale = max(1.0, float(lam[-1]) if lam.size else 0.0)
    if lam.size and lam[0] < -tol.psd_atol * scale:
        raise NotPSD(f"f(e) has eigenvalue {lam[0]:.3e}")
    keep = lam > tol.rank_rtol * max(float(lam[-1]) if lam.size else 0.0, 0.0)
    kappa = Q[:, keep]  # orthonormal basis of the complement of ker f(e)
    r = kappa.shape[1]

    def conjugate(coeffs, Tn):
        n_cur = coeffs[0].shape[0] - pcl.m
        big = np.zeros((n_cur + pcl.m, Tn.shape[1] + pcl.m), dtype=complex)
        big[:n_cur, : Tn.shape[1]] = Tn
        big[n_cur:, Tn.shape[1]:] = np.eye(pcl.m)
        return tuple(big.conj().T @ c @ big for c in coeffs)

    reduced = conjugate(pcl.coefficients, kappa)
    pcl_r = LongResolventPencil(
        pcl.d, r, pcl.m,
        tuple(np.zeros_like(reduced[0]) if i == 0 else _hermitize(c)
              for i, c in enumerate(reduced)),
        pcl.tag)
    fre = pcl_r.eval(e)
    lam_r, Q_r = hermitian_eig(fre, tol)
    if lam_r.size and lam_r[0] <= tol.psd_atol:
        raise NotPSD("reduced f(e) is not positive definite")
    s_inv = (Q_r * (1.0 / np.sqrt(lam_r))) @ Q_r.conj().T
    s_fwd = (Q_r * np.sqrt(lam_r)) @ Q_r.conj().T

    final = conjugate(pcl_r.coefficients, s_inv)
    pcl_plus = LongResolventPencil(
        pcl.d, r, pcl.m,
        tuple(np.zeros_like(final[0]) if i == 0 else _hermitize(c)
              for i, c in enumerate(final)),
        pcl.tag)
    delta = s_fwd @ kappa.conj().T

    resid_e = mnorm(pcl_plus.eval(e) - np.eye(r))
    plan = SamplePlan("polyhalfplane", seed=37, count=15)
    zs = plan.points(pcl.d)
    recon = delta.conj().T[None] @ pcl_plus.eval_many(zs) @ delta[None]
    orig = pcl.eval_many(zs)
    resid = float(np.abs(recon - orig).max(initial=0.0))
    scale = max(1.0, float(np.abs(orig).max(initial=0.0)))
    if resid_e > 100 * tol.identity_atol or resid > 100 * tol.identity_atol * scale:
        raise LongResolventError(
            f"normalization postcondition failed ({max(resid, resid_e):.3e})")
    return delta, pcl_plus


def homogeneous_structure_check(H: HerglotzRealization,
                                threshold=None,
                                tol: Tolerances = DEFAULT_TOL):
    """Test the three structural marks of homogeneity on a realization:
    beta = 0, W Hermitian, and range(V) inside the eigenvalue-1 eigenspace
    of W.  Returns a report whose details carry the three residuals."""
    from .sampling import SampleReport

    if threshold is None:
        threshold = tol.identity_atol
    beta_res = mnorm(H.beta)
    sym_res = mnorm(H.W - H.W.conj().T)
    QH = eigenspace_of_unitary(H.W, 1.0, tol)
    range_res = mnorm(H.V - QH @ (QH.conj().T @ H.V))
    worst = max(beta_res, sym_res, range_res)
    return SampleReport(
        name="homogeneous_structure",
        samples=3,
        skipped=0,
        max_residual=float(worst),
        threshold=float(threshold),
        passed=bool(worst <= threshold),
        worst_point=None,
        details={"beta": beta_res, "w_symmetry": sym_res,
                 "v_range": range_res},
    )


def _sharp_handle(phi: FunctionHandle) -> FunctionHandle:
    def evaluator(z):
        return np.conj(phi(np.conj(np.asarray(z, dtype=complex))))

    def batch(pts):
        return np.conj(phi.eval_many(np.conj(np.asarray(pts, dtype=complex))))

    return FunctionHandle(phi.d, phi.rows, phi.cols, evaluator,
                          phi.domain, batch if phi.batch_evaluator else None)


def realify_decomposition(phis, f: FunctionHandle,
                          tol: Tolerances = DEFAULT_TOL,
                          plan: SamplePlan = None):
    """Replace each phi_k by the stacked real/imaginary split

        Col[(phi_k + phi_k#)/2, (phi_k - phi_k#)/(2i)],

    which takes real values at real points and preserves the kernel sums.
    Requires the underlying f to be real, checked on conjugation pairs."""
    if plan is None:
        plan = SamplePlan("conjugation_pairs", seed=41, count=20)
    z, zbar = plan.pairs(f.d)
    fv = f.eval_many(z)
    fc = f.eval_many(zbar)
    worst = float(np.abs(fc - np.conj(fv)).max(initial=0.0))
    if worst > tol.identity_atol * max(1.0, float(np.abs(fv).max())):
        raise NotReal(f"f is not real ({worst:.3e} on conjugation pairs)")

    out = []
    for phi in phis:
        sharp = _sharp_handle(phi)

        def evaluator(zpt, phi=phi, sharp=sharp):
            a = phi(zpt)
            b = sharp(zpt)
            return np.concatenate([(a + b) / 2.0, (a - b) / 2.0j])

        def batch(pts, phi=phi, sharp=sharp):
            a = phi.eval_many(pts)
            b = sharp.eval_many(pts)
            return np.concatenate([(a + b) / 2.0, (a - b) / 2.0j], axis=1)

        out.append(FunctionHandle(phi.d, 2 * phi.rows, phi.cols, evaluator,
                                  phi.domain, batch))
    return out
