"""Givone-Roesser colligations: transfer evaluation, defect functions, and
lurking-isometry synthesis.

A realization stores the partitioned matrix U = [[A, B], [C, D]] together
with the state split (m_1, ..., m_d).  The transfer function is

    calF(zeta) = D + C (I - P(zeta) A)^{-1} P(zeta) B,

with P(zeta) = Diag[zeta_1 I_{m_1}, ..., zeta_d I_{m_d}].  When U is
unitary the defect functions theta_k(zeta) = P_k (I - A P(zeta))^{-1} B
decompose I - calF(w)* calF(z) against the kernels (1 - conj(w_k) z_k), and
the synthesis below inverts that: given calF and a matching family of
theta_k it reconstructs a unitary (optionally Hermitian and/or real) U.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cayley import TupleOfMatrices, CONTRACTION_MARGIN
from .errors import (
    DimensionMismatch,
    GramMismatch,
    NotStrictContraction,
    NotUnitary,
    RealInfeasible,
    ResolventSingular,
    SpanNotSaturated,
)
from .numerics import DEFAULT_TOL, Tolerances, mnorm, unitary_completion
from .polyalg import FunctionHandle
from .sampling import SamplePlan, SampleReport

__all__ = [
    "GivoneRoesserRealization",
    "defect_functions",
    "lurking_isometry",
    "synthesis_points",
    "verify_realization",
]

MAX_CONDITION = 1e12


def _resolve(M, B, point):
    cond = np.linalg.cond(M) if M.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ResolventSingular(
            f"resolvent condition {cond:.3e}", point=tuple(np.atleast_1d(point)))
    return np.linalg.solve(M, B)


@dataclass(frozen=True)
class GivoneRoesserRealization:
    d: int
    n: int
    state_dims: tuple
    U: np.ndarray
    unitary: bool = True
    hermitian: bool = False
    real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "state_dims",
                           tuple(int(v) for v in self.state_dims))
        U = np.asarray(self.U)
        if not self.real:
            U = U.astype(complex)
        object.__setattr__(self, "U", U)
        if len(self.state_dims) != self.d or any(v < 0 for v in self.state_dims):
            raise DimensionMismatch("state_dims must be d non-negative sizes")
        s = self.m + self.n
        if U.shape != (s, s):
            raise DimensionMismatch(f"U must be {s}x{s}, got {U.shape}")
        atol = DEFAULT_TOL.identity_atol * max(1.0, mnorm(U))
        if self.unitary and mnorm(U.conj().T @ U - np.eye(s)) > atol:
            raise NotUnitary("U fails the flagged unitarity")
        if self.hermitian and mnorm(U - U.conj().T) > atol:
            raise NotUnitary("U fails the flagged Hermitian symmetry")
        if self.real and np.abs(np.imag(U)).max(initial=0.0) > atol:
            raise NotUnitary("U fails the flagged realness")

    @property
    def m(self):
        return int(sum(self.state_dims))

    @property
    def A(self):
        return self.U[: self.m, : self.m]

    @property
    def B(self):
        return self.U[: self.m, self.m:]

    @property
    def C(self):
        return self.U[self.m:, : self.m]

    @property
    def D(self):
        return self.U[self.m:, self.m:]

    def block_projector(self, k):
        """P_k = Diag[0, ..., I_{m_k}, ..., 0] as an m x m matrix."""
        P = np.zeros((self.m, self.m), dtype=complex)
        off = int(sum(self.state_dims[:k]))
        P[off: off + self.state_dims[k], off: off + self.state_dims[k]] = (
            np.eye(self.state_dims[k]))
        return P

    def variable_matrix(self, zeta):
        zeta = np.asarray(zeta, dtype=complex).reshape(self.d)
        return np.diag(np.repeat(zeta, self.state_dims))

    def eval_transfer(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex).reshape(self.d)
        if self.m == 0:
            return np.array(self.D, dtype=complex, copy=True)
        w = np.repeat(zeta, self.state_dims)
        M = np.eye(self.m, dtype=complex) - w[:, None] * self.A
        X = _resolve(M, w[:, None] * self.B, zeta)
        return self.D + self.C @ X

    def eval_transfer_many(self, pts) -> np.ndarray:
        return _kernels.gr_transfer_many(
            self.A, self.B, self.C, self.D, self.state_dims, pts)

    def transfer_handle(self) -> FunctionHandle:
        return FunctionHandle(self.d, self.n, self.n, self.eval_transfer,
                              "polydisk", self.eval_transfer_many)

    def eval_transfer_tuple(self, T: TupleOfMatrices) -> np.ndarray:
        """calF(T) for a commuting tuple of strict contractions, computed by
        substituting sum_k P_k (x) T_k for P(zeta) in the transfer formula."""
        if T.d != self.d:
            raise DimensionMismatch("tuple length differs from d")
        for k, Tk in enumerate(T.mats):
            if mnorm(Tk) >= 1.0 - CONTRACTION_MARGIN:
                raise NotStrictContraction(
                    f"entry {k} has norm {mnorm(Tk):.6f}", index=k)
        s = T.size
        eye_s = np.eye(s, dtype=complex)
        block = np.repeat(np.arange(self.d), self.state_dims)
        PT = np.zeros((self.m * s, self.m * s), dtype=complex)
        for i, k in enumerate(block):
            PT[i * s: (i + 1) * s, i * s: (i + 1) * s] = T.mats[k]
        M = np.eye(self.m * s, dtype=complex) - PT @ np.kron(self.A, eye_s)
        X = _resolve(M, PT @ np.kron(self.B, eye_s), 0.0)
        return np.kron(self.D, eye_s) + np.kron(self.C, eye_s) @ X


def defect_functions(re: GivoneRoesserRealization):
    """The d functions theta_k(zeta) = P_k (I - A P(zeta))^{-1} B."""
    if not re.unitary:
        raise NotUnitary("defect functions are defined for unitary U")
    offsets = np.concatenate([[0], np.cumsum(re.state_dims)]).astype(int)
    A, B, dims = re.A, re.B, re.state_dims

    def stack_eval(zeta):
        zeta = np.asarray(zeta, dtype=complex).reshape(re.d)
        if re.m == 0:
            return np.zeros((0, re.n), dtype=complex)
        w = np.repeat(zeta, dims)
        M = np.eye(re.m, dtype=complex) - A * w[None, :]
        return _resolve(M, B, zeta)

    handles = []
    for k in range(re.d):
        lo, hi = offsets[k], offsets[k + 1]

        def evaluator(zeta, lo=lo, hi=hi):
            return stack_eval(zeta)[lo:hi]

        def batch(pts, lo=lo, hi=hi):
            return _kernels.state_defect_many(A, B, dims, pts)[:, lo:hi, :]

        handles.append(FunctionHandle(
            re.d, hi - lo, re.n, evaluator, "polydisk", batch))
    return handles


def synthesis_points(d, m, n, seed=0, real=False, extra=0):
    """Deterministic synthesis samples: origin, axis points, then seeded
    interior points, at least m + n + 5 in total."""
    total = max(m + n + 5, 2 * d + 3) + extra
    pts = [np.zeros(d, dtype=complex)]
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = 0.55
        pts.append(e.copy())
        e[k] = -0.35 if real else 0.4j
        pts.append(e.copy())
    rng = np.random.default_rng(seed)
    need = max(total - len(pts), 5)
    if real:
        rand = rng.uniform(-0.9, 0.9, size=(need, d)).astype(complex)
    else:
        r = 0.9 * np.sqrt(rng.uniform(size=(need, d)))
        th = rng.uniform(0, 2 * np.pi, size=(need, d))
        rand = r * np.exp(1j * th)
    return np.concatenate([np.stack(pts), rand])


def _stack_columns(F, thetas, pts):
    """Left/right lurking-isometry column blocks over the sample points."""
    n = F.rows
    m = sum(t.rows for t in thetas)
    theta_vals = [t.eval_many(pts) for t in thetas]
    F_vals = F.eval_many(pts)
    L = np.zeros((m + n, pts.shape[0] * n), dtype=complex)
    R = np.zeros((m + n, pts.shape[0] * n), dtype=complex)
    for i, zeta in enumerate(pts):
        off = 0
        cols = slice(i * n, (i + 1) * n)
        for k, tv in enumerate(theta_vals):
            rows = slice(off, off + tv.shape[1])
            L[rows, cols] = zeta[k] * tv[i]
            R[rows, cols] = tv[i]
            off += tv.shape[1]
        L[off:, cols] = np.eye(n)
        R[off:, cols] = F_vals[i]
    return L, R


def _numeric_rank(M, rtol):
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


def lurking_isometry(F: FunctionHandle, thetas, hermitian_wanted=False,
                     real_wanted=False, seed=0,
                     tol: Tolerances = DEFAULT_TOL) -> GivoneRoesserRealization:
    """Synthesize a unitary realization of ``F`` from a defect family.

    Requires I - F(w)*F(z) = sum_k (1 - conj(w_k) z_k) theta_k(w)* theta_k(z)
    to hold at the synthesis samples (GramMismatch otherwise).  The origin
    is always sampled, which pins D = F(0).  ``hermitian_wanted`` asks for a
    Hermitian unitary (the cross Gram must then be Hermitian) and
    ``real_wanted`` for a real one (samples are then taken on the real
    axis and the data must be real there).
    """
    if F.rows != F.cols:
        raise DimensionMismatch("F must be square-valued")
    d = F.d
    if len(thetas) != d:
        raise DimensionMismatch(f"expected {d} defect functions")
    dims = tuple(t.rows for t in thetas)
    m, n = int(sum(dims)), F.rows

    extra = 0
    for attempt in range(2):
        pts = synthesis_points(d, m, n, seed=seed, real=real_wanted,
                               extra=extra)
        more = synthesis_points(d, m, n, seed=seed + 1, real=real_wanted,
                                extra=0)[-5:]
        L, R = _stack_columns(F, thetas, pts)
        L_more, _ = _stack_columns(F, thetas, more)
        rank_now = _numeric_rank(L, tol.rank_rtol)
        rank_ext = _numeric_rank(np.concatenate([L, L_more], axis=1),
                                 tol.rank_rtol)
        if rank_ext == rank_now:
            break
        extra += 10
    else:
        raise SpanNotSaturated(
            "sample span kept growing after enlarging the plan")

    scale = max(1.0, mnorm(L) ** 2)
    gram = mnorm(L.conj().T @ L - R.conj().T @ R)
    if gram > tol.identity_atol * scale:
        msg = (f"decomposition fails at the samples (Gram defect "
               f"{gram:.3e})")
        if gram <= 100 * tol.identity_atol * scale:
            msg += "; marginal failure, consider reviewing identity_atol"
        raise GramMismatch(msg)

    if real_wanted:
        imag = max(np.abs(L.imag).max(initial=0.0),
                   np.abs(R.imag).max(initial=0.0))
        if imag > tol.identity_atol * max(1.0, mnorm(L)):
            raise RealInfeasible(
                f"sample data has imaginary part {imag:.3e}")
        L, R = L.real.copy(), R.real.copy()

    U = unitary_completion(L, R, hermitian_wanted=hermitian_wanted, tol=tol)
    re = GivoneRoesserRealization(
        d, n, dims, U, unitary=True, hermitian=hermitian_wanted,
        real=real_wanted)

    check = re.eval_transfer_many(pts)
    F_vals = F.eval_many(pts)
    resid = float(np.max(np.abs(check - F_vals))) if check.size else 0.0
    if resid > 100 * tol.identity_atol * max(1.0, float(np.abs(F_vals).max())):
        raise GramMismatch(
            f"synthesized realization misses F at samples ({resid:.3e})")
    return re


def verify_realization(re: GivoneRoesserRealization, F: FunctionHandle,
                       plan: SamplePlan = None,
                       tol: Tolerances = DEFAULT_TOL) -> SampleReport:
    """Compare the realization's transfer function against ``F`` on a plan
    and report structural residuals of U."""
    if plan is None:
        plan = SamplePlan("polydisk", seed=1, count=100)
    pts = plan.points(re.d)
    vals = re.eval_transfer_many(pts)
    ref = F.eval_many(pts)
    resid = np.abs(vals - ref).reshape(pts.shape[0], -1).max(axis=1)
    worst = int(np.argmax(resid))
    s = re.m + re.n
    details = {
        "unitarity": mnorm(re.U.conj().T @ re.U - np.eye(s)),
        "hermitian": mnorm(re.U - re.U.conj().T),
        "imag": float(np.abs(np.imag(re.U)).max(initial=0.0)),
    }
    return SampleReport(
        name="realization_vs_function",
        samples=pts.shape[0],
        skipped=0,
        max_residual=float(resid[worst]),
        threshold=tol.identity_atol,
        passed=bool(resid[worst] <= tol.identity_atol),
        worst_point=tuple(pts[worst]),
        details=details,
    )
