"""Herglotz realizations F(zeta) = beta + V* (W - P(zeta))^{-1} (W + P(zeta)) V
and the constructive steps that produce them from a unitary colligation:
splitting F(0), reducing to a normalized F_plus with F_plus(0) = I, and
assembling (beta, W, V) from a D = 0 realization of its Cayley transform."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    KernelNotConstant,
    NonzeroD,
    NotHermitian,
    NotUnitary,
    NotUnitaryW,
    ResolventSingular,
)
from .numerics import DEFAULT_TOL, Tolerances, mnorm, rank_factor_psd
from .polyalg import FunctionHandle
from .realization import GivoneRoesserRealization, _resolve
from .sampling import SamplePlan

__all__ = [
    "HerglotzRealization",
    "split_at_zero",
    "reduce_to_plus",
    "schur_to_herglotz",
    "xi_functions",
]


@dataclass(frozen=True)
class HerglotzRealization:
    d: int
    n: int
    state_dims: tuple
    beta: np.ndarray
    W: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "state_dims",
                           tuple(int(v) for v in self.state_dims))
        beta = np.asarray(self.beta, dtype=complex)
        W = np.asarray(self.W, dtype=complex)
        V = np.asarray(self.V, dtype=complex)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)
        m = self.m
        if len(self.state_dims) != self.d:
            raise DimensionMismatch("state_dims must have d entries")
        if beta.shape != (self.n, self.n) or W.shape != (m, m) \
                or V.shape != (m, self.n):
            raise DimensionMismatch("inconsistent (beta, W, V) shapes")
        atol = DEFAULT_TOL.identity_atol
        if mnorm(beta + beta.conj().T) > atol * max(1.0, mnorm(beta)):
            raise NotHermitian("beta must be skew-Hermitian")
        if mnorm(W.conj().T @ W - np.eye(m)) > atol * max(1.0, mnorm(W)):
            raise NotUnitary("W must be unitary")

    @property
    def m(self):
        return int(sum(self.state_dims))

    def eval(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex).reshape(self.d)
        if self.m == 0:
            return np.array(self.beta, copy=True)
        w = np.repeat(zeta, self.state_dims)
        M = self.W - np.diag(w)
        R = self.W @ self.V + w[:, None] * self.V
        return self.beta + self.V.conj().T @ _resolve(M, R, zeta)

    def eval_many(self, pts) -> np.ndarray:
        return _kernels.herglotz_eval_many(
            self.beta, self.W, self.V, self.state_dims, pts)

    def handle(self) -> FunctionHandle:
        return FunctionHandle(self.d, self.n, self.n, self.eval,
                              "polydisk", self.eval_many)


def split_at_zero(F0, tol: Tolerances = DEFAULT_TOL):
    """Split a center value into skew + PSD parts, F0 = beta + delta* delta.

    Returns ``(beta, gamma, delta)`` with beta skew-Hermitian, gamma PSD
    and delta of full row rank r = rank(gamma).
    """
    F0 = np.atleast_2d(np.asarray(F0, dtype=complex))
    if F0.shape[0] != F0.shape[1]:
        raise DimensionMismatch("F(0) must be square")
    beta = (F0 - F0.conj().T) / 2.0
    gamma = (F0 + F0.conj().T) / 2.0
    delta = rank_factor_psd(gamma, tol)  # raises NotPSD when not Herglotz
    return beta, gamma, delta


def reduce_to_plus(F: FunctionHandle, beta, delta,
                   tol: Tolerances = DEFAULT_TOL,
                   check_plan: SamplePlan = None) -> FunctionHandle:
    """Extract the normalized inner factor F_plus from F = beta + delta* F_plus delta.

    Uses the right inverse of the full-row-rank delta; the representation is
    re-verified at sampled points and a mismatch (i.e. the kernel of
    F(zeta) - beta moving with zeta) raises :class:`KernelNotConstant`.
    """
    beta = np.asarray(beta, dtype=complex)
    delta = np.atleast_2d(np.asarray(delta, dtype=complex))
    r = delta.shape[0]
    gram = delta @ delta.conj().T
    if r and np.linalg.cond(gram) > 1e10:
        raise DimensionMismatch("delta must have full row rank")
    pinv = delta.conj().T @ np.linalg.inv(gram) if r else delta.conj().T
    pinv_h = pinv.conj().T

    def evaluator(zeta):
        return pinv_h @ (F(zeta) - beta) @ pinv

    def batch(pts):
        vals = F.eval_many(pts)
        return pinv_h[None] @ (vals - beta[None]) @ pinv[None]

    Fp = FunctionHandle(F.d, r, r, evaluator, F.domain, batch)

    if check_plan is None:
        check_plan = SamplePlan("polydisk", seed=11, count=20)
    pts = np.concatenate([np.zeros((1, F.d), dtype=complex),
                          check_plan.points(F.d)])
    F_vals = F.eval_many(pts)
    Fp_vals = Fp.eval_many(pts)
    recon = beta[None] + delta.conj().T[None] @ Fp_vals @ delta[None]
    scale = max(1.0, float(np.abs(F_vals).max(initial=0.0)))
    resid = float(np.abs(recon - F_vals).max(initial=0.0))
    if resid > tol.identity_atol * scale * 10:
        raise KernelNotConstant(
            f"F - beta does not factor through delta (residual {resid:.3e})")
    center = mnorm(Fp_vals[0] - np.eye(r))
    if center > tol.identity_atol * 10:
        raise KernelNotConstant(f"F_plus(0) differs from I ({center:.3e})")
    return Fp


def schur_to_herglotz(re: GivoneRoesserRealization, beta, delta,
                      tol: Tolerances = DEFAULT_TOL) -> HerglotzRealization:
    """Assemble (beta, W, V) from a D = 0 unitary realization of the inner
    Cayley transform of F_plus: W = (A + BC)*, V = B delta."""
    if not re.unitary:
        raise NotUnitary("a unitary realization is required")
    beta = np.asarray(beta, dtype=complex)
    delta = np.atleast_2d(np.asarray(delta, dtype=complex))
    if delta.shape[0] != re.n:
        raise DimensionMismatch("delta row count must match the realization")
    d_norm = mnorm(re.D)
    if d_norm > tol.identity_atol:
        raise NonzeroD(f"D block has norm {d_norm:.3e}; the synthesis plan "
                       f"must pin F_plus(0) = 0")
    W = (re.A + re.B @ re.C).conj().T
    m = re.m
    defect = mnorm(W.conj().T @ W - np.eye(m))
    if defect > tol.identity_atol * max(1.0, mnorm(W)):
        raise NotUnitaryW(f"A + BC failed to be unitary ({defect:.3e})")
    bb = mnorm(re.B.conj().T @ re.B - np.eye(re.n))
    if bb > tol.identity_atol * max(1.0, mnorm(re.B)):
        raise NotUnitaryW(f"B* B differs from I ({bb:.3e})")
    V = re.B @ delta
    return HerglotzRealization(re.d, delta.shape[1], re.state_dims,
                               beta, W, V)


def xi_functions(H: HerglotzRealization):
    """The d functions xi_k(zeta) = sqrt(2) P_k (I - W* P(zeta))^{-1} V."""
    offsets = np.concatenate([[0], np.cumsum(H.state_dims)]).astype(int)
    root2 = np.sqrt(2.0)

    def stack_eval(zeta):
        zeta = np.asarray(zeta, dtype=complex).reshape(H.d)
        if H.m == 0:
            return np.zeros((0, H.n), dtype=complex)
        w = np.repeat(zeta, H.state_dims)
        M = np.eye(H.m, dtype=complex) - H.W.conj().T * w[None, :]
        return _resolve(M, H.V, zeta)

    handles = []
    for k in range(H.d):
        lo, hi = offsets[k], offsets[k + 1]

        def evaluator(zeta, lo=lo, hi=hi):
            return root2 * stack_eval(zeta)[lo:hi]

        def batch(pts, lo=lo, hi=hi):
            vals = _kernels.herglotz_defect_many(
                H.W, H.V, H.state_dims, pts)
            return root2 * vals[:, lo:hi, :]

        handles.append(FunctionHandle(
            H.d, hi - lo, H.n, evaluator, "polydisk", batch))
    return handles
