"""Cayley maps: variable (disk <-> right halfplane), value (Schur <->
Herglotz), their composition, and the operator-tuple version."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    CayleySingular,
    CommutationViolated,
    DimensionMismatch,
    NotStrictContraction,
    NotStrictlyAccretive,
    SingularShift,
)
from .numerics import DEFAULT_TOL, Tolerances, mnorm
from .polyalg import FunctionHandle

__all__ = [
    "disk_to_halfplane",
    "halfplane_to_disk",
    "value_cayley",
    "TupleOfMatrices",
    "operator_cayley_tuple",
    "double_cayley",
]

SINGULAR_RADIUS = 1e-14
CONTRACTION_MARGIN = 1e-10
MAX_CONDITION = 1e12


def disk_to_halfplane(zeta):
    """z_k = (1 + zeta_k) / (1 - zeta_k), componentwise.

    Works on a single point (d,) or a stack (N, d).
    """
    zeta = np.asarray(zeta, dtype=complex)
    bad = np.abs(1.0 - zeta) <= SINGULAR_RADIUS
    if np.any(bad):
        k = int(np.argwhere(bad)[0][-1])
        raise CayleySingular(f"coordinate {k} at the pole zeta=1",
                             point=zeta, coordinate=k)
    return (1.0 + zeta) / (1.0 - zeta)


def halfplane_to_disk(z):
    """zeta_k = (z_k - 1) / (z_k + 1), componentwise; inverse of
    :func:`disk_to_halfplane`."""
    z = np.asarray(z, dtype=complex)
    bad = np.abs(1.0 + z) <= SINGULAR_RADIUS
    if np.any(bad):
        k = int(np.argwhere(bad)[0][-1])
        raise CayleySingular(f"coordinate {k} at the pole z=-1",
                             point=z, coordinate=k)
    return (z - 1.0) / (z + 1.0)


def _checked_solve(A, B, what):
    cond = np.linalg.cond(A) if A.size else 1.0
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularShift(f"{what} has condition {cond:.3e}", condition=cond)
    return np.linalg.solve(A, B)


def value_cayley(M, direction):
    """Matrix Cayley transform between Herglotz-type and Schur-type values.

    herglotz_to_schur: (M - I)(M + I)^{-1}
    schur_to_herglotz: (I - M)^{-1}(I + M)
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch("value_cayley needs a square matrix")
    eye = np.eye(M.shape[0], dtype=complex)
    if direction == "herglotz_to_schur":
        # (M-I)(M+I)^{-1} computed as a right division
        X = _checked_solve((M + eye).T, (M - eye).T, "M + I")
        return X.T
    if direction == "schur_to_herglotz":
        return _checked_solve(eye - M, eye + M, "I - M")
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class TupleOfMatrices:
    """d commuting square matrices of a common size."""

    mats: tuple
    commutation_tol: float = 1e-9

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=complex) for m in self.mats)
        object.__setattr__(self, "mats", mats)
        if not mats:
            raise DimensionMismatch("empty tuple")
        s = mats[0].shape
        if s[0] != s[1] or any(m.shape != s for m in mats):
            raise DimensionMismatch("tuple entries must be square, equal size")
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                comm = mnorm(mats[i] @ mats[j] - mats[j] @ mats[i])
                bound = self.commutation_tol * max(
                    1.0, mnorm(mats[i]) * mnorm(mats[j]))
                if comm > bound:
                    raise CommutationViolated(
                        f"entries {i},{j} fail to commute ({comm:.3e})")

    @property
    def d(self):
        return len(self.mats)

    @property
    def size(self):
        return self.mats[0].shape[0]


def operator_cayley_tuple(T: TupleOfMatrices, direction,
                          tol: Tolerances = DEFAULT_TOL):
    """Entrywise operator Cayley transform of a commuting tuple.

    contractive_to_accretive: R_k = (I - T_k)^{-1}(I + T_k)
    accretive_to_contractive: T_k = (R_k - I)(R_k + I)^{-1}
    """
    eye = np.eye(T.size, dtype=complex)
    out = []
    if direction == "contractive_to_accretive":
        for k, Tk in enumerate(T.mats):
            if mnorm(Tk) >= 1.0 - CONTRACTION_MARGIN:
                raise NotStrictContraction(
                    f"entry {k} has norm {mnorm(Tk):.6f}", index=k)
            out.append(np.linalg.solve(eye - Tk, eye + Tk))
    elif direction == "accretive_to_contractive":
        for k, Rk in enumerate(T.mats):
            herm = (Rk + Rk.conj().T) / 2.0
            lam_min = float(np.linalg.eigvalsh(herm)[0])
            if lam_min <= tol.psd_atol:
                raise NotStrictlyAccretive(
                    f"entry {k} has min real part {lam_min:.3e}", index=k)
            X = np.linalg.solve((Rk + eye).T, (Rk - eye).T)
            out.append(X.T)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return TupleOfMatrices(tuple(out), T.commutation_tol)


def _cayley_of_values(F):
    """(F - I)(F + I)^{-1} applied along the first axis of a stack."""
    eye = np.eye(F.shape[-1], dtype=complex)
    return np.linalg.solve(
        (F + eye).transpose(0, 2, 1), (F - eye).transpose(0, 2, 1)
    ).transpose(0, 2, 1)


def double_cayley(f: FunctionHandle) -> FunctionHandle:
    """Transform a halfplane function into its polydisk Schur-type image:
    calF(zeta) = (f(C(zeta)) - I)(f(C(zeta)) + I)^{-1} with C the
    componentwise disk-to-halfplane map."""
    if f.rows != f.cols:
        raise DimensionMismatch("double_cayley needs a square-valued handle")

    def evaluator(zeta):
        val = f(disk_to_halfplane(zeta))
        return value_cayley(val, "herglotz_to_schur")

    batch = None
    if f.batch_evaluator is not None:
        def batch(pts):
            vals = f.eval_many(disk_to_halfplane(pts))
            return _cayley_of_values(vals)

    return FunctionHandle(f.d, f.rows, f.cols, evaluator, "polydisk", batch)
