"""End-to-end synthesis chains.

The long route, used by the round trip, is

    pencil -> phi_k decomposition -> (variable Cayley) F on the polydisk
           -> split F(0) = beta + delta* delta -> normalized F_plus
           -> inner Cayley transform calF_plus -> theta_k defect family
           -> lurking isometry (unitary, optionally Hermitian / real)
           -> Herglotz realization (beta, W, V) -> pencil again.

Each stage records a residual so failures name the stage that broke."""

from dataclasses import dataclass, field

import numpy as np

from .aglerkit import KneseWitness, rational_handle
from .bessmertnyi import (
    LongResolventPencil,
    PencilDecomposition,
    herglotz_to_pencil,
    pencil_decomposition,
    theta_from_phi,
)
from .cayley import disk_to_halfplane, double_cayley, value_cayley
from .errors import DimensionMismatch
from .herglotz import (
    HerglotzRealization,
    reduce_to_plus,
    schur_to_herglotz,
    split_at_zero,
)
from .numerics import DEFAULT_TOL, Tolerances, mnorm
from .polyalg import FunctionHandle
from .realization import GivoneRoesserRealization, lurking_isometry
from .sampling import SamplePlan, SampleReport

__all__ = [
    "SynthesisResult",
    "disk_composition",
    "realize_disk_function",
    "xi_handles_from_halfplane_factors",
    "pencil_to_herglotz",
    "pencil_roundtrip",
    "schur_agler_realization",
    "knese_realization",
]


def disk_composition(f: FunctionHandle) -> FunctionHandle:
    """F(zeta) = f(C(zeta)): the variable-side Cayley composition only."""

    def evaluator(zeta):
        return f(disk_to_halfplane(zeta))

    batch = None
    if f.batch_evaluator is not None:
        def batch(pts):
            return f.eval_many(disk_to_halfplane(np.asarray(pts, dtype=complex)))

    return FunctionHandle(f.d, f.rows, f.cols, evaluator, "polydisk", batch)


def _value_cayley_handle(F: FunctionHandle) -> FunctionHandle:
    """(F(zeta) - I)(F(zeta) + I)^{-1} as a handle."""
    eye = np.eye(F.rows, dtype=complex)

    def evaluator(zeta):
        return value_cayley(F(zeta), "herglotz_to_schur")

    def batch(pts):
        vals = F.eval_many(pts)
        return np.linalg.solve((vals + eye).transpose(0, 2, 1),
                               (vals - eye).transpose(0, 2, 1)).transpose(0, 2, 1)

    return FunctionHandle(F.d, F.rows, F.cols, evaluator, "polydisk",
                          batch if F.batch_evaluator else None)


@dataclass
class SynthesisResult:
    herglotz: HerglotzRealization
    gr: GivoneRoesserRealization
    beta: np.ndarray
    delta: np.ndarray
    decomposition: PencilDecomposition = None
    stages: dict = field(default_factory=dict)


def realize_disk_function(F: FunctionHandle, xis, hermitian=False,
                          real=False, seed=0,
                          tol: Tolerances = DEFAULT_TOL) -> SynthesisResult:
    """Build a Herglotz realization of a polydisk function from a matching
    decomposition family.

    ``F`` must satisfy F(w)* + F(z) = sum_k (1 - conj(w_k) z_k)
    xi_k(w)* xi_k(z); the chain splits F(0), normalizes, realizes the inner
    Cayley transform by the lurking isometry with the transported family
    theta_k = xi_k delta^+ (I - calF_plus) / sqrt(2), and assembles
    (beta, W, V)."""
    stages = {}
    F0 = F(np.zeros(F.d))
    beta, _, delta = split_at_zero(F0, tol)
    if real:
        from .errors import RealInfeasible

        if mnorm(beta) > tol.identity_atol:
            raise RealInfeasible(
                f"real synthesis with a nonzero center skew part "
                f"({mnorm(beta):.3e})")
        beta = np.zeros_like(beta)
        delta = delta.real.astype(complex)
    stages["split_center_skew"] = mnorm(beta + beta.conj().T)

    Fp = reduce_to_plus(F, beta, delta, tol)
    r = Fp.rows
    calFp = _value_cayley_handle(Fp)
    stages["center_rank"] = float(r)

    gram = delta @ delta.conj().T
    pinv = delta.conj().T @ np.linalg.inv(gram)
    root2 = np.sqrt(2.0)
    eye = np.eye(r, dtype=complex)
    thetas = []
    for xi in xis:
        def evaluator(zeta, xi=xi):
            return xi(zeta) @ pinv @ (eye - calFp(zeta)) / root2

        def batch(pts, xi=xi):
            xv = xi.eval_many(pts)
            fv = calFp.eval_many(pts)
            return xv @ pinv[None] @ (eye[None] - fv) / root2

        thetas.append(FunctionHandle(F.d, xi.rows, r, evaluator, "polydisk",
                                     batch))

    gr = lurking_isometry(calFp, thetas, hermitian_wanted=hermitian,
                          real_wanted=real, seed=seed, tol=tol)
    stages["colligation_size"] = float(gr.m + gr.n)

    H = schur_to_herglotz(gr, beta, delta, tol)
    check = SamplePlan("polydisk", seed=seed + 101, count=40).points(F.d)
    resid = float(np.abs(H.eval_many(check) - F.eval_many(check)).max())
    stages["herglotz_vs_function"] = resid
    return SynthesisResult(H, gr, beta, delta, None, stages)


def xi_handles_from_halfplane_factors(phis):
    """Transport halfplane kernel factors to the polydisk:
    xi_k(zeta) = sqrt(2) (1 - zeta_k)^{-1} phi_k(C(zeta))."""
    root2 = np.sqrt(2.0)
    out = []
    for k, phi in enumerate(phis):
        def evaluator(zeta, k=k, phi=phi):
            zeta = np.asarray(zeta, dtype=complex).reshape(phi.d)
            return root2 * phi(disk_to_halfplane(zeta)) / (1.0 - zeta[k])

        def batch(pts, k=k, phi=phi):
            pts = np.asarray(pts, dtype=complex)
            pv = phi.eval_many(disk_to_halfplane(pts))
            return root2 * pv / (1.0 - pts[:, k])[:, None, None]

        out.append(FunctionHandle(phi.d, phi.rows, phi.cols, evaluator,
                                  "polydisk", batch))
    return out


def pencil_to_herglotz(pcl: LongResolventPencil, hermitian=None, real=None,
                       seed=0, tol: Tolerances = DEFAULT_TOL) -> SynthesisResult:
    """Run the constructive chain from a pencil to (beta, W, V).

    ``hermitian``/``real`` default to what the pencil's class tag supports:
    homogeneous pencils get a Hermitian colligation, real ones a real
    symmetric (orthogonal) colligation.
    """
    if hermitian is None:
        hermitian = pcl.tag in ("homogeneous", "real_homogeneous")
    if real is None:
        real = pcl.tag == "real_homogeneous"
    deco = pencil_decomposition(pcl, tol=tol)
    F = disk_composition(pcl.handle())
    xis = xi_handles_from_halfplane_factors(deco.handles())
    result = realize_disk_function(F, xis, hermitian=hermitian, real=real,
                                   seed=seed, tol=tol)
    result.decomposition = deco
    return result


def pencil_roundtrip(pcl: LongResolventPencil, seed=0,
                     tol: Tolerances = DEFAULT_TOL, fresh_count=100,
                     hermitian=None, real=None):
    """pencil -> Herglotz realization -> pencil, compared at fresh points.

    Returns ``(reconstructed, result, report)``.
    """
    result = pencil_to_herglotz(pcl, hermitian=hermitian, real=real,
                                seed=seed, tol=tol)
    recon = herglotz_to_pencil(result.herglotz, tol)
    plan = SamplePlan("polyhalfplane", seed=seed + 777, count=fresh_count)
    pts = plan.points(pcl.d)
    a = pcl.eval_many(pts)
    b = recon.eval_many(pts)
    resid = np.abs(a - b).reshape(pts.shape[0], -1).max(axis=1)
    worst = int(np.argmax(resid))
    report = SampleReport(
        name="pencil_roundtrip",
        samples=pts.shape[0],
        skipped=0,
        max_residual=float(resid[worst]),
        threshold=1e-7,
        passed=bool(resid[worst] <= 1e-7),
        worst_point=tuple(pts[worst]),
        details=dict(result.stages),
    )
    return recon, result, report


def schur_agler_realization(pcl: LongResolventPencil, seed=0,
                            tol: Tolerances = DEFAULT_TOL,
                            hermitian=None) -> GivoneRoesserRealization:
    """Unitary realization of the full double Cayley transform of the
    pencil's function (used to evaluate the function on operator tuples)."""
    if hermitian is None:
        hermitian = pcl.tag in ("homogeneous", "real_homogeneous")
    deco = pencil_decomposition(pcl, tol=tol)
    calF = double_cayley(pcl.handle())
    thetas = theta_from_phi(deco.handles(), calF, tol=tol)
    return lurking_isometry(calF, thetas, hermitian_wanted=hermitian,
                            seed=seed, tol=tol)


def knese_realization(witness: KneseWitness, seed=0,
                      tol: Tolerances = DEFAULT_TOL) -> GivoneRoesserRealization:
    """Unitary realization of q p^{-1} from a verified polynomial family,
    using theta_k = psi_k p^{-1}."""
    if witness.residual > tol.identity_atol:
        raise DimensionMismatch(
            f"witness residual {witness.residual:.3e} is not a valid "
            f"decomposition")
    p, q = witness.p, witness.q
    F = rational_handle(q, p)
    thetas = [rational_handle(psi, p) for psi in witness.psis]
    return lurking_isometry(F, thetas, seed=seed, tol=tol)
