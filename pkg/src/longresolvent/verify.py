"""Cross-cutting sampled property checks and seeded instance generators."""

import numpy as np

from .bessmertnyi import LongResolventPencil
from .cayley import TupleOfMatrices, operator_cayley_tuple
from .errors import DimensionMismatch, InsufficientSamples
from .herglotz import HerglotzRealization
from .numerics import DEFAULT_TOL, Tolerances, mnorm
from .polyalg import FunctionHandle
from .realization import GivoneRoesserRealization
from .sampling import SamplePlan, SampleReport, masked_eval

__all__ = [
    "check_cayley_inner",
    "check_homogeneous",
    "check_positive_kernel",
    "check_real",
    "check_herglotz_positivity",
    "check_boundary_skew",
    "check_schur_contractive",
    "check_agler_decomposition",
    "check_tuple_positivity",
    "gen_instance",
]


def _report(name, resid, ok_count, skip_count, threshold, worst_point,
            details=None):
    return SampleReport(
        name=name,
        samples=int(ok_count),
        skipped=int(skip_count),
        max_residual=float(resid if np.isfinite(resid) else np.inf),
        threshold=float(threshold),
        passed=bool(resid <= threshold),
        worst_point=worst_point,
        details=details or {},
    )


def check_cayley_inner(f: FunctionHandle, plan: SamplePlan = None,
                       threshold=None, tol: Tolerances = DEFAULT_TOL):
    """max || f(z) + f(-conj(z))* || over regular samples."""
    if plan is None:
        plan = SamplePlan("polyhalfplane", seed=5, count=100)
    if threshold is None:
        threshold = tol.identity_atol
    pts = plan.points(f.d)
    mirror = -np.conj(pts)
    va, ok_a = masked_eval(f, pts)
    vb, ok_b = masked_eval(f, mirror)
    ok = ok_a & ok_b
    if not np.any(ok):
        raise InsufficientSamples("all sample pairs were singular")
    resid = np.zeros(pts.shape[0])
    for i in np.nonzero(ok)[0]:
        resid[i] = mnorm(va[i] + vb[i].conj().T)
    worst = int(np.argmax(resid))
    return _report("cayley_inner", resid[worst], np.sum(ok), np.sum(~ok),
                   threshold, tuple(pts[worst]))


def check_homogeneous(f: FunctionHandle, plan: SamplePlan = None,
                      threshold=None, tol: Tolerances = DEFAULT_TOL):
    """max || f(lam z) - lam f(z) || over scaling rays."""
    if plan is None:
        plan = SamplePlan("scaling_rays", seed=6, count=40)
    if threshold is None:
        threshold = tol.identity_atol
    lams, pts = plan.rays(f.d)
    base, ok_base = masked_eval(f, pts)
    worst_resid, worst_pt = 0.0, tuple(pts[0])
    ok_count, skip_count = 0, int(np.sum(~ok_base))
    for lam in lams:
        scaled, ok_s = masked_eval(f, lam * pts)
        ok = ok_base & ok_s
        skip_count += int(np.sum(ok_base & ~ok_s))
        for i in np.nonzero(ok)[0]:
            r = mnorm(scaled[i] - lam * base[i])
            ok_count += 1
            if r > worst_resid:
                worst_resid, worst_pt = r, tuple(pts[i])
    if ok_count == 0:
        raise InsufficientSamples("no regular (lambda, z) pairs")
    return _report("homogeneous", worst_resid, ok_count, skip_count,
                   threshold, worst_pt)


def check_positive_kernel(K, d, plan: SamplePlan = None,
                          tol: Tolerances = DEFAULT_TOL):
    """Assemble the block Gram matrix [K(z_i, z_j)] over the plan's points
    and report its minimum eigenvalue (block (i, j) pairs the j-th vector
    against the i-th)."""
    if plan is None:
        plan = SamplePlan("polyhalfplane", seed=8, count=8)
    pts = plan.points(d)
    N = pts.shape[0]
    probe = np.asarray(K(pts[0], pts[0]), dtype=complex)
    n = probe.shape[0]
    G = np.zeros((N * n, N * n), dtype=complex)
    for i in range(N):
        for j in range(N):
            G[i * n:(i + 1) * n, j * n:(j + 1) * n] = K(pts[i], pts[j])
    herm_defect = mnorm(G - G.conj().T)
    lam_min = float(np.linalg.eigvalsh((G + G.conj().T) / 2.0)[0])
    scale = max(1.0, mnorm(G))
    resid = max(0.0, -lam_min)
    return _report("positive_kernel", resid, N, 0, tol.psd_atol * scale,
                   tuple(pts[0]),
                   details={"min_eigenvalue": lam_min,
                            "hermitian_defect": herm_defect})


def check_real(f: FunctionHandle, plan: SamplePlan = None,
               threshold=None, tol: Tolerances = DEFAULT_TOL):
    """max || f(conj(z)) - conj(f(z)) || over conjugation pairs."""
    if plan is None:
        plan = SamplePlan("conjugation_pairs", seed=9, count=50)
    if threshold is None:
        threshold = tol.identity_atol
    z, zbar = plan.pairs(f.d)
    va, ok_a = masked_eval(f, z)
    vb, ok_b = masked_eval(f, zbar)
    ok = ok_a & ok_b
    if not np.any(ok):
        raise InsufficientSamples("all conjugation pairs were singular")
    resid = np.zeros(z.shape[0])
    for i in np.nonzero(ok)[0]:
        resid[i] = float(np.abs(vb[i] - np.conj(va[i])).max())
    worst = int(np.argmax(resid))
    return _report("real", resid[worst], np.sum(ok), np.sum(~ok), threshold,
                   tuple(z[worst]))


def check_herglotz_positivity(f: FunctionHandle, plan: SamplePlan = None,
                              threshold=1e-9, tol: Tolerances = DEFAULT_TOL):
    """Re f(z) must stay PSD on the sampled right poly-halfplane."""
    if plan is None:
        plan = SamplePlan("polyhalfplane", seed=10, count=500)
    pts = plan.points(f.d)
    vals, ok = masked_eval(f, pts)
    worst_resid, worst_pt = 0.0, tuple(pts[0])
    for i in np.nonzero(ok)[0]:
        herm = (vals[i] + vals[i].conj().T) / 2.0
        lam = float(np.linalg.eigvalsh(herm)[0])
        r = max(0.0, -lam)
        if r > worst_resid:
            worst_resid, worst_pt = r, tuple(pts[i])
    return _report("herglotz_positivity", worst_resid, np.sum(ok),
                   np.sum(~ok), threshold, worst_pt)


def check_boundary_skew(F: FunctionHandle, plan: SamplePlan = None,
                        threshold=1e-8, tol: Tolerances = DEFAULT_TOL):
    """Skew-Hermitian boundary values on the torus:
    max || F(mu) + F(mu)* || over regular torus samples."""
    if plan is None:
        plan = SamplePlan("torus", seed=12, count=100)
    mus = plan.points(F.d)
    vals, ok = masked_eval(F, mus)
    if not np.any(ok):
        raise InsufficientSamples("all torus samples were singular")
    resid = np.zeros(mus.shape[0])
    for i in np.nonzero(ok)[0]:
        resid[i] = mnorm(vals[i] + vals[i].conj().T)
    worst = int(np.argmax(resid))
    return _report("boundary_skew", resid[worst], np.sum(ok), np.sum(~ok),
                   threshold, tuple(mus[worst]))


def check_schur_contractive(F: FunctionHandle, plan: SamplePlan = None,
                            threshold=1e-9, tol: Tolerances = DEFAULT_TOL):
    """|| F(zeta) || <= 1 on sampled polydisk points."""
    if plan is None:
        plan = SamplePlan("polydisk", seed=13, count=200)
    pts = plan.points(F.d)
    vals, ok = masked_eval(F, pts)
    worst_resid, worst_pt = 0.0, tuple(pts[0])
    for i in np.nonzero(ok)[0]:
        r = max(0.0, mnorm(vals[i]) - 1.0)
        if r > worst_resid:
            worst_resid, worst_pt = r, tuple(pts[i])
    return _report("schur_contractive", worst_resid, np.sum(ok), np.sum(~ok),
                   threshold, worst_pt)


def check_agler_decomposition(re: GivoneRoesserRealization,
                              pairs=100, seed=14, threshold=1e-9,
                              tol: Tolerances = DEFAULT_TOL,
                              difference=False):
    """Defect-family identities of a unitary colligation on sampled pairs:

    sum identity:        I - F(w)*F(z) = sum (1 - conj(w_k) z_k) th_k(w)* th_k(z)
    difference identity: F(w)* - F(z)  = sum (conj(w_k) - z_k) th_k(w)* th_k(z)
    """
    from .realization import defect_functions

    plan_w = SamplePlan("polydisk", seed=seed, count=pairs)
    plan_z = SamplePlan("polydisk", seed=seed + 1, count=pairs)
    ws = plan_w.points(re.d)
    zs = plan_z.points(re.d)
    thetas = defect_functions(re)
    tw = [t.eval_many(ws) for t in thetas]
    tz = [t.eval_many(zs) for t in thetas]
    Fw = re.eval_transfer_many(ws)
    Fz = re.eval_transfer_many(zs)
    eye = np.eye(re.n)
    worst, worst_pt = 0.0, tuple(ws[0])
    for i in range(pairs):
        if difference:
            lhs = Fw[i].conj().T - Fz[i]
        else:
            lhs = eye - Fw[i].conj().T @ Fz[i]
        rhs = np.zeros_like(lhs)
        for k in range(re.d):
            if difference:
                coef = np.conj(ws[i, k]) - zs[i, k]
            else:
                coef = 1.0 - np.conj(ws[i, k]) * zs[i, k]
            rhs += coef * tw[k][i].conj().T @ tz[k][i]
        r = mnorm(lhs - rhs)
        if r > worst:
            worst, worst_pt = r, tuple(ws[i])
    name = "difference_identity" if difference else "agler_decomposition"
    return _report(name, worst, pairs, 0, threshold, worst_pt)


def check_tuple_positivity(re: GivoneRoesserRealization, count=100,
                           size=4, seed=15, threshold=1e-8,
                           tol: Tolerances = DEFAULT_TOL):
    """f(R) + f(R)* weakly PSD over seeded commuting strictly accretive
    tuples.

    f(R) is evaluated through the realization of the Schur-side transform:
    R is Cayley-mapped to a contractive tuple T, calF(T) comes from
    ``eval_transfer_tuple``, and the value Cayley map carries the result
    back to the accretive side, f(R) = (I - calF(T))^{-1} (I + calF(T)).
    """
    from .cayley import value_cayley

    worst, worst_seed = 0.0, seed
    for j in range(count):
        s = int(np.random.default_rng(seed + j).integers(1, size + 1))
        T = gen_instance("commuting_contractions", seed + j, d=re.d, size=s)
        R = operator_cayley_tuple(T, "contractive_to_accretive")
        back = operator_cayley_tuple(R, "accretive_to_contractive")
        val = value_cayley(re.eval_transfer_tuple(back), "schur_to_herglotz")
        herm = (val + val.conj().T) / 2.0
        lam = float(np.linalg.eigvalsh(herm)[0])
        r = max(0.0, -lam)
        if r > worst:
            worst, worst_seed = r, seed + j
    return _report("tuple_positivity", worst, count, 0, threshold, None,
                   details={"worst_seed": float(worst_seed)})


# ---------------------------------------------------------------------------
# seeded instance generators


def _crandn(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape)
                    + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _split_states(d, m):
    base, rem = divmod(int(m), d)
    return tuple(base + (1 if k < rem else 0) for k in range(d))


def _seeded_unitary(rng, size):
    Q, R = np.linalg.qr(_crandn(rng, (size, size)))
    ph = np.diag(R).copy()
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return Q * np.conj(ph)[None, :]


def _pencil_coeffs(rng, d, n, m, real=False, skew0=False):
    s = n + m
    if skew0:
        S = _crandn(rng, (s, s), 0.6)
        A0 = (S - S.conj().T) / 2.0
    else:
        A0 = np.zeros((s, s), dtype=complex)
    coeffs = [A0]
    for _ in range(d):
        rk = int(rng.integers(1, s + 1))
        G = (rng.standard_normal((rk, s)) if real
             else _crandn(rng, (rk, s)))
        Ak = G.conj().T @ G / np.sqrt(s)
        coeffs.append((Ak + Ak.conj().T) / 2.0)
    if m > 0:
        # keep the inner block jointly strictly accretive on the halfplane
        S22 = sum(c[n:, n:] for c in coeffs[1:])
        lam = float(np.linalg.eigvalsh((S22 + S22.conj().T) / 2.0)[0])
        if lam < 0.3:
            bump = np.zeros((s, s), dtype=complex)
            bump[n:, n:] = (0.4 - lam) * np.eye(m)
            coeffs[-1] = coeffs[-1] + bump
    # keep Re f(e) well away from singular so the center split is stable
    Ae = sum(coeffs)
    if m > 0:
        fe = Ae[:n, :n] - Ae[:n, n:] @ np.linalg.solve(Ae[n:, n:], Ae[n:, :n])
    else:
        fe = Ae[:n, :n]
    lam_e = float(np.linalg.eigvalsh((fe + fe.conj().T) / 2.0)[0])
    if lam_e < 0.2:
        bump = np.zeros((s, s), dtype=complex)
        bump[:n, :n] = (0.4 - lam_e) * np.eye(n)
        coeffs[1] = coeffs[1] + bump
    if real:
        coeffs = [c.real.astype(complex) for c in coeffs]
    return tuple(coeffs)


def gen_instance(kind, seed, d=2, n=1, m=1, size=3, state_dims=None):
    """Deterministic seeded instance of the requested kind; outputs satisfy
    their class invariants by construction."""
    if d < 1 or n < 1 or m < 0 or size < 1:
        raise DimensionMismatch(
            f"invalid dims d={d}, n={n}, m={m}, size={size}")
    rng = np.random.default_rng(seed)
    if kind == "pencil_nonhomogeneous":
        return LongResolventPencil(
            d, n, m, _pencil_coeffs(rng, d, n, m, skew0=True),
            "nonhomogeneous")
    if kind == "pencil_homogeneous":
        return LongResolventPencil(
            d, n, m, _pencil_coeffs(rng, d, n, m), "homogeneous")
    if kind == "pencil_real":
        return LongResolventPencil(
            d, n, m, _pencil_coeffs(rng, d, n, m, real=True),
            "real_homogeneous")
    if kind == "herglotz_realization":
        dims = state_dims if state_dims is not None else _split_states(d, m)
        mt = int(sum(dims))
        W = _seeded_unitary(rng, mt)
        S = _crandn(rng, (n, n), 0.5)
        beta = (S - S.conj().T) / 2.0
        V = _crandn(rng, (mt, n), 1.0 / max(1.0, np.sqrt(mt)))
        return HerglotzRealization(d, n, dims, beta, W, V)
    if kind == "gr_unitary":
        dims = state_dims if state_dims is not None else _split_states(d, m)
        mt = int(sum(dims))
        U = _seeded_unitary(rng, mt + n)
        return GivoneRoesserRealization(d, n, dims, U, unitary=True)
    if kind == "gr_hermitian_unitary":
        dims = state_dims if state_dims is not None else _split_states(d, m)
        mt = int(sum(dims))
        Q = _seeded_unitary(rng, mt + n)
        signs = np.where(rng.uniform(size=mt + n) < 0.5, -1.0, 1.0)
        U = (Q * signs[None, :]) @ Q.conj().T
        U = (U + U.conj().T) / 2.0
        return GivoneRoesserRealization(d, n, dims, U, unitary=True,
                                        hermitian=True)
    if kind == "commuting_contractions":
        N = _crandn(rng, (size, size), 0.5)
        mats = []
        for _ in range(d):
            coefs = _crandn(rng, (size,))
            Tk = np.zeros((size, size), dtype=complex)
            power = np.eye(size, dtype=complex)
            for c in coefs:
                Tk = Tk + c * power
                power = power @ N
            target = 0.9 * float(rng.uniform(0.4, 1.0))
            nrm = mnorm(Tk)
            if nrm > 0:
                Tk = Tk * (target / nrm)
            mats.append(Tk)
        return TupleOfMatrices(tuple(mats))
    raise DimensionMismatch(f"unknown instance kind {kind!r}")
