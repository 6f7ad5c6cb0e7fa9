"""Polynomial-level machinery: the two-variable coefficient identity
p(w)*p(z) - q(w)*q(z) = sum_k (1 - conj(w_k) z_k) psi_k(w)* psi_k(z),
moment-matrix compression of factor families, and sampled innerness."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EvaluationSingular, NotPSD
from .numerics import DEFAULT_TOL, Tolerances, mnorm, rank_factor_psd
from .polyalg import FunctionHandle, MatrixPolynomial, grlex_key
from .sampling import SamplePlan, SampleReport, masked_eval

__all__ = [
    "KneseWitness",
    "verify_knese",
    "compress_sos",
    "inner_check",
    "rational_handle",
    "sos_bound",
]


def _gram_coeffs(polys):
    """Coefficient map (beta, alpha) -> sum_k psi_{k,beta}* psi_{k,alpha}."""
    out = {}
    for p in polys:
        for b, mb in p.terms.items():
            mbh = mb.conj().T
            for a, ma in p.terms.items():
                key = (b, a)
                out[key] = out.get(key, 0) + mbh @ ma
    return out


def _add_coeffs(target, source, sign=1.0, shift=None):
    for (b, a), mat in source.items():
        if shift is not None:
            b = tuple(x + y for x, y in zip(b, shift))
            a = tuple(x + y for x, y in zip(a, shift))
        key = (b, a)
        target[key] = target.get(key, 0) + sign * mat


def verify_knese(p: MatrixPolynomial, q: MatrixPolynomial, psis,
                 tol: Tolerances = DEFAULT_TOL):
    """Exact-coefficient check of the sum-of-squares identity.

    Both sides are expanded as polynomials in (conj(w), z) and compared
    term by term; returns ``(residual, verdict)`` with the residual being
    the largest defect-coefficient norm.
    """
    d = p.d
    if q.d != d or any(psi.d != d for psi in psis):
        raise DimensionMismatch("variable counts differ")
    if (p.rows, p.cols) != (q.rows, q.cols) or p.rows != p.cols:
        raise DimensionMismatch("p and q must be square and same-shaped")
    if any(psi.cols != p.cols for psi in psis):
        raise DimensionMismatch("psi_k must have the same column count as p")
    if len(psis) != d:
        raise DimensionMismatch(f"expected {d} factors, got {len(psis)}")

    defect = {}
    _add_coeffs(defect, _gram_coeffs([p]), 1.0)
    _add_coeffs(defect, _gram_coeffs([q]), -1.0)
    for k, psi in enumerate(psis):
        gram = _gram_coeffs([psi])
        e_k = tuple(1 if i == k else 0 for i in range(d))
        _add_coeffs(defect, gram, -1.0)
        _add_coeffs(defect, gram, 1.0, shift=e_k)
    residual = 0.0
    for mat in defect.values():
        residual = max(residual, mnorm(np.atleast_2d(mat)))
    return residual, residual <= tol.identity_atol


@dataclass(frozen=True)
class KneseWitness:
    """A (p, q, psi_1..psi_d) family together with its identity residual."""

    p: MatrixPolynomial
    q: MatrixPolynomial
    psis: tuple
    residual: float

    @staticmethod
    def build(p, q, psis, tol: Tolerances = DEFAULT_TOL):
        residual, _ = verify_knese(p, q, psis, tol)
        return KneseWitness(p, q, tuple(psis), residual)

    @property
    def d(self):
        return self.p.d

    @property
    def n(self):
        return self.p.rows


def sos_bound(r, d, n):
    """Row-count bound binom(r-1+d, d) * n for degree-(r-1) factors."""
    return math.comb(r - 1 + d, d) * n


def compress_sos(xis, degree_bound=None, tol: Tolerances = DEFAULT_TOL):
    """Replace each factor xi_k by a psi_k with rank-many rows.

    The moment matrix X_k = [xi_{k,beta}* xi_{k,alpha}] over the
    multi-indices of total degree <= r-1 (graded lexicographic order) is
    factored as Y_k* Y_k with full row rank; psi_k collects the blocks of
    Y_k back into a polynomial.  The Gram identity
    psi_k(w)* psi_k(z) = xi_k(w)* xi_k(z) is re-verified coefficientwise.
    """
    if not xis:
        return []
    d = xis[0].d
    n = xis[0].cols
    r1 = degree_bound if degree_bound is not None else max(
        xi.total_degree() for xi in xis)
    for xi in xis:
        if xi.d != d or xi.cols != n:
            raise DimensionMismatch("factors must share d and column count")
        if xi.total_degree() > r1:
            raise DimensionMismatch(
                f"factor degree {xi.total_degree()} exceeds bound {r1}")

    idx = sorted(_indices_up_to(d, r1), key=grlex_key)
    pos = {a: t for t, a in enumerate(idx)}
    T = len(idx)
    out = []
    for xi in xis:
        stack = np.zeros((xi.rows, T * n), dtype=complex)
        for a, mat in xi.terms.items():
            t = pos[a]
            stack[:, t * n: (t + 1) * n] = mat
        X = stack.conj().T @ stack
        Y = rank_factor_psd(X, tol)  # raises NotPSD on indefinite input
        terms = {}
        for a, t in pos.items():
            block = Y[:, t * n: (t + 1) * n]
            if np.any(block != 0):
                terms[a] = block
        psi = MatrixPolynomial.from_terms(d, terms, rows=Y.shape[0], cols=n)
        gram_old = _gram_coeffs([xi])
        gram_new = _gram_coeffs([psi])
        keys = set(gram_old) | set(gram_new)
        defect = max(
            (mnorm(np.atleast_2d(gram_old.get(k, 0) - gram_new.get(k, 0)))
             for k in keys), default=0.0)
        scale = max(1.0, mnorm(stack) ** 2)
        if defect > tol.identity_atol * scale:
            raise NotPSD(f"compression failed to preserve the kernel "
                         f"({defect:.3e})")
        out.append(psi)
    return out


def _indices_up_to(d, total):
    if d == 0:
        yield ()
        return
    for head in range(total + 1):
        for rest in _indices_up_to(d - 1, total - head):
            yield (head,) + rest


def rational_handle(num: MatrixPolynomial, den: MatrixPolynomial,
                    domain="polydisk") -> FunctionHandle:
    """Handle for num(z) den(z)^{-1} with pole detection on the declared
    denominator (singular within 1e-12 relative)."""
    if num.d != den.d or den.rows != den.cols or num.cols != den.rows:
        raise DimensionMismatch("incompatible numerator/denominator")

    def evaluator(z):
        dv = den.eval(z)
        sv = np.linalg.svd(dv, compute_uv=False)
        if sv.size == 0 or sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise EvaluationSingular("denominator singular", point=tuple(z))
        return np.linalg.solve(dv.T, num.eval(z).T).T

    def batch(pts):
        dv = den.eval_many(pts)
        nv = num.eval_many(pts)
        return np.linalg.solve(dv.transpose(0, 2, 1),
                               nv.transpose(0, 2, 1)).transpose(0, 2, 1)

    return FunctionHandle(num.d, num.rows, den.cols, evaluator, domain, batch)


def inner_check(F: FunctionHandle, plan: SamplePlan = None,
                threshold=None, tol: Tolerances = DEFAULT_TOL) -> SampleReport:
    """Sampled innerness: F(mu)* F(mu) = I on the torus, and the rational
    continuation F(1/conj(mu))* F(mu) = I at paired off-torus points."""
    if plan is None:
        plan = SamplePlan("torus", seed=0, count=200)
    if threshold is None:
        threshold = tol.identity_atol
    mus = plan.points(F.d)
    vals, ok = masked_eval(F, mus)
    eye = np.eye(F.rows)
    torus_resid = np.zeros(mus.shape[0])
    torus_resid[ok] = np.array([
        mnorm(v.conj().T @ v - eye) for v in vals[ok]])

    inner_pts = plan.radius * mus
    outer_pts = 1.0 / np.conj(inner_pts)
    vi, ok_i = masked_eval(F, inner_pts)
    try:
        vo, ok_o = masked_eval(F, outer_pts)
    except Exception:
        ok_o = np.zeros(len(outer_pts), dtype=bool)
        vo = np.zeros_like(vi)
    ok_pair = ok_i & ok_o
    pair_resid = np.zeros(mus.shape[0])
    pair_resid[ok_pair] = np.array([
        mnorm(vo[i].conj().T @ vi[i] - eye)
        for i in np.nonzero(ok_pair)[0]])

    resid = np.maximum(torus_resid * ok, pair_resid * ok_pair)
    worst = int(np.argmax(resid))
    max_resid = float(resid[worst])
    return SampleReport(
        name="inner",
        samples=int(np.sum(ok)) + int(np.sum(ok_pair)),
        skipped=int(np.sum(~ok)) + int(np.sum(~ok_pair)),
        max_residual=max_resid,
        threshold=float(threshold),
        passed=bool(max_resid <= threshold),
        worst_point=tuple(mus[worst]),
        details={
            "torus_residual": float(torus_resid[ok].max(initial=0.0)),
            "continuation_residual": float(pair_resid[ok_pair].max(initial=0.0)),
        },
    )
