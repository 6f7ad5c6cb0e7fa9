"""Multivariate matrix-coefficient polynomials and rational evaluators."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from ._kernels import poly_eval_many
from .errors import DimensionMismatch, EvaluationSingular

__all__ = ["MatrixPolynomial", "FunctionHandle", "grlex_key"]


def grlex_key(alpha):
    """Graded lexicographic sort key for a multi-index."""
    return (sum(alpha), alpha)


def _clean_terms(d, terms):
    out = {}
    shape = None
    for alpha, mat in terms.items():
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != d or any(a < 0 for a in alpha):
            raise DimensionMismatch(f"bad multi-index {alpha} for d={d}")
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2:
            raise DimensionMismatch("coefficients must be matrices")
        if shape is None:
            shape = mat.shape
        elif mat.shape != shape:
            raise DimensionMismatch(
                f"coefficient shapes differ: {mat.shape} vs {shape}")
        if np.any(mat != 0):
            out[alpha] = out.get(alpha, 0) + mat
    # summing duplicates may have produced fresh zeros
    return {a: m for a, m in out.items() if np.any(m != 0)}, shape


@dataclass(frozen=True)
class MatrixPolynomial:
    """Polynomial sum_alpha C_alpha z^alpha with matrix coefficients.

    Terms are stored sparsely by multi-index; zero coefficients are never
    kept.  Serialization order is graded lexicographic.
    """

    d: int
    rows: int
    cols: int
    terms: dict = field(default_factory=dict)

    @staticmethod
    def from_terms(d, terms, rows=None, cols=None):
        cleaned, shape = _clean_terms(d, terms)
        if shape is None:
            if rows is None or cols is None:
                raise DimensionMismatch(
                    "zero polynomial needs explicit rows/cols")
            shape = (rows, cols)
        return MatrixPolynomial(d, shape[0], shape[1], cleaned)

    @staticmethod
    def constant(d, mat):
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        zero = (0,) * d
        return MatrixPolynomial.from_terms(
            d, {zero: mat}, rows=mat.shape[0], cols=mat.shape[1])

    @staticmethod
    def variable(d, k, rows=1):
        """z_k times the identity (scalar when rows=1)."""
        alpha = tuple(1 if i == k else 0 for i in range(d))
        return MatrixPolynomial.from_terms(d, {alpha: np.eye(rows)})

    def sorted_terms(self):
        return [(a, self.terms[a]) for a in sorted(self.terms, key=grlex_key)]

    @cached_property
    def _packed(self):
        items = self.sorted_terms()
        exps = np.array([a for a, _ in items], dtype=np.int64).reshape(
            len(items), self.d)
        coefs = np.array([m for _, m in items], dtype=complex).reshape(
            len(items), self.rows, self.cols)
        return exps, coefs

    def eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.shape[0] != self.d:
            raise DimensionMismatch(
                f"point has {z.shape[0]} coordinates, polynomial has d={self.d}")
        return self.eval_many(z[None, :])[0]

    def eval_many(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DimensionMismatch("points must be (N, d)")
        exps, coefs = self._packed
        return poly_eval_many(exps, coefs, pts)

    def sharp(self):
        """Entrywise-conjugated coefficients: p#(z) = conj(p(conj(z)))."""
        return MatrixPolynomial(
            self.d, self.rows, self.cols,
            {a: np.conj(m) for a, m in self.terms.items()})

    def total_degree(self) -> int:
        """Max |alpha| over stored terms; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(a) for a in self.terms)

    def _check_same_space(self, other):
        if self.d != other.d:
            raise DimensionMismatch("variable counts differ")

    def __add__(self, other):
        self._check_same_space(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shapes differ for +")
        merged = {a: m.copy() for a, m in self.terms.items()}
        for a, m in other.terms.items():
            merged[a] = merged.get(a, 0) + m
        return MatrixPolynomial.from_terms(
            self.d, merged, rows=self.rows, cols=self.cols)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __matmul__(self, other):
        self._check_same_space(other)
        if self.cols != other.rows:
            raise DimensionMismatch("inner dimensions differ for @")
        prod = {}
        for a, ma in self.terms.items():
            for b, mb in other.terms.items():
                c = tuple(x + y for x, y in zip(a, b))
                prod[c] = prod.get(c, 0) + ma @ mb
        return MatrixPolynomial.from_terms(
            self.d, prod, rows=self.rows, cols=other.cols)

    def scale(self, scalar):
        return MatrixPolynomial.from_terms(
            self.d, {a: scalar * m for a, m in self.terms.items()},
            rows=self.rows, cols=self.cols)

    def __eq__(self, other):
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        if (self.d, self.rows, self.cols) != (other.d, other.rows, other.cols):
            return False
        if set(self.terms) != set(other.terms):
            return False
        return all(np.array_equal(self.terms[a], other.terms[a])
                   for a in self.terms)

    def __hash__(self):  # pragma: no cover - dataclass requires opting out
        return id(self)


@dataclass(frozen=True)
class FunctionHandle:
    """Evaluatable matrix-valued function of d complex variables.

    ``evaluator`` maps a (d,) point to a (rows, cols) array and may raise
    :class:`EvaluationSingular`; non-finite values are converted to that
    error as well.  ``batch_evaluator``, when set, maps (N, d) points to
    (N, rows, cols) in one call and is used by the sweep machinery.
    """

    d: int
    rows: int
    cols: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: str = "entire"
    batch_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.shape[0] != self.d:
            raise DimensionMismatch(
                f"point has {z.shape[0]} coordinates, handle has d={self.d}")
        out = np.asarray(self.evaluator(z), dtype=complex)
        out = out.reshape(self.rows, self.cols)
        if not np.all(np.isfinite(out)):
            raise EvaluationSingular("non-finite value", point=tuple(z))
        return out

    def eval_many(self, pts) -> np.ndarray:
        """Evaluate at (N, d) points; poles raise, use the sweep helpers in
        :mod:`longresolvent.verify` to skip-and-count them instead."""
        pts = np.asarray(pts, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DimensionMismatch("points must be (N, d)")
        if self.batch_evaluator is not None:
            out = np.asarray(self.batch_evaluator(pts), dtype=complex)
            if not np.all(np.isfinite(out)):
                raise EvaluationSingular("non-finite value in batch")
            return out.reshape(pts.shape[0], self.rows, self.cols)
        return np.array([self(z) for z in pts]).reshape(
            pts.shape[0], self.rows, self.cols)

    @staticmethod
    def from_polynomial(p: MatrixPolynomial, domain="entire"):
        return FunctionHandle(
            p.d, p.rows, p.cols, p.eval, domain, p.eval_many)
