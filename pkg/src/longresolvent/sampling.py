"""Deterministic sample plans and the report record used by all checks."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EvaluationSingular, InsufficientSamples

__all__ = ["SamplePlan", "SampleReport", "masked_eval"]

DOMAINS = ("polydisk", "polyhalfplane", "torus", "conjugation_pairs",
           "scaling_rays")

# scaling factors exercised by homogeneity checks, fixed across runs
RAY_SCALES = (2.0, -1.0, 1j, 0.5 + 0.5j, -3.0, 0.25j)


def _disk_points(rng, count, d, radius):
    r = radius * np.sqrt(rng.uniform(size=(count, d)))
    th = rng.uniform(0.0, 2.0 * np.pi, size=(count, d))
    return r * np.exp(1j * th)


def _torus_grid(d, order, phase):
    base = np.exp(1j * (2.0 * np.pi * np.arange(order) / order + phase))
    grids = np.meshgrid(*([base] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(frozen=True)
class SamplePlan:
    """Seeded, deterministic point generator over one of the domains."""

    domain: str = "polyhalfplane"
    seed: int = 0
    count: int = 100
    radius: float = 0.9

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")

    def points(self, d) -> np.ndarray:
        """(N, d) complex points for the plan's domain."""
        rng = np.random.default_rng(self.seed)
        if self.domain == "polydisk":
            return _disk_points(rng, self.count, d, self.radius)
        if self.domain == "polyhalfplane":
            zeta = _disk_points(rng, self.count, d, self.radius)
            return (1.0 + zeta) / (1.0 - zeta)
        if self.domain == "torus":
            phases = rng.uniform(0.0, 2.0 * np.pi, size=2)
            grid = np.concatenate(
                [_torus_grid(d, 8, phases[0]), _torus_grid(d, 13, phases[1])])
            if grid.shape[0] <= self.count:
                return grid
            stride = np.linspace(0, grid.shape[0] - 1, self.count).astype(int)
            return grid[stride]
        raise ValueError(f"{self.domain} does not expand to bare points")

    def pairs(self, d):
        """(z, conj(z)) pairs for realness checks, as two (N, d) arrays."""
        if self.domain != "conjugation_pairs":
            raise ValueError("pairs() requires the conjugation_pairs domain")
        rng = np.random.default_rng(self.seed)
        zeta = _disk_points(rng, self.count, d, self.radius)
        z = (1.0 + zeta) / (1.0 - zeta)
        return z, np.conj(z)

    def rays(self, d):
        """(scales, base points) for homogeneity checks."""
        if self.domain != "scaling_rays":
            raise ValueError("rays() requires the scaling_rays domain")
        rng = np.random.default_rng(self.seed)
        zeta = _disk_points(rng, self.count, d, self.radius)
        z = (1.0 + zeta) / (1.0 - zeta)
        return np.array(RAY_SCALES, dtype=complex), z


@dataclass(frozen=True)
class SampleReport:
    """Outcome of one sampled identity check."""

    name: str
    samples: int
    skipped: int
    max_residual: float
    threshold: float
    passed: bool
    worst_point: Optional[tuple] = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        worst = None
        if self.worst_point is not None:
            worst = [[float(np.real(c)), float(np.imag(c))]
                     for c in self.worst_point]
        return {
            "name": self.name,
            "samples": self.samples,
            "skipped": self.skipped,
            "max_residual": float(self.max_residual),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "worst_point": worst,
            "details": {k: float(v) for k, v in self.details.items()},
        }

    def __str__(self):
        mark = "pass" if self.passed else "FAIL"
        return (f"[{mark}] {self.name}: max residual {self.max_residual:.3e} "
                f"(threshold {self.threshold:.1e}, {self.samples} samples, "
                f"{self.skipped} skipped)")


def masked_eval(handle, pts):
    """Evaluate a handle at (N, d) points, skipping singular ones.

    Returns ``(values, ok)`` where ``values[i]`` is valid when ``ok[i]``.
    Raises :class:`InsufficientSamples` when every point is singular.
    """
    pts = np.asarray(pts, dtype=complex)
    N = pts.shape[0]
    ok = np.ones(N, dtype=bool)
    try:
        vals = handle.eval_many(pts)
        if np.all(np.isfinite(vals)):
            return vals, ok
    except (EvaluationSingular, np.linalg.LinAlgError):
        pass
    # slow path: per point, classifying singular samples
    vals = np.zeros((N, handle.rows, handle.cols), dtype=complex)
    for i, z in enumerate(pts):
        try:
            vals[i] = handle(z)
        except (EvaluationSingular, np.linalg.LinAlgError):
            ok[i] = False
    if not np.any(ok):
        raise InsufficientSamples("all sample points were singular")
    return vals, ok
