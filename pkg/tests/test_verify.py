import numpy as np
import pytest

from longresolvent.bessmertnyi import LongResolventPencil, pencil_decomposition
from longresolvent.cayley import TupleOfMatrices
from longresolvent.herglotz import HerglotzRealization
from longresolvent.numerics import mnorm
from longresolvent.polyalg import FunctionHandle
from longresolvent.realization import GivoneRoesserRealization
from longresolvent.sampling import SamplePlan, SampleReport, masked_eval
from longresolvent.verify import (
    check_cayley_inner,
    check_homogeneous,
    check_positive_kernel,
    check_real,
    check_herglotz_positivity,
    gen_instance,
)


def coordinate_handle():
    return FunctionHandle(1, 1, 1, lambda z: np.array([[z[0]]]),
                          "polyhalfplane")


class TestChecks:
    def test_cayley_inner_coordinate(self):
        rep = check_cayley_inner(coordinate_handle())
        assert rep.passed
        assert rep.max_residual <= 1e-12

    def test_cayley_inner_affine_residual_two(self):
        f = FunctionHandle(1, 1, 1, lambda z: np.array([[z[0] + 1.0]]),
                           "polyhalfplane")
        rep = check_cayley_inner(f)
        assert not rep.passed
        assert rep.max_residual == pytest.approx(2.0, abs=1e-12)

    def test_cayley_inner_parallel(self, parallel_pencil):
        rep = check_cayley_inner(parallel_pencil.handle())
        assert rep.passed
        assert rep.max_residual <= 1e-10

    def test_homogeneous_rational(self, parallel_pencil):
        rep = check_homogeneous(parallel_pencil.handle())
        assert rep.passed
        assert rep.max_residual <= 1e-12

    def test_homogeneous_affine_fails(self):
        f = FunctionHandle(1, 1, 1, lambda z: np.array([[z[0] + 1.0]]),
                           "polyhalfplane")
        rep = check_homogeneous(f)
        assert not rep.passed

    def test_positive_kernel_identity(self):
        rep = check_positive_kernel(lambda w, z: np.eye(2), d=2)
        assert rep.passed

    def test_positive_kernel_kolmogorov_form(self, parallel_pencil):
        deco = pencil_decomposition(parallel_pencil)
        for phi in deco.handles():
            rep = check_positive_kernel(
                lambda w, z, phi=phi: phi(w).conj().T @ phi(z), d=2)
            assert rep.passed, rep

    def test_positive_kernel_szego(self):
        def szego(w, z):
            return np.array([[1.0 / (1.0 - np.conj(w[0]) * z[0])]])

        rep = check_positive_kernel(
            szego, d=1, plan=SamplePlan("polydisk", seed=0, count=5))
        assert rep.passed
        assert rep.details["min_eigenvalue"] >= 0

    def test_positive_kernel_flags_indefinite(self):
        rep = check_positive_kernel(lambda w, z: -np.eye(1), d=1)
        assert not rep.passed

    def test_real_checks(self, parallel_pencil):
        assert check_real(parallel_pencil.handle()).passed
        f = FunctionHandle(1, 1, 1, lambda z: np.array([[1j * z[0]]]),
                           "polyhalfplane")
        assert not check_real(f).passed

    def test_positivity_sweep(self, parallel_pencil):
        rep = check_herglotz_positivity(parallel_pencil.handle())
        assert rep.passed
        assert rep.samples == 500


class TestMaskedEval:
    def test_skips_singular_points(self, parallel_pencil):
        h = parallel_pencil.handle()
        pts = np.array([[1.0, 1.0], [1.0, -1.0], [2.0, 1.0]])
        vals, ok = masked_eval(h, pts)
        assert list(ok) == [True, False, True]
        assert vals[0, 0, 0] == pytest.approx(0.5)

    def test_all_singular_raises(self, parallel_pencil):
        from longresolvent.errors import InsufficientSamples

        h = parallel_pencil.handle()
        pts = np.array([[1.0, -1.0], [2.0, -2.0]])
        with pytest.raises(InsufficientSamples):
            masked_eval(h, pts)


class TestSamplePlans:
    def test_determinism(self):
        a = SamplePlan("polyhalfplane", seed=3, count=50).points(2)
        b = SamplePlan("polyhalfplane", seed=3, count=50).points(2)
        assert np.array_equal(a, b)

    def test_polydisk_radius(self):
        pts = SamplePlan("polydisk", seed=1, count=200, radius=0.9).points(3)
        assert np.abs(pts).max() <= 0.9

    def test_halfplane_positive_real_parts(self):
        pts = SamplePlan("polyhalfplane", seed=2, count=200).points(2)
        assert pts.real.min() > 0

    def test_torus_unimodular(self):
        pts = SamplePlan("torus", seed=4, count=100).points(2)
        assert pts.shape[0] == 100
        assert np.abs(np.abs(pts) - 1.0).max() <= 1e-12

    def test_report_str_format(self):
        rep = SampleReport("demo", 10, 1, 2e-10, 1e-9, True, (0.1,))
        assert "demo" in str(rep) and "pass" in str(rep)


class TestGenerators:
    def test_all_kinds_satisfy_invariants_many_seeds(self):
        kinds = ["pencil_nonhomogeneous", "pencil_homogeneous",
                 "pencil_real", "herglotz_realization", "gr_unitary",
                 "gr_hermitian_unitary", "commuting_contractions"]
        for seed in range(1000):
            kind = kinds[seed % len(kinds)]
            obj = gen_instance(kind, seed, d=1 + seed % 3, n=1 + seed % 2,
                               m=seed % 4, size=2 + seed % 3)
            # constructors validate; round-trip through construction again
            if isinstance(obj, LongResolventPencil):
                LongResolventPencil(obj.d, obj.n, obj.m, obj.coefficients,
                                    obj.tag)
            elif isinstance(obj, HerglotzRealization):
                HerglotzRealization(obj.d, obj.n, obj.state_dims, obj.beta,
                                    obj.W, obj.V)
            elif isinstance(obj, GivoneRoesserRealization):
                GivoneRoesserRealization(obj.d, obj.n, obj.state_dims, obj.U,
                                         obj.unitary, obj.hermitian, obj.real)
            elif isinstance(obj, TupleOfMatrices):
                TupleOfMatrices(obj.mats)

    def test_gr_unitary_tight(self):
        re = gen_instance("gr_unitary", seed=9, d=2, n=2, m=3)
        s = re.m + re.n
        assert mnorm(re.U.conj().T @ re.U - np.eye(s)) <= 1e-12

    def test_contractions_margin_and_commutators(self):
        for seed in range(50):
            T = gen_instance("commuting_contractions", seed, d=3, size=4)
            assert max(mnorm(M) for M in T.mats) <= 0.9 + 1e-12
            for i in range(3):
                for j in range(i + 1, 3):
                    comm = mnorm(T.mats[i] @ T.mats[j]
                                 - T.mats[j] @ T.mats[i])
                    assert comm <= 1e-12

    def test_determinism(self):
        a = gen_instance("pencil_homogeneous", seed=7, d=2, n=1, m=1)
        b = gen_instance("pencil_homogeneous", seed=7, d=2, n=1, m=1)
        for ca, cb in zip(a.coefficients, b.coefficients):
            assert np.array_equal(ca, cb)

    def test_reports_are_deterministic(self, parallel_pencil):
        a = check_cayley_inner(parallel_pencil.handle())
        b = check_cayley_inner(parallel_pencil.handle())
        assert a == b
