import numpy as np
import pytest
from numpy.testing import assert_allclose

from longresolvent.cayley import (
    TupleOfMatrices,
    disk_to_halfplane,
    double_cayley,
    halfplane_to_disk,
    operator_cayley_tuple,
    value_cayley,
)
from longresolvent.errors import (
    CayleySingular,
    CommutationViolated,
    NotStrictContraction,
    NotStrictlyAccretive,
    SingularShift,
)
from longresolvent.numerics import mnorm
from longresolvent.polyalg import FunctionHandle

from conftest import crandn


class TestVariableMaps:
    def test_origin_to_ones(self):
        assert_allclose(disk_to_halfplane(np.zeros(3)), np.ones(3))

    def test_i_maps_to_i(self):
        assert disk_to_halfplane(np.array([1j]))[0] == pytest.approx(1j)

    def test_two_coordinates(self):
        z = disk_to_halfplane(np.array([1 / 3, -1 / 3]))
        assert_allclose(z, [2.0, 0.5], atol=1e-14)

    def test_halfplane_examples(self):
        assert_allclose(halfplane_to_disk(np.ones(2)), np.zeros(2))
        assert halfplane_to_disk(np.array([3.0]))[0] == pytest.approx(0.5)

    def test_round_trip_specific(self):
        zeta = np.array([0.2 + 0.1j, -0.5])
        assert_allclose(halfplane_to_disk(disk_to_halfplane(zeta)), zeta,
                        atol=1e-14)

    def test_round_trip_random(self):
        rng = np.random.default_rng(0)
        pts = 0.95 * crandn(rng, (500, 3))
        back = halfplane_to_disk(disk_to_halfplane(pts))
        assert np.abs(back - pts).max() <= 1e-12 * max(1.0, np.abs(pts).max())
        z = disk_to_halfplane(0.9 * crandn(rng, (500, 3)))
        assert np.abs(disk_to_halfplane(halfplane_to_disk(z)) - z).max() <= \
            1e-12 * np.abs(z).max()

    def test_singularities(self):
        with pytest.raises(CayleySingular):
            disk_to_halfplane(np.array([0.3, 1.0]))
        with pytest.raises(CayleySingular):
            halfplane_to_disk(np.array([-1.0]))


class TestValueCayley:
    def test_identity_to_zero(self):
        assert_allclose(value_cayley(np.eye(2), "herglotz_to_schur"),
                        np.zeros((2, 2)), atol=1e-14)

    def test_zero_to_identity(self):
        assert_allclose(value_cayley(np.zeros((2, 2)), "schur_to_herglotz"),
                        np.eye(2), atol=1e-14)

    def test_scalar_three(self):
        out = value_cayley(np.array([[3.0]]), "herglotz_to_schur")
        assert out[0, 0] == pytest.approx(0.5)

    def test_mutually_inverse_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            # positive definite real part keeps both shifts invertible
            B = crandn(rng, (3, 3))
            M = B @ B.conj().T + np.eye(3) + crandn(rng, (3, 3), 0.3)
            S = value_cayley(M, "herglotz_to_schur")
            back = value_cayley(S, "schur_to_herglotz")
            assert mnorm(back - M) <= 1e-10 * max(1.0, mnorm(M))

    def test_singular_shift_reported(self):
        with pytest.raises(SingularShift):
            value_cayley(-np.eye(2), "herglotz_to_schur")


class TestOperatorCayley:
    def test_zero_tuple_to_identity(self):
        T = TupleOfMatrices((np.zeros((2, 2)),) * 3)
        R = operator_cayley_tuple(T, "contractive_to_accretive")
        for Rk in R.mats:
            assert_allclose(Rk, np.eye(2), atol=1e-14)

    def test_scalar_half_to_three(self):
        T = TupleOfMatrices((np.array([[0.5]]),))
        R = operator_cayley_tuple(T, "contractive_to_accretive")
        assert R.mats[0][0, 0] == pytest.approx(3.0)

    def test_commuting_construction_stays_commuting(self):
        rng = np.random.default_rng(2)
        N = np.triu(crandn(rng, (4, 4)), k=1)  # nilpotent
        T1 = 0.3 * np.eye(4) + 0.2 * N
        T2 = 0.1 * np.eye(4) + 0.4 * N @ N
        R = operator_cayley_tuple(
            TupleOfMatrices((T1, T2)), "contractive_to_accretive")
        comm = mnorm(R.mats[0] @ R.mats[1] - R.mats[1] @ R.mats[0])
        assert comm <= 1e-10 * max(1.0, mnorm(R.mats[0]) * mnorm(R.mats[1]))

    def test_accretive_images_on_seeded_contractions(self):
        from longresolvent.verify import gen_instance

        for seed in range(200):
            T = gen_instance("commuting_contractions", seed, d=2, size=3)
            R = operator_cayley_tuple(T, "contractive_to_accretive")
            for Rk in R.mats:
                lam = np.linalg.eigvalsh(Rk + Rk.conj().T)[0]
                assert lam > 0
            back = operator_cayley_tuple(R, "accretive_to_contractive")
            for Tk, Bk in zip(T.mats, back.mats):
                assert mnorm(Tk - Bk) <= 1e-10 * max(1.0, mnorm(Tk))

    def test_rejects_non_contraction(self):
        with pytest.raises(NotStrictContraction):
            operator_cayley_tuple(
                TupleOfMatrices((np.eye(2),)), "contractive_to_accretive")

    def test_rejects_non_accretive(self):
        with pytest.raises(NotStrictlyAccretive):
            operator_cayley_tuple(
                TupleOfMatrices((-np.eye(2),)), "accretive_to_contractive")

    def test_commutation_enforced(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(CommutationViolated):
            TupleOfMatrices((A, A.T))


class TestDoubleCayley:
    def test_identity_function_fixed(self):
        f = FunctionHandle(1, 1, 1, lambda z: np.array([[z[0]]]),
                           "polyhalfplane")
        calF = double_cayley(f)
        for zeta in (0.0, 0.3, 0.5j):
            assert calF([zeta])[0, 0] == pytest.approx(complex(zeta),
                                                       abs=1e-12)

    def test_matrix_coordinate(self):
        f = FunctionHandle(2, 2, 2,
                           lambda z: z[0] * np.eye(2), "polyhalfplane")
        calF = double_cayley(f)
        assert_allclose(calF([0.4, 0.1]), 0.4 * np.eye(2), atol=1e-12)

    def test_center_value_from_value_at_ones(self):
        # calF(0) = (f(e) - I)(f(e) + I)^{-1}
        rng = np.random.default_rng(3)
        B = crandn(rng, (2, 2))
        fe = B @ B.conj().T + 0.5 * np.eye(2)
        f = FunctionHandle(2, 2, 2, lambda z: fe, "polyhalfplane")
        calF = double_cayley(f)
        expected = value_cayley(fe, "herglotz_to_schur")
        assert_allclose(calF([0.0, 0.0]), expected, atol=1e-12)

    def test_schur_image_contractive(self, parallel_pencil):
        from longresolvent.sampling import SamplePlan

        calF = double_cayley(parallel_pencil.handle())
        pts = SamplePlan("polydisk", seed=4, count=200).points(2)
        vals = calF.eval_many(pts)
        norms = np.linalg.norm(vals, ord=2, axis=(1, 2))
        assert norms.max() <= 1.0 + 1e-9
