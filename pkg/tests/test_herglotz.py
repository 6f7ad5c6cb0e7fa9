import numpy as np
import pytest
from numpy.testing import assert_allclose

from longresolvent.errors import KernelNotConstant, NotPSD
from longresolvent.herglotz import (
    HerglotzRealization,
    reduce_to_plus,
    schur_to_herglotz,
    split_at_zero,
    xi_functions,
)
from longresolvent.numerics import mnorm
from longresolvent.polyalg import FunctionHandle
from longresolvent.realization import GivoneRoesserRealization
from longresolvent.sampling import SamplePlan
from longresolvent.verify import check_boundary_skew, gen_instance

from conftest import crandn


def scalar_moebius():
    """(beta, W, V) = (0, [1], [1]): F(zeta) = (1 + zeta)/(1 - zeta)."""
    return HerglotzRealization(1, 1, (1,), np.zeros((1, 1)), np.eye(1),
                               np.eye(1))


class TestEval:
    def test_center_value(self):
        H = gen_instance("herglotz_realization", seed=0, d=2, n=2, m=3)
        expected = H.beta + H.V.conj().T @ H.V
        assert_allclose(H.eval([0.0, 0.0]), expected, atol=1e-12)

    def test_scalar_moebius(self):
        H = scalar_moebius()
        for z in (0.0, 0.5, 0.3j, -0.2 + 0.1j):
            want = (1 + z) / (1 - z)
            assert H.eval([z])[0, 0] == pytest.approx(want, abs=1e-12)

    def test_skew_shift(self):
        H = scalar_moebius()
        Hs = HerglotzRealization(1, 1, (1,), 1j * np.eye(1), np.eye(1),
                                 np.eye(1))
        z = 0.4 - 0.3j
        assert Hs.eval([z])[0, 0] == pytest.approx(
            1j + H.eval([z])[0, 0], abs=1e-12)

    def test_positivity_on_disk(self):
        H = gen_instance("herglotz_realization", seed=1, d=2, n=2, m=4)
        pts = SamplePlan("polydisk", seed=2, count=300).points(2)
        vals = H.eval_many(pts)
        for v in vals:
            lam = np.linalg.eigvalsh((v + v.conj().T) / 2.0)[0]
            assert lam >= -1e-9

    def test_boundary_skew(self):
        H = gen_instance("herglotz_realization", seed=3, d=2, n=1, m=3)
        rep = check_boundary_skew(H.handle(),
                                  SamplePlan("torus", seed=4, count=64))
        assert rep.passed, rep


class TestSplitAtZero:
    def test_identity(self):
        beta, gamma, delta = split_at_zero(np.eye(2))
        assert_allclose(beta, np.zeros((2, 2)), atol=1e-14)
        assert_allclose(gamma, np.eye(2), atol=1e-14)
        assert_allclose(delta, np.eye(2), atol=1e-13)

    def test_rank_deficient_diagonal(self):
        beta, gamma, delta = split_at_zero(np.diag([1j, 2.0]))
        assert_allclose(beta, np.diag([1j, 0.0]), atol=1e-14)
        assert_allclose(gamma, np.diag([0.0, 2.0]), atol=1e-14)
        assert_allclose(delta, [[0.0, np.sqrt(2.0)]], atol=1e-13)

    def test_rank_one_hermitian(self):
        F0 = np.array([[1.0, 1j], [-1j, 1.0]])
        beta, gamma, delta = split_at_zero(F0)
        assert delta.shape == (1, 2)
        assert_allclose(delta.conj().T @ delta, F0, atol=1e-12)

    def test_not_herglotz_center(self):
        with pytest.raises(NotPSD):
            split_at_zero(-np.eye(2))


class TestReduceToPlus:
    def test_identity_delta(self):
        H = scalar_moebius()
        F = H.handle()
        Fp = reduce_to_plus(F, np.zeros((1, 1)), np.eye(1))
        assert Fp([0.0])[0, 0] == pytest.approx(1.0)
        z = 0.3 + 0.2j
        assert Fp([z])[0, 0] == pytest.approx(F([z])[0, 0], abs=1e-12)

    def test_rank_deficient_projection(self):
        def ev(zeta):
            return np.diag([(1 + zeta[0]) / (1 - zeta[0]), 0.0])

        F = FunctionHandle(1, 2, 2, ev, "polydisk")
        beta, gamma, delta = split_at_zero(F([0.0]))
        Fp = reduce_to_plus(F, beta, delta)
        assert Fp.rows == 1
        z = 0.25j
        assert Fp([z])[0, 0] == pytest.approx((1 + z) / (1 - z), abs=1e-12)

    def test_moving_kernel_rejected(self):
        def ev(zeta):
            return np.diag([(1 + zeta[0]) / (1 - zeta[0]), zeta[0]])

        F = FunctionHandle(1, 2, 2, ev, "polydisk")
        beta, gamma, delta = split_at_zero(F([0.0]))
        with pytest.raises(KernelNotConstant):
            reduce_to_plus(F, beta, delta)


class TestSchurToHerglotz:
    def test_swap_colligation_becomes_moebius(self):
        U = np.array([[0.0, 1.0], [1.0, 0.0]])
        re = GivoneRoesserRealization(1, 1, (1,), U, unitary=True,
                                      hermitian=True)
        H = schur_to_herglotz(re, np.zeros((1, 1)), np.eye(1))
        assert_allclose(H.W, np.eye(1), atol=1e-14)
        assert_allclose(H.V, np.eye(1), atol=1e-14)
        z = 0.6j
        assert H.eval([z])[0, 0] == pytest.approx((1 + z) / (1 - z),
                                                  abs=1e-12)

    def test_beta_carried_through(self):
        U = np.array([[0.0, 1.0], [1.0, 0.0]])
        re = GivoneRoesserRealization(1, 1, (1,), U, unitary=True)
        H = schur_to_herglotz(re, 1j * np.eye(1), np.eye(1))
        z = 0.2
        assert H.eval([z])[0, 0] == pytest.approx(1j + (1 + z) / (1 - z),
                                                  abs=1e-12)

    def test_nonzero_d_rejected(self):
        from longresolvent.errors import NonzeroD

        re = gen_instance("gr_unitary", seed=5, d=1, n=1, m=2)
        if mnorm(re.D) > 1e-9:
            with pytest.raises(NonzeroD):
                schur_to_herglotz(re, np.zeros((1, 1)), np.eye(1))


class TestXiFunctions:
    def test_scalar_resolvent(self):
        H = scalar_moebius()
        (xi,) = xi_functions(H)
        for z in (0.0, 0.4, -0.3j):
            assert xi([z])[0, 0] == pytest.approx(np.sqrt(2) / (1 - z),
                                                  abs=1e-12)

    def test_center_identity(self):
        H = gen_instance("herglotz_realization", seed=6, d=2, n=2, m=4)
        xis = xi_functions(H)
        lhs = H.eval([0, 0]).conj().T + H.eval([0, 0])
        rhs = sum(x([0, 0]).conj().T @ x([0, 0]) for x in xis)
        assert mnorm(lhs - rhs) <= 1e-10

    def test_scaling_bilinearity(self):
        H = scalar_moebius()
        H2 = HerglotzRealization(1, 1, (1,), np.zeros((1, 1)), np.eye(1),
                                 2.0 * np.eye(1))
        (xi,) = xi_functions(H)
        (xi2,) = xi_functions(H2)
        z = 0.3 - 0.1j
        assert xi2([z])[0, 0] == pytest.approx(2 * xi([z])[0, 0], abs=1e-12)

    def test_decomposition_residual_on_pairs(self):
        H = gen_instance("herglotz_realization", seed=7, d=3, n=2, m=4)
        xis = xi_functions(H)
        ws = SamplePlan("polydisk", seed=8, count=100).points(3)
        zs = SamplePlan("polydisk", seed=9, count=100).points(3)
        Fw = H.eval_many(ws)
        Fz = H.eval_many(zs)
        xw = [x.eval_many(ws) for x in xis]
        xz = [x.eval_many(zs) for x in xis]
        worst = 0.0
        for i in range(100):
            lhs = Fw[i].conj().T + Fz[i]
            rhs = np.zeros_like(lhs)
            for k in range(3):
                coef = 1.0 - np.conj(ws[i, k]) * zs[i, k]
                rhs += coef * xw[k][i].conj().T @ xz[k][i]
            worst = max(worst, mnorm(lhs - rhs))
        assert worst <= 1e-9
