import numpy as np
import pytest
from numpy.testing import assert_allclose

from longresolvent.errors import (
    GramMismatch,
    HermitianInfeasible,
    NotHermitian,
    NotPSD,
)
from longresolvent.numerics import (
    DEFAULT_TOL,
    Tolerances,
    eigenspace_of_unitary,
    hermitian_eig,
    mnorm,
    psd_sqrt,
    rank_factor_psd,
    unitary_completion,
)


def test_tolerances_positive():
    with pytest.raises(ValueError):
        Tolerances(identity_atol=0.0)
    t = Tolerances()
    assert t.identity_atol == 1e-9
    assert t.rank_rtol == 1e-10
    assert t.psd_atol == 1e-10


class TestHermitianEig:
    def test_identity(self):
        lam, Q = hermitian_eig(np.eye(2))
        assert_allclose(lam, [1.0, 1.0])
        assert_allclose(Q @ Q.conj().T, np.eye(2), atol=1e-14)

    def test_diagonal_sorts_ascending(self):
        lam, Q = hermitian_eig(np.diag([3.0, -1.0]))
        assert_allclose(lam, [-1.0, 3.0])
        # column swap permutation up to sign
        assert_allclose(np.abs(Q), [[0, 1], [1, 0]], atol=1e-14)

    def test_two_by_two_hand_eigenvalues(self):
        # char poly (2-x)^2 - 1: roots 1 and 3
        lam, Q = hermitian_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert_allclose(lam, [1.0, 3.0], atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_reconstruction_random(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            B = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            M = B + B.conj().T
            lam, Q = hermitian_eig(M)
            assert mnorm(M - (Q * lam) @ Q.conj().T) <= 1e-9 * mnorm(M)
            assert mnorm(Q.conj().T @ Q - np.eye(5)) <= 1e-12


class TestPsdSqrt:
    def test_identity(self):
        assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]),
                        atol=1e-13)

    def test_rank_one_spectral_formula(self):
        M = np.array([[1.0, -1.0], [-1.0, 1.0]])
        expected = M / np.sqrt(2.0)
        S = psd_sqrt(M)
        assert_allclose(S, expected, atol=1e-13)
        assert_allclose(S @ S, M, atol=1e-13)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPSD):
            psd_sqrt(np.diag([1.0, -1.0]))

    def test_clamps_tiny_negative(self):
        S = psd_sqrt(np.diag([1.0, -1e-12]))
        assert_allclose(S, np.diag([1.0, 0.0]), atol=1e-6)


class TestRankFactor:
    def test_zero_matrix_empty_factor(self):
        Y = rank_factor_psd(np.zeros((2, 2)))
        assert Y.shape == (0, 2)

    def test_diagonal_rank_one(self):
        Y = rank_factor_psd(np.diag([0.0, 2.0]))
        assert_allclose(Y, [[0.0, np.sqrt(2.0)]], atol=1e-13)

    def test_rank_one_sign_convention(self):
        Y = rank_factor_psd(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert_allclose(Y, [[1.0, -1.0]], atol=1e-13)

    def test_gram_recovery_random(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            r = rng.integers(1, 5)
            G = rng.standard_normal((r, 6)) + 1j * rng.standard_normal((r, 6))
            M = G.conj().T @ G
            Y = rank_factor_psd(M)
            assert Y.shape[0] == np.linalg.matrix_rank(M, tol=1e-8)
            assert mnorm(Y.conj().T @ Y - M) <= 1e-9 * max(1.0, mnorm(M))
            # full row rank
            sv = np.linalg.svd(Y, compute_uv=False)
            assert sv[-1] > 1e-10 * sv[0]

    def test_phase_convention_first_entry_positive(self):
        rng = np.random.default_rng(2)
        G = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        Y = rank_factor_psd(G.conj().T @ G)
        for row in Y:
            j = np.argmax(np.abs(row) > 1e-12 * np.abs(row).max())
            assert abs(row[j].imag) <= 1e-12
            assert row[j].real > 0


class TestUnitaryCompletion:
    def test_identity_case(self):
        U = unitary_completion(np.eye(3), np.eye(3))
        assert_allclose(U, np.eye(3), atol=1e-12)

    def test_swap_is_hermitian_completion(self):
        L = np.array([[1.0], [0.0]])
        R = np.array([[0.0], [1.0]])
        U = unitary_completion(L, R, hermitian_wanted=True)
        assert_allclose(U, [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)

    def test_column_family_determines_swap(self):
        zs = np.array([0.1, -0.4 + 0.2j, 0.6j, 0.3 - 0.3j])
        L = np.stack([zs, np.ones_like(zs)])
        R = np.stack([np.ones_like(zs), zs])
        U = unitary_completion(L, R, hermitian_wanted=True)
        assert_allclose(U, [[0.0, 1.0], [1.0, 0.0]], atol=1e-10)

    def test_random_gram_matched_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            s, t = int(rng.integers(2, 6)), int(rng.integers(1, 7))
            L = rng.standard_normal((s, t)) + 1j * rng.standard_normal((s, t))
            Q = np.linalg.qr(rng.standard_normal((s, s))
                             + 1j * rng.standard_normal((s, s)))[0]
            R = Q @ L
            U = unitary_completion(L, R)
            assert mnorm(U.conj().T @ U - np.eye(s)) <= 1e-9
            assert mnorm(U @ L - R) <= 1e-9 * max(1.0, mnorm(L))

    def test_hermitian_on_symmetric_instances(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            s = int(rng.integers(2, 6))
            Q = np.linalg.qr(rng.standard_normal((s, s))
                             + 1j * rng.standard_normal((s, s)))[0]
            signs = np.where(rng.uniform(size=s) < 0.5, -1.0, 1.0)
            H = (Q * signs) @ Q.conj().T
            L = rng.standard_normal((s, 3)) + 1j * rng.standard_normal((s, 3))
            R = H @ L
            U = unitary_completion(L, R, hermitian_wanted=True)
            assert mnorm(U - U.conj().T) <= 1e-9
            assert mnorm(U @ L - R) <= 1e-8 * max(1.0, mnorm(L))

    def test_gram_mismatch_rejected(self):
        with pytest.raises(GramMismatch):
            unitary_completion(np.eye(2), 1.1 * np.eye(2))

    def test_hermitian_infeasible_cross_gram(self):
        # mapping e1 to i e1 needs the eigenvalue i: unitary but never
        # Hermitian, and the cross Gram i is not real
        L = np.array([[1.0], [0.0]])
        R = np.array([[1.0j], [0.0]])
        with pytest.raises(HermitianInfeasible):
            unitary_completion(L, R, hermitian_wanted=True)

    def test_real_inputs_give_real_orthogonal(self):
        rng = np.random.default_rng(5)
        L = rng.standard_normal((4, 2))
        Q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        R = Q @ L
        U = unitary_completion(L, R)
        assert not np.iscomplexobj(U)
        assert mnorm(U.T @ U - np.eye(4)) <= 1e-9


class TestEigenspaceOfUnitary:
    def test_identity_full_space(self):
        QH = eigenspace_of_unitary(np.eye(3), 1.0)
        assert QH.shape == (3, 3)
        assert mnorm(QH @ QH.conj().T - np.eye(3)) <= 1e-12

    def test_diagonal_selects_e1(self):
        QH = eigenspace_of_unitary(np.diag([1.0, -1.0]).astype(complex), 1.0)
        assert QH.shape == (2, 1)
        assert_allclose(np.abs(QH[:, 0]), [1.0, 0.0], atol=1e-12)

    def test_swap_eigenvector(self):
        W = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        QH = eigenspace_of_unitary(W, 1.0)
        assert QH.shape == (2, 1)
        proj = QH @ QH.conj().T
        assert_allclose(proj, 0.5 * np.ones((2, 2)), atol=1e-12)

    def test_empty_eigenspace(self):
        W = np.diag([np.exp(0.4j), np.exp(-1.1j)])
        QH = eigenspace_of_unitary(W, 1.0)
        assert QH.shape == (2, 0)

    def test_projector_commutes_with_w(self):
        rng = np.random.default_rng(6)
        Q = np.linalg.qr(rng.standard_normal((5, 5))
                         + 1j * rng.standard_normal((5, 5)))[0]
        W = (Q * np.array([1, 1, -1, 1j, -1j])) @ Q.conj().T
        QH = eigenspace_of_unitary(W, 1.0)
        assert QH.shape == (5, 2)
        P = QH @ QH.conj().T
        assert mnorm(P @ W - W @ P) <= 1e-9
        assert mnorm(W @ QH - QH) <= 1e-9
