"""The active backend must agree with the pure-numpy twins exactly enough
to be interchangeable; shapes and degenerate sizes are pinned here."""

import numpy as np
from numpy.testing import assert_allclose

from longresolvent import _kernels
from longresolvent._backend import BACKEND
from longresolvent._kernels import (
    _gr_transfer_np,
    _herglotz_defect_np,
    _herglotz_eval_np,
    _pencil_eval_np,
    _poly_eval_np,
    _state_defect_np,
    gr_transfer_many,
    herglotz_defect_many,
    herglotz_eval_many,
    pencil_eval_many,
    poly_eval_many,
    state_defect_many,
)
from longresolvent.verify import gen_instance

from conftest import crandn

RNG = np.random.default_rng(12345)
PTS = 0.5 * crandn(RNG, (37, 2))
DIMS = (2, 1)
W3 = np.repeat(PTS, DIMS, axis=1)


def test_backend_is_reported():
    assert BACKEND in ("numba", "numpy")


def test_pencil_agreement():
    pcl = gen_instance("pencil_nonhomogeneous", seed=0, d=2, n=2, m=2)
    A0 = pcl.coefficients[0]
    Ak = np.stack(pcl.coefficients[1:])
    pts = PTS + 1.5  # shift into the safe right halfplane
    got = pencil_eval_many(A0, Ak, 2, pts)
    ref = _pencil_eval_np(A0.astype(complex), Ak.astype(complex), 2,
                          pts.astype(complex))
    assert_allclose(got, ref, atol=1e-12)


def test_pencil_no_inner_block():
    A0 = np.array([[1j]])
    Ak = np.stack([np.eye(1), 2 * np.eye(1)]).astype(complex)
    got = pencil_eval_many(A0, Ak, 1, PTS)
    expected = 1j + PTS[:, 0] + 2 * PTS[:, 1]
    assert_allclose(got[:, 0, 0], expected, atol=1e-13)


def test_gr_transfer_agreement():
    re = gen_instance("gr_unitary", seed=1, d=2, n=2, m=3)
    pts = 0.8 * PTS / np.abs(PTS).max()
    got = gr_transfer_many(re.A, re.B, re.C, re.D, re.state_dims, pts)
    w = np.repeat(pts, re.state_dims, axis=1)
    ref = _gr_transfer_np(re.A, re.B, re.C, re.D, w)
    assert_allclose(got, ref, atol=1e-12)


def test_gr_transfer_empty_state():
    D = np.array([[0.5]])
    got = gr_transfer_many(np.zeros((0, 0)), np.zeros((0, 1)),
                           np.zeros((1, 0)), D, (0,), PTS[:, :1])
    assert got.shape == (37, 1, 1)
    assert_allclose(got[:, 0, 0], 0.5)


def test_state_defect_agreement():
    re = gen_instance("gr_unitary", seed=2, d=2, n=1, m=3)
    pts = 0.8 * PTS / np.abs(PTS).max()
    got = state_defect_many(re.A, re.B, re.state_dims, pts)
    w = np.repeat(pts, re.state_dims, axis=1)
    ref = _state_defect_np(re.A, re.B, w)
    assert_allclose(got, ref, atol=1e-12)


def test_herglotz_agreement():
    H = gen_instance("herglotz_realization", seed=3, d=2, n=2, m=3)
    pts = 0.8 * PTS / np.abs(PTS).max()
    got = herglotz_eval_many(H.beta, H.W, H.V, H.state_dims, pts)
    w = np.repeat(pts, H.state_dims, axis=1)
    ref = _herglotz_eval_np(H.beta, H.W, H.V, w)
    assert_allclose(got, ref, atol=1e-12)
    got_d = herglotz_defect_many(H.W, H.V, H.state_dims, pts)
    ref_d = _herglotz_defect_np(H.W, H.V, w)
    assert_allclose(got_d, ref_d, atol=1e-12)


def test_poly_agreement():
    exps = np.array([[0, 0], [1, 0], [2, 1]])
    coefs = crandn(RNG, (3, 2, 2))
    got = poly_eval_many(exps, coefs, PTS)
    ref = _poly_eval_np(exps, coefs, PTS)
    assert_allclose(got, ref, atol=1e-12)


def test_poly_empty_terms():
    got = poly_eval_many(np.zeros((0, 2), dtype=np.int64),
                         np.zeros((0, 1, 1)), PTS)
    assert got.shape == (37, 1, 1)
    assert np.all(got == 0)


def test_zero_points():
    got = poly_eval_many(np.array([[1, 0]]), np.ones((1, 1, 1)),
                         np.zeros((0, 2)))
    assert got.shape == (0, 1, 1)


def test_warm_up_runs():
    _kernels.warm_up()
