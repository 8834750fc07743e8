"""Tests for the LMI-form semidefinite programming layer."""

import numpy as np
import pytest

from robustnoma.sdp import (
    SdpBlock,
    SdpProblem,
    SdpStatus,
    embed_hermitian,
    hermitian_basis,
    hermitian_eig,
    solve_sdp,
    dump_problem,
)


def test_embed_hermitian_structure():
    H = np.array([[2.0, 1.0 - 1.0j], [1.0 + 1.0j, 3.0]])
    M = embed_hermitian(H)
    assert M.shape == (4, 4)
    assert np.allclose(M, M.T)
    vals_h = np.linalg.eigvalsh(H)
    vals_m = np.linalg.eigvalsh(M)
    assert np.allclose(np.sort(np.repeat(vals_h, 2)), vals_m)


def test_embed_hermitian_quadratic_form():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    H = G + G.conj().T
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    xt = np.concatenate([x.real, x.imag])
    assert np.vdot(x, H @ x).real == pytest.approx(xt @ embed_hermitian(H) @ xt)


def test_embed_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        embed_hermitian(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_hermitian_eig_matches_numpy():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = G @ G.conj().T
    vals, vecs = hermitian_eig(H)
    assert np.all(np.diff(vals) >= 0)
    assert np.allclose(H @ vecs, vecs * vals)


def test_hermitian_basis_spans_and_maps_coordinates():
    n = 3
    basis = hermitian_basis(n)
    assert len(basis) == n * n
    rng = np.random.default_rng(2)
    y = rng.standard_normal(n * n)
    W = sum(c * B for c, B in zip(y, basis))
    assert np.allclose(W, W.conj().T)
    # diagonal coordinates come first
    assert np.allclose(np.diag(W).real, y[:n])


def test_sdp_block_validation():
    with pytest.raises(ValueError):
        SdpBlock(f0=np.array([[0.0, 1.0], [0.0, 0.0]]), coeffs={})
    blk = SdpBlock(f0=np.eye(2), coeffs={0: 2 * np.eye(2)})
    assert np.allclose(blk.evaluate(np.array([3.0])), 7 * np.eye(2))


def test_solve_sdp_min_eigenvalue_bound():
    # minimize y s.t. y I - A >= 0  => y* = lambda_max(A)
    A = np.diag([1.0, 4.0, 2.0])
    blk = SdpBlock(f0=-A, coeffs={0: np.eye(3)})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(blk,))
    sol = solve_sdp(prob, tol=1e-9)
    assert sol.status == SdpStatus.OPTIMAL
    assert sol.y[0] == pytest.approx(4.0, abs=1e-6)


def test_solve_sdp_linear_program_block():
    # 1x1 blocks route through the linear cone: minimize y subject to y >= 5
    blk = SdpBlock(f0=np.array([[-5.0]]), coeffs={0: np.array([[1.0]])})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(blk,))
    sol = solve_sdp(prob)
    assert sol.status == SdpStatus.OPTIMAL
    assert sol.y[0] == pytest.approx(5.0, abs=1e-6)


def test_solve_sdp_infeasible():
    # y >= 1 and -y >= 1 simultaneously
    b1 = SdpBlock(f0=np.array([[-1.0]]), coeffs={0: np.array([[1.0]])})
    b2 = SdpBlock(f0=np.array([[-1.0]]), coeffs={0: np.array([[-1.0]])})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(b1, b2))
    sol = solve_sdp(prob)
    assert sol.status == SdpStatus.INFEASIBLE


def test_solve_sdp_unbounded():
    # minimize -y with only y >= 0
    prob = SdpProblem(num_vars=1, objective=np.array([-1.0]), blocks=(), nonneg_vars=(0,))
    sol = solve_sdp(prob)
    assert sol.status == SdpStatus.UNBOUNDED


def test_solve_sdp_nonneg_vars():
    # minimize y with y >= 0 and y >= -3 => y* = 0
    blk = SdpBlock(f0=np.array([[3.0]]), coeffs={0: np.array([[1.0]])})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(blk,), nonneg_vars=(0,))
    sol = solve_sdp(prob)
    assert sol.status == SdpStatus.OPTIMAL
    assert sol.y[0] == pytest.approx(0.0, abs=1e-6)


def test_solve_sdp_two_variable_complex_embedding():
    # minimize y1 + y2 s.t. diag(y1, y2) >= H for a Hermitian H via embedding
    H = np.array([[1.0, 0.5 - 0.5j], [0.5 + 0.5j, 2.0]])
    basis = [np.diag([1.0 + 0.0j, 0.0]), np.diag([0.0, 1.0 + 0.0j])]
    blk = SdpBlock(
        f0=embed_hermitian(-H),
        coeffs={i: embed_hermitian(B) for i, B in enumerate(basis)},
    )
    prob = SdpProblem(num_vars=2, objective=np.ones(2), blocks=(blk,))
    sol = solve_sdp(prob, tol=1e-9)
    assert sol.status == SdpStatus.OPTIMAL
    M = np.diag(sol.y) - H
    assert np.linalg.eigvalsh(M).min() >= -1e-6
    # optimum pushes the slack matrix to singularity
    assert np.linalg.eigvalsh(M).min() == pytest.approx(0.0, abs=1e-5)


def test_duality_gap_reported():
    blk = SdpBlock(f0=-np.eye(2), coeffs={0: np.eye(2)})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(blk,))
    sol = solve_sdp(prob, tol=1e-9)
    assert sol.duality_gap >= 0
    assert sol.duality_gap < 1e-7


def test_dump_problem_round_trippable_text():
    blk = SdpBlock(f0=np.eye(2), coeffs={0: np.eye(2)})
    prob = SdpProblem(num_vars=1, objective=np.array([1.0]), blocks=(blk,))
    text = dump_problem(prob)
    assert text.startswith("num_vars 1")
    assert "block 0 dim 2" in text
