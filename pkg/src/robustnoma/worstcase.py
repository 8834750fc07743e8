"""Worst-case CSI error for each receiver, in the sum-SINR sense.

For receiver l, the sum of the transformed SINRs of all signals it must decode
is a (concave) quadratic -e^H A e + 2 Re(e^H b) + c in the error vector e.
Minimizing it over the ball ||e|| <= eps is a trust-region-type problem with
zero duality gap: the dual is a one-variable SDP, and the minimizer follows in
closed form from the optimal multiplier, including the degenerate case where
the shifted matrix becomes singular and a null-space completion is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .model import BeamformerSet, ChannelSet
from .qt import ScalingSet
from .sdp import SdpBlock, SdpProblem, SdpStatus, embed_hermitian, solve_sdp

__all__ = [
    "InnerQuadratic",
    "DualSolution",
    "RecoveryError",
    "assemble_quadratic",
    "solve_dual",
    "dual_value",
    "recover_error",
    "primal_value",
    "brute_force_worst_error",
]


class RecoveryError(RuntimeError):
    """Worst-case error recovery is inconsistent with the dual solution."""


@dataclass(frozen=True)
class InnerQuadratic:
    """Coefficients of -e^H A e + 2 Re(e^H b) + c with A Hermitian PSD."""

    A: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        b = np.atleast_1d(np.asarray(self.b, dtype=complex))
        if A.shape != (b.size, b.size):
            raise ValueError("A and b dimensions are inconsistent")
        scale = max(1.0, float(np.linalg.norm(A)))
        if not np.allclose(A, A.conj().T, atol=1e-9 * scale):
            raise ValueError("A must be Hermitian")
        if np.linalg.eigvalsh(A).min() < -1e-9 * scale:
            raise ValueError("A must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class DualSolution:
    lam: float
    beta: float
    status: SdpStatus


def assemble_quadratic(
    l: int,
    t: ScalingSet,
    beams: BeamformerSet,
    channels: ChannelSet,
    sigma2: float | None = None,
) -> InnerQuadratic:
    """Quadratic coefficients of receiver l's summed transformed SINRs in its error vector."""
    if sigma2 is None:
        sigma2 = channels.sigma2
    num_users = channels.num_users
    n_t = channels.num_antennas
    if not 0 <= l < num_users:
        raise IndexError(f"invalid receiver index {l}")
    w = beams.beams
    h_hat = channels.estimates[l]
    outer = np.einsum("ui,uj->uij", w, w.conj())  # w_u w_u^H per user
    A = np.zeros((n_t, n_t), dtype=complex)
    b = np.zeros(n_t, dtype=complex)
    c = 0.0
    for j in range(l + 1):
        tjl = t.t[j, l]
        mag2 = np.abs(tjl) ** 2
        others = np.sum(outer, axis=0) - outer[j]
        A += mag2 * others
        later = np.sum(outer[j + 1:], axis=0) if j + 1 < num_users else np.zeros((n_t, n_t))
        b += np.conj(tjl) * w[j] - mag2 * (later @ h_hat)
        c += 2.0 * np.real(np.conj(tjl) * np.vdot(h_hat, w[j]))
        c -= mag2 * (float(np.sum(np.abs(w[j + 1:] @ h_hat.conj()) ** 2)) + sigma2)
    A = 0.5 * (A + A.conj().T)
    return InnerQuadratic(A, b, c)


def primal_value(q: InnerQuadratic, e: np.ndarray) -> float:
    """Objective -e^H A e + 2 Re(e^H b) + c at a candidate error vector."""
    e = np.asarray(e, dtype=complex)
    return float(-np.real(np.vdot(e, q.A @ e)) + 2.0 * np.real(np.vdot(e, q.b)) + q.c)


def dual_value(q: InnerQuadratic, epsilon: float, lam: float) -> float:
    """Dual function g(lam); -inf where the shifted matrix fails PSD/range conditions."""
    if lam < 0:
        return -np.inf
    M = lam * np.eye(q.dim) - q.A
    vals, vecs = np.linalg.eigh(M)
    scale = max(lam, float(np.linalg.norm(q.A)), 1e-300)
    if vals.min() < -1e-9 * scale:
        return -np.inf
    bt = vecs.conj().T @ q.b
    cut = 1e-12 * scale
    mask = vals > cut
    pinv_b = np.where(mask, bt / np.where(mask, vals, 1.0), 0.0)
    # range-membership check: the masked-out part of b must be negligible
    resid = np.linalg.norm(bt[~mask]) if (~mask).any() else 0.0
    if resid > 1e-8 * max(np.linalg.norm(q.b), 1e-300):
        return -np.inf
    return float(-np.real(np.vdot(bt, pinv_b)) + q.c - lam * epsilon**2)


def _refine_multiplier(
    q: InnerQuadratic, epsilon: float, a_vals: np.ndarray, b_tilde: np.ndarray
) -> tuple[float, float]:
    """Polish the dual optimum using its stationarity condition.

    For lam above the top eigenvalue of A the dual derivative vanishes exactly
    when ||(lam I - A)^{-1} b|| = epsilon, a strictly decreasing scalar
    equation; when even the limiting pseudo-inverse norm stays below epsilon
    the optimum sits at the eigenvalue itself (degenerate case).
    """
    from scipy.optimize import brentq

    lam_floor = max(float(a_vals[-1]), 0.0)
    scale = max(lam_floor, float(np.linalg.norm(q.b)) / max(epsilon, 1e-300), 1.0)
    mag2 = np.abs(b_tilde) ** 2

    def resid_norm(lam: float) -> float:
        diffs = lam - a_vals
        return float(np.sqrt(np.sum(mag2 / diffs**2)))

    def g_at(lam: float) -> float:
        diffs = lam - a_vals
        cut = 1e-12 * max(lam, 1e-300)
        safe = np.where(diffs > cut, diffs, np.inf)
        return float(-np.sum(mag2 / safe) + q.c - lam * epsilon**2)

    lo = lam_floor + 1e-13 * scale
    if resid_norm(lo) <= epsilon:
        return lam_floor, g_at(lam_floor)
    hi = lam_floor + max(1.0, np.sqrt(np.sum(mag2)) / epsilon)
    while resid_norm(hi) > epsilon:
        hi = lam_floor + 2.0 * (hi - lam_floor)
    lam_star = float(brentq(lambda lam: resid_norm(lam) - epsilon, lo, hi, xtol=1e-15 * scale, rtol=8.9e-16))
    return lam_star, g_at(lam_star)


def solve_dual(q: InnerQuadratic, epsilon: float, tol: float = 1e-8) -> DualSolution:
    """Optimal multiplier and dual optimum via the epigraph SDP.

    The SDP certifies the optimum; because its multiplier estimate is only
    gap-accurate, the result is then polished through the scalar stationarity
    condition of the concave dual, which also pins beta.
    """
    a_vals, a_vecs = np.linalg.eigh(q.A)
    lam_floor = max(float(a_vals[-1]), 0.0)
    if epsilon == 0.0:
        return DualSolution(lam_floor, q.c, SdpStatus.OPTIMAL)

    n = q.dim
    # y = (lam, beta); minimize -beta subject to the epigraph LMI and lam >= 0
    f0 = np.zeros((n + 1, n + 1), dtype=complex)
    f0[:n, :n] = -q.A
    f0[:n, n] = q.b
    f0[n, :n] = q.b.conj()
    f0[n, n] = q.c
    f_lam = np.zeros((n + 1, n + 1), dtype=complex)
    f_lam[:n, :n] = np.eye(n)
    f_lam[n, n] = -epsilon**2
    f_beta = np.zeros((n + 1, n + 1), dtype=complex)
    f_beta[n, n] = -1.0
    block = SdpBlock(
        embed_hermitian(f0),
        {0: embed_hermitian(f_lam), 1: embed_hermitian(f_beta)},
    )
    problem = SdpProblem(2, np.array([0.0, -1.0]), (block,), nonneg_vars=(0,))
    sol = solve_sdp(problem, tol=tol)
    if sol.status not in (SdpStatus.OPTIMAL, SdpStatus.MAX_ITERATIONS):
        return DualSolution(np.nan, np.nan, sol.status)
    lam_sdp, beta_sdp = float(sol.y[0]), float(sol.y[1])

    b_tilde = a_vecs.conj().T @ q.b
    lam_star, beta_star = _refine_multiplier(q, epsilon, a_vals, b_tilde)
    # sanity: polish must stay consistent with the certified SDP optimum
    if not np.isfinite(beta_star) or abs(beta_star - beta_sdp) > 1e-4 * (1.0 + abs(beta_sdp)):
        lam_star, beta_star = lam_sdp, beta_sdp
    return DualSolution(max(lam_star, 0.0), beta_star, sol.status)


def recover_error(
    q: InnerQuadratic,
    epsilon: float,
    lam: float,
    sing_tol: float = 1e-8,
) -> np.ndarray:
    """Worst-case error vector for the optimal multiplier.

    Nonsingular shift: e = -(lam I - A)^{-1} b, clipped if marginally outside
    the ball. Singular (degenerate) shift: pseudo-inverse part plus a
    null-space completion padded out to the ball boundary, with the completion
    phase picked to minimize the primal objective.
    """
    if epsilon == 0.0:
        return np.zeros(q.dim, dtype=complex)
    M = lam * np.eye(q.dim) - q.A
    vals, vecs = np.linalg.eigh(M)
    scale = max(lam, float(np.linalg.norm(q.A)), 1e-300)
    if vals.min() < -1e-7 * scale:
        raise RecoveryError("multiplier violates dual feasibility")
    thr = sing_tol * scale
    mask = vals > thr
    bt = vecs.conj().T @ q.b
    e = -(vecs @ np.where(mask, bt / np.where(mask, vals, 1.0), 0.0))
    norm_e = float(np.linalg.norm(e))

    if norm_e > epsilon:
        if norm_e <= epsilon + 1e-6:
            return e * (epsilon / norm_e)
        if mask.all():
            raise RecoveryError("recovered error leaves the uncertainty ball")
        raise RecoveryError("pseudo-inverse part exceeds the ball radius in the degenerate case")

    lam_tol = 1e-9 * scale
    if lam > lam_tol and norm_e < epsilon:
        # boundary completion along the most-singular direction
        v = vecs[:, 0]
        w = np.vdot(v, q.b - q.A @ e)
        direction = -w / abs(w) if abs(w) > 1e-14 else 1.0
        # exact step to the boundary; v need not be orthogonal to e numerically
        cross = np.real(np.conj(direction) * np.vdot(v, e))
        alpha = -cross + np.sqrt(max(cross**2 + epsilon**2 - norm_e**2, 0.0))
        e = e + alpha * direction * v
    return e


def brute_force_worst_error(
    q: InnerQuadratic,
    epsilon: float,
    resolution: int,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Independent search oracle: sample the ball, keep the best, then polish locally.

    Intended for low dimension (N_t <= 2). The minimizer of the concave
    objective lies on the sphere except in the linear/constant degenerate
    cases, so most of the budget goes to boundary samples.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n = q.dim
    if epsilon == 0.0 or resolution <= 0:
        e0 = np.zeros(n, dtype=complex)
        return e0, primal_value(q, e0)

    n_sphere = max(resolution * 3 // 4, 1)
    n_ball = resolution - n_sphere
    g = rng.standard_normal((n_sphere, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = epsilon * g
    if n_ball > 0:
        gb = rng.standard_normal((n_ball, 2 * n))
        gb /= np.linalg.norm(gb, axis=1, keepdims=True)
        radii = epsilon * rng.random(n_ball) ** (1.0 / (2 * n))
        pts = np.vstack([pts, gb * radii[:, None]])
    cand = pts[:, :n] + 1j * pts[:, n:]
    # vectorized objective over all samples
    vals = (
        -np.real(np.einsum("si,ij,sj->s", cand.conj(), q.A, cand))
        + 2.0 * np.real(cand.conj() @ q.b)
        + q.c
    )
    order = np.argsort(vals)
    e_best = cand[order[0]]
    best_val = float(vals[order[0]])

    # normalize so the optimizer's termination test sees a unit-scale objective
    obj_scale = max(1.0, float(np.linalg.norm(q.A)) * epsilon**2, float(np.linalg.norm(q.b)) * epsilon)

    def obj(x: np.ndarray) -> float:
        return primal_value(q, x[:n] + 1j * x[n:]) / obj_scale

    def grad(x: np.ndarray) -> np.ndarray:
        g = -q.A @ (x[:n] + 1j * x[n:]) + q.b
        return 2.0 * np.concatenate([g.real, g.imag]) / obj_scale

    # concave objective: several boundary basins, so polish from multiple starts
    n_starts = min(10, len(order))
    for idx in order[:n_starts]:
        x0 = np.concatenate([cand[idx].real, cand[idx].imag])
        res = minimize(
            obj,
            x0,
            jac=grad,
            method="SLSQP",
            constraints=[
                {
                    "type": "ineq",
                    "fun": lambda x: (epsilon**2 - float(x @ x)) / epsilon**2,
                    "jac": lambda x: -2.0 * x / epsilon**2,
                }
            ],
            options={"maxiter": 500, "ftol": 1e-16},
        )
        val = float(res.fun) * obj_scale
        if val < best_val and np.linalg.norm(res.x) <= epsilon * (1 + 1e-9):
            best_val = val
            e_best = res.x[:n] + 1j * res.x[n:]
    return e_best, primal_value(q, e_best)
