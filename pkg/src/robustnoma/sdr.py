"""Semidefinite relaxation of the min-power beamforming problem.

Beam outer products W_u = w_u w_u^H are relaxed to PSD matrix variables; the
per-(user, receiver) SINR requirements become linear trace inequalities. The
relaxation is solved as one SDP, beams are read off the top eigenpair of each
W_u, and Gaussian randomization with common power rescaling covers the rare
higher-rank outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeamformerSet, ChannelSet, ErrorSet, QosTargets
from .sdp import SdpBlock, SdpProblem, SdpStatus, embed_hermitian, hermitian_basis, solve_sdp

__all__ = [
    "SdrResult",
    "assemble_sdr",
    "solve_power_min",
    "extract_rank_one",
    "randomize",
    "canonical_phase",
]

DEFAULT_RANK_ONE_THRESHOLD = 1e-4
DEFAULT_RANDOMIZATION_TRIALS = 1000


@dataclass(frozen=True)
class SdrResult:
    W: tuple[np.ndarray, ...]
    beams: BeamformerSet | None
    total_power: float
    rank_one: tuple[bool, ...]
    used_randomization: bool
    status: SdpStatus

    @property
    def rank_one_all(self) -> bool:
        return bool(self.rank_one) and all(self.rank_one)


def canonical_phase(w: np.ndarray) -> np.ndarray:
    """Rotate a beam's global phase so its largest-magnitude entry is real nonnegative."""
    w = np.asarray(w, dtype=complex)
    k = int(np.argmax(np.abs(w)))
    if np.abs(w[k]) < 1e-300:
        return w.copy()
    return w * np.exp(-1j * np.angle(w[k]))


def _row_matrices(
    channels: ChannelSet, errors: ErrorSet
) -> tuple[np.ndarray, np.ndarray]:
    """Per-receiver outer products of the presumed true channel and the error."""
    h_true = channels.estimates + errors.errors
    H = np.einsum("li,lj->lij", h_true, h_true.conj())
    E = np.einsum("li,lj->lij", errors.errors, errors.errors.conj())
    return H, E


def assemble_sdr(
    channels: ChannelSet,
    errors: ErrorSet,
    targets: QosTargets,
    sigma2: float | None = None,
) -> SdpProblem:
    """Build the relaxed min-power SDP.

    Variables are the n^2 real coordinates of each Hermitian W_u (hermitian_basis
    ordering, user-major). One scalar inequality row per (u, receiver l >= u)
    pair, U(U+1)/2 in total, plus one PSD block per W_u.
    """
    if sigma2 is None:
        sigma2 = channels.sigma2
    num_users = channels.num_users
    n_t = channels.num_antennas
    basis = hermitian_basis(n_t)
    per_user = n_t * n_t
    num_vars = num_users * per_user
    H, E = _row_matrices(channels, errors)

    def trace_coeffs(M: np.ndarray) -> np.ndarray:
        return np.array([float(np.real(np.trace(M @ B))) for B in basis])

    objective = np.zeros(num_vars)
    for u in range(num_users):
        objective[u * per_user : u * per_user + n_t] = 1.0  # tr(W_u): diagonal coords

    blocks: list[SdpBlock] = []
    for u in range(num_users):
        gamma = targets.gamma[u]
        for l in range(u, num_users):
            coeffs: dict[int, np.ndarray] = {}

            def add(user: int, M: np.ndarray) -> None:
                vals = trace_coeffs(M)
                for i, v in enumerate(vals):
                    if v != 0.0:
                        idx = user * per_user + i
                        coeffs[idx] = coeffs.get(idx, np.zeros((1, 1))) + np.array([[v]])

            add(u, H[l])
            for m in range(u):
                add(m, -gamma * E[l])
            for k in range(u + 1, num_users):
                add(k, -gamma * H[l])
            blocks.append(SdpBlock(np.array([[-gamma * sigma2]]), coeffs))
    for u in range(num_users):
        coeffs = {
            u * per_user + i: embed_hermitian(B) for i, B in enumerate(basis)
        }
        blocks.append(SdpBlock(np.zeros((2 * n_t, 2 * n_t)), coeffs))
    return SdpProblem(num_vars, objective, tuple(blocks))


def _beam_matrices(y: np.ndarray, num_users: int, n_t: int) -> list[np.ndarray]:
    basis = hermitian_basis(n_t)
    per_user = n_t * n_t
    out = []
    for u in range(num_users):
        coords = y[u * per_user : (u + 1) * per_user]
        W = sum(c * B for c, B in zip(coords, basis))
        out.append(0.5 * (W + W.conj().T))
    return out


def extract_rank_one(
    W: np.ndarray, ratio_threshold: float = DEFAULT_RANK_ONE_THRESHOLD
) -> tuple[np.ndarray, bool]:
    """Top-eigenpair beam with canonical phase, plus the eigenvalue-ratio rank test."""
    vals, vecs = np.linalg.eigh(W)
    lam1 = float(vals[-1])
    lam2 = float(vals[-2]) if len(vals) > 1 else 0.0
    w = np.sqrt(max(lam1, 0.0)) * canonical_phase(vecs[:, -1])
    is_rank_one = lam1 <= 1e-12 or max(lam2, 0.0) / lam1 <= ratio_threshold
    return w, is_rank_one


def _constraint_slacks(
    beams: np.ndarray,
    channels: ChannelSet,
    errors: ErrorSet,
    targets: QosTargets,
    sigma2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Interference-adjusted signal margin and noise requirement per constraint row."""
    num_users = channels.num_users
    h_true = channels.estimates + errors.errors
    rho, need = [], []
    for u in range(num_users):
        gamma = targets.gamma[u]
        for l in range(u, num_users):
            sig = np.abs(np.vdot(h_true[l], beams[u])) ** 2
            resid = sum(np.abs(np.vdot(errors.errors[l], beams[m])) ** 2 for m in range(u))
            inter = sum(np.abs(np.vdot(h_true[l], beams[k])) ** 2 for k in range(u + 1, num_users))
            rho.append(sig - gamma * (resid + inter))
            need.append(gamma * sigma2)
    return np.array(rho), np.array(need)


def randomize(
    W: list[np.ndarray],
    channels: ChannelSet,
    errors: ErrorSet,
    targets: QosTargets,
    sigma2: float | None = None,
    n_trials: int = DEFAULT_RANDOMIZATION_TRIALS,
    rng: np.random.Generator | None = None,
    ratio_threshold: float = DEFAULT_RANK_ONE_THRESHOLD,
) -> tuple[BeamformerSet | None, bool]:
    """Gaussian randomization fallback with minimal common power rescaling.

    Each trial draws w_u = W_u^{1/2} z_u; a common scale factor can restore
    feasibility iff every constraint row has positive interference-adjusted
    margin. Returns the feasible candidate of least total power.
    """
    if sigma2 is None:
        sigma2 = channels.sigma2
    num_users = channels.num_users
    n_t = channels.num_antennas

    extracted = [extract_rank_one(Wu, ratio_threshold) for Wu in W]
    if all(flag for _, flag in extracted):
        return BeamformerSet(np.array([w for w, _ in extracted])), True

    if rng is None:
        rng = np.random.default_rng(0)
    roots = []
    for Wu in W:
        vals, vecs = np.linalg.eigh(Wu)
        roots.append(vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T)

    best_power = np.inf
    best_beams = None
    for _ in range(n_trials):
        z = (rng.standard_normal((num_users, n_t)) + 1j * rng.standard_normal((num_users, n_t))) / np.sqrt(2.0)
        cand = np.array([roots[u] @ z[u] for u in range(num_users)])
        rho, need = _constraint_slacks(cand, channels, errors, targets, sigma2)
        if np.any(rho <= 0):
            continue
        scale = float(np.max(need / rho))
        power = scale * float(np.sum(np.abs(cand) ** 2))
        if power < best_power:
            best_power = power
            best_beams = np.sqrt(scale) * cand
    if best_beams is None:
        return None, False
    beams = np.array([canonical_phase(w) for w in best_beams])
    return BeamformerSet(beams), True


def solve_power_min(
    channels: ChannelSet,
    errors: ErrorSet,
    targets: QosTargets,
    sigma2: float | None = None,
    tol: float = 1e-8,
    ratio_threshold: float = DEFAULT_RANK_ONE_THRESHOLD,
    randomization_trials: int = DEFAULT_RANDOMIZATION_TRIALS,
    rng: np.random.Generator | None = None,
) -> SdrResult:
    """Solve the relaxed min-power problem and extract per-user beams."""
    if sigma2 is None:
        sigma2 = channels.sigma2
    problem = assemble_sdr(channels, errors, targets, sigma2)
    sol = solve_sdp(problem, tol=tol)
    if sol.status != SdpStatus.OPTIMAL:
        return SdrResult((), None, np.nan, (), False, sol.status)
    W = _beam_matrices(sol.y, channels.num_users, channels.num_antennas)
    extracted = [extract_rank_one(Wu, ratio_threshold) for Wu in W]
    rank_one = tuple(flag for _, flag in extracted)
    beams = BeamformerSet(np.array([w for w, _ in extracted]))
    used_randomization = False
    if not all(rank_one):
        rand_beams, ok = randomize(
            W, channels, errors, targets, sigma2,
            n_trials=randomization_trials, rng=rng, ratio_threshold=ratio_threshold,
        )
        if ok and rand_beams is not None:
            beams = rand_beams
            used_randomization = True
        # on failure keep the eigenpair beams; callers see rank_one flags
    # relaxation objective; randomized beams report their own power via beams.total_power()
    total_power = float(sum(np.real(np.trace(Wu)) for Wu in W))
    return SdrResult(tuple(W), beams, total_power, rank_one, used_randomization, sol.status)
