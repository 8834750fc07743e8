"""Alternating robust beamforming solver and its non-robust baseline.

Each outer iteration refreshes the transform scalars at the current point,
recomputes every receiver's worst-case error through the dual SDP, and then
re-solves the relaxed min-power problem with those errors in place. The loop
stops when the average beam movement falls below a tolerance or the iteration
cap is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeamformerSet, ChannelSet, ErrorSet, QosTargets
from .qt import update_t
from .sampling import sample_error_ball
from .sdp import SdpStatus
from .sdr import (
    DEFAULT_RANDOMIZATION_TRIALS,
    DEFAULT_RANK_ONE_THRESHOLD,
    SdrResult,
    canonical_phase,
    solve_power_min,
)
from .worstcase import RecoveryError, assemble_quadratic, recover_error, solve_dual

__all__ = [
    "SolverConfig",
    "RobustSolution",
    "init_beamformers",
    "init_errors",
    "convergence_delta",
    "run",
    "solve_nonrobust",
]


@dataclass(frozen=True)
class SolverConfig:
    i_max: int = 10
    delta_tol: float = 1e-4
    sdp_tol: float = 1e-8
    rank_one_threshold: float = DEFAULT_RANK_ONE_THRESHOLD
    randomization_trials: int = DEFAULT_RANDOMIZATION_TRIALS
    seed: int = 0

    def __post_init__(self):
        if self.i_max < 1 or self.delta_tol <= 0 or self.sdp_tol <= 0:
            raise ValueError("i_max, delta_tol and sdp_tol must be positive")
        if self.rank_one_threshold <= 0 or self.randomization_trials < 0 or self.seed < 0:
            raise ValueError("invalid solver configuration")


@dataclass(frozen=True)
class RobustSolution:
    beams: BeamformerSet | None
    errors: ErrorSet | None
    total_power: float
    iterations: int
    converged: bool
    per_iteration_delta: tuple[float, ...]
    rank_one_all: bool
    used_randomization: bool
    status: SdpStatus


def init_beamformers(channels: ChannelSet, targets: QosTargets) -> BeamformerSet:
    """Matched filters carrying an interference margin of factor U in power."""
    num_users = channels.num_users
    norms = np.linalg.norm(channels.estimates, axis=1)
    if np.any(norms < 1e-300):
        raise ValueError("zero-norm channel estimate")
    beams = np.empty_like(channels.estimates)
    for u in range(num_users):
        p = num_users * targets.gamma[u] * channels.sigma2 / norms[u] ** 2
        beams[u] = np.sqrt(p) * channels.estimates[u] / norms[u]
    return BeamformerSet(beams)


def init_errors(rng: np.random.Generator, epsilon: float, n_t: int, num_users: int) -> ErrorSet:
    """Independent uniform draws from the error ball, one per receiver."""
    return ErrorSet(np.array([sample_error_ball(rng, n_t, epsilon) for _ in range(num_users)]))


def convergence_delta(prev: BeamformerSet, new: BeamformerSet) -> float:
    """Average per-coefficient beam movement between consecutive iterations."""
    if prev.beams.shape != new.beams.shape:
        raise ValueError("beam sets must have equal shape")
    num_users, n_t = prev.beams.shape
    return float(np.sum(np.linalg.norm(prev.beams - new.beams, axis=1)) / (n_t * num_users))


def _canonical(beams: BeamformerSet) -> BeamformerSet:
    return BeamformerSet(np.array([canonical_phase(w) for w in beams.beams]))


def run(channels: ChannelSet, targets: QosTargets, config: SolverConfig | None = None) -> RobustSolution:
    """Iterate worst-case-error and beamformer updates until the beams settle."""
    if config is None:
        config = SolverConfig()
    rng = np.random.default_rng(config.seed)
    num_users = channels.num_users
    n_t = channels.num_antennas
    errors = init_errors(rng, channels.epsilon, n_t, num_users)
    beams = _canonical(init_beamformers(channels, targets))

    deltas: list[float] = []
    converged = False
    result: SdrResult | None = None
    iterations = 0
    for iterations in range(1, config.i_max + 1):
        t = update_t(channels, errors, beams)
        if channels.epsilon > 0:
            new_errors = np.empty((num_users, n_t), dtype=complex)
            for l in range(num_users):
                quad = assemble_quadratic(l, t, beams, channels)
                dual = solve_dual(quad, channels.epsilon, tol=config.sdp_tol)
                if dual.status not in (SdpStatus.OPTIMAL, SdpStatus.MAX_ITERATIONS):
                    return RobustSolution(
                        beams, errors, np.nan, iterations, False,
                        tuple(deltas), False, False, dual.status,
                    )
                try:
                    new_errors[l] = recover_error(quad, channels.epsilon, dual.lam)
                except RecoveryError:
                    return RobustSolution(
                        beams, errors, np.nan, iterations, False,
                        tuple(deltas), False, False, SdpStatus.NUMERICAL_FAILURE,
                    )
            errors = ErrorSet(new_errors)
        result = solve_power_min(
            channels, errors, targets,
            tol=config.sdp_tol,
            ratio_threshold=config.rank_one_threshold,
            randomization_trials=config.randomization_trials,
            rng=rng,
        )
        if result.status != SdpStatus.OPTIMAL or result.beams is None:
            return RobustSolution(
                beams, errors, np.nan, iterations, False,
                tuple(deltas), False, False, result.status,
            )
        new_beams = result.beams
        delta = convergence_delta(beams, new_beams)
        deltas.append(delta)
        beams = new_beams
        if delta < config.delta_tol:
            converged = True
            break

    assert result is not None
    return RobustSolution(
        beams=beams,
        errors=errors,
        total_power=beams.total_power(),
        iterations=iterations,
        converged=converged,
        per_iteration_delta=tuple(deltas),
        rank_one_all=result.rank_one_all,
        used_randomization=result.used_randomization,
        status=SdpStatus.OPTIMAL,
    )


def solve_nonrobust(
    channels: ChannelSet,
    targets: QosTargets,
    config: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
) -> SdrResult:
    """Single relaxed solve that trusts the channel estimates exactly."""
    if config is None:
        config = SolverConfig()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    errors = ErrorSet.zeros(channels.num_users, channels.num_antennas)
    return solve_power_min(
        channels, errors, targets,
        tol=config.sdp_tol,
        ratio_threshold=config.rank_one_threshold,
        randomization_trials=config.randomization_trials,
        rng=rng,
    )
