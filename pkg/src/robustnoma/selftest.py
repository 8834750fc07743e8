"""Quick self-contained oracle suites, runnable from the CLI.

Each check re-derives expected values through an independent route (explicit
loops, eigendecompositions, sampling search) and compares against the library
path. Returns a list of (name, passed, detail) tuples.
"""

from __future__ import annotations

import numpy as np

from .model import BeamformerSet, ChannelSet, ErrorSet, QosTargets, compute_sinr
from .qt import transformed_sinr, update_t
from .sdp import SdpBlock, SdpProblem, SdpStatus, solve_sdp
from .sdr import solve_power_min
from .worstcase import (
    assemble_quadratic,
    brute_force_worst_error,
    primal_value,
    recover_error,
    solve_dual,
)

__all__ = ["run_selftest", "random_instance"]


def random_instance(rng: np.random.Generator, n_t: int, num_users: int, epsilon: float):
    """Random channel/error/beam triple at unit scale for oracle checks."""
    est = (rng.standard_normal((num_users, n_t)) + 1j * rng.standard_normal((num_users, n_t))) / np.sqrt(2 * n_t)
    channels = ChannelSet(est, epsilon, 0.01)
    dirs = rng.standard_normal((num_users, n_t)) + 1j * rng.standard_normal((num_users, n_t))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = epsilon * rng.random(num_users) ** (1.0 / (2 * n_t))
    errors = ErrorSet(dirs * radii[:, None])
    beams = BeamformerSet(
        0.3 * (rng.standard_normal((num_users, n_t)) + 1j * rng.standard_normal((num_users, n_t)))
    )
    return channels, errors, beams


def _check_qt(rng: np.random.Generator, n_inst: int = 200) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(n_inst):
        n_t = int(rng.integers(1, 5))
        num_users = int(rng.integers(1, 5))
        channels, errors, beams = random_instance(rng, n_t, num_users, 0.05)
        t = update_t(channels, errors, beams)
        for l in range(num_users):
            for u in range(l + 1):
                sinr = compute_sinr(u, l, channels, errors, beams)
                surr = transformed_sinr(u, l, t, channels, errors, beams)
                worst = max(worst, abs(surr - sinr) / max(sinr, 1e-12))
    return worst <= 1e-9, f"max relative deviation {worst:.2e}"


def _check_inner_identity(rng: np.random.Generator, n_inst: int = 100) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(n_inst):
        n_t = int(rng.integers(1, 5))
        num_users = int(rng.integers(1, 5))
        channels, errors, beams = random_instance(rng, n_t, num_users, 0.05)
        t = update_t(channels, errors, beams)
        for l in range(num_users):
            quad = assemble_quadratic(l, t, beams, channels)
            for _ in range(5):
                e = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
                e *= 0.05 * rng.random() / np.linalg.norm(e)
                probe = errors.errors.copy()
                probe[l] = e
                probe_set = ErrorSet(probe)
                total = sum(
                    transformed_sinr(j, l, t, channels, probe_set, beams) for j in range(l + 1)
                )
                diff = abs(primal_value(quad, e) - total) / (1.0 + abs(total))
                worst = max(worst, diff)
    return worst <= 1e-9, f"max mixed deviation {worst:.2e}"


def _check_duality(rng: np.random.Generator, n_inst: int = 60) -> tuple[bool, str]:
    worst = 0.0
    for k in range(n_inst):
        n_t = int(rng.integers(1, 5))
        num_users = int(rng.integers(1, 5))
        channels, errors, beams = random_instance(rng, n_t, num_users, 0.05)
        t = update_t(channels, errors, beams)
        l = int(rng.integers(0, num_users))
        quad = assemble_quadratic(l, t, beams, channels)
        eps = 0.05
        dual = solve_dual(quad, eps)
        if dual.status != SdpStatus.OPTIMAL:
            return False, f"dual solve status {dual.status} on instance {k}"
        e = recover_error(quad, eps, dual.lam)
        gap = abs(primal_value(quad, e) - dual.beta) / (1.0 + abs(dual.beta))
        worst = max(worst, gap)
        if np.linalg.norm(e) > eps + 1e-9:
            return False, "recovered error outside ball"
    return worst <= 1e-6, f"max duality gap {worst:.2e}"


def _check_brute_force(rng: np.random.Generator, n_inst: int = 10) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(n_inst):
        channels, errors, beams = random_instance(rng, 2, 2, 0.1)
        t = update_t(channels, errors, beams)
        quad = assemble_quadratic(1, t, beams, channels)
        dual = solve_dual(quad, 0.1)
        _, value = brute_force_worst_error(quad, 0.1, 20000, rng)
        worst = max(worst, abs(value - dual.beta))
    return worst <= 1e-3, f"max oracle gap {worst:.2e}"


def _check_sdp(rng: np.random.Generator) -> tuple[bool, str]:
    # min y s.t. y >= 1
    p1 = SdpProblem(1, np.array([1.0]), (SdpBlock(np.array([[-1.0]]), {0: np.array([[1.0]])}),))
    s1 = solve_sdp(p1)
    # min y1+y2 s.t. [[y1,1],[1,y2]] >= 0 -> optimum 2
    blk = SdpBlock(
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        {0: np.array([[1.0, 0.0], [0.0, 0.0]]), 1: np.array([[0.0, 0.0], [0.0, 1.0]])},
    )
    p2 = SdpProblem(2, np.array([1.0, 1.0]), (blk,))
    s2 = solve_sdp(p2)
    errs = [abs(s1.objective_value - 1.0), abs(s2.objective_value - 2.0)]
    ok = s1.status == SdpStatus.OPTIMAL and s2.status == SdpStatus.OPTIMAL and max(errs) <= 1e-6
    return ok, f"analytic errors {max(errs):.2e}"


def _check_single_user(rng: np.random.Generator, n_inst: int = 20) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(n_inst):
        n_t = int(rng.integers(1, 5))
        h = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
        channels = ChannelSet(h[None, :], 0.0, 0.01)
        targets = QosTargets.uniform_db(float(rng.uniform(0, 10)), 1)
        res = solve_power_min(channels, ErrorSet.zeros(1, n_t), targets)
        truth = targets.gamma[0] * channels.sigma2 / np.linalg.norm(h) ** 2
        worst = max(worst, abs(res.total_power - truth) / truth)
    return worst <= 1e-6, f"max relative power error {worst:.2e}"


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    checks = [
        ("quadratic-transform tightness", _check_qt),
        ("inner quadratic identity", _check_inner_identity),
        ("worst-case duality gap", _check_duality),
        ("brute-force oracle agreement", _check_brute_force),
        ("sdp analytic suite", _check_sdp),
        ("single-user closed form", _check_single_user),
    ]
    results = []
    for name, fn in checks:
        rng = np.random.default_rng(seed)
        passed, detail = fn(rng)
        results.append((name, passed, detail))
    return results
