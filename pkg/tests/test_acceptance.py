"""End-to-end acceptance suite.

Each test checks one headline property of the library at its stated tolerance
and prints a single PASS/FAIL line with the measured figure. The campaign-level
checks share one desk-scale Monte Carlo run (100 channels x 10 error draws at
0, 5 and 10 dB targets).
"""

import numpy as np
import pytest

from robustnoma.campaign import CampaignConfig, export_results, run_campaign
from robustnoma.model import ChannelSet, ErrorSet, QosTargets, compute_sinr
from robustnoma.qt import transformed_sinr, update_t
from robustnoma.sdp import SdpBlock, SdpProblem, SdpStatus, solve_sdp
from robustnoma.sdr import solve_power_min
from robustnoma.selftest import random_instance
from robustnoma.worstcase import (
    InnerQuadratic,
    assemble_quadratic,
    brute_force_worst_error,
    primal_value,
    recover_error,
    solve_dual,
)


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


# --------------------------------------------------------------------------
# shared desk-scale campaign (used by the feasibility/convergence/outage/power
# checks); one run, module scope
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def desk_campaign():
    config = CampaignConfig(
        n_t=3,
        users=3,
        gamma_db_list=(0.0, 5.0, 10.0),
        epsilon=0.01,
        sigma2=0.01,
        n_channels=100,
        n_errors_per_channel=10,
        master_seed=0,
    )
    return run_campaign(config)


def test_quadratic_transform_equivalence():
    # transformed SINR with closed-form scalars must equal the exact ratio
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(1000):
        n_t = int(rng.integers(1, 5))
        num_users = int(rng.integers(1, 5))
        epsilon = float(rng.uniform(0.0, 0.1))
        channels, errors, beams = random_instance(rng, n_t, num_users, max(epsilon, 1e-6))
        t = update_t(channels, errors, beams)
        for l in range(num_users):
            for u in range(l + 1):
                exact = compute_sinr(u, l, channels, errors, beams)
                surrogate = transformed_sinr(u, l, t, channels, errors, beams)
                worst = max(worst, abs(surrogate - exact) / max(exact, 1e-12))
    ok = worst <= 1e-9
    _report("quadratic transform equivalence", ok, f"max relative deviation {worst:.3e}")
    assert ok


def test_inner_quadratic_identity():
    # the assembled quadratic must reproduce the summed transformed SINRs for
    # arbitrary error vectors, not just the assembly point
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(500):
        n_t = int(rng.integers(1, 5))
        num_users = int(rng.integers(1, 5))
        channels, errors, beams = random_instance(rng, n_t, num_users, 0.05)
        t = update_t(channels, errors, beams)
        l = int(rng.integers(0, num_users))
        quad = assemble_quadratic(l, t, beams, channels)
        for _ in range(100):
            e = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
            e *= 0.05 * rng.random() / np.linalg.norm(e)
            probe = errors.errors.copy()
            probe[l] = e
            probe_set = ErrorSet(probe)
            total = sum(
                transformed_sinr(j, l, t, channels, probe_set, beams) for j in range(l + 1)
            )
            worst = max(worst, abs(primal_value(quad, e) - total) / (1.0 + abs(total)))
    ok = worst <= 1e-9
    _report("inner quadratic identity", ok, f"max mixed deviation {worst:.3e}")
    assert ok


def _random_psd(rng, n, scale=1.0):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (G @ G.conj().T)


def test_zero_duality_gap_including_hard_cases():
    # recovered worst-case error must attain the certified dual optimum; the
    # instance mix forces >= 50 degenerate cases (b = 0 or b orthogonal to the
    # top eigenspace, where the multiplier pins to the top eigenvalue)
    rng = np.random.default_rng(102)
    eps = 0.1
    worst = 0.0
    hard_count = 0
    for k in range(500):
        n = int(rng.integers(2, 5))
        A = _random_psd(rng, n, scale=float(rng.uniform(0.1, 50.0)))
        if k % 10 < 1:
            b = np.zeros(n, dtype=complex)
            hard_count += 1
        elif k % 10 < 2:
            _, vecs = np.linalg.eigh(A)
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            top = vecs[:, -1]
            b = b - top * np.vdot(top, b)
            hard_count += 1
        else:
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        q = InnerQuadratic(A, b, float(rng.standard_normal()))
        dual = solve_dual(q, eps)
        assert dual.status == SdpStatus.OPTIMAL, f"dual failed on instance {k}"
        e = recover_error(q, eps, dual.lam)
        assert np.linalg.norm(e) <= eps + 1e-9, f"error left the ball on instance {k}"
        worst = max(worst, abs(primal_value(q, e) - dual.beta) / (1.0 + abs(dual.beta)))
    ok = worst <= 1e-6 and hard_count >= 50
    _report(
        "zero duality gap",
        ok,
        f"max normalized gap {worst:.3e} over 500 instances ({hard_count} degenerate)",
    )
    assert ok


def test_brute_force_oracle_agreement():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        A = _random_psd(rng, 2, scale=float(rng.uniform(0.5, 20.0)))
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        q = InnerQuadratic(A, b, float(rng.standard_normal()))
        eps = 0.5
        dual = solve_dual(q, eps)
        _, value = brute_force_worst_error(q, eps, 100000, rng)
        worst = max(worst, abs(value - dual.beta))
    ok = worst <= 1e-3
    _report("brute-force oracle agreement", ok, f"max value gap {worst:.3e}")
    assert ok


def test_sdp_analytic_suite():
    problems = []

    # min-eigenvalue bounds: y* = lambda_max(A) for several diagonals
    for diag in ([1.0, 4.0, 2.0], [0.5, 0.25], [7.0, 7.0, 3.0], [10.0], [2.0, 9.0, 1.0, 4.0]):
        A = np.diag(diag)
        blk = SdpBlock(-A, {0: np.eye(len(diag))})
        problems.append((SdpProblem(1, np.array([1.0]), (blk,)), max(diag)))

    # scalar linear rows: y >= c
    for c in (5.0, 0.1, 12.5):
        blk = SdpBlock(np.array([[-c]]), {0: np.array([[1.0]])})
        problems.append((SdpProblem(1, np.array([1.0]), (blk,)), c))

    # [[y1, 1], [1, y2]] >= 0: minimize y1 + y2 -> 2
    blk = SdpBlock(
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        {0: np.array([[1.0, 0.0], [0.0, 0.0]]), 1: np.array([[0.0, 0.0], [0.0, 1.0]])},
    )
    problems.append((SdpProblem(2, np.array([1.0, 1.0]), (blk,)), 2.0))

    # nonnegative variable shadowing a slack constraint: y >= -3 and y >= 0
    blk = SdpBlock(np.array([[3.0]]), {0: np.array([[1.0]])})
    problems.append((SdpProblem(1, np.array([1.0]), (blk,), nonneg_vars=(0,)), 0.0))

    # trust-region dual with A = 0, b = (3, 4), c = 0, eps = 0.1: optimum -1
    q = InnerQuadratic(np.zeros((2, 2), dtype=complex), np.array([3.0, 4.0], dtype=complex), 0.0)
    dual = solve_dual(q, 0.1)
    sdp_errors = [abs(dual.beta - (-1.0))]

    for prob, truth in problems:
        sol = solve_sdp(prob, tol=1e-9)
        assert sol.status == SdpStatus.OPTIMAL
        sdp_errors.append(abs(sol.objective_value - truth))
    worst = max(sdp_errors)
    ok = len(sdp_errors) >= 10 and worst <= 1e-6
    _report("analytic solver suite", ok, f"{len(sdp_errors)} problems, max error {worst:.3e}")
    assert ok


def test_single_user_closed_form():
    rng = np.random.default_rng(104)
    worst = 0.0
    all_rank_one = True
    for _ in range(100):
        n_t = int(rng.integers(1, 5))
        h = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
        channels = ChannelSet(h[None, :], 0.0, 0.01)
        targets = QosTargets.uniform_db(float(rng.uniform(0.0, 10.0)), 1)
        res = solve_power_min(channels, ErrorSet.zeros(1, n_t), targets)
        truth = targets.gamma[0] * channels.sigma2 / np.linalg.norm(h) ** 2
        worst = max(worst, abs(res.total_power - truth) / truth)
        all_rank_one = all_rank_one and res.rank_one_all
    ok = worst <= 1e-6 and all_rank_one
    _report("single-user closed form", ok, f"max relative power error {worst:.3e}")
    assert ok


def test_feasibility_ratio(desk_campaign):
    ratios = [
        desk_campaign.record("robust", g).feasibility_ratio for g in (0.0, 5.0, 10.0)
    ]
    designs = sum(desk_campaign.record("robust", g).design_count for g in (0.0, 5.0, 10.0))
    clean = sum(
        desk_campaign.record("robust", g).feasibility_ratio
        * desk_campaign.record("robust", g).design_count
        for g in (0.0, 5.0, 10.0)
    )
    overall = clean / designs
    ok = overall >= 0.99
    _report("feasibility ratio", ok, f"overall {overall:.4f}, per-target {[f'{r:.4f}' for r in ratios]}")
    assert ok


def test_convergence_behavior(desk_campaign):
    hist: dict[int, int] = {}
    converged = 0
    designs = 0
    for g in (0.0, 5.0, 10.0):
        rec = desk_campaign.record("robust", g)
        for k, v in rec.iteration_histogram.items():
            hist[k] = hist.get(k, 0) + v
        converged += rec.converged_count
        designs += rec.design_count
    within_three = sum(v for k, v in hist.items() if k <= 3)
    frac_fast = within_three / converged if converged else 0.0
    frac_converged = converged / designs if designs else 0.0
    ok = frac_fast >= 0.80 and frac_converged >= 0.90
    _report(
        "convergence behavior",
        ok,
        f"{frac_fast:.1%} of converged runs took <= 3 iterations "
        f"(need >= 80%), {frac_converged:.1%} converged overall (need >= 90%); "
        f"histogram {dict(sorted(hist.items()))}",
    )
    assert ok


def test_outage_ordering(desk_campaign):
    robust_10 = desk_campaign.record("robust", 10.0).outage_probability
    nonrobust_10 = desk_campaign.record("nonrobust", 10.0).outage_probability
    robust_0 = desk_campaign.record("robust", 0.0).outage_probability
    ok = robust_10 <= 0.05 and robust_10 < nonrobust_10 and robust_0 <= 0.02
    _report(
        "outage ordering",
        ok,
        f"robust {robust_0:.4f} @ 0 dB and {robust_10:.4f} @ 10 dB, "
        f"nonrobust {nonrobust_10:.4f} @ 10 dB",
    )
    assert ok


def test_power_ordering(desk_campaign):
    ordering = all(
        desk_campaign.record("perfect_csi", g).mean_power_mw
        <= desk_campaign.record("robust", g).mean_power_mw + 1e-12
        for g in (0.0, 5.0, 10.0)
    )
    ratio = (
        desk_campaign.record("robust", 10.0).mean_power_mw
        / desk_campaign.record("perfect_csi", 10.0).mean_power_mw
    )
    ok = ordering and ratio <= 2.0
    _report(
        "power ordering",
        ok,
        f"perfect-CSI <= robust at every target: {ordering}; "
        f"robust/perfect ratio {ratio:.3f} at 10 dB (need <= 2.0)",
    )
    assert ok


def test_deterministic_exports(tmp_path):
    config = CampaignConfig(
        n_t=2,
        users=2,
        gamma_db_list=(0.0, 5.0),
        epsilon=0.01,
        sigma2=0.01,
        n_channels=3,
        n_errors_per_channel=3,
        master_seed=17,
    )
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    export_results(run_campaign(config), out_a)
    export_results(run_campaign(config), out_b)
    names = ("summary.json", "sinr_samples.csv", "iteration_histogram.csv", "power_vs_gamma.csv")
    identical = all((out_a / n).read_bytes() == (out_b / n).read_bytes() for n in names)
    _report("deterministic exports", identical, f"{len(names)} files byte-compared")
    assert identical
