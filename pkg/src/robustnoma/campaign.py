"""Monte Carlo campaigns: design schemes over random channels, evaluate outage,
power and convergence statistics, and export plot-ready tables.

Every random draw gets its own generator seeded from (master_seed, purpose tag,
channel index, error index), so results are reproducible and independent of
execution order.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .model import BeamformerSet, ChannelSet, ErrorSet, QosTargets, canonicalize_order, effective_sinr
from .sampling import sample_channel, sample_error_ball
from .sdp import SdpStatus
from .solver import SolverConfig, run, solve_nonrobust

__all__ = [
    "SCHEMES",
    "CampaignConfig",
    "CampaignRecord",
    "CampaignResult",
    "evaluate_realization",
    "run_campaign",
    "export_results",
    "load_summary",
]

SCHEMES = ("robust", "nonrobust", "perfect_csi")

# relative slack below the target before a sample counts as outage; keeps
# active-at-optimum constraints from flipping on solver noise
OUTAGE_REL_TOL = 1e-6


@dataclass(frozen=True)
class CampaignConfig:
    n_t: int = 3
    users: int = 3
    gamma_db_list: tuple[float, ...] = tuple(float(g) for g in range(0, 11))
    epsilon: float = 0.01
    sigma2: float = 0.01
    n_channels: int = 500
    n_errors_per_channel: int = 100
    solver: SolverConfig = field(default_factory=SolverConfig)
    master_seed: int = 0
    output_path: str = "results"
    schemes: tuple[str, ...] = SCHEMES

    def __post_init__(self):
        if self.n_t < 1 or self.users < 1 or self.n_channels < 1 or self.n_errors_per_channel < 1:
            raise ValueError("counts must be positive")
        if self.epsilon < 0 or self.sigma2 <= 0:
            raise ValueError("invalid epsilon or sigma2")
        object.__setattr__(self, "gamma_db_list", tuple(float(g) for g in self.gamma_db_list))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")


@dataclass
class CampaignRecord:
    scheme: str
    gamma_db: float
    mean_power_mw: float
    outage_probability: float
    outage_adjusted_power_mw: float
    sinr_users: np.ndarray       # user index per sample
    sinr_samples_db: np.ndarray  # effective SINR per (user, realization) sample, dB
    iteration_histogram: dict[int, int]
    converged_count: int
    design_count: int
    feasibility_ratio: float
    infeasible_count: int
    wall_time: float


@dataclass
class CampaignResult:
    config: CampaignConfig
    records: list[CampaignRecord]

    def record(self, scheme: str, gamma_db: float) -> CampaignRecord:
        for rec in self.records:
            if rec.scheme == scheme and rec.gamma_db == gamma_db:
                return rec
        raise KeyError((scheme, gamma_db))


def evaluate_realization(
    beams: BeamformerSet,
    channels: ChannelSet,
    true_errors: ErrorSet,
    targets: QosTargets,
    sigma2: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-user effective SINRs and outage flags for one true-error realization."""
    sinrs = np.array(
        [
            effective_sinr(u, channels, true_errors, beams, sigma2)
            for u in range(channels.num_users)
        ]
    )
    flags = sinrs < targets.gamma * (1.0 - OUTAGE_REL_TOL)
    return sinrs, flags


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@dataclass
class _Accumulator:
    powers: list[float] = field(default_factory=list)
    sinr_users: list[int] = field(default_factory=list)
    sinr_db: list[float] = field(default_factory=list)
    outages: int = 0
    pairs: int = 0
    histogram: dict[int, int] = field(default_factory=dict)
    converged: int = 0
    designs: int = 0
    rank_one_clean: int = 0
    infeasible: int = 0
    started: float = 0.0

    def add_design(self, rank_one_clean: bool) -> None:
        self.designs += 1
        if rank_one_clean:
            self.rank_one_clean += 1

    def add_eval(self, sinrs: np.ndarray, flags: np.ndarray) -> None:
        for u, (s, f) in enumerate(zip(sinrs, flags)):
            self.sinr_users.append(u)
            self.sinr_db.append(10.0 * np.log10(s) if s > 0 else -np.inf)
            self.pairs += 1
            if f:
                self.outages += 1

    def add_failed_design(self, num_users: int, n_draws: int) -> None:
        self.designs += 1
        self.infeasible += 1
        self.pairs += num_users * n_draws
        self.outages += num_users * n_draws

    def finish(self, scheme: str, gamma_db: float) -> CampaignRecord:
        p_out = self.outages / self.pairs if self.pairs else 0.0
        mean_power = float(np.mean(self.powers)) if self.powers else np.nan
        adjusted = mean_power / (1.0 - p_out) if p_out < 1.0 else np.inf
        feas = self.rank_one_clean / self.designs if self.designs else 0.0
        return CampaignRecord(
            scheme=scheme,
            gamma_db=gamma_db,
            mean_power_mw=mean_power,
            outage_probability=p_out,
            outage_adjusted_power_mw=adjusted,
            sinr_users=np.array(self.sinr_users, dtype=int),
            sinr_samples_db=np.array(self.sinr_db),
            iteration_histogram=dict(sorted(self.histogram.items())),
            converged_count=self.converged,
            design_count=self.designs,
            feasibility_ratio=feas,
            infeasible_count=self.infeasible,
            wall_time=time.monotonic() - self.started,
        )


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Design and evaluate every configured scheme over the sampled ensemble."""
    accs: dict[tuple[str, float], _Accumulator] = {}
    for scheme in config.schemes:
        for gamma_db in config.gamma_db_list:
            acc = _Accumulator()
            acc.started = time.monotonic()
            accs[(scheme, gamma_db)] = acc

    n_draws = config.n_errors_per_channel
    for c_idx in range(config.n_channels):
        ch_rng = np.random.default_rng([config.master_seed, 1, c_idx])
        estimates = np.array([sample_channel(ch_rng, config.n_t) for _ in range(config.users)])
        channels = ChannelSet(estimates, config.epsilon, config.sigma2)
        channels, _ = canonicalize_order(channels)
        error_draws = []
        for e_idx in range(n_draws):
            e_rng = np.random.default_rng([config.master_seed, 2, c_idx, e_idx])
            error_draws.append(
                ErrorSet(np.array([sample_error_ball(e_rng, config.n_t, config.epsilon) for _ in range(config.users)]))
            )

        for g_idx, gamma_db in enumerate(config.gamma_db_list):
            targets = QosTargets.uniform_db(gamma_db, config.users)
            for scheme in config.schemes:
                acc = accs[(scheme, gamma_db)]
                if scheme == "robust":
                    cfg = replace(config.solver, seed=_derived_seed(config.master_seed, 3, c_idx, g_idx))
                    solution = run(channels, targets, cfg)
                    if solution.status != SdpStatus.OPTIMAL or solution.beams is None:
                        acc.add_failed_design(config.users, n_draws)
                        continue
                    acc.add_design(solution.rank_one_all and not solution.used_randomization)
                    bucket = min(solution.iterations, cfg.i_max)
                    acc.histogram[bucket] = acc.histogram.get(bucket, 0) + 1
                    if solution.converged:
                        acc.converged += 1
                    acc.powers.append(solution.total_power)
                    for draw in error_draws:
                        acc.add_eval(*evaluate_realization(solution.beams, channels, draw, targets))
                elif scheme == "nonrobust":
                    result = solve_nonrobust(channels, targets, config.solver)
                    if result.status != SdpStatus.OPTIMAL or result.beams is None:
                        acc.add_failed_design(config.users, n_draws)
                        continue
                    acc.add_design(result.rank_one_all and not result.used_randomization)
                    acc.powers.append(result.beams.total_power())
                    for draw in error_draws:
                        acc.add_eval(*evaluate_realization(result.beams, channels, draw, targets))
                else:  # perfect_csi: the designer sees the realized channel
                    for draw in error_draws:
                        true_ch = ChannelSet(channels.estimates + draw.errors, 0.0, config.sigma2)
                        result = solve_nonrobust(true_ch, targets, config.solver)
                        if result.status != SdpStatus.OPTIMAL or result.beams is None:
                            acc.add_failed_design(config.users, 1)
                            continue
                        acc.add_design(result.rank_one_all and not result.used_randomization)
                        acc.powers.append(result.beams.total_power())
                        zero = ErrorSet.zeros(config.users, config.n_t)
                        acc.add_eval(*evaluate_realization(result.beams, true_ch, zero, targets))

    records = [
        accs[(scheme, gamma_db)].finish(scheme, gamma_db)
        for scheme in config.schemes
        for gamma_db in config.gamma_db_list
    ]
    return CampaignResult(config, records)


def _fmt(x) -> str:
    return repr(float(x))


def export_results(result: CampaignResult, path: str | Path) -> list[Path]:
    """Write the summary document and the flat tables under `path`.

    wall_time is intentionally omitted from the files so identical configs
    export byte-identical results.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = []
        for rec in result.records:
            summary.append(
                {
                    "scheme": rec.scheme,
                    "gamma_db": rec.gamma_db,
                    "mean_power_mw": rec.mean_power_mw,
                    "outage_probability": rec.outage_probability,
                    "outage_adjusted_power_mw": rec.outage_adjusted_power_mw,
                    "converged_count": rec.converged_count,
                    "design_count": rec.design_count,
                    "feasibility_ratio": rec.feasibility_ratio,
                    "infeasible_count": rec.infeasible_count,
                    "iteration_histogram": {str(k): v for k, v in rec.iteration_histogram.items()},
                }
            )
        files = []
        summary_path = out / "summary.json"
        summary_path.write_text(json.dumps(summary, indent=2) + "\n")
        files.append(summary_path)

        sinr_path = out / "sinr_samples.csv"
        lines = ["scheme,gamma_db,user,sinr_db"]
        for rec in result.records:
            for u, s in zip(rec.sinr_users, rec.sinr_samples_db):
                lines.append(f"{rec.scheme},{_fmt(rec.gamma_db)},{u},{_fmt(s)}")
        sinr_path.write_text("\n".join(lines) + "\n")
        files.append(sinr_path)

        hist_path = out / "iteration_histogram.csv"
        hist: dict[int, int] = {}
        for rec in result.records:
            for k, v in rec.iteration_histogram.items():
                hist[k] = hist.get(k, 0) + v
        lines = ["iterations,count"]
        for k in sorted(hist):
            lines.append(f"{k},{hist[k]}")
        hist_path.write_text("\n".join(lines) + "\n")
        files.append(hist_path)

        power_path = out / "power_vs_gamma.csv"
        lines = ["scheme,gamma_db,mean_power_mw,adjusted_power_mw"]
        for rec in result.records:
            lines.append(
                f"{rec.scheme},{_fmt(rec.gamma_db)},{_fmt(rec.mean_power_mw)},{_fmt(rec.outage_adjusted_power_mw)}"
            )
        power_path.write_text("\n".join(lines) + "\n")
        files.append(power_path)
        return files
    except OSError as exc:
        raise OSError(f"failed writing campaign results under {out}: {exc}") from exc


def load_summary(path: str | Path) -> list[dict]:
    """Re-parse the exported summary document."""
    return json.loads((Path(path) / "summary.json").read_text())
