"""Command-line interface: single-instance solve, campaign sweep, selftest."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np
import yaml

from .campaign import (
    SCHEMES,
    CampaignConfig,
    export_results,
    run_campaign,
)
from .model import ChannelSet, QosTargets, canonicalize_order, qos_margins
from .sampling import sample_channel
from .sdp import SdpStatus
from .selftest import run_selftest
from .solver import SolverConfig, run


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise SystemExit(f"cannot read config {path}: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise SystemExit(f"config {path} must be a mapping")
    return data


def _build_config(args: argparse.Namespace) -> CampaignConfig:
    raw = _load_config_file(args.config)
    solver_raw = dict(raw.pop("solver", {}) or {})
    if args.imax is not None:
        solver_raw["i_max"] = args.imax
    if args.tol is not None:
        solver_raw["delta_tol"] = args.tol
    overrides = {
        "n_t": args.nt,
        "users": args.users,
        "epsilon": args.epsilon,
        "sigma2": args.sigma2,
        "n_channels": args.channels,
        "n_errors_per_channel": args.errors_per_channel,
        "master_seed": args.seed,
        "output_path": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    if args.gamma_db is not None:
        raw["gamma_db_list"] = [float(g) for g in args.gamma_db]
    if args.schemes is not None:
        raw["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    known = {f.name for f in dataclasses.fields(CampaignConfig)}
    unknown = set(raw) - known
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    solver_known = {f.name for f in dataclasses.fields(SolverConfig)}
    solver_unknown = set(solver_raw) - solver_known
    if solver_unknown:
        raise SystemExit(f"unknown solver config keys: {sorted(solver_unknown)}")
    try:
        raw["solver"] = SolverConfig(**solver_raw)
        return CampaignConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"invalid configuration: {exc}")


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _build_config(args)
    gamma_db = config.gamma_db_list[0]
    rng = np.random.default_rng([config.master_seed, 1, 0])
    estimates = np.array([sample_channel(rng, config.n_t) for _ in range(config.users)])
    channels, _ = canonicalize_order(ChannelSet(estimates, config.epsilon, config.sigma2))
    targets = QosTargets.uniform_db(gamma_db, config.users)
    solution = run(channels, targets, config.solver)
    if solution.status != SdpStatus.OPTIMAL or solution.beams is None:
        print(f"solve failed: {solution.status.value} at iteration {solution.iterations}")
        return 2
    print(f"target SINR: {gamma_db} dB for {config.users} users, {config.n_t} antennas")
    print(f"total power: {solution.total_power:.6f} mW")
    print(f"iterations:  {solution.iterations} (converged={solution.converged})")
    for u, w in enumerate(solution.beams.beams):
        entries = ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in w)
        print(f"w[{u}] = [{entries}]")
    margins = qos_margins(solution.beams, channels, solution.errors, targets)
    print("worst-case QoS margins:", " ".join(f"{m:+.3e}" for m in margins))
    return 0


def _cmd_campaign(args: argparse.Namespace) -> int:
    config = _build_config(args)
    result = run_campaign(config)
    files = export_results(result, config.output_path)
    for rec in result.records:
        print(
            f"{rec.scheme:>11s}  gamma={rec.gamma_db:5.1f} dB  "
            f"power={rec.mean_power_mw:.4f} mW  outage={rec.outage_probability:.4f}  "
            f"feasible={rec.feasibility_ratio:.4f}"
        )
    print("wrote: " + ", ".join(str(f) for f in files))
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_selftest(seed)
    failed = 0
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        if not passed:
            failed += 1
    return 1 if failed else 0


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML/JSON campaign configuration file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--gamma-db", type=float, nargs="+", help="target SINR values in dB")
    p.add_argument("--epsilon", type=float, help="CSI error ball radius")
    p.add_argument("--sigma2", type=float, help="noise power in mW")
    p.add_argument("--nt", type=int, help="number of transmit antennas")
    p.add_argument("--users", type=int, help="number of users")
    p.add_argument("--channels", type=int, help="number of channel realizations")
    p.add_argument("--errors-per-channel", type=int, help="error realizations per channel")
    p.add_argument("--schemes", help="comma-separated subset of " + ",".join(SCHEMES))
    p.add_argument("--out", help="output directory")
    p.add_argument("--imax", type=int, help="maximum solver iterations")
    p.add_argument("--tol", type=float, help="solver convergence tolerance")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="robustnoma",
        description="Robust transmit beamforming for downlink MISO power-domain NOMA",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", _cmd_solve), ("campaign", _cmd_campaign), ("selftest", _cmd_selftest)):
        p = sub.add_parser(name)
        _add_common_flags(p)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
