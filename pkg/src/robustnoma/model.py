"""Domain types and analytic SINR/rate evaluation for the beam-based NOMA downlink.

All powers are in mW and SINRs are linear internally; dB conversions happen
only at I/O boundaries. User indices are 0-based: after canonicalization user 0
has the weakest estimated channel and is decoded first by every receiver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChannelSet",
    "BeamformerSet",
    "ErrorSet",
    "QosTargets",
    "canonicalize_order",
    "compute_sinr",
    "effective_sinr",
    "achievable_rate",
    "qos_margins",
]


def _as_complex_matrix(rows, name: str) -> np.ndarray:
    arr = np.array(rows, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a (U, N_t) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelSet:
    """Per-user channel estimates plus the uncertainty radius and noise power.

    estimates: (U, N_t) complex array, row u is the estimate for user u.
    epsilon:   radius of the norm ball containing the estimation error.
    sigma2:    receiver noise power in mW.
    """

    estimates: np.ndarray
    epsilon: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "estimates", _as_complex_matrix(self.estimates, "estimates"))
        if self.estimates.shape[0] < 1:
            raise ValueError("need at least one user")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    @property
    def num_users(self) -> int:
        return self.estimates.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.estimates.shape[1]


@dataclass(frozen=True)
class BeamformerSet:
    """Per-user transmit beamforming vectors, shape (U, N_t)."""

    beams: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beams", _as_complex_matrix(self.beams, "beams"))

    @property
    def num_users(self) -> int:
        return self.beams.shape[0]

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.beams) ** 2))


@dataclass(frozen=True)
class ErrorSet:
    """Per-receiver CSI error vectors, shape (U, N_t)."""

    errors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "errors", _as_complex_matrix(self.errors, "errors"))

    @classmethod
    def zeros(cls, num_users: int, num_antennas: int) -> "ErrorSet":
        return cls(np.zeros((num_users, num_antennas), dtype=complex))


@dataclass(frozen=True)
class QosTargets:
    """Per-user SINR targets, kept in both linear and dB scale."""

    gamma: np.ndarray
    gamma_db: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        if np.any(gamma <= 0):
            raise ValueError("targets must be positive in linear scale")
        gamma_db = self.gamma_db
        if gamma_db is None:
            gamma_db = 10.0 * np.log10(gamma)
        gamma_db = np.asarray(gamma_db, dtype=float)
        if not np.allclose(gamma, 10.0 ** (gamma_db / 10.0), rtol=1e-10):
            raise ValueError("gamma and gamma_db are inconsistent")
        gamma.setflags(write=False)
        gamma_db.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "gamma_db", gamma_db)

    @classmethod
    def from_db(cls, gamma_db) -> "QosTargets":
        gamma_db = np.asarray(gamma_db, dtype=float)
        return cls(10.0 ** (gamma_db / 10.0), gamma_db)

    @classmethod
    def uniform_db(cls, gamma_db: float, num_users: int) -> "QosTargets":
        return cls.from_db(np.full(num_users, float(gamma_db)))


def canonicalize_order(channels: ChannelSet) -> tuple[ChannelSet, np.ndarray]:
    """Sort users so estimated channel norms are nondecreasing.

    Returns the reordered channel set and the permutation mapping original
    index -> NOMA index. Ties keep their original relative order.
    """
    norms = np.linalg.norm(channels.estimates, axis=1)
    order = np.argsort(norms, kind="stable")  # order[new] = original
    perm = np.empty_like(order)
    perm[order] = np.arange(len(order))
    reordered = ChannelSet(channels.estimates[order], channels.epsilon, channels.sigma2)
    return reordered, perm


def _interference(u: int, l: int, h_true: np.ndarray, e: np.ndarray, beams: np.ndarray, sigma2: float) -> float:
    """Denominator of the SINR of signal u at receiver l (includes noise)."""
    resid = np.abs(beams[:u] @ e.conj()) ** 2 if u > 0 else np.zeros(0)
    inter = np.abs(beams[u + 1:] @ h_true.conj()) ** 2
    return float(np.sum(resid) + np.sum(inter) + sigma2)


def compute_sinr(
    u: int,
    l: int,
    channels: ChannelSet,
    errors: ErrorSet,
    beams: BeamformerSet,
    sigma2: float | None = None,
) -> float:
    """SINR of user u's signal at receiver l (0-based, u <= l < U).

    The true channel of receiver l is estimate + error; signals already
    cancelled by SIC leak only through the residual error vector.
    """
    num_users = channels.num_users
    if not (0 <= u <= l < num_users):
        raise IndexError(f"invalid (u, l)=({u}, {l}) for U={num_users}")
    if sigma2 is None:
        sigma2 = channels.sigma2
    h_true = channels.estimates[l] + errors.errors[l]
    num = float(np.abs(np.vdot(h_true, beams.beams[u])) ** 2)
    return num / _interference(u, l, h_true, errors.errors[l], beams.beams, sigma2)


def effective_sinr(
    u: int,
    channels: ChannelSet,
    errors: ErrorSet,
    beams: BeamformerSet,
    sigma2: float | None = None,
) -> float:
    """Operating SINR of user u: the minimum over all receivers l >= u that must decode it."""
    return min(
        compute_sinr(u, l, channels, errors, beams, sigma2)
        for l in range(u, channels.num_users)
    )


def achievable_rate(
    u: int,
    channels: ChannelSet,
    errors: ErrorSet,
    beams: BeamformerSet,
    sigma2: float | None = None,
) -> float:
    """Achievable rate of user u in bits per channel use."""
    return float(np.log2(1.0 + effective_sinr(u, channels, errors, beams, sigma2)))


def qos_margins(
    beams: BeamformerSet,
    channels: ChannelSet,
    errors: ErrorSet,
    targets: QosTargets,
) -> np.ndarray:
    """Per-user slack effective_sinr - target; nonnegative means the QoS holds."""
    return np.array(
        [
            effective_sinr(u, channels, errors, beams) - targets.gamma[u]
            for u in range(channels.num_users)
        ]
    )
