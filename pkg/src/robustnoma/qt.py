"""Quadratic transform for sums of ratios and its NOMA SINR specialization.

A ratio a^H B^{-1} a (B positive definite) is replaced by the surrogate
2 Re(t^H a) - t^H B t, which lower-bounds the ratio for any t and is tight at
t = B^{-1} a. Applied per (user, receiver) pair, this turns every SINR into an
expression quadratic in the error and beam vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import BeamformerSet, ChannelSet, ErrorSet

__all__ = [
    "RatioTerm",
    "ScalingSet",
    "qt_value",
    "qt_optimal_scalars",
    "update_t",
    "transformed_sinr",
]


@dataclass(frozen=True)
class RatioTerm:
    """One term a^H B^{-1} a of a sum-of-ratios objective."""

    numerator_vec: np.ndarray
    denominator_mat: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.numerator_vec, dtype=complex))
        B = np.atleast_2d(np.asarray(self.denominator_mat, dtype=complex))
        if B.shape != (a.size, a.size):
            raise ValueError("denominator_mat shape inconsistent with numerator_vec")
        if not np.allclose(B, B.conj().T, rtol=1e-12, atol=1e-12 * max(1.0, np.linalg.norm(B))):
            raise ValueError("denominator_mat must be Hermitian")
        object.__setattr__(self, "numerator_vec", a)
        object.__setattr__(self, "denominator_mat", B)


@dataclass(frozen=True)
class ScalingSet:
    """Transform scalars t[u, l] for user u at receiver l, defined for u <= l.

    Stored as a dense (U, U) complex matrix with zeros below the used triangle.
    """

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("t must be square (U, U)")
        if not np.all(np.isfinite(t)):
            raise ValueError("t contains non-finite entries")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @property
    def num_users(self) -> int:
        return self.t.shape[0]


def qt_value(terms: Sequence[RatioTerm], t: Sequence[np.ndarray]) -> float:
    """Value of the transformed sum for given scalars t_m."""
    if len(terms) != len(t):
        raise ValueError("terms and scalars must have equal length")
    total = 0.0
    for term, tm in zip(terms, t):
        tm = np.atleast_1d(np.asarray(tm, dtype=complex))
        if tm.shape != term.numerator_vec.shape:
            raise ValueError("scalar vector dimension mismatch")
        total += 2.0 * np.real(np.vdot(tm, term.numerator_vec))
        total -= np.real(np.vdot(tm, term.denominator_mat @ tm))
    return float(total)


def qt_optimal_scalars(terms: Sequence[RatioTerm]) -> list[np.ndarray]:
    """Tightness-restoring scalars t_m = B_m^{-1} a_m; requires each B_m > 0."""
    out = []
    for term in terms:
        try:
            np.linalg.cholesky(term.denominator_mat)
        except np.linalg.LinAlgError as exc:
            raise ValueError("denominator matrix is not positive definite") from exc
        out.append(np.linalg.solve(term.denominator_mat, term.numerator_vec))
    return out


def _denominator(u: int, l: int, channels: ChannelSet, errors: ErrorSet, beams: BeamformerSet, sigma2: float) -> float:
    h_true = channels.estimates[l] + errors.errors[l]
    resid = np.abs(beams.beams[:u] @ errors.errors[l].conj()) ** 2 if u > 0 else np.zeros(0)
    inter = np.abs(beams.beams[u + 1:] @ h_true.conj()) ** 2
    return float(np.sum(resid) + np.sum(inter) + sigma2)


def update_t(
    channels: ChannelSet,
    errors: ErrorSet,
    beams: BeamformerSet,
    sigma2: float | None = None,
) -> ScalingSet:
    """Closed-form scalar update making the transformed SINRs tight at the current point."""
    if sigma2 is None:
        sigma2 = channels.sigma2
    num_users = channels.num_users
    t = np.zeros((num_users, num_users), dtype=complex)
    for l in range(num_users):
        h_true = channels.estimates[l] + errors.errors[l]
        for u in range(l + 1):
            denom = _denominator(u, l, channels, errors, beams, sigma2)
            t[u, l] = np.vdot(h_true, beams.beams[u]) / denom
    return ScalingSet(t)


def transformed_sinr(
    u: int,
    l: int,
    t: ScalingSet,
    channels: ChannelSet,
    errors: ErrorSet,
    beams: BeamformerSet,
    sigma2: float | None = None,
) -> float:
    """Quadratic surrogate of the (u, l) SINR for given scalar t[u, l].

    Equals the exact SINR when t comes from update_t, and never exceeds it.
    """
    if not (0 <= u <= l < channels.num_users):
        raise IndexError(f"invalid (u, l)=({u}, {l})")
    if sigma2 is None:
        sigma2 = channels.sigma2
    h_true = channels.estimates[l] + errors.errors[l]
    tul = t.t[u, l]
    denom = _denominator(u, l, channels, errors, beams, sigma2)
    return float(
        2.0 * np.real(np.conj(tul) * np.vdot(h_true, beams.beams[u]))
        - np.abs(tul) ** 2 * denom
    )
