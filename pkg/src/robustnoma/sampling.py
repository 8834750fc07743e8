"""Random channel and CSI-error generators used by the solver and campaigns."""

from __future__ import annotations

import numpy as np

__all__ = ["sample_channel", "sample_error_ball"]


def sample_channel(rng: np.random.Generator, n_t: int) -> np.ndarray:
    """i.i.d. complex Gaussian channel with per-entry variance 1/n_t (unit expected norm^2)."""
    if n_t < 1:
        raise ValueError("n_t must be positive")
    scale = np.sqrt(1.0 / (2.0 * n_t))
    return scale * (rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t))


def sample_error_ball(rng: np.random.Generator, n_t: int, epsilon: float) -> np.ndarray:
    """Uniform draw from the complex ball of radius epsilon (2*n_t real dimensions)."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0.0:
        return np.zeros(n_t, dtype=complex)
    g = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
    g /= np.linalg.norm(g)
    radius = epsilon * rng.random() ** (1.0 / (2 * n_t))
    return radius * g
