"""Closed-form three-defect (trimer) results used to cross-check the numerics.

Nothing here touches the matrix engine: the profile below is evaluated from
closed-form component vectors, so it can serve as an independent oracle for
the exact-diagonalization path.
"""

from __future__ import annotations

import math

import numpy as np

from .entanglement import concurrence_many, eof_from_concurrence
from .errors import ParameterError

__all__ = [
    "effective_eta",
    "mirroring_time",
    "trimer_eigensystem",
    "analytic_eof_profile",
    "noisy_trimer_eigenvalues",
]


def effective_eta(big_delta: float, delta: float) -> float:
    """Effective defect-defect coupling mediated through one dimer.

    Equals 1/sqrt(2) times the smallest positive single-excitation eigenvalue
    of the clean seven-site defect chain; exact, not perturbative.
    """
    if not 0 < delta < big_delta:
        raise ParameterError(
            f"need 0 < delta < big_delta, got delta={delta}, big_delta={big_delta}"
        )
    d2, w2 = big_delta**2, delta**2
    inner = math.sqrt(d2 * d2 + 6.0 * d2 * w2 + w2 * w2)
    return math.sqrt(d2 + 3.0 * w2 - inner) / 2.0


def mirroring_time(eta: float) -> float:
    """Time for a single-excitation state to reach its mirror site: pi / (sqrt(2) eta)."""
    if eta <= 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    return math.pi / (math.sqrt(2.0) * eta)


def trimer_eigensystem(eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Energies {-sqrt(2) eta, 0, +sqrt(2) eta} and eigenvector columns of the trimer."""
    if eta <= 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    s2 = math.sqrt(2.0)
    energies = np.array([-s2 * eta, 0.0, s2 * eta])
    vectors = np.array(
        [[-0.5, 1.0 / s2, 0.5],
         [s2 / 2.0, 0.0, s2 / 2.0],
         [-0.5, -1.0 / s2, 0.5]]
    )
    return energies, vectors


def analytic_eof_profile(eta: float, t: float | np.ndarray) -> float | np.ndarray:
    """Entanglement of formation of the trimer protocol at time ``t``.

    Builds the two unnormalized pure components of the reduced pair state in
    closed form (the part with the middle site empty and the part with it
    excited) and applies the Wootters map.
    """
    if eta <= 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    theta = math.sqrt(2.0) * eta * np.atleast_1d(np.asarray(t, dtype=float))
    cos, sin = np.cos(theta), np.sin(theta)
    alpha = 0.5 * np.stack([np.ones_like(cos), cos, cos, cos], axis=-1).astype(complex)
    beta = (-1j / math.sqrt(2.0)) * sin[..., None] * np.array([1.0, 0.5, 0.5, 0.0])
    rho = (
        alpha[..., :, None] * alpha[..., None, :].conj()
        + beta[..., :, None] * beta[..., None, :].conj()
    )
    values = eof_from_concurrence(concurrence_many(rho))
    return values if np.ndim(t) else float(values[0])


def noisy_trimer_eigenvalues(eta: float, d: float, e: float) -> np.ndarray:
    """Spectrum of the trimer with couplings eta + d and eta + e.

    The zero-energy state is untouched by this off-diagonal perturbation; only
    the outer pair moves.
    """
    shifted = math.sqrt(
        2.0 * eta * eta + 2.0 * eta * d + 2.0 * eta * e + d * d + e * e
    )
    return np.array([-shifted, 0.0, shifted])
