"""Hand-checked reference values for the bundled worked scenarios.

The matrices and closed-form curves here are written out explicitly and
serve as independent oracles: the self-test harness and the acceptance
suite compare the library's constructions against them.  Nothing in this
module calls back into the construction code.
"""

from __future__ import annotations

import math

import numpy as np


def maximally_mixed_identity_pdm() -> np.ndarray:
    """Two-step PDM for a maximally mixed qubit under trivial evolution.

    Half the swap operator; eigenvalues (-1/2, 1/2, 1/2, 1/2).
    """
    return 0.5 * np.array(
        [
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def maximally_mixed_depolarizing_pdm(eta: float) -> np.ndarray:
    """Two-step PDM for a maximally mixed qubit under depolarizing noise."""
    return 0.5 * np.array(
        [
            [1 - eta / 2, 0, 0, 0],
            [0, eta / 2, 1 - eta, 0],
            [0, 1 - eta, eta / 2, 0],
            [0, 0, 0, 1 - eta / 2],
        ],
        dtype=complex,
    )


def pure_state_depolarizing_pdm(eta: float) -> np.ndarray:
    """Two-step PDM for the +z pure state under depolarizing noise."""
    return np.array(
        [
            [1 - eta / 2, 0, 0, 0],
            [0, eta / 2, (1 - eta) / 2, 0],
            [0, (1 - eta) / 2, 0, 0],
            [0, 0, 0, 0],
        ],
        dtype=complex,
    )


def product_pdm_full_depolarizing() -> np.ndarray:
    """Fully depolarized limit of the pure-state scenario.

    Product form: (+z projector) tensor (maximally mixed state).
    """
    return 0.5 * np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)


def three_step_identity_pdm() -> np.ndarray:
    """Three-step PDM for a maximally mixed qubit under trivial evolutions."""
    m = np.zeros((8, 8), dtype=complex)
    m[0, 0] = 0.5
    m[7, 7] = 0.5
    for a, b in ((1, 2), (1, 4), (2, 4), (3, 5), (3, 6), (5, 6)):
        m[a, b] = 0.25
        m[b, a] = 0.25
    return m


def maximally_mixed_identity_eigenvalues() -> np.ndarray:
    """Ascending spectrum of :func:`maximally_mixed_identity_pdm`."""
    return np.array([-0.5, 0.5, 0.5, 0.5])


def maximally_mixed_identity_eigenvectors() -> tuple[np.ndarray, ...]:
    """Eigenvectors paired with the ascending spectrum.

    The negative eigenvalue belongs to the singlet combination; the
    remaining three span the symmetric (triplet) subspace.
    """
    s = 1.0 / math.sqrt(2.0)
    singlet = np.array([0, s, -s, 0], dtype=complex)
    triplet = (
        np.array([0, 0, 0, 1], dtype=complex),
        np.array([0, s, s, 0], dtype=complex),
        np.array([1, 0, 0, 0], dtype=complex),
    )
    return (singlet,) + triplet


def maximally_mixed_depolarizing_negativity(eta: float) -> float:
    """Negativity of the maximally mixed depolarizing scenario.

    ``(2 - 3 eta) / 2`` up to the positivity threshold ``eta = 2/3``,
    then exactly 0.
    """
    return 0.5 * (2.0 - 3.0 * eta) if eta < 2.0 / 3.0 else 0.0


def pure_state_depolarizing_negativity(eta: float) -> float:
    """Negativity of the pure-state depolarizing scenario (closed form)."""
    inner = math.sqrt(4.0 + eta * (-8.0 + 5.0 * eta))
    plus = math.sqrt(max(4.0 + 6.0 * eta**2 - 2.0 * eta * (4.0 + inner), 0.0))
    minus = math.sqrt(max(4.0 + 6.0 * eta**2 - 2.0 * eta * (4.0 - inner), 0.0))
    return 0.25 * (plus + minus - 2.0 * eta)


def depolarizing_chsh_max(eta: float) -> float:
    """Best temporal CHSH value under depolarizing noise: ``2 sqrt(2) (1 - eta)``.

    Holds for any initial qubit state.
    """
    return 2.0 * math.sqrt(2.0) * (1.0 - eta)


CHSH_VIOLATION_ETA_THRESHOLD = 1.0 - math.sqrt(2.0) / 2.0


def rabi_lgi_k3(omega_t: float) -> float:
    """Three-time Leggett-Garg combination for resonant Rabi driving.

    ``2 cos(omega_t) - cos(2 omega_t)`` for the z observable; maximum
    3/2 at ``omega_t = pi/3``.
    """
    return 2.0 * math.cos(omega_t) - math.cos(2.0 * omega_t)


def rabi_nsit_three(omega_t: float) -> float:
    """Three-step NSIT violation quantifier for the maximally mixed
    Rabi scenario with z measurements: ``sin^2(omega_t)``."""
    return math.sin(omega_t) ** 2


def pure_state_depolarizing_nsit(eta: float, theta1: float, theta2: float) -> float:
    """Two-step NSIT violation quantifier for the pure-state scenario.

    Measurements along polar angles ``theta1`` then ``theta2`` at a
    common azimuth: ``(1 - eta) |sin(theta1) sin(theta2 - theta1)|``.
    """
    return (1.0 - eta) * abs(math.sin(theta1) * math.sin(theta2 - theta1))
