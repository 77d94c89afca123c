"""Shared fixtures and independent oracle helpers.

The oracle functions rebuild the decay operators and closed-form evolution
from scratch (literal matrix entries, plain numpy arithmetic) so the tests
never trust the code path they are checking.
"""

import numpy as np
import pytest

from qjsim import DecayType, InitialState, ModeGeometry


def oracle_kraus(decay_type: DecayType, p21: float, p31: float, p32: float):
    """Literal decay operators, written out entry by entry."""
    if decay_type is DecayType.CASCADE:
        k0 = np.array(
            [[1, 0, 0], [0, np.sqrt(1 - p21), 0], [0, 0, np.sqrt(1 - p32)]],
            dtype=complex,
        )
        k1 = np.array([[0, np.sqrt(p21), 0], [0, 0, 0], [0, 0, 0]], dtype=complex)
        k2 = np.array(
            [[0, 0, 0], [0, 0, np.sqrt(p32 * (1 - p21))], [0, 0, 0]], dtype=complex
        )
        k3 = np.array([[0, 0, np.sqrt(p32 * p21)], [0, 0, 0], [0, 0, 0]], dtype=complex)
        return [k0, k1, k2, k3]
    if decay_type is DecayType.LAMBDA:
        k0 = np.array(
            [[1, 0, 0], [0, 1, 0], [0, 0, np.sqrt(1 - p32 - p31)]], dtype=complex
        )
        k1 = np.array([[0, 0, 0], [0, 0, np.sqrt(p32)], [0, 0, 0]], dtype=complex)
        k2 = np.array([[0, 0, np.sqrt(p31)], [0, 0, 0], [0, 0, 0]], dtype=complex)
        return [k0, k1, k2]
    k0 = np.array(
        [[1, 0, 0], [0, np.sqrt(1 - p21), 0], [0, 0, np.sqrt(1 - p31)]], dtype=complex
    )
    k1 = np.array([[0, np.sqrt(p21), 0], [0, 0, 0], [0, 0, 0]], dtype=complex)
    k2 = np.array([[0, 0, np.sqrt(p31)], [0, 0, 0], [0, 0, 0]], dtype=complex)
    return [k0, k1, k2]


def oracle_apply(operators, rho: np.ndarray) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    for k in operators:
        out += k @ rho @ k.conj().T
    return out


def oracle_pure(intensities, phases=(0.0, 0.0, 0.0)) -> np.ndarray:
    total = sum(intensities)
    amps = np.array(
        [
            np.sqrt(intensities[i] / total) * np.exp(1j * phases[i])
            for i in range(3)
        ]
    )
    return np.outer(amps, amps.conj())


def oracle_project(rho: np.ndarray, i: int, j: int) -> np.ndarray:
    a, b = i - 1, j - 1
    sub = np.array([[rho[a, a], rho[a, b]], [rho[b, a], rho[b, b]]])
    return sub / (rho[a, a] + rho[b, b]).real


def random_mixed_state(rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix via a Wishart-style construction."""
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = a @ a.conj().T + 1e-6 * np.eye(3)
    return m / m.trace().real


def random_probs(decay_type: DecayType, rng: np.random.Generator):
    """Valid (p21, p31, p32) triple for a decay type."""
    if decay_type is DecayType.LAMBDA:
        p31, p32 = rng.dirichlet([1.0, 1.0, 1.0])[:2]
        return 0.0, float(p31), float(p32)
    a, b = rng.uniform(0.0, 1.0, size=2)
    if decay_type is DecayType.CASCADE:
        return float(a), 0.0, float(b)
    return float(a), float(b), 0.0


@pytest.fixture
def geom() -> ModeGeometry:
    return ModeGeometry(d=1.0, sigma_g=0.05, f=150.0, k=9926.0)


@pytest.fixture
def equal_state() -> InitialState:
    return InitialState((1.0, 1.0, 1.0))
