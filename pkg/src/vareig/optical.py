"""Linear-optics version of the comparison step.

Two single photons meeting on a balanced beamsplitter give a coincidence
with probability ``(1 - tr(rho sigma)) / 2``, which is the failure
probability of a SWAP test on the same states. A single photon in ``d``
modes evolves by the scattering matrix itself, so qudits are mapped onto
``log2(d)`` simulator qubits.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError
from .numerics import require_unitary
from .objectives import EXACT, EvalMode, trial_state
from .simulator import mixed_overlap, n_qubits_of, projector
from .swaptest import TestStats


def _as_density(x):
    x = np.asarray(x, dtype=complex)
    return projector(x) if x.ndim == 1 else x


def as_qudit(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("qudit state must be a vector")
    n_qubits_of(len(psi))
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValidationError("qudit state is not normalized", kind="not_normalized")
    return psi


def coincidence_probability(rho, sigma) -> float:
    """Accepts density matrices or pure-state vectors for either input."""
    rho, sigma = _as_density(rho), _as_density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return 0.5 * (1.0 - mixed_overlap(rho, sigma))


def sample_coincidences(rho, sigma, shots, rng) -> TestStats:
    """Coincidences are reported as test failures."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    coincidences = int(rng.binomial(shots, coincidence_probability(rho, sigma)))
    return TestStats(int(shots), int(shots) - coincidences)


def photon_evolution(s, psi) -> np.ndarray:
    s = require_unitary(s, name="scattering matrix")
    psi = as_qudit(psi)
    if len(s) != len(psi):
        raise DimensionError(f"scattering matrix of dim {len(s)} vs state of dim {len(psi)}")
    out = s @ psi
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > 1e-10:
        out = out / norm
    return out


def coincidence_objective(s, spec, theta, mode: EvalMode = EXACT, rng=None) -> float:
    """``1 - 2 * coincidence rate`` between ``S|psi(theta)>`` and ``|psi(theta)>``."""
    psi = trial_state(spec, theta)
    evolved = photon_evolution(s, psi)
    if mode.exact:
        return 1.0 - 2.0 * coincidence_probability(evolved, psi)
    return sample_coincidences(evolved, psi, mode.shots, rng).z_hat
