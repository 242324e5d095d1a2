"""SWAP-test statistics: the full ancilla circuit, the ancilla-free
destructive variant, and the mixed-state version.

Register layout for the destructive test on two n-qubit inputs: qubits
``0..n-1`` hold ``a`` and ``n..2n-1`` hold ``b``. Each pair ``(i, n+i)`` gets
CNOT(a_i -> b_i) followed by H on a_i; all 2n qubits are measured and the
shot passes when the bitwise AND of the two halves has even parity.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError
from .simulator import (
    CNOT,
    H,
    Circuit,
    Gate,
    Mixture,
    _apply_matrix,
    as_state,
    n_qubits_of,
    pure_overlap,
    run_circuit,
    sample_basis,
)

_PAIR_GATE = np.kron(H, np.eye(2)) @ CNOT


@dataclass(frozen=True)
class TestStats:
    """Pass/fail counts of a SWAP-type test and the derived estimates."""

    shots: int
    passes: int

    __test__ = False  # not a pytest class

    @property
    def fails(self) -> int:
        return self.shots - self.passes

    @property
    def p0_hat(self) -> float:
        return self.passes / self.shots

    @property
    def p1_hat(self) -> float:
        return self.fails / self.shots

    @property
    def z_hat(self) -> float:
        """Estimate of ``P(0) - P(1)``, i.e. of the overlap."""
        return self.p0_hat - self.p1_hat

    @property
    def p0_stderr(self) -> float:
        p = self.p0_hat
        return float(np.sqrt(p * (1 - p) / self.shots))

    @property
    def z_stderr(self) -> float:
        return 2.0 * self.p0_stderr

    def merged(self, other: "TestStats") -> "TestStats":
        return TestStats(self.shots + other.shots, self.passes + other.passes)

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "passes": self.passes,
            "fails": self.fails,
            "p0_hat": self.p0_hat,
            "p1_hat": self.p1_hat,
            "z_hat": self.z_hat,
            "p0_stderr": self.p0_stderr,
            "z_stderr": self.z_stderr,
        }


def _pair(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"inputs have different dimensions: {a.shape} vs {b.shape}")
    return a, b


def _check_shots(shots):
    if int(shots) < 1:
        raise ValueError("shots must be >= 1")
    return int(shots)


def exact_pass_probability(a, b) -> float:
    """``(1 + |<a|b>|^2) / 2``."""
    a, b = _pair(a, b)
    return 0.5 * (1.0 + pure_overlap(a, b))


# ---------------------------------------------------------------------------
# full test with an ancilla


def full_test_circuit(n) -> Circuit:
    gates = [Gate("H", (0,))]
    gates += [Gate("CSWAP", (0, 1 + i, 1 + n + i)) for i in range(n)]
    gates.append(Gate("H", (0,)))
    return Circuit(2 * n + 1, gates)


def _full_test_output(a, b):
    a, b = _pair(a, b)
    n = n_qubits_of(len(a))
    init = np.kron([1.0, 0.0], np.kron(a, b))
    return run_circuit(full_test_circuit(n), init)


def full_test_distribution(a, b) -> np.ndarray:
    """Exact ``[P(0), P(1)]`` of the ancilla, from the simulated circuit."""
    out = _full_test_output(a, b)
    half = len(out) // 2
    p0 = float(np.sum(np.abs(out[:half]) ** 2))
    return np.array([p0, 1.0 - p0])


def full_swap_test(a, b, shots, rng) -> TestStats:
    shots = _check_shots(shots)
    counts = sample_basis(_full_test_output(a, b), shots, rng)
    passes = sum(c for bits, c in counts.items() if bits[0] == "0")
    return TestStats(shots, passes)


# ---------------------------------------------------------------------------
# destructive test


@lru_cache(maxsize=None)
def pass_mask(n) -> np.ndarray:
    """Boolean mask over the 2n-qubit outcomes: even parity of AND."""
    idx = np.arange(4 ** n)
    anded = (idx >> n) & (idx & ((1 << n) - 1))
    parity = np.zeros_like(anded)
    while anded.any():
        parity ^= anded & 1
        anded >>= 1
    mask = parity == 0
    mask.setflags(write=False)
    return mask


def destructive_output_state(a, b) -> np.ndarray:
    a, b = _pair(a, b)
    n = n_qubits_of(len(a))
    state = np.kron(a, b)
    for i in range(n):
        state = _apply_matrix(state, _PAIR_GATE, [i, n + i], 2 * n)
    return state


def destructive_test_distribution(a, b) -> np.ndarray:
    """Exact probabilities of all 2n-bit measurement outcomes."""
    out = destructive_output_state(a, b)
    p = np.abs(out) ** 2
    return p / p.sum()


def destructive_pass_probability(a, b) -> float:
    a, _ = _pair(a, b)
    p = destructive_test_distribution(a, b)
    return float(p[pass_mask(n_qubits_of(len(a)))].sum())


def cz_observable_expectation(a, b) -> float:
    """``<CZ^{(x)n}>`` on the destructive-test output, pairs interleaved
    as ``a_1 b_1 a_2 b_2 ...``."""
    out = destructive_output_state(a, b)
    n = n_qubits_of(len(out)) // 2
    order = [q for i in range(n) for q in (i, n + i)]
    psi = np.moveaxis(out.reshape((2,) * (2 * n)), order, range(2 * n)).reshape(-1)
    cz_diag = np.ones(1)
    for _ in range(n):
        cz_diag = np.kron(cz_diag, [1, 1, 1, -1])
    return float(np.real(np.vdot(psi, cz_diag * psi)))


def _sample_destructive(a, b, shots, rng) -> int:
    a, _ = _pair(a, b)
    n = n_qubits_of(len(a))
    counts = rng.multinomial(shots, destructive_test_distribution(a, b))
    return int(counts[pass_mask(n)].sum())


def destructive_swap_test(a, b, shots, rng) -> TestStats:
    shots = _check_shots(shots)
    return TestStats(shots, _sample_destructive(a, b, shots, rng))


def destructive_shot_outcomes(a, b, shots, rng) -> np.ndarray:
    """Per-shot pass flags, in shot order."""
    a, _ = _pair(a, b)
    p = destructive_test_distribution(a, b)
    outcomes = rng.choice(len(p), size=_check_shots(shots), p=p)
    return pass_mask(n_qubits_of(len(a)))[outcomes]


def mixed_pass_probability(rho, sigma_state) -> float:
    rho = np.asarray(rho, dtype=complex)
    s = np.asarray(sigma_state, dtype=complex)
    if rho.shape != (len(s), len(s)):
        raise DimensionError(f"rho {rho.shape} does not match a state of dim {len(s)}")
    return 0.5 * (1.0 + float(np.clip(np.real(np.vdot(s, rho @ s)), 0.0, 1.0)))


def mixed_swap_test(rho, sigma_state, shots, rng, mixture: Mixture | None = None) -> TestStats:
    """Each shot draws a spectral component of ``rho`` and runs one
    destructive-test shot against ``sigma_state``.

    Pass a precomputed ``mixture`` to skip re-decomposing ``rho``.
    """
    shots = _check_shots(shots)
    if mixture is None:
        mixture = Mixture(rho)
    sigma_state = as_state(sigma_state)
    if len(mixture.states[0]) != len(sigma_state):
        raise DimensionError("rho and sigma have different dimensions")
    passes = 0
    for state, count in zip(mixture.states, mixture.component_counts(shots, rng)):
        if count:
            passes += _sample_destructive(state, sigma_state, int(count), rng)
    return TestStats(shots, passes)
