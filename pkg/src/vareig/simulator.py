"""Statevector and density-matrix simulation.

States are plain complex numpy arrays. Qubit 0 is the most significant bit
of the basis index, so ``|q0 q1 ... q_{n-1}>`` maps to index
``q0*2**(n-1) + ... + q_{n-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .numerics import (
    as_matrix,
    is_unitary,
    oracle_eigendecompose,
    require_density,
)

MAX_QUBITS = 24
MAX_DENSITY_QUBITS = 8

_SQ2 = 1.0 / np.sqrt(2.0)
H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def rx(angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _controlled(target_matrix, n_controls=1):
    dim = 2 ** n_controls * len(target_matrix)
    m = np.eye(dim, dtype=complex)
    k = len(target_matrix)
    m[-k:, -k:] = target_matrix
    return m


SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = _controlled(X)
CZ = _controlled(Z)
TOFFOLI = _controlled(X, 2)
CSWAP = _controlled(SWAP)

_ARITY = {"H": 1, "X": 1, "Z": 1, "RX": 1, "RY": 1, "CNOT": 2, "CZ": 2, "TOFFOLI": 3, "CSWAP": 3}
_FIXED = {"H": H, "X": X, "Z": Z, "CNOT": CNOT, "CZ": CZ, "TOFFOLI": TOFFOLI, "CSWAP": CSWAP}


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``kind`` is one of H, X, Z, RX, RY, CNOT, CZ, TOFFOLI, CSWAP or BLOCK.
    For controlled gates the controls come first in ``targets``. BLOCK
    carries an explicit unitary in ``matrix``.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError(f"gate {kind} addresses a qubit twice: {self.targets}")
        if kind == "BLOCK":
            if self.matrix is None:
                raise ValidationError("BLOCK gate needs a matrix")
            m = as_matrix(self.matrix)
            if len(m) != 2 ** len(self.targets):
                raise DimensionError(
                    f"block of dim {len(m)} cannot act on {len(self.targets)} qubits"
                )
            if not is_unitary(m, 1e-8):
                raise ValidationError("BLOCK matrix is not unitary", kind="not_unitary")
            object.__setattr__(self, "matrix", m)
        elif kind in _ARITY:
            if len(self.targets) != _ARITY[kind]:
                raise ValidationError(f"{kind} takes {_ARITY[kind]} qubits, got {len(self.targets)}")
        else:
            raise ValidationError(f"unknown gate kind {self.kind!r}")

    def unitary(self) -> np.ndarray:
        if self.kind == "RX":
            return rx(self.angle)
        if self.kind == "RY":
            return ry(self.angle)
        if self.kind == "BLOCK":
            return self.matrix
        return _FIXED[self.kind]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(t < 0 or t >= self.n_qubits for t in g.targets):
                raise ValidationError(
                    f"gate {g.kind} on {g.targets} outside a {self.n_qubits}-qubit circuit"
                )


def n_qubits_of(dim) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def as_state(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1:
        raise DimensionError(f"state must be a vector, got shape {s.shape}")
    n_qubits_of(len(s))
    if not np.all(np.isfinite(s)):
        raise ValidationError("state has non-finite amplitudes", kind="non_finite")
    if abs(np.linalg.norm(s) - 1.0) > 1e-10:
        raise ValidationError(f"state norm {np.linalg.norm(s):.12f} != 1", kind="not_normalized")
    return s


def basis_state(bits: str) -> np.ndarray:
    s = np.zeros(2 ** len(bits), dtype=complex)
    s[int(bits, 2) if bits else 0] = 1.0
    return s


def zero_state(n_qubits) -> np.ndarray:
    return basis_state("0" * n_qubits)


def _apply_matrix(state, u, qubits, n):
    k = len(qubits)
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, qubits, range(k))
    shape = psi.shape
    psi = (u @ psi.reshape(2 ** k, -1)).reshape(shape)
    return np.moveaxis(psi, range(k), qubits).reshape(-1)


def apply_unitary_block(state, u, qubits) -> np.ndarray:
    """Apply ``u`` on ``qubits`` (first listed = most significant)."""
    state = np.asarray(state, dtype=complex)
    n = n_qubits_of(len(state))
    u = as_matrix(u)
    qubits = [int(q) for q in qubits]
    if len(u) != 2 ** len(qubits):
        raise DimensionError(f"unitary of dim {len(u)} does not fit {len(qubits)} qubits")
    if len(set(qubits)) != len(qubits) or any(q < 0 or q >= n for q in qubits):
        raise ValidationError(f"bad qubit list {qubits} for a {n}-qubit state")
    if not is_unitary(u, 1e-8):
        raise ValidationError("block is not unitary", kind="not_unitary")
    return _apply_matrix(state, u, qubits, n)


def run_circuit(circuit: Circuit, init) -> np.ndarray:
    state = np.asarray(init, dtype=complex)
    n = n_qubits_of(len(state))
    if n != circuit.n_qubits:
        raise ValidationError(
            f"circuit has {circuit.n_qubits} qubits, initial state has {n}", kind="dimension"
        )
    if n > MAX_QUBITS:
        raise ValidationError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    for g in circuit.gates:
        state = _apply_matrix(state, g.unitary(), list(g.targets), n)
    return state


def probabilities(state) -> np.ndarray:
    p = np.abs(np.asarray(state)) ** 2
    return p / p.sum()


def sample_basis(state, shots, rng) -> dict[str, int]:
    """Computational-basis measurement counts keyed by bitstring (qubit 0 first)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    state = np.asarray(state, dtype=complex)
    n = n_qubits_of(len(state))
    counts = rng.multinomial(shots, probabilities(state))
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}


def _check_same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def pure_overlap(a, b) -> float:
    """``|<a|b>|^2``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_same_dim(a, b)
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def mixed_overlap(rho, sigma) -> float:
    """``tr(rho sigma)``, clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    _check_same_dim(rho, sigma)
    value = np.sum(rho * sigma.T)
    if abs(value.imag) > 1e-10:
        raise ValidationError(f"tr(rho sigma) has imaginary part {value.imag:.3e}")
    return float(np.clip(value.real, 0.0, 1.0))


def projector(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return np.outer(state, state.conj())


def as_density(rho) -> np.ndarray:
    rho = require_density(rho)
    n = n_qubits_of(len(rho))
    if n > MAX_DENSITY_QUBITS:
        raise ValidationError(f"density matrices are limited to {MAX_DENSITY_QUBITS} qubits")
    return rho


class Mixture:
    """Spectral ensemble of a density matrix, decomposed once and sampled many times."""

    def __init__(self, rho):
        rho = as_density(rho)
        pairs = oracle_eigendecompose(rho)
        weights = np.clip([p.eigenvalue.real for p in pairs], 0.0, None)
        self.weights = weights / weights.sum()
        self.states = [p.eigenvector for p in pairs]

    def draw_indices(self, size, rng) -> np.ndarray:
        return rng.choice(len(self.weights), size=size, p=self.weights)

    def component_counts(self, shots, rng) -> np.ndarray:
        return rng.multinomial(shots, self.weights)

    def draw(self, rng) -> np.ndarray:
        return self.states[int(self.draw_indices(None, rng))]


def draw_pure_from_mixture(rho, rng) -> np.ndarray:
    """One pure state from the spectral ensemble of ``rho``."""
    return Mixture(rho).draw(rng)
