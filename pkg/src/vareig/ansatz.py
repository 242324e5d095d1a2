"""Hardware-efficient trial-state circuits.

Each layer is a row of RX rotations, a CNOT entangler (linear chain or
ring), then a row of RY rotations. Parameters are laid out layer by layer:
``[rx_0 .. rx_{n-1}, ry_0 .. ry_{n-1}]`` for layer 0, then layer 1, ...
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .simulator import Circuit, Gate, run_circuit, zero_state

ENTANGLERS = ("linear", "ring")
# Rotation rows on up to this many qubits are applied as one dense Kronecker product.
_KRON_MAX_QUBITS = 6


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    n_layers: int | None = None
    entangler: str = "linear"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("ansatz needs at least one qubit")
        if self.n_layers is None:
            object.__setattr__(self, "n_layers", self.n_qubits + 1)
        if self.n_layers < 1:
            raise ValidationError("ansatz needs at least one layer")
        if self.entangler not in ENTANGLERS:
            raise ValidationError(f"entangler must be one of {ENTANGLERS}, got {self.entangler!r}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits


def param_count(spec: AnsatzSpec) -> int:
    return 2 * spec.n_qubits * spec.n_layers


def entangler_pairs(spec: AnsatzSpec) -> list[tuple[int, int]]:
    n = spec.n_qubits
    pairs = [(q, q + 1) for q in range(n - 1)]
    if spec.entangler == "ring" and n > 2:
        pairs.append((n - 1, 0))
    return pairs


def _check_theta(spec, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (param_count(spec),):
        raise ValidationError(
            f"expected {param_count(spec)} parameters, got shape {theta.shape}", kind="dimension"
        )
    return theta


def build_circuit(spec: AnsatzSpec, theta) -> Circuit:
    theta = _check_theta(spec, theta)
    n = spec.n_qubits
    gates = []
    for layer, angles in enumerate(theta.reshape(spec.n_layers, 2, n)):
        gates += [Gate("RX", (q,), angle=angles[0, q]) for q in range(n)]
        gates += [Gate("CNOT", pair) for pair in entangler_pairs(spec)]
        gates += [Gate("RY", (q,), angle=angles[1, q]) for q in range(n)]
    return Circuit(n, gates)


def random_init(spec: AnsatzSpec, rng) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=param_count(spec))


def _cnot_permutation(n, control, target):
    idx = np.arange(2 ** n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


class AnsatzEvaluator:
    """Fast ``|psi(theta)>`` for a fixed spec.

    Avoids building Gate objects; equivalent to
    ``run_circuit(build_circuit(spec, theta), |0..0>)``.
    """

    def __init__(self, spec: AnsatzSpec):
        self.spec = spec
        n = spec.n_qubits
        perm = np.arange(2 ** n)
        for c, t in entangler_pairs(spec):
            perm = perm[_cnot_permutation(n, c, t)]
        self._entangle = perm

    def _rotate_row(self, psi, cos, sin, kind):
        n = self.spec.n_qubits
        off = -1j * sin if kind == "x" else sin
        lower = off if kind == "x" else -sin
        if n <= _KRON_MAX_QUBITS:
            mats = np.empty((n, 2, 2), dtype=complex)
            mats[:, 0, 0] = mats[:, 1, 1] = cos
            mats[:, 0, 1] = lower
            mats[:, 1, 0] = off
            row = mats[0]
            for m in mats[1:]:
                d = 2 * len(row)
                row = (row[:, None, :, None] * m[None, :, None, :]).reshape(d, d)
            return row @ psi
        for q in range(n):
            v = psi.reshape(2 ** q, 2, -1)
            a, b = v[:, 0, :], v[:, 1, :]
            psi = np.stack(
                (cos[q] * a + lower[q] * b, off[q] * a + cos[q] * b), axis=1
            ).reshape(-1)
        return psi

    def state(self, theta) -> np.ndarray:
        spec = self.spec
        theta = _check_theta(spec, theta)
        half = theta.reshape(spec.n_layers, 2, spec.n_qubits) / 2
        cos, sin = np.cos(half), np.sin(half)
        psi = np.zeros(spec.dim, dtype=complex)
        psi[0] = 1.0
        for layer in range(spec.n_layers):
            psi = self._rotate_row(psi, cos[layer, 0], sin[layer, 0], "x")
            psi = psi[self._entangle]
            psi = self._rotate_row(psi, cos[layer, 1], sin[layer, 1], "y")
        return psi


def ansatz_state(spec: AnsatzSpec, theta) -> np.ndarray:
    return AnsatzEvaluator(spec).state(theta)


def ansatz_state_reference(spec: AnsatzSpec, theta) -> np.ndarray:
    return run_circuit(build_circuit(spec, theta), zero_state(spec.n_qubits))
