import itertools
from functools import reduce

import numpy as np
import pytest
from scipy import stats

from conftest import five_sigma
from vareig.errors import DimensionError, ValidationError
from vareig.numerics import random_state, random_unitary
from vareig.simulator import (
    CSWAP,
    SWAP,
    Circuit,
    Gate,
    H,
    Mixture,
    X,
    Z,
    apply_unitary_block,
    basis_state,
    draw_pure_from_mixture,
    mixed_overlap,
    projector,
    pure_overlap,
    run_circuit,
    sample_basis,
    zero_state,
)

I2 = np.eye(2)


def kron(*ms):
    return reduce(np.kron, ms)


class TestRunCircuit:
    def test_empty_circuit(self):
        assert np.allclose(run_circuit(Circuit(2), zero_state(2)), basis_state("00"))

    def test_hadamard(self):
        out = run_circuit(Circuit(1, [Gate("H", (0,))]), zero_state(1))
        assert np.allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    @pytest.mark.parametrize("x,y", list(itertools.product("01", repeat=2)))
    def test_three_cnot_xor_swap(self, x, y):
        # CNOT(2,1), CNOT(1,2), CNOT(2,1) in 1-based (control, target) notation
        c = Circuit(2, [Gate("CNOT", (1, 0)), Gate("CNOT", (0, 1)), Gate("CNOT", (1, 0))])
        assert np.allclose(run_circuit(c, basis_state(x + y)), basis_state(y + x))

    def test_qubit_zero_is_most_significant(self):
        out = run_circuit(Circuit(3, [Gate("X", (0,))]), zero_state(3))
        assert np.allclose(out, basis_state("100"))
        assert out[4] == 1

    def test_mismatch(self):
        with pytest.raises(ValidationError):
            run_circuit(Circuit(2), zero_state(3))

    def test_bad_gates(self):
        with pytest.raises(ValidationError):
            Gate("CNOT", (0,))
        with pytest.raises(ValidationError):
            Gate("CNOT", (1, 1))
        with pytest.raises(ValidationError):
            Circuit(2, [Gate("H", (2,))])
        with pytest.raises(ValidationError):
            Gate("BLOCK", (0,), matrix=np.array([[1, 1], [0, 1]]))

    def test_norm_preserved_every_gate(self, rng):
        gates = [
            Gate("H", (1,)), Gate("X", (2,)), Gate("Z", (0,)), Gate("RX", (3,), angle=0.7),
            Gate("RY", (0,), angle=-1.3), Gate("CNOT", (2, 0)), Gate("CZ", (1, 3)),
            Gate("TOFFOLI", (0, 3, 1)), Gate("CSWAP", (2, 1, 3)),
            Gate("BLOCK", (3, 1), matrix=random_unitary(4, rng)),
        ]
        for g in gates:
            s = random_state(16, rng)
            assert abs(np.linalg.norm(run_circuit(Circuit(4, [g]), s)) - 1) <= 1e-10

    def test_x_equals_hzh(self):
        assert np.allclose(H @ Z @ H, X)

    def test_cswap_control(self):
        for bits in itertools.product("01", repeat=2):
            b = "".join(bits)
            c = Circuit(3, [Gate("CSWAP", (0, 1, 2))])
            assert np.allclose(run_circuit(c, basis_state("0" + b)), basis_state("0" + b))
            assert np.allclose(run_circuit(c, basis_state("1" + b)), basis_state("1" + b[::-1]))

    def test_three_cnots_equal_cswap_with_control_set(self):
        three = Circuit(2, [Gate("CNOT", (1, 0)), Gate("CNOT", (0, 1)), Gate("CNOT", (1, 0))])
        cs = Circuit(3, [Gate("CSWAP", (0, 1, 2))])
        for bits in itertools.product("01", repeat=2):
            b = "".join(bits)
            via_cswap = run_circuit(cs, basis_state("1" + b))[4:]
            assert np.allclose(run_circuit(three, basis_state(b)), via_cswap)
        assert np.allclose(CSWAP[4:, 4:], SWAP)


class TestUnitaryBlock:
    def test_identity(self, rng):
        s = random_state(8, rng)
        assert np.allclose(apply_unitary_block(s, np.eye(4), [0, 2]), s)

    def test_x_on_zero(self):
        assert np.allclose(apply_unitary_block(zero_state(1), X, [0]), basis_state("1"))

    def test_against_kronecker(self, rng):
        u = random_unitary(4, rng)
        s = random_state(8, rng)
        assert np.allclose(apply_unitary_block(s, u, [0, 1]), kron(u, I2) @ s, atol=1e-12)
        assert np.allclose(apply_unitary_block(s, u, [1, 2]), kron(I2, u) @ s, atol=1e-12)
        # non-adjacent, reversed order: conjugate by the SWAP of qubits 0 and 2
        p = np.zeros((8, 8))
        for i in range(8):
            b = format(i, "03b")
            p[int(b[::-1], 2), i] = 1
        ref = p @ kron(u, I2) @ p @ s  # u on (2, 1)
        assert np.allclose(apply_unitary_block(s, u, [2, 1]), ref, atol=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            apply_unitary_block(zero_state(3), random_unitary(4, rng), [0])


class TestSampling:
    def test_basis_state(self, rng):
        assert sample_basis(basis_state("01"), 1000, rng) == {"01": 1000}

    def test_plus_state(self, rng):
        counts = sample_basis(np.array([1, 1]) / np.sqrt(2), 10**6, rng)
        assert sum(counts.values()) == 10**6
        assert abs(counts["0"] - 500000) <= 5 * 500

    def test_deterministic(self, rng):
        s = random_state(8, rng)
        a = sample_basis(s, 5000, np.random.default_rng(9))
        b = sample_basis(s, 5000, np.random.default_rng(9))
        assert a == b

    def test_chi_square(self, rng):
        s = random_state(8, rng)
        shots = 10**5
        counts = sample_basis(s, shots, np.random.default_rng(4))
        observed = np.array([counts.get(format(i, "03b"), 0) for i in range(8)])
        expected = np.abs(s) ** 2 * shots
        assert stats.chisquare(observed, expected).pvalue > 1e-3


class TestOverlaps:
    def test_pure_basic(self, rng):
        a = random_state(4, rng)
        assert pure_overlap(a, a) == pytest.approx(1)
        assert pure_overlap(basis_state("0"), basis_state("1")) == 0

    def test_pure_pi_over_8(self):
        b = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
        assert pure_overlap(basis_state("0"), b) == pytest.approx(0.8535533905932737, abs=1e-12)

    def test_mixed_basic(self, rng):
        p = projector(random_state(2, rng))
        assert mixed_overlap(p, p) == pytest.approx(1)
        assert mixed_overlap(np.eye(2) / 2, p) == pytest.approx(0.5)

    def test_mixed_elementwise(self, rng):
        w = random_unitary(4, rng)
        rho = (w * np.array([0.4, 0.3, 0.2, 0.1])) @ w.conj().T
        sigma = projector(random_state(4, rng))
        direct = sum(rho[i, j] * sigma[j, i] for i in range(4) for j in range(4))
        assert abs(mixed_overlap(rho, sigma) - direct.real) <= 1e-12

    def test_mixed_reduces_to_pure(self, rng):
        for _ in range(10):
            a, b = random_state(8, rng), random_state(8, rng)
            assert abs(mixed_overlap(projector(a), projector(b)) - pure_overlap(a, b)) <= 1e-12

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            pure_overlap(zero_state(1), zero_state(2))
        with pytest.raises(DimensionError):
            mixed_overlap(np.eye(2) / 2, np.eye(4) / 4)


class TestMixture:
    def test_pure_always_same(self, rng):
        psi = random_state(4, rng)
        for _ in range(20):
            assert pure_overlap(draw_pure_from_mixture(projector(psi), rng), psi) == pytest.approx(1)

    def test_frequencies(self, rng):
        mix = Mixture(np.diag([0.7, 0.3]))
        idx = mix.draw_indices(10**5, rng)
        zero_freq = np.mean([abs(mix.states[i][0]) ** 2 > 0.5 for i in idx])
        assert abs(zero_freq - 0.7) <= five_sigma(0.7, 10**5)

    def test_ensemble_average_converges(self, rng):
        w = random_unitary(4, rng)
        rho = (w * np.array([0.5, 0.3, 0.15, 0.05])) @ w.conj().T
        mix = Mixture(rho)
        idx = mix.draw_indices(10**5, rng)
        freq = np.bincount(idx, minlength=4) / len(idx)
        avg = sum(f * projector(s) for f, s in zip(freq, mix.states))
        assert np.linalg.norm(avg - rho) <= 0.02

    def test_invalid(self, rng):
        with pytest.raises(ValidationError):
            draw_pure_from_mixture(np.diag([0.7, 0.7]), rng)
        with pytest.raises(ValidationError):
            draw_pure_from_mixture(np.diag([1.2, -0.2]), rng)
