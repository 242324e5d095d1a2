import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from vareig.errors import DimensionError, ValidationError
from vareig.numerics import (
    MatrixClass,
    classify_matrix,
    eigenspace_fidelity,
    hermitian_eigh,
    hermitize,
    is_hermitian,
    is_unitary,
    oracle_eigendecompose,
    random_hermitian,
    random_normal,
    random_state,
    random_unitary,
    unitary_from_hermitian,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


class TestClassify:
    def test_identity_is_unitary(self):
        assert classify_matrix(np.eye(2), 1e-10) is MatrixClass.UNITARY

    def test_diagonal_density(self):
        assert classify_matrix(np.diag([0.7, 0.3]), 1e-10) is MatrixClass.DENSITY

    def test_nilpotent_is_general(self):
        assert classify_matrix([[0, 1], [0, 0]], 1e-10) is MatrixClass.GENERAL

    def test_hermitian_and_normal(self, rng):
        assert classify_matrix(random_hermitian(4, rng)) is MatrixClass.HERMITIAN
        assert classify_matrix(random_normal(4, rng)) is MatrixClass.NORMAL

    def test_non_square(self):
        with pytest.raises(DimensionError):
            classify_matrix(np.zeros((2, 3)))

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            classify_matrix(np.eye(2), 0.0)


class TestJacobi:
    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16])
    def test_matches_lapack(self, rng, n):
        h = random_hermitian(n, rng)
        evals, vecs = hermitian_eigh(h)
        assert np.allclose(evals, np.linalg.eigvalsh(h), atol=1e-11)
        assert np.allclose(vecs.conj().T @ vecs, np.eye(n), atol=1e-12)
        assert np.allclose(h @ vecs, vecs * evals, atol=1e-10)

    def test_degenerate_spectrum(self, rng):
        w = random_unitary(6, rng)
        h = (w * np.array([2, 2, 2, -1, -1, 0.5])) @ w.conj().T
        evals, vecs = hermitian_eigh(h)
        assert np.allclose(evals, [-1, -1, 0.5, 2, 2, 2], atol=1e-12)
        assert np.allclose(vecs.conj().T @ vecs, np.eye(6), atol=1e-12)


class TestOracle:
    def test_diagonal(self):
        pairs = oracle_eigendecompose(np.diag([1.0, 2.0]))
        assert [p.eigenvalue for p in pairs] == pytest.approx([2, 1])
        assert abs(pairs[0].eigenvector[1]) == pytest.approx(1)
        assert abs(pairs[1].eigenvector[0]) == pytest.approx(1)

    def test_pauli_x(self):
        pairs = oracle_eigendecompose(X)
        assert [p.eigenvalue for p in pairs] == pytest.approx([1, -1])
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        assert abs(np.vdot(plus, pairs[0].eigenvector)) == pytest.approx(1)
        assert abs(np.vdot(minus, pairs[1].eigenvector)) == pytest.approx(1)

    def test_random_unitary_8(self, rng):
        u = random_unitary(8, rng)
        pairs = oracle_eigendecompose(u)
        for p in pairs:
            assert np.linalg.norm(u @ p.eigenvector - p.eigenvalue * p.eigenvector) <= 1e-8
            assert abs(abs(p.eigenvalue) - 1) <= 1e-8

    def test_sorted_descending(self, rng):
        pairs = oracle_eigendecompose(random_normal(6, rng))
        keys = [(p.eigenvalue.real, p.eigenvalue.imag) for p in pairs]
        assert keys == sorted(keys, reverse=True)

    def test_eigenvalues_agree_with_lapack(self, rng):
        m = random_normal(5, rng)
        ours = sorted(np.round([p.eigenvalue for p in oracle_eigendecompose(m)], 9), key=lambda z: (z.real, z.imag))
        ref = sorted(np.round(np.linalg.eigvals(m), 9), key=lambda z: (z.real, z.imag))
        assert np.allclose(ours, ref, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_reconstruction_and_orthonormality(self, seed):
        r = np.random.default_rng(seed)
        for m in (random_unitary(6, r), random_normal(6, r), random_hermitian(6, r)):
            pairs = oracle_eigendecompose(m)
            v = np.column_stack([p.eigenvector for p in pairs])
            lam = np.array([p.eigenvalue for p in pairs])
            assert np.linalg.norm((v * lam) @ v.conj().T - m) <= 1e-7
            assert np.linalg.norm(v.conj().T @ v - np.eye(6)) <= 1e-8

    def test_degenerate_normal(self, rng):
        # equal real parts, and a repeated eigenvalue
        m = random_normal(4, rng, eigenvalues=[1 + 1j, 1 - 1j, 1 - 1j, -0.5])
        for p in oracle_eigendecompose(m):
            assert np.linalg.norm(m @ p.eigenvector - p.eigenvalue * p.eigenvector) <= 1e-8

    def test_qft_high_degeneracy(self):
        f = np.fft.fft(np.eye(8)) / np.sqrt(8)
        pairs = oracle_eigendecompose(f)
        v = np.column_stack([p.eigenvector for p in pairs])
        assert np.linalg.norm(v.conj().T @ v - np.eye(8)) <= 1e-8

    def test_rejects_non_normal(self):
        with pytest.raises(ValidationError):
            oracle_eigendecompose([[0, 1], [0, 0]])


class TestHermitize:
    def test_hermitian_doubles(self, rng):
        h = random_hermitian(3, rng)
        assert np.allclose(hermitize(h), 2 * h)

    def test_anti_hermitian_cancels(self, rng):
        h = random_hermitian(3, rng)
        assert np.allclose(hermitize(1j * h), 0)

    def test_shares_eigenvectors_with_normal(self, rng):
        a = random_normal(4, rng)
        h = hermitize(a)
        for p in oracle_eigendecompose(a):
            assert eigenspace_fidelity(p.eigenvector, h, 2 * p.eigenvalue.real, tol=1e-8) >= 1 - 1e-8

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_always_hermitian(self, n, seed):
        r = np.random.default_rng(seed)
        a = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
        assert is_hermitian(hermitize(a), 1e-12)


class TestExponential:
    def test_zero(self):
        assert np.allclose(unitary_from_hermitian(np.zeros((2, 2))), np.eye(2))

    def test_pi_z(self):
        assert np.allclose(unitary_from_hermitian(np.pi * Z), -np.eye(2), atol=1e-12)

    def test_matches_oracle_construction(self, rng):
        h = random_hermitian(4, rng)
        pairs = oracle_eigendecompose(h)
        v = np.column_stack([p.eigenvector for p in pairs])
        mu = np.array([p.eigenvalue.real for p in pairs])
        ref = (v * np.exp(1j * mu)) @ v.conj().T
        assert np.allclose(unitary_from_hermitian(h), ref, atol=1e-8)

    def test_matches_pade(self, rng):
        h = random_hermitian(6, rng)
        assert np.allclose(unitary_from_hermitian(h), scipy.linalg.expm(1j * h), atol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_unitary_with_unit_determinant(self, n, seed):
        u = unitary_from_hermitian(random_hermitian(n, np.random.default_rng(seed)))
        assert is_unitary(u, 1e-10)
        assert abs(abs(np.linalg.det(u)) - 1) <= 1e-8

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            unitary_from_hermitian([[0, 1], [0, 0]])


class TestEigenspaceFidelity:
    def test_own_eigenvector(self, rng):
        u = random_unitary(4, rng)
        p = oracle_eigendecompose(u)[2]
        assert eigenspace_fidelity(p.eigenvector, u, p.eigenvalue) == pytest.approx(1.0)

    def test_orthogonal(self):
        m = np.diag([1.0, 2.0, 3.0])
        assert eigenspace_fidelity(np.array([1, 0, 0]), m, 3.0) == pytest.approx(0.0)

    def test_half(self):
        m = np.diag([1.0, 2.0, 3.0])
        v = np.array([0, 1, 1]) / np.sqrt(2)
        assert eigenspace_fidelity(v, m, 2.0) == pytest.approx(0.5)

    def test_degenerate_space(self):
        m = np.diag([1.0, 1.0, 3.0])
        v = np.array([1, 1j, 0]) / np.sqrt(2)
        assert eigenspace_fidelity(v, m, 1.0) == pytest.approx(1.0)

    def test_no_matching_eigenvalue(self):
        assert eigenspace_fidelity(np.array([1, 0]), np.eye(2), 5.0) == 0.0

    @pytest.mark.parametrize("phi", [0.3, np.pi / 3, 2.5])
    def test_phase_invariant(self, rng, phi):
        m = random_normal(4, rng)
        v = random_state(4, rng)
        lam = oracle_eigendecompose(m)[1].eigenvalue
        f0 = eigenspace_fidelity(v, m, lam)
        assert abs(eigenspace_fidelity(np.exp(1j * phi) * v, m, lam) - f0) <= 1e-12
