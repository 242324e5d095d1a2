"""Dense complex linear algebra and the classical eigendecomposition oracle.

All eigen-data used to *verify* variational results comes from
:func:`oracle_eigendecompose`, a cyclic complex Jacobi solver applied to a
random real combination of the Hermitian and anti-Hermitian parts of a
normal matrix.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError

DEFAULT_TOL = 1e-8

# Fixed seed for the (alpha, beta) draws inside the oracle; outputs must not
# depend on any caller-side generator.
_ORACLE_SEED = 20230817


class MatrixClass(str, enum.Enum):
    UNITARY = "unitary"
    DENSITY = "density"
    HERMITIAN = "hermitian"
    NORMAL = "normal"
    GENERAL = "general"


@dataclass(frozen=True)
class SpectralPair:
    eigenvalue: complex
    eigenvector: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite square complex matrix or raise."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries", kind="non_finite")
    return m


def _dagger(m):
    return m.conj().T


def unitarity_residual(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.norm(_dagger(m) @ m - np.eye(len(m))))


def hermiticity_residual(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.norm(m - _dagger(m)))


def normality_residual(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.norm(m @ _dagger(m) - _dagger(m) @ m))


def is_unitary(m, tol=DEFAULT_TOL) -> bool:
    return unitarity_residual(m) <= tol


def is_hermitian(m, tol=DEFAULT_TOL) -> bool:
    return hermiticity_residual(m) <= tol


def is_normal(m, tol=DEFAULT_TOL) -> bool:
    return normality_residual(m) <= tol


def is_density(m, tol=DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m) - 1.0) > tol:
        return False
    evals = hermitian_eigh(0.5 * (m + _dagger(m)))[0]
    return bool(evals.min() >= -max(tol, 1e-10))


def classify_matrix(m, tol=DEFAULT_TOL) -> MatrixClass:
    """Return the strictest class ``m`` belongs to at Frobenius tolerance ``tol``.

    Classes are cumulative: unitary and density matrices are also normal,
    density matrices are also Hermitian.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    if is_unitary(m, tol):
        return MatrixClass.UNITARY
    if is_hermitian(m, tol):
        return MatrixClass.DENSITY if is_density(m, tol) else MatrixClass.HERMITIAN
    if is_normal(m, tol):
        return MatrixClass.NORMAL
    return MatrixClass.GENERAL


def require_unitary(m, tol=DEFAULT_TOL, name="matrix") -> np.ndarray:
    m = as_matrix(m)
    if not is_unitary(m, tol):
        raise ValidationError(
            f"{name} is not unitary (residual {unitarity_residual(m):.3e} > {tol:g})",
            kind="not_unitary",
        )
    return m


def require_normal(m, tol=DEFAULT_TOL, name="matrix") -> np.ndarray:
    m = as_matrix(m)
    if not is_normal(m, tol):
        raise ValidationError(
            f"{name} is not normal (residual {normality_residual(m):.3e} > {tol:g})",
            kind="not_normal",
        )
    return m


def require_density(m, tol=1e-10, name="density matrix") -> np.ndarray:
    m = as_matrix(m)
    if not is_density(m, tol):
        raise ValidationError(f"{name} is not a valid density matrix", kind="not_density")
    return m


# ---------------------------------------------------------------------------
# Jacobi solver for Hermitian matrices


def _jacobi_rotation(a_pp, a_qq, a_pq):
    """2x2 unitary G with G^dag [[a_pp, a_pq], [a_pq*, a_qq]] G diagonal."""
    mag = abs(a_pq)
    phase = a_pq / mag
    theta = (a_qq - a_pp) / (2.0 * mag)
    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # diag(1, conj(phase)) removes the off-diagonal phase, then a real rotation.
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])


def hermitian_eigh(h, max_sweeps=100):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Cyclic Jacobi sweeps with complex plane rotations. The returned
    eigenvector matrix is a product of unitary rotations, so it is
    orthonormal to working precision even for degenerate spectra.
    """
    a = np.array(as_matrix(h), copy=True)
    n = len(a)
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300 or abs(a[p, q]) <= 1e-18 * scale:
                    continue
                g = _jacobi_rotation(a[p, p].real, a[q, q].real, a[p, q])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = _dagger(g) @ a[idx, :]
                a[q, p] = 0.0
                a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ g
    evals = np.diag(a).real
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


def _sort_key(lam):
    # Rounded so that numerically-equal eigenvalues order reproducibly.
    return (-round(lam.real, 10), -round(lam.imag, 10))


def oracle_eigendecompose(m, tol=DEFAULT_TOL) -> list[SpectralPair]:
    """Orthonormal eigendecomposition of a normal matrix.

    Diagonalizes ``alpha*Re(M) + beta*Im(M)`` (the commuting Hermitian parts)
    and reads each eigenvalue off as ``v^dag M v``. A draw of ``(alpha, beta)``
    is rejected when the resulting vectors fail the residual check, which
    happens only when the combination merges distinct eigenvalues of ``M``.

    Pairs are sorted by descending real part, then descending imaginary part.
    """
    m = require_normal(m, tol)
    n = len(m)
    herm = 0.5 * (m + _dagger(m))
    anti = (m - _dagger(m)) / 2j
    resid_tol = 1e-8 * max(1.0, np.linalg.norm(m, 2))
    rng = np.random.default_rng(_ORACLE_SEED)
    for attempt in range(20):
        if attempt == 0 and np.linalg.norm(anti) <= 1e-14 * max(1.0, np.linalg.norm(m)):
            alpha, beta = 1.0, 0.0
        else:
            alpha, beta = rng.normal(size=2)
        combo = alpha * herm + beta * anti
        combo = 0.5 * (combo + _dagger(combo))
        _, vecs = hermitian_eigh(combo)
        lams = np.einsum("ij,ik,kj->j", vecs.conj(), m, vecs)
        resid = np.linalg.norm(m @ vecs - vecs * lams, axis=0)
        if np.all(resid <= resid_tol):
            break
    else:
        raise ValidationError("oracle failed to separate the spectrum", kind="oracle_failure")
    pairs = [SpectralPair(complex(lams[j]), vecs[:, j].copy()) for j in range(n)]
    pairs.sort(key=lambda p: _sort_key(p.eigenvalue))
    return pairs


def eigenspace_projector(m, eigenvalue, tol, pairs=None) -> np.ndarray:
    if pairs is None:
        pairs = oracle_eigendecompose(m)
    cols = [p.eigenvector for p in pairs if abs(p.eigenvalue - eigenvalue) <= tol]
    if not cols:
        return np.zeros((len(pairs), len(pairs)), dtype=complex)
    basis = np.column_stack(cols)
    return basis @ _dagger(basis)


def eigenspace_fidelity(v, m, eigenvalue, tol=1e-6, pairs=None) -> float:
    """Squared norm of the projection of ``v`` onto the eigenspace of ``m``
    spanned by oracle eigenvectors with eigenvalue within ``tol`` of
    ``eigenvalue``. Returns 0 when no eigenvalue is close enough.
    """
    v = np.asarray(v, dtype=complex)
    proj = eigenspace_projector(m, eigenvalue, tol, pairs)
    return float(np.clip(np.linalg.norm(proj @ v) ** 2, 0.0, 1.0))


def hermitize(a) -> np.ndarray:
    """``A + A^dag``."""
    a = as_matrix(a)
    return a + _dagger(a)


def unitary_from_hermitian(h, tol=1e-10) -> np.ndarray:
    """``exp(iH)`` built from the oracle eigendecomposition of ``H``."""
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise ValidationError("matrix is not Hermitian", kind="not_hermitian")
    mu, vecs = hermitian_eigh(0.5 * (h + _dagger(h)))
    return (vecs * np.exp(1j * mu)) @ _dagger(vecs)


def random_unitary(dim, rng) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim, rng) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (z + _dagger(z))


def random_normal(dim, rng, eigenvalues=None) -> np.ndarray:
    """Normal matrix ``W diag(lam) W^dag`` with Haar ``W``."""
    if eigenvalues is None:
        eigenvalues = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    w = random_unitary(dim, rng)
    return (w * np.asarray(eigenvalues, dtype=complex)) @ _dagger(w)


def random_state(dim, rng) -> np.ndarray:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)
