"""Objective functions scored by SWAP-test statistics.

Every objective is a value in [-1, 1] to be *maximized* (1 at an exact
eigenvector); :func:`to_minimization` turns it into something an optimizer
can minimize.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ansatz import AnsatzEvaluator, AnsatzSpec
from .errors import DimensionError, ValidationError
from .numerics import (
    hermitize,
    require_normal,
    require_unitary,
    unitary_from_hermitian,
)
from .simulator import Mixture, as_density, pure_overlap
from .swaptest import destructive_swap_test, mixed_swap_test

DEFAULT_PENALTY = 100.0
TRACE_FLOOR = 1e-6
RECIPROCAL_FLOOR = 1e-9
RECIPROCAL_CAP = 1e9


@dataclass(frozen=True)
class EvalMode:
    """``shots=None`` means exact simulation; otherwise sampled SWAP tests."""

    shots: int | None = None

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ValidationError("shots must be >= 1")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @classmethod
    def sampled(cls, shots):
        return cls(int(shots))


EXACT = EvalMode()


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class UnitaryEig:
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", require_unitary(self.u, name="U"))

    @property
    def dim(self):
        return len(self.u)


@dataclass(frozen=True)
class Generalized:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", require_unitary(self.u, name="U"))
        object.__setattr__(self, "v", require_unitary(self.v, name="V"))
        if self.u.shape != self.v.shape:
            raise DimensionError("U and V have different dimensions")

    @property
    def dim(self):
        return len(self.u)

    @property
    def pencil(self) -> np.ndarray:
        """``U^dag V``, whose eigenvectors solve the generalized problem."""
        return self.u.conj().T @ self.v


@dataclass(frozen=True)
class NormalEig:
    a: np.ndarray
    surrogate: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = require_normal(self.a, name="A")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "surrogate", unitary_from_hermitian(hermitize(a), tol=1e-8))

    @property
    def dim(self):
        return len(self.a)


@dataclass(frozen=True)
class Qpca:
    rho: np.ndarray
    priors: tuple = ()
    penalty: float = DEFAULT_PENALTY
    mixture: Mixture = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rho", as_density(self.rho))
        object.__setattr__(self, "priors", tuple(np.asarray(p, dtype=float) for p in self.priors))
        if self.penalty < 0:
            raise ValidationError("penalty C must be >= 0")
        object.__setattr__(self, "mixture", Mixture(self.rho))

    @property
    def dim(self):
        return len(self.rho)


Problem = UnitaryEig | Generalized | NormalEig | Qpca


def _check_dims(problem, spec):
    if problem.dim != spec.dim:
        raise DimensionError(
            f"problem has dimension {problem.dim} but the ansatz prepares {spec.dim}"
        )


def _evaluator(spec, cache={}):
    # Evaluators are fixed by their AnsatzSpec, so sharing them is safe.
    ev = cache.get(spec)
    if ev is None:
        ev = cache[spec] = AnsatzEvaluator(spec)
    return ev


def trial_state(spec: AnsatzSpec, theta) -> np.ndarray:
    return _evaluator(spec).state(theta)


def _compared_states(problem, psi):
    if isinstance(problem, UnitaryEig):
        return problem.u @ psi, psi
    if isinstance(problem, Generalized):
        return problem.u @ psi, problem.v @ psi
    if isinstance(problem, NormalEig):
        return problem.surrogate @ psi, psi
    raise TypeError(f"unsupported problem {type(problem).__name__}")


def objective_value(problem, spec: AnsatzSpec, theta, mode: EvalMode = EXACT, rng=None) -> float:
    """Overlap-type objective at ``theta``.

    UnitaryEig: ``|<psi|U|psi>|^2``; Generalized: ``|<psi|U^dag V|psi>|^2``;
    NormalEig: the UnitaryEig objective on ``exp(i(A + A^dag))``;
    Qpca: ``tr(rho |psi><psi|)``. Sampled mode returns the SWAP-test
    ``z_hat``, which may be negative.
    """
    _check_dims(problem, spec)
    psi = trial_state(spec, theta)
    if isinstance(problem, Qpca):
        if mode.exact:
            return float(np.clip(np.real(np.vdot(psi, problem.rho @ psi)), 0.0, 1.0))
        return mixed_swap_test(problem.rho, psi, mode.shots, rng, mixture=problem.mixture).z_hat
    x, y = _compared_states(problem, psi)
    if mode.exact:
        return pure_overlap(x, y)
    return destructive_swap_test(x, y, mode.shots, rng).z_hat


class Deflated(NamedTuple):
    value: float
    trace: float
    saturated: bool


def qpca_deflation_value(
    rho, spec: AnsatzSpec, theta, priors=(), penalty=DEFAULT_PENALTY,
    mode: EvalMode = EXACT, rng=None, problem: Qpca | None = None,
) -> Deflated:
    """``1/tr(rho sigma) + C * sum_j |<psi|psi_j>|^2`` over prior components.

    The trace estimate is floored at ``TRACE_FLOOR``; hitting the floor sets
    ``saturated``.
    """
    if problem is None:
        problem = Qpca(rho, priors, penalty)
    t_hat = objective_value(problem, spec, theta, mode, rng)
    saturated = t_hat <= TRACE_FLOOR
    value = 1.0 / max(t_hat, TRACE_FLOOR)
    if problem.priors and problem.penalty:
        psi = trial_state(spec, theta)
        for prior in problem.priors:
            prior_state = trial_state(spec, prior)
            if mode.exact:
                ov = pure_overlap(psi, prior_state)
            else:
                ov = destructive_swap_test(psi, prior_state, mode.shots, rng).z_hat
            value += problem.penalty * ov
    return Deflated(float(value), float(t_hat), bool(saturated))


class Minimized(NamedTuple):
    value: float
    saturated: bool


def to_minimization(value, form="negate") -> Minimized:
    """``negate``: ``-f``. ``reciprocal``: ``1/f``, capped at ``+-1e9`` when
    ``|f| <= 1e-9``."""
    if form == "negate":
        return Minimized(-float(value), False)
    if form == "reciprocal":
        if abs(value) <= RECIPROCAL_FLOOR:
            sign = -1.0 if value < 0 else 1.0
            return Minimized(sign * RECIPROCAL_CAP, True)
        return Minimized(1.0 / float(value), False)
    raise ValueError(f"unknown minimization form {form!r}")


def rayleigh_quotient(problem, spec: AnsatzSpec, theta) -> complex:
    """``<psi|M|psi>`` with M = U (UnitaryEig) or A (NormalEig)."""
    if isinstance(problem, UnitaryEig):
        m = problem.u
    elif isinstance(problem, NormalEig):
        m = problem.a
    else:
        raise ValidationError(
            f"no Rayleigh quotient for {type(problem).__name__} problems", kind="unsupported_kind"
        )
    _check_dims(problem, spec)
    psi = trial_state(spec, theta)
    return complex(np.vdot(psi, m @ psi))
