import math

import numpy as np
import pytest

from vareig.errors import ValidationError
from vareig.optimizer import (
    METHODS,
    OptimizerConfig,
    SpsaGains,
    minimize,
    rademacher,
    spsa_gradient,
    spsa_step,
)


def bowl(theta):
    return float(np.sum((np.asarray(theta) - 1.0) ** 2))


@pytest.mark.parametrize("method", METHODS)
def test_quadratic_dim4(method):
    theta, trace = minimize(bowl, np.zeros(4), OptimizerConfig(method=method, max_evals=2000, seed=2))
    assert trace.best_value <= 1e-4
    assert trace.n_evals <= 2000
    assert bowl(theta) == trace.best_value


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("dim", [2, 6, 12])
def test_quadratic_bowls_up_to_12(method, dim):
    _, trace = minimize(bowl, np.zeros(dim), OptimizerConfig(method=method, max_evals=5000, seed=dim))
    assert trace.best_value <= 1e-3
    assert trace.n_evals <= 5000


def test_spsa_noisy_bowl():
    noise = np.random.default_rng(99)
    cfg = OptimizerConfig(method="spsa", max_evals=10**4, seed=4)
    _, trace = minimize(lambda t: bowl(t) + 0.01 * noise.normal(), np.zeros(12), cfg)
    assert trace.best_value <= 0.05
    assert trace.n_evals <= 10**4


@pytest.mark.parametrize("method", METHODS)
def test_constant_hits_target(method):
    _, trace = minimize(lambda t: 0.0, np.zeros(3), OptimizerConfig(method=method, target_value=0.0))
    assert trace.stop_reason == "target"
    assert trace.n_evals == 1


@pytest.mark.parametrize("method", METHODS)
def test_deterministic(method):
    cfg = OptimizerConfig(method=method, max_evals=800, restarts=3, seed=17)

    def f(t):
        return float(np.sum(np.sin(t) ** 2) + 0.1 * np.sum(t))

    a = minimize(f, np.ones(5), cfg)
    b = minimize(f, np.ones(5), cfg)
    assert np.array_equal(a[0], b[0])
    assert a[1].evaluations == b[1].evaluations
    assert a[1].to_dict() == b[1].to_dict()


@pytest.mark.parametrize("method", METHODS)
def test_best_history_monotone_and_budget(method):
    cfg = OptimizerConfig(method=method, max_evals=300, restarts=3, seed=1, stall_evals=10**6)

    def f(t):
        return float(np.cos(3 * t[0]) + np.sin(2 * t[1]) * t[0])

    _, trace = minimize(f, np.zeros(2), cfg)
    hist = trace.best_history()
    assert all(b2 <= b1 for b1, b2 in zip(hist, hist[1:]))
    assert trace.best_value == min(e.value for e in trace.evaluations)
    assert trace.n_evals <= cfg.max_evals * cfg.restarts
    assert len(trace.restarts) == 3
    assert all(r.stop_reason in ("budget", "stalled") for r in trace.restarts)


def test_stall_triggers_restart():
    cfg = OptimizerConfig(method="spsa", max_evals=5000, restarts=2, seed=1, stall_evals=50)
    _, trace = minimize(lambda t: 1.0, np.zeros(2), cfg)
    assert [r.stop_reason for r in trace.restarts] == ["stalled", "stalled"]
    assert all(r.n_evals < 100 for r in trace.restarts)


def test_nelder_mead_simplex_collapse_restarts():
    cfg = OptimizerConfig(max_evals=10**5, restarts=2, seed=3, stall_evals=10**6)
    _, trace = minimize(bowl, np.zeros(2), cfg)
    assert [r.stop_reason for r in trace.restarts] == ["stalled", "stalled"]
    assert not np.array_equal(trace.restarts[1].start_theta, np.zeros(2))


def test_nonfinite_values_discarded():
    calls = {"n": 0}

    def f(t):
        calls["n"] += 1
        return math.nan if calls["n"] % 3 == 0 else bowl(t)

    for method in METHODS:
        calls["n"] = 0
        _, trace = minimize(f, np.zeros(2), OptimizerConfig(method=method, max_evals=600, seed=1))
        assert trace.n_nonfinite > 0
        assert all(math.isfinite(e.value) for e in trace.evaluations)
        assert len(trace.evaluations) + trace.n_nonfinite == trace.n_evals


class TestSpsa:
    def test_gain_schedule(self):
        g = SpsaGains(a=0.5, c=0.1, A=10, alpha=0.602, gamma=0.101)
        assert g.c_k(0) == pytest.approx(0.1)
        assert g.a_k(0) == pytest.approx(0.5 / 11**0.602)
        assert g.c_k(9) == pytest.approx(0.1 / 10**0.101)

    def test_rademacher_support(self, rng):
        d = rademacher(10**4, rng)
        assert set(np.unique(d)) == {-1.0, 1.0}

    def test_gradient_unbiased_on_linear(self, rng):
        lam = 2.5
        est = np.array([spsa_gradient([0.3], 0.1, lambda t: lam * t[0], rng)[0] for _ in range(10**4)])
        assert np.allclose(est, lam)  # exact for a 1-D linear objective
        est2 = np.array(
            [spsa_gradient([0.3, -1.0], 0.1, lambda t: lam * t[0] - t[1], rng)[0] for _ in range(10**4)]
        )
        assert abs(est2.mean() - lam) <= 5 * est2.std() / 100

    def test_step_formula(self):
        g = SpsaGains(a=0.2, c=0.1, A=0.0)
        rng_a, rng_b = np.random.default_rng(1), np.random.default_rng(1)
        theta = np.array([0.5, -0.5])
        new = spsa_step(theta, 3, bowl, g, rng_a)
        delta = rademacher(2, rng_b)
        ck = g.c_k(3)
        ghat = (bowl(theta + ck * delta) - bowl(theta - ck * delta)) / (2 * ck) * delta
        assert np.allclose(new, theta - g.a_k(3) * ghat)

    def test_step_skips_nonfinite(self, rng):
        theta = np.array([1.0, 2.0])
        out = spsa_step(theta, 0, lambda t: math.inf, SpsaGains(a=1.0), rng)
        assert np.array_equal(out, theta)


def test_invalid_config():
    with pytest.raises(ValidationError):
        OptimizerConfig(method="bfgs")
    with pytest.raises(ValidationError):
        OptimizerConfig(max_evals=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(spsa_c=-1.0)
