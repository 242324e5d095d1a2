"""Derivative-free minimization with restarts: Nelder-Mead and SPSA.

Both methods see the objective through a :class:`_Recorder` that counts
evaluations, keeps the running best and decides when a restart is over
(budget, target reached, or no progress).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

METHODS = ("nelder-mead", "spsa")


@dataclass(frozen=True)
class SpsaGains:
    a: float
    c: float = 0.1
    A: float = 0.0
    alpha: float = 0.602
    gamma: float = 0.101

    def a_k(self, k: int) -> float:
        return self.a / (k + 1 + self.A) ** self.alpha

    def c_k(self, k: int) -> float:
        return self.c / (k + 1) ** self.gamma


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "nelder-mead"
    max_evals: int = 20000
    """Evaluation budget per restart."""
    target_value: float = -math.inf
    restarts: int = 1
    seed: int = 0
    spsa_a: float | None = None
    """``None`` calibrates ``a`` so the first step moves ~0.1 rad per coordinate."""
    spsa_c: float = 0.1
    spsa_A: float | None = None
    """``None`` means 10% of the iteration budget."""
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    nm_scale: float = 0.25
    nm_min_diameter: float = 1e-6
    f_tol: float = 1e-6
    stall_evals: int = 500

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.max_evals < 1 or self.restarts < 1:
            raise ValidationError("max_evals and restarts must be >= 1")
        gains = [self.spsa_c, self.spsa_alpha, self.spsa_gamma, self.nm_scale]
        if self.spsa_a is not None:
            gains.append(self.spsa_a)
        if self.spsa_A is not None and self.spsa_A < 0:
            raise ValidationError("SPSA stability constant A must be >= 0")
        if any(g <= 0 for g in gains):
            raise ValidationError("optimizer gains must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Evaluation:
    index: int
    restart: int
    value: float
    improved: bool


@dataclass
class RestartSummary:
    restart: int
    start_theta: np.ndarray
    best_value: float
    best_theta: np.ndarray
    n_evals: int
    stop_reason: str


@dataclass
class OptimizationTrace:
    evaluations: list[Evaluation] = field(default_factory=list)
    restarts: list[RestartSummary] = field(default_factory=list)
    best_value: float = math.inf
    best_theta: np.ndarray | None = None
    n_evals: int = 0
    n_nonfinite: int = 0
    stop_reason: str = "budget"

    def best_history(self) -> list[float]:
        """Running best value after each recorded evaluation."""
        out, best = [], math.inf
        for e in self.evaluations:
            best = min(best, e.value)
            out.append(best)
        return out

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_theta": None if self.best_theta is None else self.best_theta.tolist(),
            "n_evals": self.n_evals,
            "n_nonfinite": self.n_nonfinite,
            "stop_reason": self.stop_reason,
            "restarts": [
                {
                    "restart": r.restart,
                    "start_theta": r.start_theta.tolist(),
                    "best_value": r.best_value,
                    "best_theta": r.best_theta.tolist(),
                    "n_evals": r.n_evals,
                    "stop_reason": r.stop_reason,
                }
                for r in self.restarts
            ],
            "best_history": self.best_history(),
        }


class _StopRestart(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class _Recorder:
    def __init__(self, objective, cfg: OptimizerConfig, trace: OptimizationTrace, restart: int):
        self.objective = objective
        self.cfg = cfg
        self.trace = trace
        self.restart = restart
        self.n_evals = 0
        self.best_value = math.inf
        self.best_theta = None
        self._last_progress = 0

    def __call__(self, theta):
        cfg = self.cfg
        if self.n_evals >= cfg.max_evals:
            raise _StopRestart("budget")
        theta = np.array(theta, dtype=float)
        value = float(self.objective(theta))
        self.n_evals += 1
        self.trace.n_evals += 1
        if not math.isfinite(value):
            self.trace.n_nonfinite += 1
            self._check_stall()
            return math.inf
        improved = value < self.best_value
        if value < self.best_value - cfg.f_tol or self.best_theta is None:
            self._last_progress = self.n_evals
        if improved:
            self.best_value, self.best_theta = value, theta
        self.trace.evaluations.append(
            Evaluation(self.trace.n_evals - 1, self.restart, value, improved)
        )
        if value <= cfg.target_value:
            raise _StopRestart("target")
        self._check_stall()
        return value

    def _check_stall(self):
        if self.n_evals - self._last_progress >= self.cfg.stall_evals:
            raise _StopRestart("stalled")
        if self.n_evals >= self.cfg.max_evals:
            raise _StopRestart("budget")


# ---------------------------------------------------------------------------
# Nelder-Mead

_REFLECT, _EXPAND, _CONTRACT, _SHRINK = 1.0, 2.0, 0.5, 0.5


def _nelder_mead(f, theta0, cfg: OptimizerConfig):
    dim = len(theta0)
    pts = [np.array(theta0, dtype=float)]
    for i in range(dim):
        p = pts[0].copy()
        p[i] += cfg.nm_scale
        pts.append(p)
    pts = np.array(pts)
    vals = np.array([f(p) for p in pts])
    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        if np.max(np.linalg.norm(pts[1:] - pts[0], axis=1)) < cfg.nm_min_diameter:
            raise _StopRestart("stalled")
        centroid = pts[:-1].mean(axis=0)
        worst = pts[-1]
        xr = centroid + _REFLECT * (centroid - worst)
        fr = f(xr)
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + _EXPAND * (xr - centroid)
            fe = f(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-1]:
            xc = centroid + _CONTRACT * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + _CONTRACT * (worst - centroid)
            fc = f(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for i in range(1, dim + 1):
            pts[i] = pts[0] + _SHRINK * (pts[i] - pts[0])
            vals[i] = f(pts[i])


# ---------------------------------------------------------------------------
# SPSA


def rademacher(dim, rng) -> np.ndarray:
    return rng.integers(0, 2, size=dim) * 2.0 - 1.0


def spsa_gradient(theta, ck, objective, rng) -> np.ndarray:
    """Two-probe simultaneous-perturbation gradient estimate.

    Returns an array of NaN when either probe is non-finite.
    """
    theta = np.asarray(theta, dtype=float)
    delta = rademacher(len(theta), rng)
    y_plus = objective(theta + ck * delta)
    y_minus = objective(theta - ck * delta)
    if not (math.isfinite(y_plus) and math.isfinite(y_minus)):
        return np.full(len(theta), np.nan)
    return (y_plus - y_minus) / (2.0 * ck) * delta


def spsa_step(theta, k, objective, gains: SpsaGains, rng) -> np.ndarray:
    """``theta - a_k * g_hat``; a step with a non-finite probe leaves ``theta`` unchanged."""
    theta = np.asarray(theta, dtype=float)
    g = spsa_gradient(theta, gains.c_k(k), objective, rng)
    if not np.all(np.isfinite(g)):
        return theta.copy()
    return theta - gains.a_k(k) * g


def _calibrate_a(f, theta0, cfg, A, rng, n_probe=5):
    mags = []
    for _ in range(n_probe):
        g = spsa_gradient(theta0, cfg.spsa_c, f, rng)
        if np.all(np.isfinite(g)):
            mags.append(np.mean(np.abs(g)))
    mag = np.mean(mags) if mags else 0.0
    if mag <= 1e-12:
        mag = 1.0
    return 0.1 * (A + 1) ** cfg.spsa_alpha / mag


def _spsa(f, theta0, cfg: OptimizerConfig, rng):
    # Three evaluations per iteration: two probes plus the new iterate, so
    # the recorded best reflects actual iterates and not only probe points.
    A = cfg.spsa_A if cfg.spsa_A is not None else 0.1 * (cfg.max_evals // 3)
    a = cfg.spsa_a if cfg.spsa_a is not None else _calibrate_a(f, theta0, cfg, A, rng)
    gains = SpsaGains(a, cfg.spsa_c, A, cfg.spsa_alpha, cfg.spsa_gamma)
    theta = np.array(theta0, dtype=float)
    f(theta)
    k = 0
    while True:
        theta = spsa_step(theta, k, f, gains, rng)
        f(theta)
        k += 1


# ---------------------------------------------------------------------------


def minimize(objective, theta0, cfg: OptimizerConfig, rng=None, reinit=None):
    """Minimize ``objective`` from ``theta0`` with ``cfg.restarts`` restarts.

    Restart 0 starts at ``theta0``; later restarts start from ``reinit(rng)``
    (uniform angles in [0, 2pi) by default). The search ends as soon as a
    value ``<= cfg.target_value`` is seen. Returns ``(best_theta, trace)``.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if reinit is None:
        def reinit(r):
            return r.uniform(0.0, 2 * np.pi, size=len(theta0))
    trace = OptimizationTrace()
    for restart in range(cfg.restarts):
        start = theta0 if restart == 0 else np.asarray(reinit(rng), dtype=float)
        rec = _Recorder(objective, cfg, trace, restart)
        try:
            if cfg.method == "nelder-mead":
                _nelder_mead(rec, start, cfg)
            else:
                _spsa(rec, start, cfg, rng)
            reason = "stalled"
        except _StopRestart as stop:
            reason = stop.reason
        best_theta = rec.best_theta if rec.best_theta is not None else start.copy()
        trace.restarts.append(
            RestartSummary(restart, start.copy(), rec.best_value, best_theta, rec.n_evals, reason)
        )
        if rec.best_value < trace.best_value or trace.best_theta is None:
            trace.best_value, trace.best_theta = rec.best_value, best_theta
        trace.stop_reason = reason
        if reason == "target":
            break
    return trace.best_theta, trace
