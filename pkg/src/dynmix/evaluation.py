"""Regret traces, horizon sweeps and log-log exponent fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .environments import DEFAULT_GRID, EnvironmentConfig, LossSequence, generate, segment_optima
from .errors import InvalidConfigError
from .learners import Learner
from .seeding import SAMPLING, stream


class DegenerateFitError(ValueError):
    """Raised when a log-log fit is asked for nonpositive data."""


@dataclass
class RegretTrace:
    """Per-step bookkeeping of one run; regret is measured on expected losses."""

    expected_loss: np.ndarray
    comparator_loss: np.ndarray
    active_learners: np.ndarray
    sampled_loss: np.ndarray | None = None
    base_updates: int = 0
    comparator_total: float = 0.0
    cumulative_loss: np.ndarray = field(init=False)
    comparator_cumulative: np.ndarray = field(init=False)
    regret: np.ndarray = field(init=False)

    def __post_init__(self):
        self.cumulative_loss = np.cumsum(self.expected_loss)
        self.comparator_cumulative = np.cumsum(self.comparator_loss)
        self.regret = self.cumulative_loss - self.comparator_cumulative

    @property
    def T(self) -> int:
        return len(self.expected_loss)

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])


def _sequence(env, seed: int) -> LossSequence:
    if isinstance(env, LossSequence):
        return env
    if isinstance(env, EnvironmentConfig):
        return generate(env)
    raise TypeError(f"expected EnvironmentConfig or LossSequence, got {type(env).__name__}")


def run_experiment(learner: Learner, env, seed: int = 0, grid_resolution: int = DEFAULT_GRID,
                   record_samples: bool = True) -> RegretTrace:
    """Play ``learner`` against ``env`` and measure regret against the per-segment grid optima.

    ``seed`` drives the draws recorded in ``sampled_loss`` (diagnostic only).
    """
    seq = _sequence(env, seed)
    T = len(seq)
    if learner.horizon is not None and learner.horizon != T:
        raise InvalidConfigError(f"algorithm horizon {learner.horizon} != environment horizon {T}")
    optima = segment_optima(seq, seq.schedule, grid_resolution)
    comparator = np.empty(T)
    for (start, stop), (belief, _) in zip(seq.schedule.segments(), optima):
        for k in range(start, stop):
            comparator[k] = seq[k].evaluate(belief)
    rng = stream(seed, SAMPLING) if record_samples else None
    expected = np.empty(T)
    sampled = np.empty(T) if record_samples else None
    active = np.empty(T, dtype=np.int64)
    for k, loss in enumerate(seq):
        if rng is not None:
            sampled[k] = loss.evaluate(learner.sample(rng))
        expected[k] = learner.step(loss)
        active[k] = learner.active_learners
    return RegretTrace(expected, comparator, active, sampled, learner.base_updates,
                       math.fsum(v for _, v in optima))


def bound_ratio(regret: float | RegretTrace, C: int, T: int, alpha: float) -> float:
    """Final regret over C^alpha T^(1-alpha); negative regret counts as 0."""
    if isinstance(regret, RegretTrace):
        regret = regret.final_regret
    return max(float(regret), 0.0) / (C ** alpha * T ** (1 - alpha))


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    residual_norm: float


def fit_exponent(horizons: Sequence[int], values: Sequence[float]) -> ExponentFit:
    """Least-squares line through (ln T, ln value)."""
    horizons = np.asarray(horizons, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(horizons) < 4:
        raise InvalidConfigError(f"exponent fit needs at least 4 horizons, got {len(horizons)}")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DegenerateFitError(f"cannot fit log-log line through nonpositive values {values.tolist()}")
    x, y = np.log(horizons), np.log(values)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ np.array([slope, intercept]) - y))
    return ExponentFit(float(slope), float(intercept), resid)


def trend_slope(horizons: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of ``values`` against ln T."""
    slope, _ = np.polyfit(np.log(np.asarray(horizons, dtype=float)), np.asarray(values, dtype=float), 1)
    return float(slope)


@dataclass
class SweepResult:
    horizons: list[int]
    final_regrets: list[list[float]]
    bound_ratios: list[list[float]]
    fit: ExponentFit | None

    @property
    def mean_regret(self) -> list[float]:
        return [float(np.mean(r)) for r in self.final_regrets]

    @property
    def std_err(self) -> list[float]:
        return [float(np.std(r, ddof=1) / math.sqrt(len(r))) if len(r) > 1 else 0.0
                for r in self.final_regrets]

    @property
    def mean_ratio(self) -> list[float]:
        return [float(np.mean(r)) for r in self.bound_ratios]


def sweep_exponent(make_learner: Callable[[int, LossSequence], Learner],
                   make_env: Callable[[int, int], EnvironmentConfig],
                   horizons: Sequence[int], seeds: Sequence[int], *, C: int, alpha: float = 0.5,
                   grid_resolution: int = DEFAULT_GRID, min_seeds: int = 10,
                   fit: bool = True) -> SweepResult:
    """Mean final regret per horizon over seeds, then a log-log fit of mean regret vs T."""
    if len(horizons) < 4:
        raise InvalidConfigError("sweep needs at least 4 horizons")
    if len(seeds) < min_seeds:
        raise InvalidConfigError(f"sweep needs at least {min_seeds} seeds per horizon")
    finals, ratios = [], []
    for T in horizons:
        row, rrow = [], []
        for s in seeds:
            seq = generate(make_env(T, s))
            trace = run_experiment(make_learner(T, seq), seq, s, grid_resolution, record_samples=False)
            row.append(trace.final_regret)
            rrow.append(bound_ratio(trace, C, T, alpha))
        finals.append(row)
        ratios.append(rrow)
    result = SweepResult(list(horizons), finals, ratios, None)
    if fit:
        result.fit = fit_exponent(horizons, result.mean_regret)
    return result
