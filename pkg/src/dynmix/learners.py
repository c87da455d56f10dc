"""Base learners: the static-environment algorithms every meta-algorithm wraps.

Every learner, base or composite, follows one protocol:

``predict()``
    current belief, no mutation.
``expected_loss(loss)``
    loss the learner would incur this round (in expectation over its own
    randomization), no mutation.
``step(loss)``
    incur ``expected_loss(loss)``, update, advance ``step_counter``.
``reset()``
    return to the freshly constructed state.

``updates`` counts every ``step`` over a learner's lifetime and survives
``reset``; composites report the sum over their base learners as
``base_updates``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidConfigError, SequencingError
from .losses import LossFunction, SquaredLoss


def check_sequence(loss: LossFunction, step_counter: int) -> None:
    if loss.time_index != step_counter + 1:
        raise SequencingError(
            f"expected loss for t={step_counter + 1}, got t={loss.time_index}"
        )


class Learner:
    horizon: int | None = None

    def __init__(self):
        self.step_counter = 0
        self.updates = 0

    def predict(self):
        raise NotImplementedError

    def expected_loss(self, loss: LossFunction) -> float:
        return loss.evaluate(self.predict())

    def step(self, loss: LossFunction) -> float:
        check_sequence(loss, self.step_counter)
        incurred = self.expected_loss(loss)
        self._update(loss)
        self.step_counter += 1
        self.updates += 1
        return incurred

    def advance(self, loss: LossFunction) -> float:
        """``step`` for a caller that owns the clock: ``loss`` counts as the next round
        whatever its ``time_index``."""
        return self.step(loss if loss.time_index == self.step_counter + 1
                         else loss.reindex(self.step_counter + 1))

    def _update(self, loss: LossFunction) -> None:
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator):
        """Draw a belief; deterministic learners just return ``predict()``."""
        return self.predict()

    @property
    def base_updates(self) -> int:
        return self.updates

    @property
    def active_learners(self) -> int:
        return 1


def _as_bounds(lo, hi):
    if isinstance(lo, (int, float)) and isinstance(hi, (int, float)) or np.ndim(lo) == np.ndim(hi) == 0:
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise InvalidConfigError(f"empty domain [{lo}, {hi}]")
        return lo, hi, hi - lo
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or not np.all(lo < hi):
        raise InvalidConfigError("domain bounds must have equal shape and lo < hi")
    return lo, hi, float(np.linalg.norm(hi - lo))


class OnlineGradientDescent(Learner):
    """Projected online gradient descent on an interval or a box.

    The default step size is ``D / (G * sqrt(t))`` with ``t`` counted since the
    last reset; pass ``step_size`` as a constant or a callable of ``t`` to
    override it.
    """

    needs_gradient = True

    def __init__(self, lo=0.0, hi=1.0, x0=None, D: float | None = None, G: float = 1.0,
                 step_size: float | Callable[[int], float] | None = None):
        self.step_counter = 0
        self.updates = 0
        self.lo, self.hi, diameter = _as_bounds(lo, hi)
        self.D = diameter if D is None else D
        self.G = G
        self.step_size = step_size
        if x0 is None:
            x0 = (self.lo + self.hi) / 2
        elif np.ndim(x0) > 0:
            x0 = np.array(x0, dtype=float)
        self.x0 = self._project(x0)
        self.x = self.x0
        # scalar domain with the default schedule takes the inlined path in step()
        self._fast = isinstance(self.lo, float) and step_size is None
        self._rate = self.D / self.G

    def _project(self, x):
        if isinstance(self.lo, float):
            return self.lo if x < self.lo else (self.hi if x > self.hi else float(x))
        return np.clip(x, self.lo, self.hi)

    def eta(self, t: int) -> float:
        if self.step_size is None:
            return self.D / (self.G * math.sqrt(t))
        if callable(self.step_size):
            return self.step_size(t)
        return self.step_size

    def predict(self):
        return self.x

    def step(self, loss):
        if loss.time_index != self.step_counter + 1:
            check_sequence(loss, self.step_counter)
        return self.advance(loss)

    def advance(self, loss):
        # same contract as Learner.step, inlined: this is the innermost loop of every mixture
        t = self.step_counter + 1
        x = self.x
        if self._fast and type(loss) is SquaredLoss and type(x - loss.target) is float:
            # SquaredLoss.evaluate and .gradient, inlined
            d, scale = x - loss.target, loss.scale
            incurred = d * d / scale
            if incurred > 1.0:
                incurred = 1.0
            x = x - self._rate / math.sqrt(t) * (2.0 * d / scale)
            self.x = self.lo if x < self.lo else (self.hi if x > self.hi else x)
            self.step_counter = t
            self.updates += 1
            return incurred
        incurred = loss.evaluate(x)
        if self._fast:
            x = x - self._rate / math.sqrt(t) * loss.gradient(x)
            self.x = self.lo if x < self.lo else (self.hi if x > self.hi else x)
        else:
            self.x = self._project(x - self.eta(t) * loss.gradient(x))
        self.step_counter = t
        self.updates += 1
        return incurred

    def _update(self, loss):
        t = self.step_counter + 1
        self.x = self._project(self.x - self.eta(t) * loss.gradient(self.x))

    def reset(self):
        self.x = self.x0
        self.step_counter = 0


class ExpWeightsGrid(Learner):
    """Exponential weights over a fixed grid of beliefs on [lo, hi].

    This learner is randomized: it plays grid point k with probability w_k, so
    its (expected) loss is sum_k w_k l(g_k). ``predict`` reports the mean belief.
    The learning rate is ``sqrt(8 ln K / t)`` unless a constant ``eta`` is given.
    """

    needs_gradient = False

    def __init__(self, n_points: int = 17, lo: float = 0.0, hi: float = 1.0,
                 eta: float | None = None):
        super().__init__()
        if n_points < 2:
            raise InvalidConfigError("grid needs at least 2 points")
        self.grid = np.linspace(lo, hi, n_points)
        self.eta_const = eta
        self.w = np.full(n_points, 1.0 / n_points)

    def eta(self, t: int) -> float:
        if self.eta_const is not None:
            return self.eta_const
        return math.sqrt(8.0 * math.log(len(self.grid)) / t)

    def predict(self):
        return float(self.w @ self.grid)

    def expected_loss(self, loss):
        return float(self.w @ loss.evaluate_many(self.grid))

    def _update(self, loss):
        t = self.step_counter + 1
        w = self.w * np.exp(-self.eta(t) * loss.evaluate_many(self.grid))
        self.w = w / w.sum()

    def sample(self, rng):
        k = int(np.searchsorted(np.cumsum(self.w), rng.random(), side="right"))
        return float(self.grid[min(k, len(self.grid) - 1)])

    def reset(self):
        self.w = np.full(len(self.grid), 1.0 / len(self.grid))
        self.step_counter = 0


class SampleMean(Learner):
    """Plays the running mean of the targets of the squared losses seen so far."""

    needs_gradient = False

    def __init__(self, lo: float = 0.0, hi: float = 1.0, x0: float | None = None):
        super().__init__()
        self.lo, self.hi = float(lo), float(hi)
        self.x0 = (self.lo + self.hi) / 2 if x0 is None else float(x0)
        self.total = 0.0
        self.x = self.x0

    def predict(self):
        return self.x

    def _update(self, loss):
        self.total += float(loss.target)
        mean = self.total / (self.step_counter + 1)
        self.x = min(max(mean, self.lo), self.hi)

    def reset(self):
        self.total = 0.0
        self.x = self.x0
        self.step_counter = 0


@dataclass
class BaseLearnerSpec:
    """Declares a base learner together with its static regret rate K * T^(1 - alpha)."""

    name: str
    alpha: float = 0.5
    K: float = 1.5
    belief_dimension: int = 1
    lo: float = 0.0
    hi: float = 1.0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.alpha <= 0.5:
            raise InvalidConfigError(f"alpha must lie in (0, 0.5], got {self.alpha}")
        if self.K <= 0:
            raise InvalidConfigError("K must be positive")
        if self.name not in LEARNERS:
            raise InvalidConfigError(f"unknown base learner {self.name!r}")

    def make(self) -> Learner:
        return LEARNERS[self.name](lo=self.lo, hi=self.hi, **self.options)

    def regret_bound(self, T: int) -> float:
        return self.K * T ** (1 - self.alpha)


def ogd_spec(D: float = 1.0, G: float = 1.0, **options) -> BaseLearnerSpec:
    """OGD on [0, D] with the conventional constant K = 1.5 D G."""
    return BaseLearnerSpec("ogd", alpha=0.5, K=1.5 * D * G, hi=D, options={"G": G, **options})


LEARNERS: dict[str, Callable[..., Learner]] = {
    "ogd": OnlineGradientDescent,
    "ew-grid": ExpWeightsGrid,
    "mean": SampleMean,
}
