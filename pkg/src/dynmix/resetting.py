"""Periodic restarts of a base learner."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidConfigError
from .learners import Learner, check_sequence
from .losses import LossFunction


@dataclass(frozen=True)
class ResetPolicy:
    """Reset every ``period`` steps.

    ``phase == 0`` resets at the multiples of ``period``; ``phase = p > 0``
    resets at p, p + period, p + 2 period, ...
    """

    period: int
    phase: int = 0

    def __post_init__(self):
        if self.period < 2:
            raise InvalidConfigError(f"reset period must be >= 2, got {self.period}")
        if not 0 <= self.phase < self.period:
            raise InvalidConfigError(f"phase must lie in [0, {self.period}), got {self.phase}")

    @classmethod
    def phased(cls, i: int) -> "ResetPolicy":
        """Period 2^i with first reset at 2^(i-1)."""
        return cls(2 ** i, 2 ** (i - 1))


def should_reset(policy: ResetPolicy, t: int) -> bool:
    return t % policy.period == policy.phase


def reset_times(policy: ResetPolicy, T: int) -> list[int]:
    first = policy.phase if policy.phase > 0 else policy.period
    return list(range(first, T + 1, policy.period))


def optimal_period(T: int, C: int, alpha: float) -> int:
    """Reset period (alpha T / C)^(1/(1+alpha)) rounded, clamped to [2, T]."""
    if not 1 <= C <= T:
        raise InvalidConfigError(f"need 1 <= C <= T, got C={C}, T={T}")
    if not 0 < alpha <= 0.5:
        raise InvalidConfigError(f"alpha must lie in (0, 0.5], got {alpha}")
    raw = round((alpha * T / C) ** (1.0 / (1.0 + alpha)))
    return max(2, min(T, raw))


class ResettingLearner(Learner):
    """Runs ``inner`` and restarts it after observing the loss at every reset time.

    The inner learner only sees its local clock: after a reset it receives
    losses indexed 1, 2, ... again.
    """

    def __init__(self, inner: Learner, policy: ResetPolicy):
        self.step_counter = 0
        self.inner = inner
        self.policy = policy
        self.resets = 0
        self._period, self._phase = policy.period, policy.phase

    def predict(self):
        return self.inner.predict()

    def expected_loss(self, loss: LossFunction) -> float:
        return self.inner.expected_loss(loss)

    def sample(self, rng):
        return self.inner.sample(rng)

    def step(self, loss: LossFunction) -> float:
        t = self.step_counter + 1
        if loss.time_index != t:
            check_sequence(loss, self.step_counter)
        inner = self.inner
        incurred = inner.advance(loss)
        self.step_counter = t
        # should_reset, inlined
        if t % self._period == self._phase:
            inner.reset()
            self.resets += 1
        return incurred

    def reset(self):
        self.inner.reset()
        self.step_counter = 0

    @property
    def updates(self) -> int:
        return self.inner.updates

    @property
    def base_updates(self) -> int:
        return self.inner.base_updates

    @property
    def active_learners(self) -> int:
        return self.inner.active_learners


def phased_pool(factory, N: int) -> list[ResettingLearner]:
    """Experts i = 1..N with period 2^i and first reset 2^(i-1)."""
    return [ResettingLearner(factory(), ResetPolicy.phased(i)) for i in range(1, N + 1)]


def periodic_pool(factory, N: int) -> list[ResettingLearner]:
    """Experts i = 1..N with period 2^i, resetting at multiples of 2^i."""
    return [ResettingLearner(factory(), ResetPolicy(2 ** i)) for i in range(1, N + 1)]


def n_experts(T: int) -> int:
    """ceil(log2 T), computed exactly on integers."""
    return (T - 1).bit_length()

