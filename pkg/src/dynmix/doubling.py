"""Anytime wrapper: fresh known-horizon learners on blocks of length 2^i."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .learners import Learner, check_sequence
from .losses import LossFunction


@dataclass(frozen=True)
class HorizonBlock:
    index: int
    start: int

    @property
    def length(self) -> int:
        return 2 ** self.index

    @property
    def stop(self) -> int:
        return self.start + self.length - 1


def block_of(t: int) -> tuple[int, int]:
    """(i, offset) with 2^i <= t < 2^(i+1) and offset = t - 2^i + 1."""
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    i = t.bit_length() - 1
    return i, t - (1 << i) + 1


class DoublingLearner(Learner):
    """Delegates to ``factory(2**i)`` during block i; nothing crosses a block boundary."""

    horizon = None

    def __init__(self, factory: Callable[[int], Learner]):
        self.step_counter = 0
        self.factory = factory
        self.current: Learner | None = None
        self.block = -1
        self.block_losses: list[float] = []
        self.horizons: list[int] = []
        self.retired_updates = 0

    def _learner_for(self, t: int) -> tuple[Learner, int]:
        i, offset = block_of(t)
        if i != self.block:
            if self.current is not None:
                self.retired_updates += self.current.base_updates
            self.current = self.factory(2 ** i)
            self.block = i
            self.block_losses.append(0.0)
            self.horizons.append(2 ** i)
        return self.current, offset

    def _peek(self) -> Learner:
        # the learner that will act at the next step, without committing to it
        i, _ = block_of(self.step_counter + 1)
        if i == self.block:
            return self.current
        return self.factory(2 ** i)

    def predict(self):
        return self._peek().predict()

    def expected_loss(self, loss: LossFunction) -> float:
        return self._peek().expected_loss(loss)

    def sample(self, rng):
        return self._peek().sample(rng)

    def step(self, loss: LossFunction) -> float:
        check_sequence(loss, self.step_counter)
        learner, offset = self._learner_for(self.step_counter + 1)
        incurred = learner.step(loss.reindex(offset))
        self.block_losses[-1] += incurred
        self.step_counter += 1
        return incurred

    def reset(self) -> None:
        retired = self.base_updates
        self.__init__(self.factory)
        self.retired_updates = retired

    @property
    def cumulative_loss(self) -> float:
        return sum(self.block_losses)

    @property
    def updates(self) -> int:
        return self.step_counter

    @property
    def base_updates(self) -> int:
        live = self.current.base_updates if self.current is not None else 0
        return self.retired_updates + live

    @property
    def active_learners(self) -> int:
        """Base learners alive in the current block (0 before the first step)."""
        return self.current.active_learners if self.current is not None else 0


def wrap(factory: Callable[[int], Learner]) -> DoublingLearner:
    return DoublingLearner(factory)
