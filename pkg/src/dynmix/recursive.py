"""Recursive mixture of a base learner with half-horizon copies of itself.

A node of horizon ``tau`` mixes two experts with exponential weights at rate
sqrt(1/tau):

* expert 0, the base learner run for the whole horizon;
* expert 1, a node of horizon floor(tau/2) for the first half, replaced by a
  fresh node of horizon tau - floor(tau/2) for the second half.

The recursion bottoms out at tau = 1, where a node is its bare base learner.
Only one chain of nodes is alive at any time, so a run of horizon 2^k keeps
k + 1 base learners and makes T (k + 1) base updates in total.
"""
from __future__ import annotations

import math

from .errors import HorizonExhaustedError, InvalidConfigError, SequencingError
from .learners import Learner, check_sequence
from .losses import LossFunction

FLOOR = 1e-300


class RecursiveNode(Learner):

    def __init__(self, T: int, factory, offset: int = 0, depth: int = 0,
                 events: list | None = None):
        if T < 1:
            raise InvalidConfigError(f"horizon must be positive, got {T}")
        self.horizon = T
        self.factory = factory
        self.offset = offset
        self.depth = depth
        self.events = events
        self.step_counter = 0
        self.eta = math.sqrt(1.0 / T)
        self.base = factory()
        self.half = T // 2
        self.second_half = False
        self.retired_updates = 0
        self.floored = 0
        if T == 1:
            self.p0, self.p1 = 1.0, 0.0
            self.child = None
        else:
            self.p0, self.p1 = 0.5, 0.5
            self.child = RecursiveNode(self.half, factory, offset, depth + 1, events)

    @property
    def weights(self) -> tuple[float, float]:
        return self.p0, self.p1

    def weight_vectors(self) -> list[tuple[float, float]]:
        """(p0, p1) of every node on the live chain, root first."""
        out, node = [], self
        while node is not None:
            out.append((node.p0, node.p1))
            node = node.child
        return out

    def predict(self):
        if self.child is None:
            return self.base.predict()
        return self.p0 * self.base.predict() + self.p1 * self.child.predict()

    def expected_loss(self, loss: LossFunction) -> float:
        l0 = self.base.expected_loss(loss)
        if self.child is None:
            return l0
        return self.p0 * l0 + self.p1 * self.child.expected_loss(loss)

    def sample(self, rng):
        """Walk down the chain, stopping at depth d's base learner with probability p0."""
        if self.child is None or rng.random() < self.p0:
            return self.base.sample(rng)
        return self.child.sample(rng)

    def step(self, loss: LossFunction) -> float:
        if loss.time_index != self.step_counter + 1:
            check_sequence(loss, self.step_counter)
        return self.advance(loss)

    def advance(self, loss: LossFunction) -> float:
        # the chain below shares this node's clock, shifted by half in the second half
        t = self.step_counter + 1
        if t > self.horizon:
            raise HorizonExhaustedError(f"node of horizon {self.horizon} already stepped {self.step_counter} times")
        l0 = self.base.advance(loss)
        child = self.child
        if child is None:
            self.step_counter = t
            return l0
        l1 = child.advance(loss)
        p0, p1 = self.p0, self.p1
        # reported with the weights that generated this round's draw
        incurred = p0 * l0 + p1 * l1
        a = p0 * math.exp(-self.eta * l0)
        b = p1 * math.exp(-self.eta * l1)
        if a < FLOOR or b < FLOOR:
            if p0 > 0.0 and a < FLOOR:
                a, self.floored = FLOOR, self.floored + 1
            if p1 > 0.0 and b < FLOOR:
                b, self.floored = FLOOR, self.floored + 1
        s = a + b
        self.p0, self.p1 = a / s, b / s
        self.step_counter = t
        if t == self.half and not self.second_half:
            self.rollover()
        return incurred

    def rollover(self) -> None:
        """Swap the finished first-half child for a fresh second-half node.

        The node's own weights are kept: expert 1 is one expert whose internals change.
        """
        if self.child is None or self.second_half or self.step_counter != self.half:
            raise SequencingError(
                f"rollover is only valid once, at local clock {self.half}; clock is {self.step_counter}")
        self.retired_updates += self.child.base_updates
        start = self.offset + self.half
        self.child = RecursiveNode(self.horizon - self.half, self.factory, start,
                                   self.depth + 1, self.events)
        self.second_half = True
        if self.events is not None:
            self.events.append((self.depth, start))

    def reset(self) -> None:
        retired = self.base_updates
        self.__init__(self.horizon, self.factory, self.offset, self.depth, self.events)
        self.retired_updates = retired

    def chain(self) -> list["RecursiveNode"]:
        out, node = [], self
        while node is not None:
            out.append(node)
            node = node.child
        return out

    @property
    def updates(self) -> int:
        return self.step_counter

    @property
    def base_updates(self) -> int:
        total = self.base.updates + self.retired_updates
        if self.child is not None:
            total += self.child.base_updates
        return total

    @property
    def active_learners(self) -> int:
        return len(self.chain())


def build(T: int, factory, events: list | None = None) -> RecursiveNode:
    """Root node of horizon ``T``; ``events`` collects (depth, global time) of rollovers."""
    return RecursiveNode(T, factory, events=events)


def active_learner_count(node: RecursiveNode) -> int:
    return node.active_learners
