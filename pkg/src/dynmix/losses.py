"""Time-indexed loss functions with values in [0, 1].

A loss function is the feedback a learner receives at one round. Besides its
value at a belief it may expose a gradient (the only auxiliary channel we
model) and, for squared losses, the target that generated it.

Wrappers that run an inner learner on a shifted clock call ``reindex`` to hand
the inner learner the same function under its local time index.
"""
from __future__ import annotations

import numpy as np


class LossFunction:
    """Base class. Subclasses implement ``evaluate``, ``evaluate_many`` and ``reindex``."""

    __slots__ = ("time_index",)
    has_gradient = False

    def __init__(self, time_index: int):
        self.time_index = time_index

    def evaluate(self, belief) -> float:
        raise NotImplementedError

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over ``points`` of shape (n,) or (n, d)."""
        return np.array([self.evaluate(p) for p in points], dtype=float)

    def gradient(self, belief):
        raise NotImplementedError(f"{type(self).__name__} carries no gradient")

    def reindex(self, time_index: int) -> "LossFunction":
        raise NotImplementedError


class SquaredLoss(LossFunction):
    """l(x) = min(1, ||x - target||^2 / scale)."""

    __slots__ = ("target", "scale")
    has_gradient = True

    def __init__(self, time_index: int, target, scale: float = 1.0):
        self.time_index = time_index
        self.target = target
        self.scale = scale

    def evaluate(self, belief) -> float:
        d = belief - self.target
        if type(d) is float:
            v = d * d / self.scale
        elif isinstance(d, np.ndarray) and d.ndim:
            v = float(np.dot(d, d)) / self.scale
        else:
            v = float(d * d) / self.scale
        return 1.0 if v > 1.0 else v

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        d = points - self.target
        if d.ndim > 1:
            v = np.einsum("ij,ij->i", d, d)
        else:
            v = d * d
        return np.minimum(v / self.scale, 1.0)

    def gradient(self, belief):
        # gradient of the unclamped quadratic
        return 2.0 * (belief - self.target) / self.scale

    def reindex(self, time_index: int) -> "SquaredLoss":
        return SquaredLoss(time_index, self.target, self.scale)

    def __repr__(self) -> str:
        return f"SquaredLoss(t={self.time_index}, target={self.target!r}, scale={self.scale!r})"


class GridLoss(LossFunction):
    """Loss given by its values on an evenly spaced grid over [lo, hi].

    Off-grid beliefs are evaluated by linear interpolation, so the loss of a
    mixture of neighbouring grid points is the matching convex combination.
    """

    __slots__ = ("values", "lo", "hi")

    def __init__(self, time_index: int, values, lo: float = 0.0, hi: float = 1.0):
        super().__init__(time_index)
        self.values = np.asarray(values, dtype=float)
        self.lo = lo
        self.hi = hi

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, len(self.values))

    def evaluate(self, belief) -> float:
        return float(np.interp(belief, self.grid, self.values))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(points, dtype=float), self.grid, self.values)

    def reindex(self, time_index: int) -> "GridLoss":
        out = GridLoss.__new__(GridLoss)
        out.time_index = time_index
        out.values = self.values
        out.lo = self.lo
        out.hi = self.hi
        return out

    def __repr__(self) -> str:
        return f"GridLoss(t={self.time_index}, values={self.values.tolist()!r})"


class ConstantLoss(LossFunction):
    """The same value at every belief; handy for bookkeeping tests."""

    __slots__ = ("value",)
    has_gradient = True

    def __init__(self, time_index: int, value: float = 0.0):
        super().__init__(time_index)
        self.value = value

    def evaluate(self, belief) -> float:
        return self.value

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return np.full(len(points), self.value, dtype=float)

    def gradient(self, belief):
        return belief * 0.0

    def reindex(self, time_index: int) -> "ConstantLoss":
        return ConstantLoss(time_index, self.value)
