"""Exponential-weights mixtures over pools of restarting learners.

* :class:`ParallelMixture` mixes experts restarting every 2^i steps with plain
  exponential weights.
* :class:`SharedMixture` uses phased restart schedules and, each round, moves a
  fraction ``sigma`` of the mass onto the expert that restarts next (fixed
  share restricted to the restarting expert).
* :class:`SecondLevelMixture` runs one shared mixture per switch budget
  2^i and mixes them with exponential weights on their expected losses. All
  inner mixtures read the same expert pool, so each base learner is stepped
  once per round.

Expert positions are 0-based in every array; the phased expert at position
``k`` has period 2^(k+1). :func:`reset_target` keeps the 1-based label ``j``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BoundedLossError, HorizonExhaustedError, InvalidConfigError
from .learners import Learner, check_sequence
from .losses import LossFunction
from .resetting import n_experts, periodic_pool, phased_pool

FLOOR = 1e-300


def check_losses(losses) -> np.ndarray:
    losses = np.asarray(losses, dtype=float)
    # written so that NaN fails too
    if not (losses.min() >= 0.0 and losses.max() <= 1.0):
        raise BoundedLossError(f"losses outside [0, 1]: {losses}")
    return losses


# Mixtures hold a handful of experts, so the per-round arithmetic below works on
# plain lists: at these sizes that is several times faster than numpy.

def _as_list(v) -> list:
    return v.tolist() if isinstance(v, np.ndarray) else [float(x) for x in v]


def _check(losses: list) -> None:
    if not (min(losses) >= 0.0 and max(losses) <= 1.0):
        raise BoundedLossError(f"losses outside [0, 1]: {losses}")


def _decay(weights: list, losses: list, eta: float) -> list:
    return [p * math.exp(-eta * l) for p, l in zip(weights, losses)]


def _normalize(p_tilde: list, prev: list, keep: float = 1.0) -> tuple[list, int]:
    """Normalize, first flooring weights that were positive but underflowed below FLOOR.

    ``keep`` is the fraction of its own decayed mass each weight retained; with
    keep = 0 the zeros are exact, not underflow.
    """
    n = 0
    if keep > 0.0 and min(p_tilde) < FLOOR:
        for k, (v, q) in enumerate(zip(p_tilde, prev)):
            if q > 0.0 and v < FLOOR:
                p_tilde[k] = FLOOR
                n += 1
    s = sum(p_tilde)
    return [v / s for v in p_tilde], n


def ew_update(weights, losses, eta: float) -> np.ndarray:
    """p_i <- p_i exp(-eta l_i) / sum_j p_j exp(-eta l_j)."""
    weights, losses = _as_list(weights), _as_list(losses)
    _check(losses)
    return np.array(_normalize(_decay(weights, losses, eta), weights)[0])


def reset_target(t: int, N: int | None = None) -> int | None:
    """1-based label j with 2^j k + 2^(j-1) = t + 1, or None if j > N.

    Expert j is the phased expert whose schedule contains t + 1.
    """
    u = t + 1
    j = (u & -u).bit_length()
    if N is not None and j > N:
        return None
    return j


def _kept(sigma: float, t: int, N: int) -> float:
    return 1.0 if reset_target(t, N) is None else 1.0 - sigma


def _share(decayed: list, sigma: float, t: int) -> list:
    j = reset_target(t, len(decayed))
    if j is None:
        # no expert restarts at t+1; (1 - sigma) cancels in the normalization
        return decayed
    moved = sigma * sum(decayed)
    p_tilde = [(1.0 - sigma) * d for d in decayed]
    p_tilde[j - 1] += moved
    return p_tilde


def shared_update(weights, losses, eta: float, sigma: float, t: int) -> np.ndarray:
    """Exponential weights plus sharing ``sigma`` of the mass onto the expert restarting at t+1."""
    if not 0.0 <= sigma <= 1.0:
        raise InvalidConfigError(f"sigma must lie in [0, 1], got {sigma}")
    weights, losses = _as_list(weights), _as_list(losses)
    _check(losses)
    p_tilde = _share(_decay(weights, losses, eta), sigma, t)
    return np.array(_normalize(p_tilde, weights, _kept(sigma, t, len(weights)))[0])


def sample_expert(weights, rng: np.random.Generator) -> int:
    """Draw a 0-based position with probability ``weights[k]``."""
    cdf = np.cumsum(weights)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(k, len(cdf) - 1)


def _mean_belief(weights: np.ndarray, beliefs: list):
    b = np.asarray(beliefs, dtype=float)
    out = np.tensordot(weights, b, axes=1)
    return float(out) if np.ndim(out) == 0 else out


class Mixture(Learner):
    """Weights over a list of expert learners that are all stepped every round."""

    def __init__(self, experts: list[Learner], weights, eta: float, T: int):
        self.step_counter = 0
        self.experts = experts
        self._w = _as_list(weights)
        self.eta = eta
        self.horizon = T
        self.floored = 0

    @property
    def weights(self) -> np.ndarray:
        return np.array(self._w)

    @weights.setter
    def weights(self, value) -> None:
        self._w = _as_list(value)

    def weight_vectors(self) -> list[list]:
        """Weights of every mixing layer, as plain lists (cheap; for invariant checks)."""
        return [self._w]

    @property
    def N(self) -> int:
        return len(self.experts)

    def predict(self):
        return _mean_belief(self.weights, [e.predict() for e in self.experts])

    def expected_loss(self, loss: LossFunction) -> float:
        return sum([p * e.expected_loss(loss) for p, e in zip(self._w, self.experts)])

    def sample(self, rng):
        return self.experts[sample_expert(self._w, rng)].sample(rng)

    def step(self, loss: LossFunction) -> float:
        if loss.time_index != self.step_counter + 1:
            check_sequence(loss, self.step_counter)
        if self.step_counter >= self.horizon:
            raise HorizonExhaustedError(f"horizon {self.horizon} reached")
        return self._absorb([e.step(loss) for e in self.experts])

    def absorb(self, losses) -> float:
        """Incur the mixture loss for this round's expert losses and update the weights."""
        return self._absorb(_as_list(losses))

    def _absorb(self, losses: list) -> float:
        _check(losses)
        w = self._w
        incurred = sum([p * l for p, l in zip(w, losses)])
        t = self.step_counter + 1
        self._w, n = _normalize(self._reweight(losses, t), w, self._kept(t))
        self.floored += n
        self.step_counter = t
        return incurred

    def _reweight(self, losses: list, t: int) -> list:
        return _decay(self._w, losses, self.eta)

    def _kept(self, t: int) -> float:
        return 1.0

    def reset(self):
        for e in self.experts:
            e.reset()
        self._w = _as_list(self.initial_weights())
        self.step_counter = 0

    def initial_weights(self) -> np.ndarray:
        return np.full(self.N, 1.0 / self.N)

    @property
    def updates(self) -> int:
        return self.step_counter

    @property
    def base_updates(self) -> int:
        return sum(e.base_updates for e in self.experts)

    @property
    def active_learners(self) -> int:
        return sum(e.active_learners for e in self.experts)


class ParallelMixture(Mixture):
    """Exponential weights over experts restarting every 2^i steps, i = 1..N."""


class SharedMixture(Mixture):
    """Exponential weights with probability sharing onto the expert that restarts next."""

    def __init__(self, experts, weights, eta: float, sigma: float, T: int, C: int):
        super().__init__(experts, weights, eta, T)
        self.sigma = sigma
        self.C = C

    def _reweight(self, losses, t):
        return _share(_decay(self._w, losses, self.eta), self.sigma, t)

    def _kept(self, t):
        return _kept(self.sigma, t, len(self._w))

    def initial_weights(self):
        w = np.zeros(self.N)
        w[0] = 1.0
        return w


def build_parallel(T: int, factory, eta: float | None = None) -> ParallelMixture:
    """N = ceil(log2 T) experts restarting every 2^i steps, uniform weights,
    eta = sqrt(ln N / T)."""
    if T < 2:
        raise InvalidConfigError(f"parallel mixture needs T >= 2, got {T}")
    N = n_experts(T)
    if eta is None:
        eta = math.sqrt(math.log(N) / T)
    elif eta < 0:
        raise InvalidConfigError("eta must be nonnegative")
    return ParallelMixture(periodic_pool(factory, N), np.full(N, 1.0 / N), eta, T)


def first_level_params(C: int, T: int) -> tuple[float, float]:
    """(sigma, eta) = (C/T, sqrt((C/T) ln(T/C)))."""
    if not 1 <= C < T:
        raise InvalidConfigError(f"first-level mixture needs 1 <= C < T, got C={C}, T={T}")
    return C / T, math.sqrt(C / T * math.log(T / C))


def _validate(eta, sigma):
    if eta is not None and eta < 0:
        raise InvalidConfigError("eta must be nonnegative")
    if sigma is not None and not 0.0 <= sigma <= 1.0:
        raise InvalidConfigError(f"sigma must lie in [0, 1], got {sigma}")


def build_first_level(C: int, T: int, factory, eta: float | None = None,
                      sigma: float | None = None, experts=None) -> SharedMixture:
    """Shared mixture over phased experts (period 2^i, first restart 2^(i-1)),
    all mass initially on the first expert."""
    _validate(eta, sigma)
    sigma0, eta0 = first_level_params(C, T)
    N = n_experts(T)
    if experts is None:
        experts = phased_pool(factory, N)
    w = np.zeros(N)
    w[0] = 1.0
    return SharedMixture(experts, w, eta0 if eta is None else eta,
                         sigma0 if sigma is None else sigma, T, C)


class SecondLevelMixture(Learner):
    """Exponential weights (rate ``eta``) over shared mixtures with switch budgets 2^i.

    The inner mixtures' weights live as the rows of one matrix, so a round is a
    single batched update; the inner objects are brought up to date whenever
    ``inner`` is read.
    """

    def __init__(self, pool, inner: list[SharedMixture], eta: float, T: int):
        self.step_counter = 0
        self.pool = pool
        self._inner = inner
        self._w = [1.0 / len(inner)] * len(inner)
        self.eta = eta
        self.horizon = T
        self.floored = 0
        self._etas = np.array([m.eta for m in inner])[:, None]
        self._sigmas = np.array([m.sigma for m in inner])
        self._neg_etas = -self._etas
        self._keep = (1.0 - self._sigmas)[:, None]
        with np.errstate(divide="ignore"):
            self._thresholds = FLOOR / self._keep
        self._load(np.vstack([m.weights for m in inner]))

    def _load(self, W: np.ndarray) -> None:
        self._W = W
        self._stale = True
        nz = np.flatnonzero(W.any(axis=0))
        # columns past _live are zero in every row and stay so until shared into
        self._live = int(nz[-1]) + 1 if len(nz) else 0

    @property
    def inner(self) -> list[SharedMixture]:
        if self._stale:
            for m, row in zip(self._inner, self._W.tolist()):
                m._w = row
                m.step_counter = self.step_counter
            self._stale = False
        return self._inner

    @property
    def weights(self) -> np.ndarray:
        return np.array(self._w)

    @property
    def inner_weights(self) -> np.ndarray:
        """(N, pool size) matrix whose rows are the inner mixtures' weights."""
        return self._W.copy()

    def weight_vectors(self) -> list[list]:
        """Outer weights followed by each inner mixture's weights."""
        return [self._w] + self._W.tolist()

    @property
    def N(self) -> int:
        return len(self._inner)

    def predict(self):
        return _mean_belief(self.weights, [m.predict() for m in self.inner])

    def expected_loss(self, loss):
        base = np.array([e.expected_loss(loss) for e in self.pool])
        return float(self.weights @ (self._W @ base))

    def sample(self, rng):
        return self.inner[sample_expert(self._w, rng)].sample(rng)

    def step(self, loss):
        if loss.time_index != self.step_counter + 1:
            check_sequence(loss, self.step_counter)
        if self.step_counter >= self.horizon:
            raise HorizonExhaustedError(f"horizon {self.horizon} reached")
        losses = [e.step(loss) for e in self.pool]
        _check(losses)
        losses = np.array(losses)
        t = self.step_counter + 1
        W = self._W
        inner_losses = (W @ losses).tolist()
        j = reset_target(t, len(losses))
        decayed = np.exp(self._neg_etas * losses)
        decayed *= W
        # p_tilde >= (1 - s) * decayed entrywise, so this finds every possible underflow
        if j is not None and j > self._live:
            self._live = j
        live = self._live
        under = decayed[:, :live] < (FLOOR if j is None else self._thresholds)
        if under.any() and (under & (W[:, :live] > 0.0)).any():
            # rare: floor underflowed weights, then share and normalize explicitly
            p_tilde = decayed
            if j is not None:
                p_tilde = self._keep * decayed
                p_tilde[:, j - 1] += self._sigmas * decayed.sum(axis=1)
            under = (p_tilde < FLOOR) & (W > 0.0)
            if j is not None:
                under &= self._keep > 0.0
            p_tilde[under] = FLOOR
            self.floored += int(under.sum())
            W = p_tilde / p_tilde.sum(axis=1, keepdims=True)
        else:
            # sharing keeps each row's mass, so normalizing first is equivalent:
            # ((1 - s) d + s sum(d) e_j) / sum(d) = (1 - s) d / sum(d) + s e_j
            total = decayed.sum(axis=1, keepdims=True)
            if j is None:
                decayed /= total
            else:
                decayed *= self._keep / total
                decayed[:, j - 1] += self._sigmas
            W = decayed
        self._W = W
        self._stale = True
        w = self._w
        incurred = sum([p * l for p, l in zip(w, inner_losses)])
        self._w, n = _normalize(_decay(w, inner_losses, self.eta), w)
        self.floored += n
        self.step_counter = t
        return incurred

    @property
    def pool_size(self) -> int:
        return len(self.pool)

    def reset(self):
        for e in self.pool:
            e.reset()
        self._load(np.vstack([m.initial_weights() for m in self._inner]))
        self._w = [1.0 / self.N] * self.N
        self.step_counter = 0

    @property
    def updates(self) -> int:
        return self.step_counter

    @property
    def base_updates(self) -> int:
        return sum(e.base_updates for e in self.pool)

    @property
    def active_learners(self) -> int:
        return sum(e.active_learners for e in self.pool)


def switch_budgets(T: int) -> list[int]:
    """2^i for i = 1..ceil(log2 T), capped at T - 1."""
    return [min(2 ** i, T - 1) for i in range(1, n_experts(T) + 1)]


def build_second_level(T: int, factory, eta: float | None = None) -> SecondLevelMixture:
    """One shared pool, one shared mixture per budget, eta' = sqrt(ln ln T / T)."""
    if T < 4:
        raise InvalidConfigError(f"second-level mixture needs T >= 4, got {T}")
    if eta is None:
        eta = math.sqrt(math.log(math.log(T)) / T)
    _validate(eta, None)
    pool = phased_pool(factory, n_experts(T))
    inner = [build_first_level(C, T, factory, experts=pool) for C in switch_budgets(T)]
    return SecondLevelMixture(pool, inner, eta, T)
