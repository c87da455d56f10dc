"""Build any of the meta-algorithms by name, for the CLI and the experiment scripts."""
from __future__ import annotations

from functools import partial

from .doubling import DoublingLearner
from .environments import KINDS, EnvironmentConfig, LossSequence
from .errors import InvalidConfigError
from .learners import ExpWeightsGrid, Learner, OnlineGradientDescent, SampleMean
from .mergers import build_first_level, build_parallel, build_second_level
from .recursive import build as build_recursive
from .resetting import ResetPolicy, ResettingLearner, optimal_period

ALGORITHMS = ("base", "reset", "parallel", "first-level", "second-level", "recursive")
BASE_LEARNERS = ("ogd", "ew-grid", "mean")
# smallest horizon each algorithm accepts; doubling falls back to the base learner below it
MIN_HORIZON = {"base": 1, "reset": 1, "parallel": 2, "first-level": 2, "second-level": 4,
               "recursive": 1}


def base_factory(name: str, seq: LossSequence | None = None, config: EnvironmentConfig | None = None):
    """Zero-argument factory of fresh base learners suited to an environment."""
    if config is None and seq is not None:
        config = seq.config
    if name == "ogd":
        G = seq.gradient_bound if seq is not None else 1.0
        return partial(OnlineGradientDescent, 0.0, 1.0, None, 1.0, G)
    if name == "ew-grid":
        n = config.n_experts if config is not None else 17
        return partial(ExpWeightsGrid, n)
    if name == "mean":
        return SampleMean
    raise InvalidConfigError(f"unknown base learner {name!r}; expected one of {BASE_LEARNERS}")


def default_base(kind: str) -> str:
    return "ogd" if kind == KINDS[0] else "ew-grid"


def _reject(name: str, **given):
    bad = [k for k, v in given.items() if v is not None]
    if bad:
        raise InvalidConfigError(f"override(s) {', '.join(bad)} not applicable to algorithm {name!r}")


def make_algorithm(name: str, T: int, factory, *, C: int | None = None, alpha: float = 0.5,
                   eta: float | None = None, sigma: float | None = None,
                   t_r: int | None = None) -> Learner:
    """Instantiate algorithm ``name`` for horizon ``T``.

    ``doubling:<inner>`` wraps ``<inner>`` in the anytime doubling wrapper.
    """
    if name.startswith("doubling:"):
        inner = name.split(":", 1)[1]
        if inner not in ALGORITHMS:
            raise InvalidConfigError(f"unknown inner algorithm {inner!r}")

        def block(Ti: int) -> Learner:
            if Ti < MIN_HORIZON[inner] or (inner == "first-level" and Ti < 2):
                return factory()
            Ci = None if C is None else min(C, Ti - 1) if inner == "first-level" else C
            return make_algorithm(inner, Ti, factory, C=Ci, alpha=alpha, eta=eta,
                                  sigma=sigma, t_r=t_r)

        return DoublingLearner(block)
    if T < 1:
        raise InvalidConfigError("T must be positive")
    if name == "base":
        _reject(name, eta=eta, sigma=sigma, t_r=t_r)
        return factory()
    if name == "reset":
        _reject(name, eta=eta, sigma=sigma)
        if t_r is None:
            t_r = optimal_period(T, C or 1, alpha) if T >= 2 else 2
        return ResettingLearner(factory(), ResetPolicy(t_r))
    if name == "parallel":
        _reject(name, sigma=sigma, t_r=t_r)
        return build_parallel(T, factory, eta=eta)
    if name == "first-level":
        _reject(name, t_r=t_r)
        if C is None:
            raise InvalidConfigError("first-level mixture needs C")
        return build_first_level(C, T, factory, eta=eta, sigma=sigma)
    if name == "second-level":
        _reject(name, sigma=sigma, t_r=t_r)
        return build_second_level(T, factory, eta=eta)
    if name == "recursive":
        _reject(name, eta=eta, sigma=sigma, t_r=t_r)
        return build_recursive(T, factory)
    raise InvalidConfigError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS} or doubling:<inner>")


def expert_count(learner: Learner) -> int | None:
    """Number of mixed experts for mixtures, None otherwise."""
    return getattr(learner, "N", None)
