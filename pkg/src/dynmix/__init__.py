"""Meta-algorithms that make static-environment online learners track changing environments."""
from .environments import EnvironmentConfig, LossSequence, SegmentSchedule, generate
from .evaluation import RegretTrace, bound_ratio, fit_exponent, run_experiment
from .learners import ExpWeightsGrid, Learner, OnlineGradientDescent, SampleMean
from .mergers import build_first_level, build_parallel, build_second_level
from .recursive import RecursiveNode
from .recursive import build as build_recursive

__all__ = [
    "EnvironmentConfig", "LossSequence", "SegmentSchedule", "generate",
    "RegretTrace", "bound_ratio", "fit_exponent", "run_experiment",
    "ExpWeightsGrid", "Learner", "OnlineGradientDescent", "SampleMean",
    "build_first_level", "build_parallel", "build_second_level",
    "RecursiveNode", "build_recursive",
]
