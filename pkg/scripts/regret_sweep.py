#!/usr/bin/env python3
"""Regret-exponent sweep: mean final regret vs T for several algorithms.

For each algorithm, runs ``seeds`` environments at every horizon, writes one
CSV row per (algorithm, T) with the mean regret, its standard error and the
mean bound ratio regret / (C^alpha T^(1-alpha)), and prints the fitted
log-log slope and the trend of the bound ratio against ln T.

    python3 scripts/regret_sweep.py --min-exp 8 --max-exp 13 --out sweep.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

from dynmix import environments as envs
from dynmix.algorithms import base_factory, default_base, make_algorithm
from dynmix.evaluation import DegenerateFitError, fit_exponent, sweep_exponent, trend_slope


@dataclass
class SweepConfig:
    min_exp: int = 8
    max_exp: int = 13
    C: int = 4
    noise: float = 0.1
    kind: str = envs.KINDS[0]
    seeds: int = 20
    alpha: float = 0.5
    algorithms: list[str] = field(default_factory=lambda: ["recursive", "parallel", "base"])

    @property
    def horizons(self) -> list[int]:
        return [2 ** k for k in range(self.min_exp, self.max_exp + 1)]


def learner_for(name: str, C: int, alpha: float):
    def make(T, seq):
        return make_algorithm(name, T, base_factory(default_base(seq.config.kind), seq), C=C, alpha=alpha)
    return make


def run(cfg: SweepConfig, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["algorithm", "T", "mean_regret", "std_err", "mean_bound_ratio"])

    def env(T, s):
        return envs.EnvironmentConfig(kind=cfg.kind, T=T, C=cfg.C, noise=cfg.noise, seed=s)

    for name in cfg.algorithms:
        result = sweep_exponent(learner_for(name, cfg.C, cfg.alpha), env, cfg.horizons,
                                range(cfg.seeds), C=cfg.C, alpha=cfg.alpha, fit=False)
        for T, m, se, r in zip(result.horizons, result.mean_regret, result.std_err, result.mean_ratio):
            writer.writerow([name, T, f"{m:.6f}", f"{se:.6f}", f"{r:.6f}"])
        try:
            slope = f"{fit_exponent(result.horizons, result.mean_regret).slope:.4f}"
        except DegenerateFitError:
            slope = "n/a (nonpositive mean regret)"
        print(f"{name}: slope {slope}, ratio trend {trend_slope(result.horizons, result.mean_ratio):+.4f}",
              file=sys.stderr)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = SweepConfig()
    p.add_argument("--min-exp", type=int, default=d.min_exp)
    p.add_argument("--max-exp", type=int, default=d.max_exp)
    p.add_argument("--C", type=int, default=d.C)
    p.add_argument("--noise", type=float, default=d.noise)
    p.add_argument("--kind", default=d.kind)
    p.add_argument("--seeds", type=int, default=d.seeds)
    p.add_argument("--algorithms", default=",".join(d.algorithms))
    p.add_argument("--out", default="-")
    a = p.parse_args(argv)
    cfg = SweepConfig(a.min_exp, a.max_exp, a.C, a.noise, a.kind, a.seeds,
                      algorithms=a.algorithms.split(","))
    if a.out == "-":
        run(cfg, sys.stdout)
    else:
        with open(a.out, "w", newline="") as fh:
            run(cfg, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main())
