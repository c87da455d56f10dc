#!/usr/bin/env python3
"""Mean final dynamic regret of every algorithm on one piecewise environment.

Writes one CSV row per algorithm: name, mean regret, standard error, mean
bound ratio and the base-update count of the first seed.

    python3 scripts/compare_algorithms.py --T 4096 --C 4 --seeds 20 --out compare.csv
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from dynmix import environments as envs
from dynmix.algorithms import base_factory, default_base, make_algorithm
from dynmix.evaluation import bound_ratio, run_experiment


@dataclass
class CompareConfig:
    T: int = 4096
    C: int = 4
    noise: float = 0.1
    kind: str = envs.KINDS[0]
    seeds: int = 20
    first_seed: int = 0
    alpha: float = 0.5
    algorithms: list[str] = field(default_factory=lambda: [
        "base", "reset", "parallel", "first-level", "second-level", "recursive", "doubling:recursive"])


def compare(cfg: CompareConfig) -> list[dict]:
    rows = []
    for name in cfg.algorithms:
        started = time.process_time()
        regrets, ratios, updates = [], [], None
        for s in range(cfg.first_seed, cfg.first_seed + cfg.seeds):
            seq = envs.generate(envs.EnvironmentConfig(kind=cfg.kind, T=cfg.T, C=cfg.C, noise=cfg.noise, seed=s))
            learner = make_algorithm(name, cfg.T, base_factory(default_base(seq.config.kind), seq),
                                     C=cfg.C, alpha=cfg.alpha)
            trace = run_experiment(learner, seq, s, record_samples=False)
            regrets.append(trace.final_regret)
            ratios.append(bound_ratio(trace, cfg.C, cfg.T, cfg.alpha))
            if updates is None:
                updates = trace.base_updates
        se = float(np.std(regrets, ddof=1) / math.sqrt(len(regrets))) if len(regrets) > 1 else 0.0
        rows.append({"algorithm": name, "mean_regret": float(np.mean(regrets)), "std_err": se,
                     "mean_bound_ratio": float(np.mean(ratios)), "base_updates": updates,
                     "cpu_seconds": time.process_time() - started})
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=CompareConfig.T)
    p.add_argument("--C", type=int, default=CompareConfig.C)
    p.add_argument("--noise", type=float, default=CompareConfig.noise)
    p.add_argument("--kind", default=CompareConfig.kind)
    p.add_argument("--seeds", type=int, default=CompareConfig.seeds)
    p.add_argument("--algorithms", help="comma-separated subset")
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    a = p.parse_args(argv)
    cfg = CompareConfig(T=a.T, C=a.C, noise=a.noise, kind=a.kind, seeds=a.seeds)
    if a.algorithms:
        cfg.algorithms = a.algorithms.split(",")
    rows = compare(cfg)
    fh = sys.stdout if a.out == "-" else open(a.out, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: f"{v:.6f}" if isinstance(v, float) else v for k, v in row.items()})
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
