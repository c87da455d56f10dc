"""Command-line front end: ``run``, ``sweep`` and ``schedule``.

Settings come from defaults, then an optional ``--config`` file of
``key=value`` lines (``#`` starts a comment, keys are :class:`RunConfig`
field names), then command-line flags. Diagnostics go to stderr at the level
named by ``RE_LOG`` (``debug`` or ``info``); results only ever go to stdout
or to the ``--out`` file.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import environments as envs
from .algorithms import ALGORITHMS, BASE_LEARNERS, base_factory, default_base, expert_count, make_algorithm
from .errors import InvalidConfigError
from .evaluation import SweepResult, bound_ratio, fit_exponent, run_experiment
from .mergers import reset_target
from .resetting import ResetPolicy, n_experts, reset_times

log = logging.getLogger("dynmix")

CSV_HEADER = "t,expected_loss,cumulative_loss,comparator_cumulative,regret,active_learners"
SWEEP_HEADER = "T,mean_regret,std_err,slope"
DEFAULT_NOISE = 0.1
FLOAT = "{:.12f}"


@dataclass
class RunConfig:
    algorithm: str = "recursive"
    env: str = envs.KINDS[0]
    T: int | None = None
    C: int | None = None
    seed: int | None = None
    noise: float | None = None
    base: str | None = None
    out: str | None = None
    eta: float | None = None
    sigma: float | None = None
    t_r: int | None = None
    alpha: float = 0.5
    horizons: str | None = None
    seeds_per_point: int = 10
    plant: float | None = None


_INT = {"T", "C", "seed", "t_r", "seeds_per_point"}
_FLOAT = {"noise", "eta", "sigma", "alpha", "plant"}


def _coerce(key: str, value: str):
    try:
        if key in _INT:
            return int(value)
        if key in _FLOAT:
            return float(value)
    except ValueError:
        raise InvalidConfigError(f"{key}: cannot parse {value!r}") from None
    return value


def read_config_file(path: str) -> dict:
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise InvalidConfigError(f"{path}:{n}: unknown or malformed entry {raw!r}")
        out[key] = _coerce(key, value.strip())
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def environment(cfg: RunConfig, T: int | None = None, seed: int | None = None) -> envs.EnvironmentConfig:
    T = T if T is not None else cfg.T
    seed = seed if seed is not None else cfg.seed
    if os.path.isfile(cfg.env):
        env = envs.loads(Path(cfg.env).read_text())
        changes = {k: v for k, v in (("T", T), ("C", cfg.C), ("seed", seed), ("noise", cfg.noise))
                   if v is not None}
        return replace(env, **changes) if changes else env
    return envs.EnvironmentConfig(
        kind=cfg.env, T=1024 if T is None else T, C=1 if cfg.C is None else cfg.C,
        noise=DEFAULT_NOISE if cfg.noise is None else cfg.noise, seed=seed or 0)


def build_learner(cfg: RunConfig, seq: envs.LossSequence):
    base = cfg.base or default_base(seq.config.kind)
    if base not in BASE_LEARNERS:
        raise InvalidConfigError(f"base: unknown base learner {base!r}; expected one of {BASE_LEARNERS}")
    return make_algorithm(cfg.algorithm, len(seq), base_factory(base, seq), C=seq.config.C,
                          alpha=cfg.alpha, eta=cfg.eta, sigma=cfg.sigma, t_r=cfg.t_r)


def trace_rows(trace) -> list[str]:
    rows = [CSV_HEADER]
    for k in range(trace.T):
        rows.append(",".join([
            str(k + 1),
            FLOAT.format(trace.expected_loss[k]),
            FLOAT.format(trace.cumulative_loss[k]),
            FLOAT.format(trace.comparator_cumulative[k]),
            FLOAT.format(trace.regret[k]),
            str(int(trace.active_learners[k])),
        ]))
    return rows


def _write(path: str, rows: list[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def _need_out(cfg: RunConfig) -> str:
    if not cfg.out:
        raise InvalidConfigError("out: an output path is required (--out)")
    return cfg.out


def cmd_run(cfg: RunConfig) -> int:
    out = _need_out(cfg)
    env = environment(cfg)
    seq = envs.generate(env)
    learner = build_learner(cfg, seq)
    log.info("running %s on %s T=%d C=%d seed=%d", cfg.algorithm, env.kind, env.T, env.C, env.seed)
    trace = run_experiment(learner, seq, env.seed)
    _write(out, trace_rows(trace))
    parts = [f"algorithm={cfg.algorithm}", f"T={env.T}", f"C={env.C}", f"seed={env.seed}",
             f"final_regret={FLOAT.format(trace.final_regret)}",
             f"bound_ratio={FLOAT.format(bound_ratio(trace, env.C, env.T, cfg.alpha))}",
             f"active_learners={int(trace.active_learners[-1])}",
             f"base_updates={trace.base_updates}"]
    n = expert_count(learner)
    if n is not None:
        parts.append(f"experts={n}")
    if seq.clamp_count:
        log.info("%d losses needed clamping", seq.clamp_count)
    print(" ".join(parts))
    return 0


def parse_horizons(text: str | None) -> list[int]:
    if not text:
        raise InvalidConfigError("horizons: a comma-separated list is required (--horizons)")
    try:
        hs = [int(h) for h in text.replace(";", ",").split(",") if h.strip()]
    except ValueError:
        raise InvalidConfigError(f"horizons: cannot parse {text!r}") from None
    if len(hs) < 4:
        raise InvalidConfigError(f"horizons: need at least 4 horizons, got {len(hs)}")
    return hs


def cmd_sweep(cfg: RunConfig) -> int:
    out = _need_out(cfg)
    horizons = parse_horizons(cfg.horizons)
    if cfg.seeds_per_point < 1:
        raise InvalidConfigError("seeds_per_point: must be at least 1")
    seeds = [(cfg.seed or 0) + k for k in range(cfg.seeds_per_point)]
    finals, ratios = [], []
    for T in horizons:
        row, rrow = [], []
        for s in seeds:
            env = environment(cfg, T=T, seed=s)
            if cfg.plant is not None:
                value = float(T) ** cfg.plant
            else:
                seq = envs.generate(env)
                value = run_experiment(build_learner(cfg, seq), seq, s, record_samples=False).final_regret
            row.append(value)
            rrow.append(bound_ratio(value, env.C, T, cfg.alpha))
        log.info("T=%d mean regret %.6f", T, float(np.mean(row)))
        finals.append(row)
        ratios.append(rrow)
    result = SweepResult(horizons, finals, ratios, None)
    result.fit = fit_exponent(horizons, result.mean_regret)
    rows = [SWEEP_HEADER]
    for T, m, se in zip(horizons, result.mean_regret, result.std_err):
        rows.append(f"{T},{FLOAT.format(m)},{FLOAT.format(se)},")
    rows.append(f"fit,,,{FLOAT.format(result.fit.slope)}")
    _write(out, rows)
    print(f"algorithm={cfg.algorithm} horizons={len(horizons)} seeds={len(seeds)} "
          f"slope={FLOAT.format(result.fit.slope)} intercept={FLOAT.format(result.fit.intercept)}")
    return 0


def schedule_lines(T: int) -> list[str]:
    if T < 2:
        raise InvalidConfigError(f"T: schedule needs T >= 2, got {T}")
    N = n_experts(T)
    lines = []
    for i in range(1, N + 1):
        p = ResetPolicy.phased(i)
        times = " ".join(str(t) for t in reset_times(p, T))
        lines.append(f"expert {i} period={p.period} first={p.phase} resets: {times}")
    for t in range(1, T):
        j = reset_target(t, N)
        lines.append(f"t={t} next={t + 1} target={'none' if j is None else j}")
    return lines


def cmd_schedule(cfg: RunConfig) -> int:
    if cfg.T is None:
        raise InvalidConfigError("T: required (--T)")
    print("\n".join(schedule_lines(cfg.T)))
    return 0


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--algo", dest="algorithm",
                        help=f"one of {', '.join(ALGORITHMS)} or doubling:<inner>")
    common.add_argument("--env", help="environment kind or environment file")
    common.add_argument("--T", type=int)
    common.add_argument("--C", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--noise", type=float)
    common.add_argument("--base", help=f"base learner: {', '.join(BASE_LEARNERS)}")
    common.add_argument("--out")
    common.add_argument("--eta", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--t-r", dest="t_r", type=int)
    common.add_argument("--alpha", type=float)

    parser = argparse.ArgumentParser(prog="dynmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one experiment, write a per-step CSV")
    sweep = sub.add_parser("sweep", parents=[common], help="mean regret over horizons plus a log-log fit")
    sweep.add_argument("--horizons", help="comma-separated horizons, at least 4")
    sweep.add_argument("--seeds-per-point", dest="seeds_per_point", type=int)
    sweep.add_argument("--plant", type=float, help="dry run: report T**PLANT instead of running")
    sub.add_parser("schedule", parents=[common], help="print the phased reset schedule")
    return parser


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "schedule": cmd_schedule}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("RE_LOG", "").lower()
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level={"debug": logging.DEBUG, "info": logging.INFO}.get(level, logging.WARNING))
    args = make_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (InvalidConfigError, ValueError, OSError) as exc:
        print(f"dynmix {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
