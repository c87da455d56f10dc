"""The nine acceptance criteria, each at its stated size and tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import math
import subprocess
import sys
import time
from functools import partial

import numpy as np
import pytest

from dynmix import environments as envs
from dynmix.algorithms import MIN_HORIZON, base_factory, make_algorithm
from dynmix.cli import main
from dynmix.doubling import block_of
from dynmix.evaluation import run_experiment, sweep_exponent, trend_slope
from dynmix.learners import OnlineGradientDescent
from dynmix.losses import SquaredLoss
from dynmix.mergers import build_first_level, build_parallel, build_second_level, ew_update, reset_target
from dynmix.recursive import build as build_recursive
from dynmix.resetting import ResetPolicy, n_experts, reset_times, should_reset
from dynmix.seeding import stream

from oracles import block_partition, hedge_weights, phased_sets, recursive_tree, sampling_paths

OGD = partial(OnlineGradientDescent, 0.0, 1.0, None, 1.0, 2.0)


def squared_sequence(targets):
    return [SquaredLoss(t, y) for t, y in enumerate(targets, 1)]


@pytest.mark.criterion(1, "simplex suite, all four mixtures, 100 sequences, T=512, < 10 s")
def test_simplex_suite(record_property):
    T = 512
    worst, negatives = 0.0, 0
    started = time.perf_counter()
    for seed in range(100):
        seq = squared_sequence(np.random.default_rng(seed).random(T).tolist())
        for mixture in (build_parallel(T, OGD), build_first_level(4, T, OGD),
                        build_second_level(T, OGD), build_recursive(T, OGD)):
            trail = []
            for loss in seq:
                mixture.step(loss)
                trail.append(mixture.weight_vectors())
            w = np.array(trail)
            worst = max(worst, float(np.abs(w.sum(axis=-1) - 1.0).max()))
            negatives += int((w < 0).sum())
    elapsed = time.perf_counter() - started
    record_property("detail", f"max |sum-1|={worst:.1e}, negatives={negatives}, {elapsed:.1f} s")
    assert negatives == 0
    assert worst <= 1e-9
    assert elapsed < 10.0


@pytest.mark.criterion(2, "Hedge bound ln N/eta + eta T/8, N=8, T=1000, 100 sequences")
def test_hedge_bound(record_property):
    N, T = 8, 1000
    eta = math.sqrt(math.log(N) / T)
    bound = math.log(N) / eta + eta * T / 8
    violations, closest = 0, -math.inf
    for seed in range(100):
        rng = np.random.default_rng(seed)
        family = seed % 4
        if family == 0:
            L = rng.random((T, N))
        elif family == 1:
            L = (rng.random((T, N)) < rng.random(N)).astype(float)
        elif family == 2:
            # the best expert changes halfway
            L = rng.random((T, N)) * 0.5 + 0.5
            L[: T // 2, 0] *= 0.2
            L[T // 2:, 1] *= 0.2
        else:
            L = np.clip(rng.normal(0.5, 0.3, (T, N)), 0.0, 1.0)
        w = np.full(N, 1.0 / N)
        expected = 0.0
        for t in range(T):
            expected += float(w @ L[t])
            w = ew_update(w, L[t], eta)
        reference = hedge_weights(L, eta)
        assert float(np.einsum("ij,ij->", reference, L)) == pytest.approx(expected, abs=1e-9)
        regret = expected - float(L.sum(axis=0).min())
        closest = max(closest, regret - bound)
        violations += regret > bound
    record_property("detail", f"violations={violations}, max(regret-bound)={closest:.2f}, bound={bound:.2f}")
    assert violations == 0


@pytest.mark.criterion(3, "phased schedules partition 1..2^14; reset_target matches brute force")
def test_schedule_oracle(record_property):
    T = 2 ** 14
    N = n_experts(T)
    top = T.bit_length()  # enough schedules to cover t = T itself
    sets = phased_sets(T + 1, top + 1)
    for i in range(1, top + 1):
        policy = ResetPolicy.phased(i)
        assert reset_times(policy, T) == sorted(v for v in sets[i] if v <= T)
        assert [t for t in range(1, T + 1) if should_reset(policy, t)] == reset_times(policy, T)
    owners = {}
    for i, members in sets.items():
        for t in members:
            owners.setdefault(t, []).append(i)
    assert all(len(owners.get(t, [])) == 1 for t in range(1, T + 1))
    mismatches = 0
    for t in range(1, T + 1):
        scanned = [i for i in range(1, N + 1) if should_reset(ResetPolicy.phased(i), t + 1)]
        assert len(scanned) <= 1
        expected = scanned[0] if scanned else None
        mismatches += reset_target(t, N) != expected
    record_property("detail", f"T={T}, N={N}, mismatches={mismatches}")
    assert mismatches == 0


@pytest.mark.criterion(4, "recursive expected loss = path enumeration (1e-12) and Monte-Carlo (3 SE)")
@pytest.mark.parametrize("T", [2, 4, 8])
def test_recursive_enumeration(T, record_property):
    worst = 0.0
    for seed in range(50):
        targets = np.random.default_rng(1000 * T + seed).random(T).tolist()
        tree = recursive_tree(targets, G=2.0)
        node = build_recursive(T, OGD)
        for k, loss in enumerate(squared_sequence(targets)):
            before = node.expected_loss(loss)
            got = node.step(loss)
            enumerated = math.fsum(p * l for p, l in sampling_paths(tree, k))
            assert sum(p for p, _ in sampling_paths(tree, k)) == pytest.approx(1.0, abs=1e-12)
            worst = max(worst, abs(got - enumerated), abs(got - tree["exp"][k]), abs(before - got))
    record_property("detail", f"T={T}: max deviation {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(4, "recursive expected loss = path enumeration (1e-12) and Monte-Carlo (3 SE)")
@pytest.mark.parametrize("T", [2, 4, 8])
def test_recursive_monte_carlo(T, record_property):
    draws = 10 ** 5
    targets = np.random.default_rng(77 + T).random(T).tolist()
    seq = squared_sequence(targets)
    node = build_recursive(T, OGD)
    t_check = T // 2 + 1  # after the root's rollover, so every level has history
    for loss in seq[: t_check - 1]:
        node.step(loss)
    loss = seq[t_check - 1]
    rng = stream(T, 1)
    values = np.array([loss.evaluate(node.sample(rng)) for _ in range(draws)])
    expected = node.step(loss)
    se = values.std(ddof=1) / math.sqrt(draws)
    z = abs(values.mean() - expected) / se if se > 0 else 0.0
    record_property("detail", f"T={T}: |mean-E|/SE={z:.2f}")
    assert abs(values.mean() - expected) <= 3 * se + 1e-15


@pytest.mark.criterion(5, "exact base-update counts up to T=2^14")
def test_update_counts(record_property):
    rng = np.random.default_rng(5)
    targets = rng.random(2 ** 14).tolist()
    seq = squared_sequence(targets)
    for k in range(0, 15):
        T = 2 ** k
        node = build_recursive(T, OGD)
        for loss in seq[:T]:
            node.step(loss)
        assert node.base_updates == T * (k + 1), T
        if T >= 2:
            mixture = build_parallel(T, OGD)
            for loss in seq[:T]:
                mixture.step(loss)
            assert mixture.base_updates == T * math.ceil(math.log2(T)), T
    record_property("detail", "recursive T(log2 T + 1), parallel T ceil(log2 T), T = 1..2^14")


def _mean_env(T, seed):
    return envs.EnvironmentConfig(kind="piecewise-mean-squared", T=T, C=4, noise=0.1, seed=seed)


def _learner(name):
    return lambda T, seq: make_algorithm(name, T, base_factory("ogd", seq))


@pytest.fixture(scope="module")
def sweep():
    horizons = [2 ** k for k in range(8, 14)]
    seeds = list(range(20))
    started = time.perf_counter()
    result = sweep_exponent(_learner("recursive"), _mean_env, horizons, seeds, C=4, alpha=0.5)
    base = []
    for s in seeds:
        seq = envs.generate(_mean_env(2 ** 12, s))
        base.append(run_experiment(_learner("base")(2 ** 12, seq), seq, s, record_samples=False).final_regret)
    return result, float(np.mean(base)), time.perf_counter() - started


@pytest.mark.slow
@pytest.mark.criterion(6, "recursive <= never-reset base at T=2^12 and regret slope <= 0.70")
def test_dynamic_regret_ordering(sweep, record_property):
    result, base_mean, elapsed = sweep
    recursive_mean = result.mean_regret[result.horizons.index(2 ** 12)]
    record_property("detail", f"recursive {recursive_mean:.2f} vs base {base_mean:.2f}, "
                              f"slope {result.fit.slope:.3f}, {elapsed:.0f} s")
    assert recursive_mean <= base_mean
    assert result.fit.slope <= 0.70
    assert elapsed < 600


@pytest.mark.slow
@pytest.mark.criterion(7, "bound ratio shows no increasing trend (slope vs ln T <= 0.05)")
def test_bound_ratio_trend(sweep, record_property):
    result, _, _ = sweep
    slope = trend_slope(result.horizons, result.mean_ratio)
    ratios = ", ".join(f"{r:.3f}" for r in result.mean_ratio)
    record_property("detail", f"ratios [{ratios}], trend {slope:.4f}")
    assert slope <= 0.05


@pytest.mark.criterion(8, "doubling: exact block partition for t <= 2^20, per-block replay equality")
def test_doubling_partition(record_property):
    T = 2 ** 20
    index, offset = block_partition(T)
    bad = 0
    for t in range(1, T + 1):
        i, o = block_of(t)
        bad += i != index[t] or o != offset[t]
    record_property("detail", f"partition mismatches={bad}")
    assert bad == 0


@pytest.mark.criterion(8, "doubling: exact block partition for t <= 2^20, per-block replay equality")
@pytest.mark.parametrize("inner", ["recursive", "parallel", "first-level", "base"])
def test_doubling_replay(inner):
    seq = envs.generate(envs.EnvironmentConfig(kind="piecewise-mean-squared", T=300, C=5, noise=0.2, seed=3))
    factory = base_factory("ogd", seq)
    wrapped = make_algorithm(f"doubling:{inner}", len(seq), factory, C=5)
    got = [wrapped.step(loss) for loss in seq]
    assert wrapped.horizons == [2 ** i for i in range(9)]
    start = 1
    for i, H in enumerate(wrapped.horizons):
        block = seq.losses[start - 1: min(start - 1 + H, len(seq))]
        if H < MIN_HORIZON[inner]:
            fresh = factory()
        else:
            fresh = make_algorithm(inner, H, factory, C=min(5, H - 1) if inner == "first-level" else 5)
        replay = [fresh.step(loss.reindex(k)) for k, loss in enumerate(block, 1)]
        assert replay == got[start - 1: start - 1 + len(block)]
        assert wrapped.block_losses[i] == sum(replay)
        start += H
    assert wrapped.cumulative_loss == sum(wrapped.block_losses)


RUN_FLAGS = ["--T", "128", "--C", "3", "--seed", "5"]


@pytest.mark.criterion(9, "repeated run invocations write byte-identical CSV")
@pytest.mark.parametrize("algo", ["base", "reset", "parallel", "first-level", "second-level",
                                  "recursive", "doubling:recursive"])
def test_run_determinism(algo, tmp_path, capsys):
    outputs = []
    for k in range(2):
        out = tmp_path / f"{k}.csv"
        assert main(["run", "--algo", algo, *RUN_FLAGS, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0].startswith(b"t,expected_loss,")


@pytest.mark.criterion(9, "repeated run invocations write byte-identical CSV")
def test_run_determinism_across_processes(tmp_path):
    outputs = []
    for k in range(2):
        out = tmp_path / f"{k}.csv"
        subprocess.run([sys.executable, "-m", "dynmix", "run", "--algo", "recursive",
                        "--env", "piecewise-expert", *RUN_FLAGS, "--out", str(out)],
                       check=True, capture_output=True)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
