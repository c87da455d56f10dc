"""Piecewise-stationary loss sequences and the brute-force comparators.

Two kinds of environment are generated on the belief domain [0, 1]:

piecewise-mean-squared
    l_t(x) = (x - y_t)^2 / s with y_t = m_c + noise * N(0, 1) around the mean
    m_c of the active segment.
piecewise-expert-linear
    losses given on an evenly spaced grid of ``n_experts`` points; grid point
    k costs |g_k - g*_c| plus uniform noise, so g*_c is the noiseless best
    point of segment c. Off-grid beliefs interpolate linearly.

Segment means and best points always sit on the default comparator grid, so
a zero-noise environment has zero dynamic comparator loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import InvalidConfigError
from .losses import GridLoss, LossFunction, SquaredLoss
from .seeding import stream

KINDS = ("piecewise-mean-squared", "piecewise-expert-linear")
ALIASES = {"piecewise-mean": KINDS[0], "mean": KINDS[0],
           "piecewise-expert": KINDS[1], "expert": KINDS[1]}
DEFAULT_GRID = 1025
# segment means are drawn from this grid; it nests inside the default comparator grid
MEAN_LEVELS = 1025
NOISE_SPAN = 3.0


def canonical_kind(kind: str) -> str:
    kind = ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise InvalidConfigError(f"unknown environment kind {kind!r}; expected one of {KINDS}")
    return kind


@dataclass(frozen=True)
class SegmentSchedule:
    """Segment lengths t_c, their cumulative ends T_c, and per-segment optima."""

    lengths: tuple[int, ...]
    optima: tuple[float, ...]

    def __post_init__(self):
        if not self.lengths or any(n < 1 for n in self.lengths):
            raise InvalidConfigError("segment lengths must be positive")
        if len(self.optima) != len(self.lengths):
            raise InvalidConfigError("one optimum per segment required")

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def change_points(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.cumsum(self.lengths))

    @property
    def horizon(self) -> int:
        return sum(self.lengths)

    def segments(self):
        """Yield (start, stop) as 0-based half-open index ranges."""
        start = 0
        for n in self.lengths:
            yield start, start + n
            start += n

    @classmethod
    def from_boundaries(cls, T: int, boundaries, optima) -> "SegmentSchedule":
        ends = list(boundaries) + [T]
        lengths = np.diff([0] + ends)
        return cls(tuple(int(n) for n in lengths), tuple(optima))


@dataclass(frozen=True)
class EnvironmentConfig:
    kind: str = KINDS[0]
    T: int = 1024
    C: int = 1
    noise: float = 0.0
    seed: int = 0
    normalization: float | None = None
    boundaries: tuple[int, ...] | None = None
    means: tuple[float, ...] | None = None
    n_experts: int = 17

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if self.T < 1:
            raise InvalidConfigError("T must be positive")
        if not 1 <= self.C <= self.T:
            raise InvalidConfigError(f"need 1 <= C <= T, got C={self.C}, T={self.T}")
        if self.noise < 0:
            raise InvalidConfigError("noise must be nonnegative")
        if self.normalization is not None and self.normalization <= 0:
            raise InvalidConfigError("normalization must be positive")
        if self.boundaries is not None:
            b = tuple(int(v) for v in self.boundaries)
            if len(b) != self.C - 1 or any(x >= y for x, y in zip(b, b[1:])) \
                    or (b and (b[0] < 1 or b[-1] > self.T - 1)):
                raise InvalidConfigError(
                    f"boundaries must be C-1={self.C - 1} increasing points in [1, T-1]")
            object.__setattr__(self, "boundaries", b)
        if self.means is not None:
            m = tuple(float(v) for v in self.means)
            if len(m) != self.C or any(not 0.0 <= v <= 1.0 for v in m):
                raise InvalidConfigError("means must be C values in [0, 1]")
            object.__setattr__(self, "means", m)
        if self.n_experts < 2:
            raise InvalidConfigError("n_experts must be at least 2")

    def scale(self) -> float:
        """Normalization constant; defaults to the squared worst-case distance."""
        if self.normalization is not None:
            return self.normalization
        if self.kind == KINDS[0]:
            return (1.0 + NOISE_SPAN * self.noise) ** 2
        return 1.0 + 2.0 * self.noise


@dataclass(frozen=True)
class LossSequence:
    losses: tuple[LossFunction, ...]
    schedule: SegmentSchedule
    config: EnvironmentConfig | None = None
    clamp_count: int = 0
    gradient_bound: float = field(default=1.0, compare=False)

    def __len__(self) -> int:
        return len(self.losses)

    def __iter__(self):
        return iter(self.losses)

    def __getitem__(self, i):
        return self.losses[i]


def _draw_boundaries(rng: np.random.Generator, T: int, C: int) -> tuple[int, ...]:
    if C == 1:
        return ()
    picks = rng.choice(T - 1, size=C - 1, replace=False) + 1
    return tuple(int(v) for v in np.sort(picks))


def _draw_levels(rng: np.random.Generator, C: int, levels: int) -> list[float]:
    out: list[float] = []
    for _ in range(C):
        while True:
            k = int(rng.integers(levels))
            v = k / (levels - 1)
            if not out or v != out[-1]:
                break
        out.append(v)
    return out


def generate(config: EnvironmentConfig) -> LossSequence:
    """Build the loss sequence described by ``config`` (deterministic in ``config.seed``)."""
    rng = stream(config.seed, 0)
    T, C = config.T, config.C
    boundaries = config.boundaries if config.boundaries is not None else _draw_boundaries(rng, T, C)
    if config.means is not None:
        optima = list(config.means)
    elif config.kind == KINDS[0]:
        optima = _draw_levels(rng, C, MEAN_LEVELS)
    else:
        optima = _draw_levels(rng, C, config.n_experts)
    schedule = SegmentSchedule.from_boundaries(T, boundaries, optima)
    scale = config.scale()
    losses: list[LossFunction] = []
    clamps = 0
    if config.kind == KINDS[0]:
        noise = rng.standard_normal(T) * config.noise
        t = 1
        for (start, stop), m in zip(schedule.segments(), schedule.optima):
            for k in range(start, stop):
                y = m + float(noise[k])
                # largest squared distance from y to a point of [0, 1]
                if max(y, 1.0 - y) ** 2 > scale:
                    clamps += 1
                losses.append(SquaredLoss(t, y, scale))
                t += 1
        gradient_bound = 2.0 * (1.0 + NOISE_SPAN * config.noise) / scale
    else:
        grid = np.linspace(0.0, 1.0, config.n_experts)
        noise = rng.uniform(-1.0, 1.0, size=(T, config.n_experts)) * config.noise
        t = 1
        for (start, stop), best in zip(schedule.segments(), schedule.optima):
            base = np.abs(grid - best) + config.noise
            for k in range(start, stop):
                raw = (base + noise[k]) / scale
                clamps += int(np.any(raw > 1.0))
                losses.append(GridLoss(t, np.clip(raw, 0.0, 1.0)))
                t += 1
        gradient_bound = 1.0
    return LossSequence(tuple(losses), schedule, config, clamps, gradient_bound)


def comparator_grid(resolution: int = DEFAULT_GRID, lo=0.0, hi=1.0) -> np.ndarray:
    """Evenly spaced grid, (n,) in 1-D or (n^d, d) in lexicographic order for boxes."""
    if resolution < 1:
        raise InvalidConfigError("grid resolution must be positive")
    if np.ndim(lo) == 0:
        return np.linspace(lo, hi, resolution) if resolution > 1 else np.array([float(lo)])
    axes = [np.linspace(a, b, resolution) for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _grid_totals(losses, grid: np.ndarray) -> np.ndarray:
    total = np.zeros(len(grid))
    for loss in losses:
        total += loss.evaluate_many(grid)
    return total


def static_comparator(seq, grid_resolution: int = DEFAULT_GRID, lo=0.0, hi=1.0):
    """Best fixed grid belief in hindsight and its cumulative loss.

    Ties go to the lexicographically smallest grid point.
    """
    losses = list(seq)
    if not losses:
        raise InvalidConfigError("empty loss sequence")
    grid = comparator_grid(grid_resolution, lo, hi)
    total = _grid_totals(losses, grid)
    k = int(np.argmin(total))
    best = grid[k] if grid.ndim > 1 else float(grid[k])
    return best, float(total[k])


def segment_optima(seq, schedule: SegmentSchedule, grid_resolution: int = DEFAULT_GRID,
                   lo=0.0, hi=1.0) -> list[tuple[object, float]]:
    losses = list(seq)
    if schedule.horizon != len(losses):
        raise InvalidConfigError(
            f"schedule covers {schedule.horizon} steps but sequence has {len(losses)}")
    return [static_comparator(losses[a:b], grid_resolution, lo, hi)
            for a, b in schedule.segments()]


def dynamic_comparator(seq, schedule: SegmentSchedule, grid_resolution: int = DEFAULT_GRID,
                       lo=0.0, hi=1.0) -> float:
    """Cumulative loss of the best per-segment grid beliefs."""
    return math.fsum(v for _, v in segment_optima(seq, schedule, grid_resolution, lo, hi))


def dumps(config: EnvironmentConfig) -> str:
    """Serialize to ``key=value`` lines; ``loads(dumps(c)) == c``."""
    lines = [f"kind={config.kind}", f"T={config.T}", f"C={config.C}",
             f"noise={config.noise!r}", f"seed={config.seed}"]
    if config.normalization is not None:
        lines.append(f"normalization={config.normalization!r}")
    if config.boundaries is not None:
        lines.append("boundaries=" + ",".join(str(b) for b in config.boundaries))
    if config.means is not None:
        lines.append("means=" + ",".join(repr(m) for m in config.means))
    lines.append(f"n_experts={config.n_experts}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> EnvironmentConfig:
    known = {f.name for f in fields(EnvironmentConfig)}
    kw: dict = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in known:
            raise InvalidConfigError(f"bad environment line {raw!r}")
        if key in ("T", "C", "seed", "n_experts"):
            kw[key] = int(value)
        elif key in ("noise", "normalization"):
            kw[key] = float(value)
        elif key == "boundaries":
            kw[key] = tuple(int(v) for v in value.split(",") if v.strip())
        elif key == "means":
            kw[key] = tuple(float(v) for v in value.split(",") if v.strip())
        else:
            kw[key] = value
    return EnvironmentConfig(**kw)
