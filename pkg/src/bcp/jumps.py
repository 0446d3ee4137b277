"""Jump structure of the process: how many jumps, when, and how large.

The default model is a Poisson number of jumps whose times, conditioned on
the count, are uniform order statistics on [0, t).  Heights come from a
pluggable size law.  Everything samples through an explicit numpy Generator
so the engine can hand each replication its own stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "BernoulliJumps",
    "CustomCountProcess",
    "DoubleExponential",
    "ExponentialJumps",
    "JointCustom",
    "JumpCountProcess",
    "JumpRealization",
    "JumpSizeLaw",
    "PoissonProcess",
    "draw_jumps",
    "poisson_tail_bound",
    "sample_jump_count",
    "sample_jump_heights",
    "sample_jump_times",
    "truncation_level",
]


@dataclass(frozen=True)
class PoissonProcess:
    """Homogeneous Poisson jump counting with intensity rate >= 0.

    rate == 0 is the exact no-jump process, not an approximation.
    """

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0.0):
            raise ValueError(f"rate must be finite and >= 0, got {self.rate}")


@dataclass(frozen=True)
class CustomCountProcess:
    """Joint sampler for (count, ordered jump times) on a horizon.

    sampler(t, rng) must return a pair (count, times) with times strictly
    increasing inside [0, t).  Covers renewal-type or clustered counting
    processes that do not factor into count-then-uniform-times.
    """

    sampler: Callable[[float, np.random.Generator], tuple[int, np.ndarray]]


JumpCountProcess = Union[PoissonProcess, CustomCountProcess]


@dataclass(frozen=True)
class DoubleExponential:
    """Two-sided exponential sizes: up-moves with probability p at rate eta1,
    down-moves with probability 1 - p at rate eta2."""

    p: float
    eta1: float
    eta2: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.eta1 <= 0.0 or self.eta2 <= 0.0:
            raise ValueError(f"rates must be positive, got {self.eta1}, {self.eta2}")

    @property
    def mean(self) -> float:
        return self.p / self.eta1 - (1.0 - self.p) / self.eta2


@dataclass(frozen=True)
class ExponentialJumps:
    """Positive exponential sizes with the given mean."""

    mean: float

    def __post_init__(self):
        if self.mean <= 0.0:
            raise ValueError(f"mean must be positive, got {self.mean}")


@dataclass(frozen=True)
class BernoulliJumps:
    """Two-point sizes: up with probability p, down otherwise."""

    p: float
    up: float
    down: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class JointCustom:
    """Joint sampler for the full height vector given the jump count.

    sampler(count, rng) returns a float array of shape (count,).  Heights may
    be correlated or non-identically distributed; the engine treats the
    vector as a single draw.
    """

    sampler: Callable[[int, np.random.Generator], np.ndarray]


JumpSizeLaw = Union[DoubleExponential, ExponentialJumps, BernoulliJumps, JointCustom]


@dataclass(frozen=True)
class JumpRealization:
    """One sampled jump configuration on [0, t)."""

    count: int
    times: np.ndarray
    heights: np.ndarray


def sample_jump_count(
    process: JumpCountProcess,
    t: float,
    rng: np.random.Generator,
    size: int | None = None,
) -> int | np.ndarray:
    """Number of jumps on [0, t).  Vector draws are for statistical checks."""
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if isinstance(process, PoissonProcess):
        if size is None:
            return int(rng.poisson(process.rate * t))
        return rng.poisson(process.rate * t, size=size)
    if size is not None:
        raise ValueError("custom counting processes sample one realization at a time")
    count, _ = process.sampler(t, rng)
    return int(count)


def sample_jump_times(count: int, t: float, rng: np.random.Generator) -> np.ndarray:
    """Ordered jump times given the count: uniform order statistics on (0, t).

    Exact ties (or a time of exactly 0.0) have probability zero but would
    break the downstream partition, so the whole vector is re-drawn if one
    occurs.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if count == 0:
        return np.empty(0)
    while True:
        times = np.sort(rng.uniform(0.0, t, size=count))
        if times[0] > 0.0 and (count == 1 or (times[1:] > times[:-1]).all()):
            return times


def sample_jump_heights(
    law: JumpSizeLaw, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Height vector for `count` jumps.

    Built-in laws consume a fixed number of draws per jump (one sign stream
    plus one magnitude stream), so two runs with equal counts stay aligned
    under common random numbers.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if isinstance(law, DoubleExponential):
        up = rng.random(count) < law.p
        mags = rng.exponential(1.0, size=count)
        return np.where(up, mags / law.eta1, -mags / law.eta2)
    if isinstance(law, ExponentialJumps):
        return rng.exponential(law.mean, size=count)
    if isinstance(law, BernoulliJumps):
        return np.where(rng.random(count) < law.p, law.up, law.down)
    heights = np.asarray(law.sampler(count, rng), dtype=float)
    if heights.shape != (count,):
        raise ValueError(
            f"custom height sampler returned shape {heights.shape}, expected ({count},)"
        )
    if count and not np.isfinite(heights).all():
        raise ValueError("custom height sampler returned non-finite values")
    return heights


def draw_jumps(
    process: JumpCountProcess,
    law: JumpSizeLaw,
    t: float,
    rng: np.random.Generator,
    forbidden: np.ndarray | None = None,
) -> JumpRealization:
    """Sample one full jump configuration.

    `forbidden` lists time points (boundary breakpoints) that jump times must
    avoid so the merged partition has distinct nodes; a collision is a
    probability-zero event handled by re-drawing the times.
    """
    if isinstance(process, PoissonProcess):
        count = sample_jump_count(process, t, rng)
        times = sample_jump_times(count, t, rng)
        if forbidden is not None and count:
            while np.isin(times, forbidden).any():
                times = sample_jump_times(count, t, rng)
    else:
        count, times = process.sampler(t, rng)
        count = int(count)
        times = np.asarray(times, dtype=float)
        _validate_custom_times(count, times, t, forbidden)
    heights = sample_jump_heights(law, count, rng)
    return JumpRealization(count=count, times=times, heights=heights)


def _validate_custom_times(
    count: int, times: np.ndarray, t: float, forbidden: np.ndarray | None
) -> None:
    if times.shape != (count,):
        raise ValueError(
            f"custom count sampler returned {times.shape[0] if times.ndim else '?'} "
            f"times for count {count}"
        )
    if count == 0:
        return
    if not ((times >= 0.0).all() and (times < t).all()):
        raise ValueError("custom count sampler returned times outside [0, t)")
    if count > 1 and not (times[1:] > times[:-1]).all():
        raise ValueError("custom count sampler returned non-increasing times")
    if forbidden is not None and np.isin(times, forbidden).any():
        raise ValueError("custom count sampler returned a time on a boundary breakpoint")


def truncation_level(rate: float, t: float, tol: float) -> int:
    """Smallest n whose Poisson tail bound (rate*t)^(n+1)/(n+1)! is <= tol.

    Uses the ratio recurrence term_{j+1} = term_j * (rate*t)/(j+1), so no
    factorials or powers are formed explicitly.
    """
    if not (math.isfinite(rate) and rate >= 0.0):
        raise ValueError(f"rate must be finite and >= 0, got {rate}")
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    mass = rate * t
    term = mass  # (rate*t)^1 / 1!
    level = 0
    while term > tol:
        level += 1
        term *= mass / (level + 1)
        if level > 1_000_000:
            raise RuntimeError("truncation level exceeds 1e6; check rate and tol")
    return level


def poisson_tail_bound(rate: float, t: float, level: int) -> float:
    """The bound (rate*t)^(level+1)/(level+1)! on P(count > level)."""
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    if not (math.isfinite(rate) and rate >= 0.0):
        raise ValueError(f"rate must be finite and >= 0, got {rate}")
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    mass = rate * t
    term = mass
    for j in range(1, level + 1):
        term *= mass / (j + 1)
    return term
