"""Monte Carlo engine for boundary crossing probabilities with jumps.

Each replication draws a jump configuration, then evaluates the closed-form
survival probability of the continuous part conditional on those jumps:
a product of bridge non-crossing factors over the merged partition for
one-sided boundaries, or of corridor reflection-series factors per jump
segment for two-sided ones.  The per-replication weight is an unbiased
estimate of the non-crossing probability, so the estimator needs no path
discretization at all.

Determinism contract: replication r draws from a counter-based stream keyed
by (seed, r), and the estimate is reduced over the weight vector in index
order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np
from numpy.random import Generator, Philox

from bcp.boundary import (
    GeneralBoundary,
    OneSidedBoundary,
    PiecewiseLinearBoundary,
    TwoSidedLinearBoundary,
    as_piecewise,
    discretize,
    merge_partition,
)
from bcp.formulas import (
    SeriesTolerance,
    TwoSidedParams,
    two_sided_segment_factor,
    two_sided_tail_prob,
)
from bcp.jumps import (
    JumpCountProcess,
    JumpRealization,
    JumpSizeLaw,
    PoissonProcess,
    draw_jumps,
    poisson_tail_bound,
)

__all__ = [
    "ExperimentConfig",
    "McEstimate",
    "bcp",
    "bcp_nonlinear_convergence",
    "linear_recursion_weight",
    "replication_stream",
    "survival_given_jumps_one_sided",
    "survival_given_jumps_two_sided",
]

# Replications per parallel work unit.  Fixed constant: workers only change
# which process fills which slice of the weight vector, never the values.
_CHUNK = 16384

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its sampling error."""

    estimate: float
    std_error: float
    reps: int
    seed: int
    wall_time: float
    truncation_bound: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one bcp run depends on."""

    boundary: object
    process: JumpCountProcess
    law: JumpSizeLaw
    t: float
    reps: int = 200_000
    seed: int = 0
    n_points: int = 32
    series_tol: SeriesTolerance = SeriesTolerance()
    max_jump_count: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0.0):
            raise ValueError(f"horizon t must be positive, got {self.t}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.n_points < 1:
            raise ValueError(f"n_points must be >= 1, got {self.n_points}")
        if self.max_jump_count is not None:
            if self.max_jump_count < 0:
                raise ValueError("max_jump_count must be >= 0")
            if not isinstance(self.process, PoissonProcess):
                raise ValueError("jump-count truncation needs a Poisson process")


def replication_stream(seed: int, rep: int) -> Generator:
    """Independent counter-based stream for one replication."""
    key = np.array([seed & _SEED_MASK, rep & _SEED_MASK], dtype=np.uint64)
    return Generator(Philox(key=key))


# --- weight kernels -------------------------------------------------------

def _one_sided_path_weight(
    bound_left: np.ndarray,
    bound_right: np.ndarray,
    start_bound: float,
    x: np.ndarray,
    dts: np.ndarray,
) -> float:
    """Survival weight given sampled path values at the partition points.

    Product over segments of the bridge non-crossing factor, gated by the
    path sitting strictly below both boundary limits at every point.
    """
    gap_left = bound_left - x
    if gap_left.min() <= 0.0:
        return 0.0
    gap_right = bound_right - x
    if gap_right.min() <= 0.0:
        return 0.0
    gap_prev = np.empty_like(gap_left)
    gap_prev[0] = start_bound
    gap_prev[1:] = gap_right[:-1]
    return float(np.prod(-np.expm1(-2.0 * gap_prev * gap_left / dts)))


def survival_given_jumps_one_sided(
    boundary: OneSidedBoundary,
    jumps: JumpRealization,
    t: float,
    rng: Generator,
) -> float:
    """One replication weight for a one-sided boundary and given jumps.

    Samples the continuous part at the merged partition points and returns
    the conditional non-crossing probability of the full path.
    """
    pwl = as_piecewise(boundary, t)
    if pwl.values[0] <= 0.0:
        return 0.0
    part = merge_partition(pwl, jumps)
    dts = np.diff(part.times, prepend=0.0)
    x = np.cumsum(rng.standard_normal(part.times.size) * np.sqrt(dts))
    return _one_sided_path_weight(
        part.bound_left, part.bound_right, part.start_bound, x, dts
    )


def _two_sided_increments_weight(
    a: float,
    b: float,
    c: float,
    d: float,
    t: float,
    jumps: JumpRealization,
    z: np.ndarray,
    tol: SeriesTolerance,
) -> float:
    """Weight from pre-drawn standard normal segment increments z."""
    b_cur, d_cur = b, d
    t_prev = 0.0
    weight = 1.0
    for i in range(jumps.count):
        dt = jumps.times[i] - t_prev
        x = z[i] * math.sqrt(dt)
        h = jumps.heights[i]
        up_end = a * dt + b_cur
        lo_end = c * dt + d_cur
        if x >= min(up_end, up_end - h) or x <= -min(lo_end, lo_end + h):
            return 0.0
        weight *= two_sided_segment_factor(
            TwoSidedParams(a, b_cur, c, d_cur, dt), x, tol
        )
        b_cur = up_end - x - h
        d_cur = lo_end + x + h
        t_prev = jumps.times[i]
    dt = t - t_prev
    if (a + c) * dt + b_cur + d_cur <= 0.0:
        return 0.0
    weight *= two_sided_tail_prob(TwoSidedParams(a, b_cur, c, d_cur, dt), tol)
    return weight


def survival_given_jumps_two_sided(
    params: TwoSidedParams,
    jumps: JumpRealization,
    rng: Generator,
    tol: SeriesTolerance = SeriesTolerance(),
) -> float:
    """One replication weight for a two-sided corridor and given jumps.

    Walks the jump segments, gating the segment endpoint (both its pre-jump
    and post-jump position) inside the corridor, multiplying the conditional
    stay probability of each pinned segment and the unconditional stay
    probability of the final stretch.  The corridor parameters are re-rooted
    after each jump: b <- a*dt + b - x - h, d <- c*dt + d + x + h.
    """
    z = rng.standard_normal(jumps.count)
    return _two_sided_increments_weight(
        params.a, params.b, params.c, params.d, params.t, jumps, z, tol
    )


def linear_recursion_weight(
    a: float, b: float, t: float, jumps: JumpRealization, z: np.ndarray
) -> float:
    """One-sided weight via the segmentwise intercept recursion.

    Alternative kernel for a plain linear boundary a*s + b, driven by the
    same standard normal increments the partition kernel consumes; used to
    cross-check that the two formulations agree replication by replication.
    """
    if b <= 0.0:
        return 0.0
    b_cur = b
    t_prev = 0.0
    weight = 1.0
    for i in range(jumps.count):
        dt = jumps.times[i] - t_prev
        x = z[i] * math.sqrt(dt)
        h = jumps.heights[i]
        end = a * dt + b_cur
        if x >= min(end, end - h):
            return 0.0
        weight *= -math.expm1(-2.0 * b_cur * (end - x) / dt)
        b_cur = end - x - h
        t_prev = jumps.times[i]
    dt = t - t_prev
    x = z[jumps.count] * math.sqrt(dt)
    end = a * dt + b_cur
    if x >= end:
        return 0.0
    return weight * -math.expm1(-2.0 * b_cur * (end - x) / dt)


# --- replication drivers --------------------------------------------------

def _one_sided_chunk(
    config: ExperimentConfig, pwl: PiecewiseLinearBoundary, start: int, stop: int
) -> np.ndarray:
    breaks = pwl.times[1:]
    start_bound = float(pwl.values[0])
    base_dts = np.diff(pwl.times)
    base_sqrt = np.sqrt(base_dts)
    base_left = pwl.values[1:]
    seed = config.seed
    max_k = config.max_jump_count
    weights = np.empty(stop - start)
    for r in range(start, stop):
        rng = replication_stream(seed, r)
        jumps = draw_jumps(config.process, config.law, config.t, rng, forbidden=breaks)
        if max_k is not None and jumps.count > max_k:
            weights[r - start] = 0.0
            continue
        if jumps.count == 0:
            x = np.cumsum(rng.standard_normal(base_left.size) * base_sqrt)
            weights[r - start] = _one_sided_path_weight(
                base_left, base_left, start_bound, x, base_dts
            )
        else:
            part = merge_partition(pwl, jumps)
            dts = np.diff(part.times, prepend=0.0)
            x = np.cumsum(rng.standard_normal(part.times.size) * np.sqrt(dts))
            weights[r - start] = _one_sided_path_weight(
                part.bound_left, part.bound_right, start_bound, x, dts
            )
    return weights


def _two_sided_chunk(
    config: ExperimentConfig, params: TwoSidedParams, start: int, stop: int
) -> np.ndarray:
    tol = config.series_tol
    max_k = config.max_jump_count
    no_jump_weight = two_sided_tail_prob(params, tol)
    weights = np.empty(stop - start)
    for r in range(start, stop):
        rng = replication_stream(config.seed, r)
        jumps = draw_jumps(config.process, config.law, config.t, rng)
        if max_k is not None and jumps.count > max_k:
            weights[r - start] = 0.0
        elif jumps.count == 0:
            weights[r - start] = no_jump_weight
        else:
            z = rng.standard_normal(jumps.count)
            weights[r - start] = _two_sided_increments_weight(
                params.a, params.b, params.c, params.d, params.t, jumps, z, tol
            )
    return weights


def _chunk_task(args) -> np.ndarray:
    kind, config, prepared, start, stop = args
    if kind == "one":
        return _one_sided_chunk(config, prepared, start, stop)
    return _two_sided_chunk(config, prepared, start, stop)


def _collect_weights(kind, config, prepared, workers: int) -> np.ndarray:
    reps = config.reps
    spans = [(s, min(s + _CHUNK, reps)) for s in range(0, reps, _CHUNK)]
    tasks = [(kind, config, prepared, s, e) for s, e in spans]
    if workers > 1 and len(tasks) > 1:
        with get_context("fork").Pool(min(workers, len(tasks))) as pool:
            parts = pool.map(_chunk_task, tasks)
    else:
        parts = [_chunk_task(task) for task in tasks]
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def _summarize(weights: np.ndarray, config: ExperimentConfig, wall: float) -> McEstimate:
    reps = weights.size
    estimate = float(np.mean(weights))
    std_error = float(np.std(weights, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    bound = None
    if config.max_jump_count is not None:
        bound = poisson_tail_bound(config.process.rate, config.t, config.max_jump_count)
    return McEstimate(
        estimate=estimate,
        std_error=std_error,
        reps=reps,
        seed=config.seed,
        wall_time=wall,
        truncation_bound=bound,
    )


def bcp(config: ExperimentConfig, workers: int = 1) -> McEstimate:
    """Estimate the non-crossing (survival) probability up to the horizon.

    Returns the mean conditional survival weight over config.reps
    replications; the crossing probability is one minus the estimate.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    begin = time.perf_counter()
    if isinstance(config.boundary, TwoSidedLinearBoundary):
        b = config.boundary
        params = TwoSidedParams(b.a, b.b, b.c, b.d, config.t)
        weights = _collect_weights("two", config, params, workers)
    else:
        pwl = as_piecewise(config.boundary, config.t)
        if pwl.values[0] <= 0.0:
            # boundary already breached at s=0: every weight is zero
            weights = np.zeros(config.reps)
        else:
            weights = _collect_weights("one", config, pwl, workers)
    return _summarize(weights, config, time.perf_counter() - begin)


# --- discretization refinement with common random numbers ------------------

def bcp_nonlinear_convergence(
    config: ExperimentConfig, n_values: list[int], workers: int = 1
) -> dict[int, McEstimate]:
    """bcp at several discretization levels under common random numbers.

    The continuous part is sampled once per replication on the union of all
    requested node grids (plus the jump times); each level then evaluates
    its own survival weight on its sub-partition of that common path.  The
    same seed therefore drives every level and differences between levels
    reflect discretization error, not Monte Carlo noise.
    """
    if not isinstance(config.boundary, GeneralBoundary):
        raise ValueError("convergence study needs a General boundary")
    if not n_values:
        raise ValueError("n_values must not be empty")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    begin = time.perf_counter()
    levels = list(dict.fromkeys(n_values))
    reps = config.reps
    spans = [(s, min(s + _CHUNK, reps)) for s in range(0, reps, _CHUNK)]
    tasks = [(config, levels, s, e) for s, e in spans]
    if workers > 1 and len(tasks) > 1:
        with get_context("fork").Pool(min(workers, len(tasks))) as pool:
            parts = pool.map(_convergence_chunk, tasks)
    else:
        parts = [_convergence_chunk(task) for task in tasks]
    stacked = np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
    wall = time.perf_counter() - begin
    return {
        n: _summarize(stacked[i], config, wall) for i, n in enumerate(levels)
    }


def _convergence_chunk(args) -> np.ndarray:
    config, levels, start, stop = args
    pwls = {
        n: discretize(replace(config.boundary, n=n), config.t) for n in levels
    }
    union = np.unique(np.concatenate([pwls[n].times for n in levels]))
    union_pts = union[1:]  # partition points in (0, t]
    start_bound = float(pwls[levels[0]].values[0])
    level_masks = {n: np.isin(union_pts, pwls[n].times[1:]) for n in levels}
    level_base = {
        n: np.interp(union_pts, pwls[n].times, pwls[n].values) for n in levels
    }
    weights = np.empty((len(levels), stop - start))
    if start_bound <= 0.0:
        weights[:] = 0.0
        return weights
    for r in range(start, stop):
        rng = replication_stream(config.seed, r)
        jumps = draw_jumps(config.process, config.law, config.t, rng, forbidden=union_pts)
        k = jumps.count
        if k:
            times = np.concatenate([union_pts, jumps.times])
            heights = np.concatenate([np.zeros(union_pts.size), jumps.heights])
            order = np.argsort(times, kind="stable")
            times, heights = times[order], heights[order]
        else:
            times, heights = union_pts, np.zeros(union_pts.size)
        dts = np.diff(times, prepend=0.0)
        x = np.cumsum(rng.standard_normal(times.size) * np.sqrt(dts))
        for i, n in enumerate(levels):
            if k:
                base = np.concatenate(
                    [
                        level_base[n],
                        np.interp(jumps.times, pwls[n].times, pwls[n].values),
                    ]
                )[order]
                sel = np.concatenate([level_masks[n], np.ones(k, bool)])[order]
            else:
                base = level_base[n]
                sel = level_masks[n]
            t_sel = times[sel]
            h_sel = heights[sel]
            cum = np.cumsum(h_sel)
            bound_right = base[sel] - cum
            bound_left = bound_right + h_sel
            weights[i, r - start] = _one_sided_path_weight(
                bound_left,
                bound_right,
                start_bound,
                x[sel],
                np.diff(t_sel, prepend=0.0),
            )
    return weights
