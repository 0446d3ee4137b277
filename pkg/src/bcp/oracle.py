"""Independent check of bcp estimates by direct path simulation.

Simulates the jump process exactly and the continuous part on a fine grid,
then counts paths that stay inside the boundary.  At jump instants both the
pre-jump and post-jump positions are tested.  Pure grid monitoring misses
excursions between grid points, so by default each cell adds a Bernoulli
crossing event with the Brownian bridge probability exp(-2*g*g'/dt); the
formula is written out here on purpose rather than imported, so the oracle
shares no survival math with the estimator it is meant to check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from bcp.boundary import (
    ConstantBoundary,
    GeneralBoundary,
    LinearBoundary,
    PiecewiseLinearBoundary,
    TwoSidedLinearBoundary,
)
from bcp.engine import McEstimate
from bcp.jumps import JumpCountProcess, JumpSizeLaw, draw_jumps

__all__ = ["OracleConfig", "simulate_bcp"]


@dataclass(frozen=True)
class OracleConfig:
    """Grid resolution and sample size for the simulation check."""

    dt: float = 1e-3
    reps: int = 100_000
    seed: int = 0
    bridge_correction: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")


def _values_on(boundary, s: np.ndarray) -> np.ndarray:
    """Upper boundary values at the (sorted) times s, from the true shape."""
    if isinstance(boundary, ConstantBoundary):
        return np.full(s.size, float(boundary.level))
    if isinstance(boundary, LinearBoundary):
        return boundary.slope * s + boundary.intercept
    if isinstance(boundary, PiecewiseLinearBoundary):
        return boundary.value(s)
    if isinstance(boundary, GeneralBoundary):
        try:
            vals = np.asarray(boundary.fn(s), dtype=float)
            if vals.shape == s.shape:
                return vals
        except (TypeError, ValueError):
            pass
        return np.array([float(boundary.fn(v)) for v in s])
    raise TypeError(f"unsupported boundary type {type(boundary).__name__}")


def simulate_bcp(
    boundary,
    process: JumpCountProcess,
    law: JumpSizeLaw,
    t: float,
    config: OracleConfig,
) -> McEstimate:
    """Survival probability by simulating paths on a dt-grid.

    Returns an estimate comparable with bcp(): the fraction of simulated
    paths that never touch the boundary up to the horizon.
    """
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError(f"horizon t must be positive, got {t}")
    begin = time.perf_counter()
    two_sided = isinstance(boundary, TwoSidedLinearBoundary)
    m = max(1, int(math.ceil(t / config.dt)))
    base = np.linspace(0.0, t, m + 1)[1:]
    grid0 = np.concatenate([[0.0], base])
    if two_sided:
        ub_base = boundary.a * grid0 + boundary.b
        lb_base = -(boundary.c * grid0 + boundary.d)
    else:
        ub_base = _values_on(boundary, grid0)
        lb_base = None
        if ub_base[0] <= 0.0:
            # breached at the start: no path survives
            return McEstimate(0.0, 0.0, config.reps, config.seed,
                              time.perf_counter() - begin)

    mask = (1 << 64) - 1
    survived = np.empty(config.reps)
    for r in range(config.reps):
        key = np.array([config.seed & mask, r], dtype=np.uint64)
        rng = Generator(Philox(key=key))
        jumps = draw_jumps(process, law, t, rng, forbidden=base)
        if jumps.count:
            times = np.concatenate([base, jumps.times])
            h = np.concatenate([np.zeros(m), jumps.heights])
            order = np.argsort(times, kind="stable")
            times, h = times[order], h[order]
            full0 = np.concatenate([[0.0], times])
            if two_sided:
                ub = boundary.a * full0 + boundary.b
                lb = -(boundary.c * full0 + boundary.d)
            else:
                ub = _values_on(boundary, full0)
                lb = None
        else:
            times, h = base, np.zeros(m)
            ub, lb = ub_base, lb_base
        dts = np.diff(times, prepend=0.0)
        w = np.cumsum(rng.standard_normal(times.size) * np.sqrt(dts))
        x_post = w + np.cumsum(h)
        x_pre = x_post - h
        crossed = bool(
            np.any(x_pre >= ub[1:]) or np.any(x_post >= ub[1:])
        )
        if not crossed and two_sided:
            crossed = bool(
                np.any(x_pre <= lb[1:]) or np.any(x_post <= lb[1:])
            )
        if not crossed and config.bridge_correction:
            left_x = np.concatenate([[0.0], x_post[:-1]])
            gap_l = ub[:-1] - left_x
            gap_r = ub[1:] - x_pre
            p_up = np.exp(-2.0 * gap_l * gap_r / dts)
            crossed = bool(np.any(rng.random(dts.size) < p_up))
            if not crossed and two_sided:
                gap_l = left_x - lb[:-1]
                gap_r = x_pre - lb[1:]
                p_dn = np.exp(-2.0 * gap_l * gap_r / dts)
                crossed = bool(np.any(rng.random(dts.size) < p_dn))
        survived[r] = 0.0 if crossed else 1.0

    reps = config.reps
    estimate = float(np.mean(survived))
    std_error = (
        float(np.std(survived, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    )
    return McEstimate(estimate, std_error, reps, config.seed,
                      time.perf_counter() - begin)
