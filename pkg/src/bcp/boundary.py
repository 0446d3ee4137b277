"""Boundary shapes and the time partition the Monte Carlo engine walks.

A boundary is either one-sided (constant, linear, piecewise linear, or a
general function that gets discretized into a piecewise-linear one) or a
two-sided linear corridor.  `merge_partition` interleaves jump times with
the piecewise-linear breakpoints and tracks the boundary effectively seen
by the continuous part of the process, whose level drops by each jump
height as jumps accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from bcp.jumps import JumpRealization

__all__ = [
    "Boundary",
    "ConstantBoundary",
    "GeneralBoundary",
    "LinearBoundary",
    "MergedPartition",
    "OneSidedBoundary",
    "PiecewiseLinearBoundary",
    "TwoSidedLinearBoundary",
    "as_piecewise",
    "boundary_spec",
    "discretize",
    "merge_partition",
    "named_profiles",
    "parse_boundary",
]

# Relative slack for dropping interior discretization nodes that sit exactly
# on the chord of their neighbours (a linear function fed as General must
# collapse to a single segment so every n yields the same estimator).
_COLLINEAR_RTOL = 1e-12


@dataclass(frozen=True)
class ConstantBoundary:
    level: float

    def __post_init__(self):
        if not math.isfinite(self.level):
            raise ValueError(f"level must be finite, got {self.level}")

    def value(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.level)


@dataclass(frozen=True)
class LinearBoundary:
    slope: float
    intercept: float

    def __post_init__(self):
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValueError("slope and intercept must be finite")

    def value(self, s):
        return self.slope * np.asarray(s, dtype=float) + self.intercept


@dataclass(frozen=True)
class TwoSidedLinearBoundary:
    """Corridor: upper line a*s + b, lower line -(c*s + d)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.b <= 0.0 or self.d <= 0.0:
            raise ValueError(
                f"corridor must contain 0 at s=0: need b > 0 and d > 0, "
                f"got b={self.b}, d={self.d}"
            )

    def upper(self, s):
        return self.a * np.asarray(s, dtype=float) + self.b

    def lower(self, s):
        return -(self.c * np.asarray(s, dtype=float) + self.d)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearBoundary:
    """Linear interpolation through (times, values); times start at 0."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("need matching 1-d times and values with >= 2 nodes")
        if times[0] != 0.0:
            raise ValueError(f"first breakpoint must be 0, got {times[0]}")
        if not (np.diff(times) > 0.0).all():
            bad = times[1:][np.diff(times) <= 0.0][0]
            raise ValueError(
                f"breakpoints must be strictly increasing, {bad!r} is not"
            )
        if not (np.isfinite(times).all() and np.isfinite(values).all()):
            raise ValueError("breakpoints and values must be finite")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def value(self, s):
        return np.interp(np.asarray(s, dtype=float), self.times, self.values)


@dataclass(frozen=True)
class GeneralBoundary:
    """Arbitrary boundary function, later discretized into n linear pieces."""

    fn: Callable[[float], float]
    n: int = 32

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


OneSidedBoundary = Union[
    ConstantBoundary, LinearBoundary, PiecewiseLinearBoundary, GeneralBoundary
]
Boundary = Union[OneSidedBoundary, TwoSidedLinearBoundary]


def _profile_quad(s):
    return 1.0 + np.asarray(s, dtype=float) ** 2


def _profile_sqrt(s):
    return np.sqrt(1.0 + np.asarray(s, dtype=float))


def _profile_expneg(s):
    return np.exp(-np.asarray(s, dtype=float))


def named_profiles() -> dict[str, Callable]:
    """Built-in nonlinear boundary profiles addressable from the CLI."""
    return {"quad": _profile_quad, "sqrt": _profile_sqrt, "expneg": _profile_expneg}


def _drop_collinear(times: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if times.size <= 2:
        return times, values
    left_t, mid_t, right_t = times[:-2], times[1:-1], times[2:]
    left_v, right_v = values[:-2], values[2:]
    chord = left_v + (right_v - left_v) * (mid_t - left_t) / (right_t - left_t)
    off_chord = np.abs(values[1:-1] - chord) > _COLLINEAR_RTOL * np.maximum(
        1.0, np.abs(values[1:-1])
    )
    keep = np.concatenate(([True], off_chord, [True]))
    return times[keep], values[keep]


def discretize(boundary: GeneralBoundary, t: float) -> PiecewiseLinearBoundary:
    """Sample the boundary function on n+1 equally spaced nodes.

    Interior nodes lying exactly on the chord of their neighbours are
    dropped: the interpolant is unchanged and a linear function collapses to
    one segment whatever n was requested.
    """
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    nodes = np.linspace(0.0, t, boundary.n + 1)
    try:
        values = np.asarray(boundary.fn(nodes), dtype=float)
        if values.shape != nodes.shape:
            raise TypeError
    except (TypeError, ValueError):
        # scalar-only profile function
        values = np.array([float(boundary.fn(s)) for s in nodes])
    if not np.isfinite(values).all():
        raise ValueError("boundary function returned non-finite values on [0, t]")
    nodes, values = _drop_collinear(nodes, values)
    return PiecewiseLinearBoundary(nodes, values)


def as_piecewise(boundary: OneSidedBoundary, t: float) -> PiecewiseLinearBoundary:
    """Canonical piecewise-linear form of a one-sided boundary on [0, t]."""
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if isinstance(boundary, ConstantBoundary):
        return PiecewiseLinearBoundary(
            np.array([0.0, t]), np.array([boundary.level, boundary.level])
        )
    if isinstance(boundary, LinearBoundary):
        return PiecewiseLinearBoundary(
            np.array([0.0, t]),
            np.array([boundary.intercept, boundary.slope * t + boundary.intercept]),
        )
    if isinstance(boundary, PiecewiseLinearBoundary):
        if boundary.horizon != t:
            raise ValueError(
                f"piecewise boundary ends at {boundary.horizon}, expected horizon {t}"
            )
        return boundary
    if isinstance(boundary, GeneralBoundary):
        return discretize(boundary, t)
    raise TypeError(f"not a one-sided boundary: {boundary!r}")


@dataclass(frozen=True, eq=False)
class MergedPartition:
    """Breakpoints and jump times merged into one walkable partition.

    Points cover (0, t] with the horizon always last.  For each point the
    effective boundary (original boundary minus all jumps strictly before,
    resp. up to and including, that point) is stored as a left and a right
    limit; the two differ exactly by the jump height at that point.
    """

    times: np.ndarray
    heights: np.ndarray
    bound_left: np.ndarray
    bound_right: np.ndarray
    start_bound: float
    horizon: float

    @property
    def gates(self) -> np.ndarray:
        """Upper admissible value at each point: min of the two limits."""
        return np.minimum(self.bound_left, self.bound_right)


def merge_partition(
    pwl: PiecewiseLinearBoundary, jumps: JumpRealization
) -> MergedPartition:
    """Interleave jump times with breakpoints and offset the boundary.

    Jump times must be distinct from the breakpoints and from each other;
    duplicates mean an upstream sampling guarantee was violated.
    """
    breaks = pwl.times[1:]
    horizon = pwl.horizon
    if jumps.count:
        jt = jumps.times
        if jt[0] <= 0.0 or jt[-1] >= horizon:
            raise ValueError("jump times must lie strictly inside (0, horizon)")
        times = np.concatenate([breaks, jt])
        heights = np.concatenate([np.zeros(breaks.size), jumps.heights])
        order = np.argsort(times, kind="stable")
        times = times[order]
        heights = heights[order]
        if (np.diff(times) <= 0.0).any():
            raise ValueError("duplicate partition point: jump time hit a breakpoint")
        base = np.interp(times, pwl.times, pwl.values)
        cum = np.cumsum(heights)
        bound_right = base - cum
        bound_left = bound_right + heights
    else:
        times = breaks.copy()
        heights = np.zeros(breaks.size)
        bound_left = pwl.values[1:].copy()
        bound_right = bound_left
    return MergedPartition(
        times=times,
        heights=heights,
        bound_left=bound_left,
        bound_right=bound_right,
        start_bound=float(pwl.values[0]),
        horizon=horizon,
    )


# --- CLI boundary grammar -------------------------------------------------

def parse_boundary(spec: str, n_points: int = 32) -> Boundary:
    """Parse a boundary spec string.

    Grammar: ``constant:<b>``, ``linear:<a>,<b>``,
    ``two-sided:<a>,<b>,<c>,<d>``, ``pwl:<s0:v0;s1:v1;...>``, or one of the
    named profiles (``quad``, ``sqrt``, ``expneg``) which become General
    boundaries with ``n_points`` nodes.
    """
    spec = spec.strip()
    profiles = named_profiles()
    if spec in profiles:
        return GeneralBoundary(fn=profiles[spec], n=n_points)
    kind, sep, payload = spec.partition(":")
    if not sep:
        raise ValueError(f"unrecognized boundary spec {spec!r}")
    if kind == "constant":
        return ConstantBoundary(_parse_floats(payload, 1, spec)[0])
    if kind == "linear":
        a, b = _parse_floats(payload, 2, spec)
        return LinearBoundary(slope=a, intercept=b)
    if kind == "two-sided":
        a, b, c, d = _parse_floats(payload, 4, spec)
        return TwoSidedLinearBoundary(a=a, b=b, c=c, d=d)
    if kind == "pwl":
        pairs = [piece for piece in payload.split(";") if piece]
        if len(pairs) < 2:
            raise ValueError(f"pwl boundary needs at least two nodes: {spec!r}")
        times, values = [], []
        for piece in pairs:
            s, sep2, v = piece.partition(":")
            if not sep2:
                raise ValueError(f"bad pwl node {piece!r} in {spec!r}")
            times.append(_parse_float(s, spec))
            values.append(_parse_float(v, spec))
        return PiecewiseLinearBoundary(np.array(times), np.array(values))
    raise ValueError(f"unrecognized boundary kind {kind!r} in {spec!r}")


def _parse_float(token: str, spec: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"bad number {token!r} in boundary spec {spec!r}") from None


def _parse_floats(payload: str, n: int, spec: str) -> list[float]:
    tokens = payload.split(",")
    if len(tokens) != n:
        raise ValueError(f"expected {n} comma-separated numbers in {spec!r}")
    return [_parse_float(tok, spec) for tok in tokens]


def boundary_spec(boundary: Boundary) -> str:
    """Canonical spec string for a boundary (inverse of parse_boundary)."""
    if isinstance(boundary, ConstantBoundary):
        return f"constant:{boundary.level!r}"
    if isinstance(boundary, LinearBoundary):
        return f"linear:{boundary.slope!r},{boundary.intercept!r}"
    if isinstance(boundary, TwoSidedLinearBoundary):
        return f"two-sided:{boundary.a!r},{boundary.b!r},{boundary.c!r},{boundary.d!r}"
    if isinstance(boundary, PiecewiseLinearBoundary):
        nodes = ";".join(
            f"{float(s)!r}:{float(v)!r}" for s, v in zip(boundary.times, boundary.values)
        )
        return f"pwl:{nodes}"
    if isinstance(boundary, GeneralBoundary):
        for name, fn in named_profiles().items():
            if boundary.fn is fn:
                return name
        return f"general:{getattr(boundary.fn, '__name__', '<fn>')}"
    raise TypeError(f"not a boundary: {boundary!r}")
