"""Closed-form crossing probabilities for Brownian motion and linear boundaries.

Everything in this module is deterministic: exponential bridge-crossing
factors, the normal-CDF expression for one linear boundary, and the
reflection series for a two-sided linear corridor (conditional and
unconditional variants).  The Monte Carlo engine composes these per jump
segment; they are also useful on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import log_ndtr, ndtr

__all__ = [
    "LinearBoundaryParams",
    "SeriesConvergenceError",
    "SeriesTolerance",
    "TwoSidedParams",
    "anderson_chi",
    "anderson_theta",
    "bridge_upcross_prob",
    "linear_noncross_prob",
    "two_sided_segment_factor",
    "two_sided_tail_prob",
]

# Exponent magnitude above which exp(e)*Phi(z) products switch to log space.
_LOG_SPACE_CUTOFF = 30.0
# Cap on series exponents: keeps invalid input from overflowing math.exp;
# divergence is then reported by the max-terms guard instead of an FPE.
_EXP_ARG_CAP = 700.0


class SeriesConvergenceError(RuntimeError):
    """Reflection series failed to reach tolerance within the term budget."""

    def __init__(self, message: str, last_term: float):
        super().__init__(f"{message} (last term magnitude {last_term:.3e})")
        self.last_term = last_term


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class LinearBoundaryParams:
    """One-sided linear boundary a*s + b on a horizon t."""

    a: float
    b: float
    t: float

    def __post_init__(self):
        _require_finite(a=self.a, b=self.b, t=self.t)
        if self.t <= 0.0:
            raise ValueError(f"horizon t must be positive, got {self.t}")


@dataclass(frozen=True)
class TwoSidedParams:
    """Corridor between upper line a*s + b and lower line -(c*s + d).

    b and d must be positive so the corridor contains the origin, and the
    corridor must stay nondegenerate on [0, t]: a*s + b > -(c*s + d).
    """

    a: float
    b: float
    c: float
    d: float
    t: float

    def __post_init__(self):
        _require_finite(a=self.a, b=self.b, c=self.c, d=self.d, t=self.t)
        if self.t <= 0.0:
            raise ValueError(f"horizon t must be positive, got {self.t}")
        if self.b <= 0.0 or self.d <= 0.0:
            raise ValueError(
                f"corridor must contain the origin: need b > 0 and d > 0, "
                f"got b={self.b}, d={self.d}"
            )
        # Width is linear in s, so checking both endpoints suffices.
        if (self.a + self.c) * self.t + self.b + self.d <= 0.0:
            raise ValueError("corridor degenerates on [0, t]: upper line meets lower line")


@dataclass(frozen=True)
class SeriesTolerance:
    """Truncation policy for the reflection series."""

    eps: float = 1e-12
    max_terms: int = 200

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


_DEFAULT_TOL = SeriesTolerance()


def bridge_upcross_prob(a: float, b: float, t: float, x: float) -> float:
    """Probability that a Brownian bridge from 0 to x on [0, t] crosses a*s + b.

    For x < a*t + b and b > 0 this is exp(-2*b*(a*t + b - x)/t); if the
    boundary is already breached at either end (b <= 0 or x >= a*t + b) the
    crossing is certain.
    """
    _require_finite(a=a, b=b, t=t, x=x)
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if b <= 0.0:
        return 1.0
    gap_end = a * t + b - x
    if gap_end <= 0.0:
        return 1.0
    return math.exp(-2.0 * b * gap_end / t)


def linear_noncross_prob(a: float, b: float, t: float) -> float:
    """P(B_s < a*s + b for all s <= t) for a standard Brownian motion.

    Equals Phi(a*sqrt(t) + b/sqrt(t)) - exp(-2ab) * Phi(a*sqrt(t) - b/sqrt(t)).
    The image term is evaluated in log space when 2|ab| is large, so strongly
    tilted boundaries do not overflow.
    """
    _require_finite(a=a, b=b, t=t)
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if b <= 0.0:
        return 0.0
    rt = math.sqrt(t)
    direct = float(ndtr(a * rt + b / rt))
    image = _exp_times_phi(-2.0 * a * b, a * rt - b / rt)
    return _clamp01(direct - image)


def _clamp01(value: float) -> float:
    return min(1.0, max(0.0, value))


def _exp_times_phi(exponent: float, z: float) -> float:
    """exp(exponent) * Phi(z) without intermediate over/underflow."""
    if abs(exponent) <= _LOG_SPACE_CUTOFF:
        return math.exp(exponent) * float(ndtr(z))
    log_term = exponent + float(log_ndtr(z))
    if log_term >= _EXP_ARG_CAP:
        return math.inf
    return math.exp(log_term)


def _capped_exp(arg: float) -> float:
    return math.exp(min(arg, _EXP_ARG_CAP))


def anderson_theta(
    gamma1: float,
    delta1: float,
    gamma2: float,
    delta2: float,
    t: float,
    x: float,
    tol: SeriesTolerance = _DEFAULT_TOL,
) -> float:
    """Conditional two-line exit probability of a pinned Brownian path.

    Given B_t = x, returns the probability that the path reaches the line
    delta1*s + gamma1 at some s < t while having stayed strictly above the
    line delta2*s + gamma2 up to that moment.  Requires gamma1 > 0 > gamma2
    (a corridor containing the start point); if x >= delta1*t + gamma1 the
    endpoint itself is beyond the first line and the value is 1.

    Evaluated by an alternating reflection series whose terms decay like
    exp(-C*r^2/t); summation stops once a term drops below tol.eps.
    """
    _require_finite(gamma1=gamma1, delta1=delta1, gamma2=gamma2, delta2=delta2, t=t, x=x)
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")
    if x >= delta1 * t + gamma1:
        return 1.0

    # End gaps to each line; p > 0 by the branch above, q < 0 whenever the
    # endpoint sits above line 2.
    p = gamma1 + delta1 * t - x
    q = gamma2 + delta2 * t - x
    g1p = gamma1 * p
    g2q = gamma2 * q
    g1q = gamma1 * q
    g2p = gamma2 * p
    scale = 2.0 / t

    total = 0.0
    for r in range(1, tol.max_terms + 1):
        rm = r - 1.0
        odd = r * r * g1p + rm * rm * g2q - r * rm * (g1q + g2p)
        even = r * r * (g1p + g2q) - r * rm * g1q - r * (r + 1.0) * g2p
        term_odd = _capped_exp(-scale * odd)
        term_even = _capped_exp(-scale * even)
        total += term_odd - term_even
        if max(term_odd, term_even) < tol.eps:
            return _clamp01(total)
    raise SeriesConvergenceError(
        f"conditional corridor series did not converge in {tol.max_terms} terms",
        last_term=max(term_odd, term_even),
    )


def anderson_chi(
    gamma1: float,
    delta1: float,
    gamma2: float,
    delta2: float,
    t: float,
    tol: SeriesTolerance = _DEFAULT_TOL,
) -> float:
    """Unconditional two-line exit probability through the first line.

    Probability that Brownian motion reaches delta1*s + gamma1 before time t
    while having stayed above delta2*s + gamma2 throughout.  Requires
    gamma1 > 0 > gamma2.  Each series term pairs an exponential tilt with a
    normal CDF; the pair is evaluated in log space whenever the tilt is
    large, which keeps slanted corridors (huge exp, vanishing CDF) stable.
    """
    _require_finite(gamma1=gamma1, delta1=delta1, gamma2=gamma2, delta2=delta2, t=t)
    if t <= 0.0:
        raise ValueError(f"horizon t must be positive, got {t}")

    rt = math.sqrt(t)
    d1t = delta1 * t
    g1d1_sum = gamma1 * delta1 + gamma2 * delta2
    total = float(ndtr(-(d1t + gamma1) / rt))
    for r in range(1, tol.max_terms + 1):
        rm = r - 1.0
        rp = r + 1.0
        p1 = _exp_times_phi(
            -2.0 * (r * gamma1 - rm * gamma2) * (r * delta1 - rm * delta2),
            (d1t + 2.0 * rm * gamma2 - (2.0 * r - 1.0) * gamma1) / rt,
        )
        p2 = _exp_times_phi(
            -2.0 * (r * r * g1d1_sum - r * rm * gamma1 * delta2 - r * rp * gamma2 * delta1),
            (d1t + 2.0 * r * gamma2 - (2.0 * r - 1.0) * gamma1) / rt,
        )
        p3 = _exp_times_phi(
            -2.0 * (rm * gamma1 - r * gamma2) * (rm * delta1 - r * delta2),
            -(d1t - 2.0 * r * gamma2 + (2.0 * r - 1.0) * gamma1) / rt,
        )
        p4 = _exp_times_phi(
            -2.0 * (r * r * g1d1_sum - r * rm * gamma2 * delta1 - r * rp * gamma1 * delta2),
            -(d1t + (2.0 * r + 1.0) * gamma1 - 2.0 * r * gamma2) / rt,
        )
        total += p1 - p2 - p3 + p4
        largest = max(p1, p2, p3, p4)
        if largest < tol.eps:
            return _clamp01(total)
    raise SeriesConvergenceError(
        f"corridor exit series did not converge in {tol.max_terms} terms",
        last_term=largest,
    )


def two_sided_segment_factor(
    params: TwoSidedParams, x: float, tol: SeriesTolerance = _DEFAULT_TOL
) -> float:
    """Survival factor for one corridor segment given the segment endpoint.

    Probability that a pinned Brownian path from 0 to x on [0, t] stays
    strictly inside the corridor, i.e. never reaches a*s + b from below nor
    -(c*s + d) from above.  Endpoints outside the corridor return 0.
    """
    _require_finite(x=x)
    a, b, c, d, t = params.a, params.b, params.c, params.d, params.t
    if x >= a * t + b or x <= -(c * t + d):
        return 0.0
    up_first = anderson_theta(b, a, -d, -c, t, x, tol)
    down_first = anderson_theta(d, c, -b, -a, t, -x, tol)
    return _clamp01(1.0 - up_first - down_first)


def two_sided_tail_prob(params: TwoSidedParams, tol: SeriesTolerance = _DEFAULT_TOL) -> float:
    """Probability that Brownian motion stays inside the corridor up to t.

    One minus the exit probabilities through each side; each side is an
    anderson_chi evaluation with the opposite line supplying the constraint.
    """
    a, b, c, d, t = params.a, params.b, params.c, params.d, params.t
    exit_up = anderson_chi(b, a, -d, -c, t, tol)
    exit_down = anderson_chi(d, c, -b, -a, t, tol)
    return _clamp01(1.0 - exit_up - exit_down)
