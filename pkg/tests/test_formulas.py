import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import ndtr

from bcp.formulas import (
    LinearBoundaryParams,
    SeriesConvergenceError,
    SeriesTolerance,
    TwoSidedParams,
    anderson_chi,
    anderson_theta,
    bridge_upcross_prob,
    linear_noncross_prob,
    two_sided_segment_factor,
    two_sided_tail_prob,
)
from conftest import bridge_corridor_stay, corridor_stay_quad, symmetric_corridor_stay

# closed-form reference values, computed independently at high precision
TWO_PHI1_MINUS_1 = 0.6826894921370859
LINEAR_UP = 0.941849095833705        # a=0.5, b=1.5, t=1
LINEAR_DOWN = 0.7393857283676394     # a=-0.5, b=1.5, t=1
SYM_CORRIDOR_STAY = 0.3707774297995239


def test_bridge_upcross_flat_values():
    assert bridge_upcross_prob(0.0, 1.0, 1.0, 0.0) == pytest.approx(
        math.exp(-2.0), rel=1e-15
    )
    assert bridge_upcross_prob(1.0, 1.0, 1.0, -1.0) == pytest.approx(
        0.0024787521766663585, rel=1e-14
    )


def test_bridge_upcross_certain_cases():
    # boundary already breached at the start or at the end
    assert bridge_upcross_prob(0.0, -0.5, 1.0, -2.0) == 1.0
    assert bridge_upcross_prob(0.0, 1.0, 1.0, 1.5) == 1.0
    assert bridge_upcross_prob(0.0, 1.0, 1.0, 1.0) == 1.0


def test_bridge_upcross_monotone_in_intercept():
    probs = [bridge_upcross_prob(0.2, b, 2.0, 0.1) for b in np.linspace(0.2, 3.0, 12)]
    assert all(p1 >= p2 for p1, p2 in zip(probs, probs[1:]))
    assert all(0.0 <= p <= 1.0 for p in probs)


def test_linear_noncross_reference_values():
    assert linear_noncross_prob(0.0, 1.0, 1.0) == pytest.approx(
        TWO_PHI1_MINUS_1, abs=1e-14
    )
    assert linear_noncross_prob(0.5, 1.5, 1.0) == pytest.approx(LINEAR_UP, abs=1e-14)
    assert linear_noncross_prob(-0.5, 1.5, 1.0) == pytest.approx(LINEAR_DOWN, abs=1e-14)


def test_linear_noncross_degenerate_and_range():
    assert linear_noncross_prob(1.0, 0.0, 1.0) == 0.0
    assert linear_noncross_prob(1.0, -0.3, 1.0) == 0.0
    for a in (-2.0, -0.3, 0.0, 0.7, 5.0):
        for b in (0.05, 0.8, 3.0):
            p = linear_noncross_prob(a, b, 1.3)
            assert 0.0 <= p <= 1.0


def test_linear_noncross_strong_tilt_log_space():
    # 2ab = 120 forces the image term through the log-space branch
    p = linear_noncross_prob(-12.0, 5.0, 1.0)
    direct = ndtr(-12.0 + 5.0)
    image = math.exp(120.0 + math.log(ndtr(-12.0 - 5.0)))
    assert p == pytest.approx(direct - image, rel=1e-12)
    assert 0.0 < p < 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        LinearBoundaryParams(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        TwoSidedParams(0.0, -1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        TwoSidedParams(0.0, 1.0, 0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        # corridor pinches shut before the horizon
        TwoSidedParams(-2.0, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        SeriesTolerance(eps=0.0)
    with pytest.raises(ValueError):
        SeriesTolerance(max_terms=0)


def test_theta_matches_bridge_image_formula():
    # straight corridor: 1 - theta_up - theta_down equals the classical
    # image-expansion stay probability of the pinned path
    for hi in (0.7, 1.3):
        for lo in (-0.5, -1.1):
            for t in (0.5, 1.7):
                for x in np.linspace(lo + 0.05, hi - 0.05, 7):
                    up = anderson_theta(hi, 0.0, lo, 0.0, t, x)
                    down = anderson_theta(-lo, 0.0, -hi, 0.0, t, -x)
                    ref = bridge_corridor_stay(hi, lo, t, float(x))
                    assert 1.0 - up - down == pytest.approx(ref, abs=1e-12)


def test_theta_endpoint_beyond_first_line():
    assert anderson_theta(1.0, 0.0, -1.0, 0.0, 1.0, 1.0) == 1.0
    assert anderson_theta(1.0, -0.5, -1.0, 0.0, 1.0, 0.7) == 1.0


def test_theta_slanted_regression_values():
    # pinned against a 4e5-path bridge simulation when first derived
    assert anderson_theta(1.0, 0.3, -0.8, 0.2, 1.0, 0.4) == pytest.approx(
        0.16342564259865874, abs=1e-13
    )
    assert anderson_theta(0.7, -0.4, -1.3, 0.6, 1.4, -0.9) == pytest.approx(
        0.33842436998546427, abs=1e-13
    )


def test_theta_lower_line_removed_reduces_to_bridge():
    # sending the lower line to -infinity leaves the one-line bridge formula
    for a in (-0.4, 0.0, 0.8):
        for b in (0.5, 1.4):
            for x in np.linspace(-2.0, a + b - 0.05, 9):
                th = anderson_theta(b, a, -1e6, 0.0, 1.0, float(x))
                ref = bridge_upcross_prob(a, b, 1.0, float(x))
                assert th == pytest.approx(ref, abs=1e-10)


def test_theta_tolerance_insensitive_once_converged():
    loose = SeriesTolerance(eps=1e-8)
    tight = SeriesTolerance(eps=1e-15)
    v1 = anderson_theta(1.0, 0.3, -0.8, 0.2, 1.0, 0.4, tol=loose)
    v2 = anderson_theta(1.0, 0.3, -0.8, 0.2, 1.0, 0.4, tol=tight)
    assert abs(v1 - v2) < 1e-8


def test_theta_series_budget_error():
    # wide horizon makes the terms decay like exp(-r^2/12); three terms
    # cannot reach 1e-12
    with pytest.raises(SeriesConvergenceError) as exc_info:
        anderson_theta(1.0, 0.0, -1.0, 0.0, 24.0, 0.0,
                       tol=SeriesTolerance(max_terms=3))
    assert exc_info.value.last_term > 0.0


def test_chi_symmetric_corridor():
    # by symmetry each line takes half the exit probability
    stay = symmetric_corridor_stay(1.0, 1.0)
    assert anderson_chi(1.0, 0.0, -1.0, 0.0, 1.0) == pytest.approx(
        (1.0 - stay) / 2.0, abs=1e-13
    )
    assert anderson_chi(1.0, 0.0, -1.0, 0.0, 1.0) == pytest.approx(
        0.31461128510023806, abs=1e-13
    )


def test_chi_is_gaussian_integral_of_theta():
    # unconditional exit = conditional exit integrated over the endpoint law;
    # past the first line the up-first probability is one minus the mirrored
    # down-first probability
    for g1, d1, g2, d2, t in [
        (1.0, 0.3, -0.8, 0.2, 1.0),
        (0.7, -0.4, -1.3, 0.6, 1.4),
    ]:
        rt = math.sqrt(t)

        def density(x):
            return math.exp(-x * x / (2.0 * t)) / (rt * math.sqrt(2.0 * math.pi))

        def below_fn(x):
            return anderson_theta(g1, d1, g2, d2, t, x) * density(x)

        def above_fn(x):
            down_first = anderson_theta(-g2, -d2, -g1, -d1, t, -x)
            return (1.0 - down_first) * density(x)

        upper_end = d1 * t + g1
        below, _ = quad(below_fn, -12.0 * rt, upper_end, limit=400)
        above, _ = quad(above_fn, upper_end, 12.0 * rt, limit=400)
        assert anderson_chi(g1, d1, g2, d2, t) == pytest.approx(
            below + above, abs=1e-9
        )


def test_chi_slanted_regression_values():
    assert anderson_chi(1.0, 0.3, -0.8, 0.2, 1.0) == pytest.approx(
        0.22392181595014857, abs=1e-13
    )
    assert anderson_chi(0.7, -0.4, -1.3, 0.6, 1.4) == pytest.approx(
        0.6367106189747261, abs=1e-13
    )


def test_chi_lower_line_removed_reduces_to_one_sided():
    for a in (-0.5, 0.0, 0.9):
        for b in (0.4, 1.2):
            chi = anderson_chi(b, a, -1e6, 0.0, 1.0)
            assert chi == pytest.approx(
                1.0 - linear_noncross_prob(a, b, 1.0), abs=1e-12
            )


def test_segment_factor_matches_image_formula():
    for hi, lo_mag, t in [(1.0, 1.0, 1.0), (0.7, 1.1, 0.5)]:
        params = TwoSidedParams(0.0, hi, 0.0, lo_mag, t)
        for x in np.linspace(-lo_mag + 0.1, hi - 0.1, 5):
            ref = bridge_corridor_stay(hi, -lo_mag, t, float(x))
            assert two_sided_segment_factor(params, float(x)) == pytest.approx(
                ref, abs=1e-12
            )


def test_segment_factor_outside_corridor_is_zero():
    params = TwoSidedParams(0.2, 1.0, -0.1, 1.2, 1.0)
    assert two_sided_segment_factor(params, 1.3) == 0.0
    assert two_sided_segment_factor(params, 1.2) == 0.0   # exactly on the line
    assert two_sided_segment_factor(params, -1.1) == 0.0
    assert 0.0 < two_sided_segment_factor(params, 0.0) < 1.0


def test_tail_prob_matches_quadrature():
    assert two_sided_tail_prob(TwoSidedParams(0.0, 1.0, 0.0, 1.0, 1.0)) == pytest.approx(
        SYM_CORRIDOR_STAY, abs=1e-13
    )
    for a, b, c, d, t in [
        (0.0, 0.8, 0.0, 1.2, 0.7),
        (0.3, 1.0, -0.1, 1.2, 1.0),
    ]:
        params = TwoSidedParams(a, b, c, d, t)
        rt = math.sqrt(t)

        def integrand(x):
            return (
                two_sided_segment_factor(params, x)
                * math.exp(-x * x / (2.0 * t))
                / (rt * math.sqrt(2.0 * math.pi))
            )

        ref, _ = quad(integrand, -(c * t + d), a * t + b, limit=400)
        assert two_sided_tail_prob(params) == pytest.approx(ref, abs=1e-10)


def test_tail_prob_reflection_symmetry():
    # swapping the two lines mirrors the corridor across zero
    grid = [
        (0.0, 1.0, 0.0, 1.0, 1.0),
        (0.3, 1.0, -0.1, 1.2, 1.0),
        (-0.2, 0.6, 0.5, 0.9, 2.0),
        (1.0, 0.4, -0.3, 2.0, 0.6),
    ]
    for a, b, c, d, t in grid:
        lhs = two_sided_tail_prob(TwoSidedParams(a, b, c, d, t))
        rhs = two_sided_tail_prob(TwoSidedParams(c, d, a, b, t))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_tail_prob_one_line_removed():
    # a ridiculously distant lower line leaves the one-sided formula
    assert two_sided_tail_prob(TwoSidedParams(0.5, 1.5, 0.0, 1e6, 1.0)) == pytest.approx(
        LINEAR_UP, abs=1e-12
    )


def test_probabilities_stay_in_unit_interval(rng):
    for _ in range(200):
        a, c = rng.normal(0.0, 0.8, size=2)
        b, d = rng.uniform(0.1, 2.0, size=2)
        t = rng.uniform(0.2, 2.5)
        if (a + c) * t + b + d <= 0.05:
            continue
        params = TwoSidedParams(a, b, c, d, t)
        assert 0.0 <= two_sided_tail_prob(params) <= 1.0
        x = rng.uniform(-(c * t + d), a * t + b)
        assert 0.0 <= two_sided_segment_factor(params, float(x)) <= 1.0


def test_nan_inputs_rejected():
    with pytest.raises(ValueError):
        linear_noncross_prob(math.nan, 1.0, 1.0)
    with pytest.raises(ValueError):
        anderson_theta(1.0, 0.0, math.inf, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        bridge_upcross_prob(0.0, math.nan, 1.0, 0.0)
