"""Tests of the truncated source state and good/bad count statistics."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghost_opa.errors import ResourceLimitError, UsageError
from ghost_opa.photon_stats import (
    DOUBLE_PAIR_SAME_MODE,
    PAIR,
    PAIR_PRODUCT_DISTINCT_MODES,
    VACUUM,
    build_truncated_state,
    classify_counts,
    p_good_closed,
    p_good_oracle,
)


def _class_counts(state):
    out = {VACUUM: 0, PAIR: 0, DOUBLE_PAIR_SAME_MODE: 0, PAIR_PRODUCT_DISTINCT_MODES: 0}
    for t in state.terms:
        out[t.term_class] += 1
    return out


def test_single_mode_term_census():
    state = build_truncated_state(1, 0.3)
    counts = _class_counts(state)
    assert counts == {
        VACUUM: 1,
        PAIR: 1,
        DOUBLE_PAIR_SAME_MODE: 1,
        PAIR_PRODUCT_DISTINCT_MODES: 0,
    }


def test_two_mode_term_census_and_amplitudes():
    xi = 0.2
    state = build_truncated_state(2, xi)
    counts = _class_counts(state)
    # unordered distinct pairs: C(2,2) = 1 term carrying the ordered
    # multiplicity 2 in its amplitude
    assert counts == {
        VACUUM: 1,
        PAIR: 2,
        DOUBLE_PAIR_SAME_MODE: 2,
        PAIR_PRODUCT_DISTINCT_MODES: 1,
    }
    for t in state.terms:
        if t.term_class == PAIR:
            assert t.amplitude == -xi / 2
        elif t.term_class == DOUBLE_PAIR_SAME_MODE:
            assert t.amplitude == xi * xi / 8
        elif t.term_class == PAIR_PRODUCT_DISTINCT_MODES:
            assert t.amplitude == 2 * xi * xi / 8


def test_distinct_pair_count_grows_binomially():
    state = build_truncated_state(6, 0.1)
    assert _class_counts(state)[PAIR_PRODUCT_DISTINCT_MODES] == 15  # C(6,2)


def test_state_validation():
    with pytest.raises(UsageError):
        build_truncated_state(0, 0.1)
    with pytest.raises(UsageError):
        build_truncated_state(2, 0.0)
    with pytest.raises(UsageError):
        build_truncated_state(2, 0.6)  # outside the perturbative window


def test_single_mode_has_no_bad_counts():
    counts = classify_counts(build_truncated_state(1, 0.4))
    assert counts.bad_weight == 0.0
    assert counts.good_weight > 0.0


def test_bad_fraction_vanishes_at_small_gain():
    ratios = []
    for xi in (0.4, 0.1, 0.02):
        c = classify_counts(build_truncated_state(5, xi))
        ratios.append(c.bad_weight / c.good_weight)
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 1e-4  # bad weight is higher order in the gain


# ------------------------------------------------------------ closed form


def test_closed_form_reference_values():
    # n=4, xi=0.4: (16 + 2.5*0.16) / (16 + 4*0.16) = 16.4/16.64
    assert p_good_closed(4, 0.4) == pytest.approx(16.4 / 16.64, rel=1e-15)
    assert p_good_closed(1, 0.123) == 1.0
    assert p_good_closed(1, 3.0) == 1.0


def test_closed_form_large_n_limit():
    # exact deviation at n: (8 + xi^2/2) / (16 + n xi^2)
    n = 10**6
    dev = p_good_closed(n, 0.4) - 0.5
    assert dev == pytest.approx((8 + 0.08) / (16 + 0.16 * n), rel=1e-12)
    assert abs(p_good_closed(10**7, 0.4) - 0.5) < 1e-5


def test_closed_form_bounds_and_monotonicity():
    for n in range(2, 10):
        assert 0.5 < p_good_closed(n, 0.3) < 1.0
        assert p_good_closed(n, 0.3) < p_good_closed(n - 1, 0.3)
        # decreasing in the gain for n >= 2
        assert p_good_closed(n, 0.4) < p_good_closed(n, 0.2)


@settings(max_examples=80, deadline=None)
@given(n=st.integers(min_value=1, max_value=10**6), xi=st.floats(min_value=1e-6, max_value=2.0))
def test_closed_form_bounds_property(n, xi):
    p = p_good_closed(n, xi)
    assert 0.5 < p <= 1.0
    assert (p == 1.0) == (n == 1)


# ---------------------------------------------------------------- oracle


def test_oracle_single_mode_is_unity():
    assert p_good_oracle(1, 0.4) == 1.0


def test_oracle_matches_unordered_convention_reduction():
    # independent algebraic reduction of the enumerated weights:
    # (16 + n xi^2) / (16 + (2n-1) xi^2)
    for n in range(1, 9):
        for xi in (0.1, 0.2, 0.4):
            expected = (16 + n * xi * xi) / (16 + (2 * n - 1) * xi * xi)
            assert p_good_oracle(n, xi) == pytest.approx(expected, rel=1e-12)


def test_oracle_vs_closed_form_documented_discrepancy():
    # equal at n=1; for n >= 2 the closed form sits above the enumeration
    assert abs(p_good_oracle(1, 0.4) - p_good_closed(1, 0.4)) <= 1e-12
    for n in range(2, 9):
        diff = p_good_closed(n, 0.4) - p_good_oracle(n, 0.4)
        assert diff > 0.0
    # frozen reference point of the documented discrepancy
    assert p_good_oracle(4, 0.4) == pytest.approx(16.64 / 17.12, rel=1e-12)
    assert p_good_oracle(2, 0.2) == pytest.approx(
        (16 + 2 * 0.04) / (16 + 3 * 0.04), rel=1e-12
    )


def test_oracle_monotone_decreasing_in_n():
    vals = [p_good_oracle(n, 0.3) for n in range(1, 9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_oracle_resource_bound():
    with pytest.raises(ResourceLimitError):
        p_good_oracle(13, 0.3)


def test_both_forms_share_the_half_limit():
    # closed form analytically; enumeration via its reduction at the cap
    assert p_good_closed(10**8, 0.4) == pytest.approx(0.5, abs=1e-6)
    n = 12
    oracle_val = p_good_oracle(n, 0.4)
    reduction = (16 + n * 0.16) / (16 + (2 * n - 1) * 0.16)
    assert oracle_val == pytest.approx(reduction, rel=1e-12)
    assert oracle_val > 0.5  # still above the limit from above
