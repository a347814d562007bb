"""Acceptance suite: every criterion at its stated tolerance, one printed
pass/fail line each.

Three checks are expected to fail and are left failing on purpose; see the
package README. The exhaustive decoder search legitimately finds rates
below the closed form near the zero-rate plateau for binding perception
budgets (per-branch marginal deviations cancel there), so the 0.02-bit
sandwich, the q = 0 full-grid reduction, and the 0.01-bit spot agreement
cannot all hold as stated. The tests report the measured gaps rather than
widening tolerances to force green.
"""

import math

import numpy as np
import pytest

from semrdp import (
    DecoderLaw,
    closed_form_rate,
    dsbs_model,
    evaluate_decoder,
    oracle_min_rate,
    rdpf_piecewise,
)
from semrdp.cli_sweeper import (
    VerificationConfig,
    check_binning_trend,
    check_chain_rule_identities,
    check_direct_observation_reduction,
    check_distortion_transform_law,
    check_monotonicity_and_ordering,
    check_sandwich,
    check_simulation_consistency,
    check_spot_values,
    check_zero_rate_threshold,
    _sandwich_data,
)

INF = math.inf


@pytest.fixture(scope="module")
def acceptance_config():
    return VerificationConfig()


@pytest.fixture(scope="module")
def sandwich_data(acceptance_config):
    # the expensive part: oracle sweeps over every (q, P) pair of the grid
    return _sandwich_data(acceptance_config)


def _report(number, result):
    status = "PASS" if result.passed else "FAIL"
    print(f"ACCEPTANCE {number}: {status} - {result.title}: {result.detail}")
    return result.passed


def test_criterion_1_sandwich(acceptance_config, sandwich_data):
    result, _, _ = check_sandwich(acceptance_config, sandwich_data)
    assert _report(1, result), result.detail


def test_criterion_2_direct_observation_reduction(acceptance_config):
    result = check_direct_observation_reduction(acceptance_config)
    assert _report(2, result), result.detail


def test_criterion_3_spot_values(acceptance_config):
    model = dsbs_model(0.1, 0.2)
    spot = closed_form_rate(model, 0.2, 0.05)
    assert spot == pytest.approx(0.1937, abs=2e-4)
    for p in (0.02, 0.05, 0.1, INF):
        assert closed_form_rate(model, 0.26, p) == 0.0
    result = check_spot_values(acceptance_config)
    assert _report(3, result), result.detail


def test_criterion_4_zero_rate_threshold(acceptance_config):
    model = dsbs_model(0.1, 0.2)
    anchor = evaluate_decoder(model, DecoderLaw.from_side_information())
    assert anchor.rate == 0.0
    assert anchor.distortion == pytest.approx(0.26, abs=1e-12)
    assert anchor.perception == pytest.approx(0.0, abs=1e-12)
    result, threshold = check_zero_rate_threshold(acceptance_config)
    assert _report(4, result), result.detail
    assert threshold == pytest.approx(0.26, abs=0.01)


def test_criterion_5_distortion_transform(acceptance_config):
    result = check_distortion_transform_law(acceptance_config)
    assert _report(5, result), result.detail


def test_criterion_6_monotonicity_and_ordering(acceptance_config, sandwich_data):
    result, violations = check_monotonicity_and_ordering(acceptance_config, sandwich_data)
    assert _report(6, result), result.detail
    assert violations == 0


def test_criterion_7_simulation_consistency(acceptance_config):
    result = check_simulation_consistency(acceptance_config)
    assert _report(7, result), result.detail


def test_criterion_8_binning_trend(acceptance_config):
    result = check_binning_trend(acceptance_config)
    assert _report(8, result), result.detail


def test_criterion_9_chain_rule_identities(acceptance_config):
    result = check_chain_rule_identities(acceptance_config)
    assert _report(9, result), result.detail
