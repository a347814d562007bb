import math

import numpy as np
import pytest

from semrdp import (
    DecoderLaw,
    DomainError,
    HypothesisError,
    InfeasibleError,
    binary_entropy,
    build_model,
    closed_form_rate,
    compose_branch_perception,
    dsbs_model,
    evaluate_decoder,
    oracle_min_rate,
    oracle_min_rates,
    shat_marginal,
    solve_min2,
)

INF = math.inf


def test_decoder_law_validation_and_helpers():
    with pytest.raises(DomainError):
        DecoderLaw(1.2, 0.0, 0.0, 0.0)
    assert DecoderLaw.copy_observation().as_tuple() == (1.0, 0.0, 1.0, 0.0)
    assert DecoderLaw.from_side_information().as_tuple() == (1.0, 1.0, 0.0, 0.0)
    assert DecoderLaw.uniform().as_tuple() == (0.5, 0.5, 0.5, 0.5)


def test_evaluate_decoder_copy_anchor(model_q01):
    m = evaluate_decoder(model_q01, DecoderLaw.copy_observation())
    assert m.rate == pytest.approx(binary_entropy(0.2), abs=1e-12)
    assert m.distortion == pytest.approx(0.1, abs=1e-12)
    assert m.perception <= 1e-12


def test_evaluate_decoder_side_information_anchor(model_q01):
    m = evaluate_decoder(model_q01, DecoderLaw.from_side_information())
    assert m.rate == 0.0
    assert m.distortion == pytest.approx(0.26, abs=1e-12)
    assert m.perception <= 1e-12


def test_evaluate_decoder_uniform_anchor(model_q01):
    m = evaluate_decoder(model_q01, DecoderLaw.uniform())
    assert abs(m.rate) <= 1e-12
    assert m.distortion == pytest.approx(0.5, abs=1e-12)
    assert m.perception <= 1e-12


def _branch_formula(model, law):
    """Independent route: per-branch mutual information and moments."""
    rate = dist = marg0 = 0.0
    for y, (p_y, s, t) in enumerate(
        [(model.p_a, law.s0, law.t0), (model.p_b, law.s1, law.t1)]
    ):
        cells = model.joint.masses[:, :, y] / p_y
        px0 = cells[0, 0] + cells[1, 0]
        px1 = cells[0, 1] + cells[1, 1]
        m0 = px0 * s + px1 * t
        info = binary_entropy(m0) - px0 * binary_entropy(s) - px1 * binary_entropy(t)
        rate += p_y * info
        dist += p_y * (
            cells[0, 0] * (1 - s) + cells[0, 1] * (1 - t) + cells[1, 0] * s + cells[1, 1] * t
        )
        marg0 += p_y * m0
    return rate, dist, abs(marg0 - (1 - model.pi))


def test_evaluate_decoder_agrees_with_branch_formula(model_q01, rng):
    asymmetric = build_model(0.4, 0.15, 0.05, 0.3, 0.1)
    for model in (model_q01, asymmetric):
        for _ in range(25):
            law = DecoderLaw(*rng.random(4))
            exact = evaluate_decoder(model, law)
            rate, dist, perc = _branch_formula(model, law)
            assert exact.rate == pytest.approx(rate, abs=1e-12)
            assert exact.distortion == pytest.approx(dist, abs=1e-12)
            assert exact.perception == pytest.approx(perc, abs=1e-12)


def test_shat_marginal(model_q01):
    marg = shat_marginal(model_q01, DecoderLaw.from_side_information())
    assert float(marg.masses[0]) == pytest.approx(0.5, abs=1e-12)


def test_compose_branch_perception_examples():
    assert compose_branch_perception(0.5, 0.1, 0.5, 0.1) == pytest.approx(0.1, abs=1e-12)
    assert compose_branch_perception(0.5, 0.1, 0.5, -0.1) == 0.0
    assert compose_branch_perception(0.3, 0.2, 0.7, 0.0) == pytest.approx(0.06, abs=1e-12)
    with pytest.raises(DomainError):
        compose_branch_perception(0.5, 1.5, 0.5, 0.0)


def test_oracle_zero_rate_plateau(model_q01):
    result = oracle_min_rate(model_q01, 0.26, 0.05, 0.02)
    assert result.rate <= 1e-3
    assert result.achieved_D <= 0.26 + 1e-9
    assert result.achieved_P <= 0.05 + 1e-9


def test_oracle_spot_agreement(model_q01):
    # the closed form is achievable, so the exhaustive search sits at or
    # below it, and within the coarse-grid sandwich at this point
    result = oracle_min_rate(model_q01, 0.2, 0.05, 0.02)
    closed = closed_form_rate(model_q01, 0.2, 0.05)
    assert result.rate <= closed + 0.01
    assert abs(result.rate - closed) <= 0.02


def test_oracle_determinism(model_q01):
    a = oracle_min_rate(model_q01, 0.22, 0.05, 0.05)
    b = oracle_min_rate(model_q01, 0.22, 0.05, 0.05)
    assert a == b


def test_oracle_matches_batched(model_q01):
    batched = oracle_min_rates(model_q01, [0.15, 0.22], 0.05, 0.05)
    for d, expected in zip([0.15, 0.22], batched):
        single = oracle_min_rate(model_q01, d, 0.05, 0.05)
        assert single == expected


def test_oracle_infeasible(model_q01):
    with pytest.raises(InfeasibleError):
        oracle_min_rate(model_q01, 0.05, 0.05, 0.05)


def test_oracle_resolution_validation(model_q01):
    with pytest.raises(DomainError):
        oracle_min_rate(model_q01, 0.2, 0.05, 0.5)
    with pytest.raises(DomainError):
        oracle_min_rate(model_q01, 0.2, 0.05, 1e-5)


def test_oracle_feasible_set_monotonicity(model_q01):
    ds = [0.12, 0.16, 0.2, 0.24, 0.28]
    rates = [r.rate for r in oracle_min_rates(model_q01, ds, 0.05, 0.05)]
    assert all(b <= a + 1e-9 for a, b in zip(rates, rates[1:]))
    loose = oracle_min_rate(model_q01, 0.2, 0.2, 0.05).rate
    tight = oracle_min_rate(model_q01, 0.2, 0.02, 0.05).rate
    assert loose <= tight + 1e-9


def test_oracle_result_consistency(model_q01):
    result = oracle_min_rate(model_q01, 0.18, 0.05, 0.05)
    again = evaluate_decoder(model_q01, result.argmin)
    assert again.rate == result.rate
    assert again.distortion == result.achieved_D
    assert again.perception == result.achieved_P
    assert result.achieved_D <= 0.18 + 1e-9
    assert result.achieved_P <= 0.05 + 1e-9


def test_solve_min2_symmetric_optimum(model_q01):
    result = solve_min2(model_q01, 0.2, 0.05, 0.01)
    assert result.rate == pytest.approx(0.1937237367, abs=2e-3)
    d0, d1, p0, p1 = result.branch_allocation
    assert d0 == pytest.approx(0.125, abs=1e-9)
    assert d1 == pytest.approx(0.125, abs=1e-9)
    assert p0 == pytest.approx(0.05, abs=1e-9)
    assert p1 == pytest.approx(0.05, abs=1e-9)
    assert result.achieved_D <= 0.2 + 1e-9
    assert result.achieved_P <= 0.05 + 1e-9
    assert result.argmin is None


def test_solve_min2_unconstrained_perception(model_q01):
    result = solve_min2(model_q01, 0.2, INF, 0.01)
    assert result.rate == pytest.approx(closed_form_rate(model_q01, 0.2, INF), abs=2e-3)


def test_solve_min2_zero_rate(model_q01):
    # the aligned program reaches zero only once the distortion budget covers
    # the perception-shifted band edge, beyond the plateau onset
    result = solve_min2(model_q01, 0.34, 0.05, 0.01)
    assert abs(result.rate) <= 1e-9
    result = solve_min2(model_q01, 0.5, 0.02, 0.01)
    assert abs(result.rate) <= 1e-9


def test_solve_min2_infeasible_and_hypotheses(model_q01):
    with pytest.raises(InfeasibleError):
        solve_min2(model_q01, 0.05, 0.05, 0.01)
    with pytest.raises(HypothesisError):
        solve_min2(build_model(0.4, 0.1, 0.1, 0.2, 0.2), 0.2, 0.05, 0.01)
    with pytest.raises(HypothesisError):
        solve_min2(build_model(0.5, 0.1, 0.2, 0.2, 0.2), 0.2, 0.05, 0.01)


def test_solve_min2_asymmetric_side_channel():
    # side-channel asymmetry is allowed; branches get different posteriors
    model = build_model(0.5, 0.1, 0.1, 0.15, 0.3)
    result = solve_min2(model, 0.25, 0.05, 0.02)
    assert result.rate >= 0.0
    assert result.achieved_D <= 0.25 + 1e-9


def test_min2_never_undercuts_oracle(model_q01):
    # every branch allocation is realizable by an explicit decoder, so the
    # exhaustive search can only be at or below the program's value
    for d, p in [(0.15, 0.05), (0.2, 0.05), (0.2, 0.02), (0.3, 0.1), (0.2, INF)]:
        oracle = oracle_min_rate(model_q01, d, p, 0.02).rate
        program = solve_min2(model_q01, d, p, 0.02).rate
        assert oracle <= program + 0.02


def test_min2_matches_oracle_when_perception_is_slack(model_q01):
    # below the binding band the two routes agree within grid slack
    for d in (0.12, 0.14):
        oracle = oracle_min_rate(model_q01, d, 0.05, 0.02).rate
        program = solve_min2(model_q01, d, 0.05, 0.02).rate
        assert abs(oracle - program) <= 0.02
