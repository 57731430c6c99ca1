import math

import numpy as np
import pytest

from kemeny import fixtures as fx
from kemeny.diffusion import build_analysis
from kemeny.errors import RunawayTrajectory, StepTooLarge, ValidationError
from kemeny.sim import (
    McEstimate,
    RngStream,
    _walk_dtmc,
    estimate_hitting_diffusion,
    estimate_kemeny_ctmc,
    estimate_kemeny_dtmc,
    run_occupation_suite,
    sample_stationary,
    summarize,
    verify_occupation_lemma_dtmc,
)
from kemeny.specio import diffusion_from_doc


@pytest.fixture(scope="module")
def bessel():
    return build_analysis(diffusion_from_doc(fx.BESSEL3))


# random streams


def test_same_key_same_draws():
    a = RngStream(42, 7).generator().random(1000)
    b = RngStream(42, 7).generator().random(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_look_independent():
    a = RngStream(42, 0).generator().random(200_000)
    b = RngStream(42, 1).generator().random(200_000)
    c = RngStream(43, 0).generator().random(200_000)
    assert not np.array_equal(a, b)
    for u, v in [(a, b), (a, c)]:
        assert abs(np.corrcoef(u, v)[0, 1]) < 5 / math.sqrt(u.size)


def test_stream_ids_are_64_bit():
    RngStream(2**64 - 1, 2**64 - 1).generator().random()
    with pytest.raises(ValueError):
        RngStream(-1)
    assert RngStream(1, 2**64 - 1).split(1) == RngStream(1, 0)


def test_estimates_are_bitwise_reproducible():
    a = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 5000, RngStream(9), streams=3)
    b = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 5000, RngStream(9), streams=3)
    assert a == b


def test_blocks_use_consecutive_streams():
    # the pooled run equals the concatenation of per-block runs
    pooled = estimate_kemeny_dtmc(fx.CYCLE3, 0, 3000, RngStream(5, 10), streams=3)
    parts = [estimate_kemeny_dtmc(fx.CYCLE3, 0, 1000, RngStream(5, 10 + j)) for j in range(3)]
    assert pooled.mean == pytest.approx(np.mean([p.mean for p in parts]), rel=1e-15)


def test_disjoint_streams_differ_and_error_shrinks():
    small = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 10_000, RngStream(1, 0))
    other = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 10_000, RngStream(1, 1))
    large = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 40_000, RngStream(1, 2))
    assert small.mean != other.mean
    assert large.std_error / small.std_error == pytest.approx(0.5, rel=0.1)


def test_summary_fields():
    est = summarize([1.0, 2.0, 3.0], exact=2.0)
    assert est == McEstimate(2.0, 1 / math.sqrt(3), 3, 2.0, 0.0)
    assert summarize([1.0, 2.0]).z_score is None
    assert est.std_error >= 0


# stationary sampling


def test_sample_stationary_chain():
    assert sample_stationary([0.4, 0.6], draws=0.3) == 0
    assert sample_stationary([0.4, 0.6], draws=0.95) == 1
    assert list(sample_stationary([0.4, 0.6], draws=[0.0, 0.4, 0.999999])) == [0, 1, 1]


def test_sample_stationary_diffusion(bessel):
    assert sample_stationary(bessel, draws=0.125) == pytest.approx(0.5, abs=1e-10)
    u = np.array([0.001, 0.3, 0.9])
    assert np.allclose(sample_stationary(bessel, draws=u), np.cbrt(u), atol=1e-10)


def test_sample_stationary_frequencies():
    pi = np.array([0.2, 0.5, 0.3])
    draws = sample_stationary(pi, RngStream(3), size=100_000)
    freq = np.bincount(draws, minlength=3) / draws.size
    assert np.all(np.abs(freq - pi) < 4 * np.sqrt(pi * (1 - pi) / draws.size))


# chains


def test_two_state_kemeny_estimate():
    est = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 100_000, RngStream(42))
    assert est.target_exact == pytest.approx(2.0, abs=1e-12)
    assert abs(est.z_score) <= 3


def test_cycle_kemeny_estimate():
    est = estimate_kemeny_dtmc(fx.CYCLE3, 0, 10_000, RngStream(42))
    assert abs(est.mean - 1.0) <= 3 * est.std_error


def test_walk_from_target_takes_no_steps():
    gen = RngStream(0).generator()
    steps, _ = _walk_dtmc(fx.TWO_STATE, np.array([1]), np.array([1]), gen, 2, count_visits=True)
    assert steps[0] == 0


def test_step_cap():
    with pytest.raises(RunawayTrajectory):
        estimate_kemeny_dtmc(np.array([[0.999, 0.001], [0.5, 0.5]]), 0, 1000, RngStream(0), max_steps=2)


def test_ctmc_estimates():
    est = estimate_kemeny_ctmc(fx.TWO_STATE_Q, 0, 100_000, RngStream(42))
    assert est.target_exact == pytest.approx(1 / 3, abs=1e-12)
    assert abs(est.z_score) <= 3
    est = estimate_kemeny_ctmc(fx.CYCLE3_Q, 1, 10_000, RngStream(42))
    assert abs(est.mean - 1.0) <= 3 * est.std_error


# occupation counts


@pytest.mark.parametrize("p", [fx.SYMMETRIC_TWO, fx.CYCLE3], ids=["symmetric_two", "cycle3"])
def test_occupation_counts_match(p):
    check = verify_occupation_lemma_dtmc(p, 100_000, RngStream(42))
    assert check.passed()


def test_occupation_exact_values():
    check = verify_occupation_lemma_dtmc(fx.CYCLE3, 10, RngStream(0))
    assert np.allclose(check.exact, 1 / 3)
    check = verify_occupation_lemma_dtmc(fx.SYMMETRIC_TWO, 10, RngStream(0))
    assert np.allclose(check.exact, 0.5)


def test_fixed_target_violates_occupation_identity():
    # from state 0, entering state 2 on the 3-cycle visits state 1 exactly once,
    # while pi_1 E[S] = 2/3
    check = verify_occupation_lemma_dtmc(fx.CYCLE3, 100_000, RngStream(42), start=0, target=2)
    assert check.means[1] == 1.0
    assert check.exact[1] == pytest.approx(2 / 3)
    assert not check.passed()


def test_occupation_suite_has_ten_cases():
    result = run_occupation_suite(2000, seed=1)
    assert len(result.names) == 10
    assert len(result.failures) <= 1


# diffusion


def test_diffusion_start_inside_band(bessel):
    est = estimate_hitting_diffusion(bessel, 0.51, 0.5, step=1e-4, band=0.02, n_samples=10, rng=1)
    assert est.mean == 0.0


def test_diffusion_rejects_large_step(bessel):
    with pytest.raises(StepTooLarge):
        estimate_hitting_diffusion(bessel, 1.0, 0.5, step=0.02, n_samples=10)
    with pytest.raises(ValidationError):
        estimate_hitting_diffusion(bessel, 0.5, 0.5, n_samples=10)


def test_diffusion_time_cap(bessel):
    with pytest.raises(RunawayTrajectory):
        estimate_hitting_diffusion(bessel, 1.0, 0.1, step=1e-4, band=1e-3, n_samples=100, time_cap=1e-3)


def test_diffusion_coarse_step_stays_in_state_space(bessel):
    # coarse steps overshoot the reflecting end often; every step is checked
    est = estimate_hitting_diffusion(bessel, 0.95, 0.2, step=5e-3, band=0.05, n_samples=2000, rng=3)
    assert math.isfinite(est.mean) and est.mean > 0


def test_diffusion_estimate_is_reproducible(bessel):
    a = estimate_hitting_diffusion(bessel, 1.0, 0.5, step=4e-4, n_samples=500, rng=RngStream(8), streams=2)
    b = estimate_hitting_diffusion(bessel, 1.0, 0.5, step=4e-4, n_samples=500, rng=RngStream(8), streams=2)
    assert a == b


@pytest.mark.slow
def test_diffusion_step_consistency(bessel):
    errors = []
    for h, eps in [(1e-4, 2e-2), (5e-5, 1e-2), (2.5e-5, 5e-3)]:
        est = estimate_hitting_diffusion(bessel, 1.0, 0.5, step=h, band=eps, n_samples=20_000, rng=42)
        errors.append(abs(est.relative_error))
    assert errors[0] > errors[1] > errors[2]
