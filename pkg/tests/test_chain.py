import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kemeny import fixtures as fx
from kemeny.chain import (
    check_occupation_duality,
    dual_chain,
    entry_time_second_moments,
    kemeny_function,
    mean_entry_times,
    occupation_matrix,
    stationary_distribution,
    trace_kemeny,
    validate_stochastic,
)
from kemeny.errors import NegativeEntry, NotIrreducible, NotSquare, RowSumViolation


def survival_series(p, z, tol=1e-15, max_terms=200_000):
    """Oracle for entry-time moments from the tail sums
    E[D] = sum_k P[D > k] and E[D^2] = sum_k (2k + 1) P[D > k],
    accumulated by repeated multiplication with the killed matrix."""
    n = p.shape[0]
    keep = [i for i in range(n) if i != z]
    sub = p[np.ix_(keep, keep)]
    alive = np.ones(len(keep))
    m1 = np.zeros(len(keep))
    m2 = np.zeros(len(keep))
    for k in range(max_terms):
        m1 += alive
        m2 += (2 * k + 1) * alive
        if alive.max() < tol:
            break
        alive = sub @ alive
    out1 = np.zeros(n)
    out2 = np.zeros(n)
    out1[keep] = m1
    out2[keep] = m2
    return out1, out2


def visits_series(p, z, terms=5000):
    n = p.shape[0]
    keep = [i for i in range(n) if i != z]
    sub = p[np.ix_(keep, keep)]
    acc = np.zeros_like(sub)
    power = np.eye(len(keep))
    for _ in range(terms):
        acc += power
        power = power @ sub
    g = np.zeros((n, n))
    g[np.ix_(keep, keep)] = acc
    return g


# validation


def test_valid_symmetric_two_state():
    assert validate_stochastic(fx.SYMMETRIC_TWO).n == 2


def test_identity_is_reducible():
    with pytest.raises(NotIrreducible):
        validate_stochastic(np.eye(2))


def test_two_state_valid():
    P = validate_stochastic(fx.TWO_STATE)
    np.testing.assert_allclose(P.p.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize(
    "raw, err",
    [
        ([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]], NotSquare),
        ([[1.0]], NotSquare),
        ([[1.2, -0.2], [0.5, 0.5]], NegativeEntry),
        ([[0.6, 0.5], [0.5, 0.5]], RowSumViolation),
    ],
)
def test_rejections(raw, err):
    with pytest.raises(err):
        validate_stochastic(raw)


def test_small_row_error_is_renormalized():
    P = validate_stochastic([[0.5, 0.5 + 5e-10], [0.5, 0.5]])
    assert abs(P.p[0].sum() - 1.0) < 1e-15


def test_matrix_is_read_only():
    P = validate_stochastic(fx.TWO_STATE)
    with pytest.raises(ValueError):
        P.p[0, 0] = 1.0


# stationary law


@pytest.mark.parametrize(
    "p, expected",
    [
        (fx.TWO_STATE, [0.4, 0.6]),
        (fx.UNIFORM3, [1 / 3] * 3),
        (fx.CYCLE3, [1 / 3] * 3),
    ],
)
def test_stationary(p, expected):
    pi = stationary_distribution(p).pi
    np.testing.assert_allclose(pi, expected, atol=1e-12)
    assert abs(pi.sum() - 1) < 1e-12


# dual chain


def test_two_state_is_self_dual():
    np.testing.assert_allclose(dual_chain(fx.TWO_STATE).p, fx.TWO_STATE, atol=1e-12)


def test_cycle_dual_is_reversed_cycle():
    np.testing.assert_allclose(dual_chain(fx.CYCLE3).p, fx.CYCLE3.T, atol=1e-12)


def test_uniform_is_self_dual():
    np.testing.assert_allclose(dual_chain(fx.UNIFORM3).p, fx.UNIFORM3, atol=1e-12)


# entry times


@pytest.mark.parametrize(
    "p, z, mean, second",
    [
        (fx.SYMMETRIC_TWO, 1, [2, 0], [6, 0]),
        (fx.CYCLE3, 2, [2, 1, 0], [4, 1, 0]),
        (fx.UNIFORM3, 0, [0, 3, 3], None),
    ],
)
def test_entry_times_hand_values(p, z, mean, second):
    table = entry_time_second_moments(p, z)
    np.testing.assert_allclose(mean_entry_times(p, z).mean, mean, atol=1e-12)
    np.testing.assert_allclose(table.mean, mean, atol=1e-12)
    if second is not None:
        np.testing.assert_allclose(table.second_moment, second, atol=1e-12)


def test_khasminskii_two_state_instance():
    table = entry_time_second_moments(fx.SYMMETRIC_TWO, 1)
    c = table.mean.max()
    assert c == pytest.approx(2.0)
    assert table.second_moment.max() == pytest.approx(6.0)
    assert table.second_moment.max() <= 2 * c**2


def test_entry_moments_match_survival_series():
    rng = np.random.default_rng(7)
    for n in (3, 5, 8):
        p = fx.random_chain(n, rng)
        for z in range(n):
            m1, m2 = survival_series(p, z)
            table = entry_time_second_moments(p, z)
            np.testing.assert_allclose(table.mean, m1, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(table.second_moment, m2, rtol=1e-9, atol=1e-12)


# occupation


def test_occupation_hand_values():
    assert occupation_matrix(fx.SYMMETRIC_TWO, 1).g[0, 0] == pytest.approx(2.0)
    g = occupation_matrix(fx.CYCLE3, 2).g
    assert g[0, 0] == pytest.approx(1.0)
    assert g[0, 1] == pytest.approx(1.0)
    assert g[1, 1] == pytest.approx(1.0)
    assert g[1, 0] == pytest.approx(0.0, abs=1e-15)


def test_occupation_matches_neumann_series_and_row_sums():
    rng = np.random.default_rng(11)
    p = fx.random_chain(6, rng)
    for z in range(6):
        g = occupation_matrix(p, z).g
        np.testing.assert_allclose(g, visits_series(p, z), atol=1e-10)
        np.testing.assert_allclose(g.sum(axis=1), mean_entry_times(p, z).mean, atol=1e-10)
        assert np.all(g[z] == 0) and np.all(g[:, z] == 0)


@pytest.mark.parametrize("p, z", [(fx.SYMMETRIC_TWO, 1), (fx.CYCLE3, 2)])
def test_occupation_duality_fixtures(p, z):
    assert check_occupation_duality(p, z=z) <= 1e-12


def test_occupation_duality_ensemble():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        p = fx.random_chain(10, rng, sparse=bool(rng.integers(2)))
        pi = stationary_distribution(p)
        for z in (0, 4, 9):
            assert check_occupation_duality(p, pi, z) <= 1e-9


# Kemeny function


@pytest.mark.parametrize(
    "p, kappa",
    [(fx.TWO_STATE, 2.0), (fx.UNIFORM3, 2.0), (fx.FLIP, 0.5), (fx.CYCLE3, 1.0)],
)
def test_kemeny_closed_forms(p, kappa):
    report = kemeny_function(p)
    np.testing.assert_allclose(report.k_values, kappa, atol=1e-12)
    assert report.spread <= 1e-12
    assert abs(report.kappa - kappa) <= 1e-12


def test_uniform_trace_oracle():
    assert trace_kemeny(fx.UNIFORM3) == pytest.approx(2.0, abs=1e-12)


def test_flip_attains_hunter_bound():
    assert kemeny_function(fx.FLIP).residuals["hunter_margin"] == 0.0


def test_two_state_closed_form_family():
    for a, b in [(0.3, 0.2), (0.9, 0.05), (1.0, 1.0), (0.01, 0.7)]:
        p = np.array([[1 - a, a], [b, 1 - b]])
        np.testing.assert_allclose(kemeny_function(p).k_values, 1 / (a + b), rtol=1e-12)


def test_kemeny_matches_survival_series_oracle():
    rng = np.random.default_rng(5)
    p = fx.random_chain(7, rng, sparse=True)
    pi = stationary_distribution(p).pi
    k = sum(pi[z] * survival_series(p, z)[0] for z in range(7))
    np.testing.assert_allclose(kemeny_function(p).k_values, k, rtol=1e-9)


def test_dual_involution():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = fx.random_chain(int(rng.integers(2, 12)), rng)
        np.testing.assert_allclose(dual_chain(dual_chain(p)).p, p, atol=1e-12)


def test_kappa_equals_dual_kappa():
    rng = np.random.default_rng(9)
    for _ in range(20):
        p = fx.random_chain(8, rng, sparse=True)
        k = kemeny_function(p, with_checks=False).kappa
        khat = kemeny_function(dual_chain(p), with_checks=False).kappa
        assert abs(k - khat) <= 1e-9 * max(1, k)


def _chain_strategy():
    return st.integers(2, 9).flatmap(
        lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1), st.booleans())
    )


@settings(max_examples=60, deadline=None)
@given(_chain_strategy())
def test_identity_properties(args):
    n, seed, sparse = args
    p = fx.random_chain(n, np.random.default_rng(seed), sparse=sparse)
    report = kemeny_function(p)
    scale = max(1.0, report.kappa)
    assert report.spread <= 1e-9 * scale
    assert report.residuals["dual_identity"] <= 1e-9 * scale
    assert report.residuals["trace_identity"] <= 1e-8
    assert report.residuals["occupation_duality"] <= 1e-9
    assert report.residuals["return_time_identity"] <= 1e-9 * scale
    assert report.residuals["hunter_margin"] >= -1e-12
    assert report.residuals["khasminskii_margin"] >= 0
    assert abs(report.kappa - stationary_distribution(p).pi @ report.k_values) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**32 - 1))
def test_relabeling_permutes_k(n, seed):
    rng = np.random.default_rng(seed)
    p = fx.random_chain(n, rng)
    perm = rng.permutation(n)
    q = p[np.ix_(perm, perm)]
    np.testing.assert_allclose(
        kemeny_function(q, with_checks=False).k_values,
        kemeny_function(p, with_checks=False).k_values[perm],
        rtol=1e-10,
    )
