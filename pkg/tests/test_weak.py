import math

import numpy as np
import pytest
from scipy import stats

from qdtl.boolean import BooleanFunction, random_tree, tree_to_function, wht
from qdtl.channels import (
    LabelChannel,
    adversarial_flips,
    bayes_predictor,
    correlation,
    make_agnostic,
    make_realizable,
)
from qdtl.emulation import QueryLedger
from qdtl.weak import (
    WeakLearnerResult,
    bias_target,
    build_oh,
    fourier_sample,
    fourier_samples,
    rcn_majority_oracle,
    rcn_votes,
    rcn_weak_parity,
    realizable_weak_parity,
    sample_oh_labels,
    weak_agnostic_parity,
)

from conftest import random_function


def slack(p, trials):
    return 3 * math.sqrt(p * (1 - p) / trials)


def tree_function(n, t, rng):
    return tree_to_function(random_tree(n, t, rng), n)


def test_result_validation():
    with pytest.raises(ValueError):
        WeakLearnerResult(0, 1, 1.5, 0)
    with pytest.raises(ValueError):
        WeakLearnerResult(0, 0, 0.5, 0)
    assert list(WeakLearnerResult(1, -1, 0.0, 0).table(1)) == [-1, 1]


def test_bias_target():
    assert bias_target(8, 4, 0.1, 0.1) == min(0.1 / (4 * 8 * 16), 0.01 / 8)


def test_build_oh_realizable_is_clean_and_charged(rng):
    f = random_function(6, rng)
    ledger = QueryLedger()
    oracle = build_oh(make_realizable(f), 1e-3, 0.1, ledger)
    assert np.array_equal(oracle.h.values, f.values)
    assert oracle.gamma <= 1e-3
    assert ledger.counters == {"oh_mae": oracle.query_cost}


def test_build_oh_thresholds_at_half():
    oracle = build_oh(LabelChannel(1, [0.9, 0.2]), 1e-3, 0.1)
    assert list(oracle.h.values) == [1, -1]
    with pytest.raises(ValueError):
        build_oh(LabelChannel(1, [0.9, 0.2]), 0.01, 0.1)


def test_build_oh_bias_within_target_on_deterministic_channels():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        f = random_function(8, rng)
        channel = make_agnostic(f, rng.random(256) < 0.2)
        gamma = float(rng.uniform(1e-4, 0.1**2 / 8))
        assert build_oh(channel, gamma, 0.1).gamma <= gamma


def test_build_oh_bias_matches_simulated_majority():
    rng = np.random.default_rng(2)
    channel = LabelChannel(3, [0.0, 1.0, 0.52, 0.48, 0.55, 0.45, 0.6, 0.4])
    gamma, eps = 0.01, 0.3
    oracle = build_oh(channel, gamma, eps)
    xs = np.repeat(np.arange(8), 4000)
    labels = sample_oh_labels(channel, gamma, eps, xs, rng).reshape(8, -1)
    wrong = (labels != oracle.h.values[:, None]).mean(axis=1)
    np.testing.assert_allclose(wrong, oracle.bias, atol=0.03)
    confident = np.abs(channel.p1 - 0.5) >= eps
    assert np.all(oracle.bias[confident] <= gamma)


def test_oh_labels_transfer_to_bayes_predictor():
    rng = np.random.default_rng(3)
    eps = 0.1
    for _ in range(20):
        channel = LabelChannel(6, rng.random(64))
        estimate = BooleanFunction(6, sample_oh_labels(channel, eps**2 / 8, eps, np.arange(64), rng))
        gap = abs(correlation(estimate, channel) - correlation(bayes_predictor(channel), channel))
        assert gap <= 4 * eps


def test_weak_learner_parity_target():
    rng = np.random.default_rng(4)
    f = BooleanFunction.parity(8, 0b10010110)
    result = weak_agnostic_parity(make_realizable(f), 1, 0.2, 0.1, rng)
    assert (result.S, result.sign, result.achieved_cor) == (0b10010110, 1, 1.0)
    negated = weak_agnostic_parity(make_realizable(-f), 1, 0.2, 0.1, rng)
    assert (negated.S, negated.sign, negated.achieved_cor) == (0b10010110, -1, 1.0)


@pytest.mark.parametrize("kwargs", [dict(t=0), dict(kappa=0.5), dict(delta=0.6)])
def test_weak_learner_validation(kwargs, rng):
    params = dict(t=2, kappa=0.1, delta=0.1) | kwargs
    with pytest.raises(ValueError):
        weak_agnostic_parity(make_realizable(random_function(3, rng)), rng=rng, **params)


def test_weak_learner_ledger_matches_result(rng):
    ledger = QueryLedger()
    result = weak_agnostic_parity(make_realizable(tree_function(6, 4, rng)), 4, 0.2, 0.1, rng,
                                  ledger)
    assert result.queries == ledger.total
    assert set(ledger.counters) == {"oh_mae", "qgl", "sign"}


@pytest.mark.parametrize("noisy", [False, True])
def test_weak_learner_bound_on_trees(noisy):
    rng = np.random.default_rng(5 + noisy)
    n, t, kappa, delta, trials = 8, 4, 0.1, 0.1, 60
    misses = 0
    for _ in range(trials):
        f = tree_function(n, t, rng)
        channel = make_agnostic(f, adversarial_flips(f, 0.1, rng)) if noisy else make_realizable(f)
        result = weak_agnostic_parity(channel, t, kappa, delta, rng)
        misses += result.achieved_cor < correlation(f, channel) / t - kappa
    assert misses / trials <= delta + slack(delta, trials)


def test_weak_learner_query_scaling():
    ratios = []
    for n in (6, 8, 10):
        for t in (2, 4):
            for kappa in (0.4, 0.2, 0.1):
                rng = np.random.default_rng(n * 100 + t)
                queries = [weak_agnostic_parity(make_realizable(tree_function(n, t, rng)), t,
                                                kappa, 0.1, rng).queries for _ in range(5)]
                ratios.append(np.mean(queries) / (n * t / kappa**3 * math.log(1 / kappa)))
    assert max(ratios) / min(ratios) <= 4


def test_fourier_sample_examples(and_tree):
    rng = np.random.default_rng(7)
    ledger = QueryLedger()
    assert {fourier_sample(BooleanFunction.parity(5, 13), rng, ledger) for _ in range(50)} == {13}
    assert {fourier_sample(BooleanFunction.constant(5), rng) for _ in range(50)} == {0}
    assert ledger.counters == {"qex": 50}
    draws = fourier_samples(tree_to_function(and_tree, 2), 10_000, rng)
    counts = np.bincount(draws, minlength=4)
    assert stats.chisquare(counts).pvalue > 0.01


def test_realizable_learner_examples(rng):
    assert realizable_weak_parity(BooleanFunction.parity(6, 33), 0.3, rng).S == 33
    constant = realizable_weak_parity(BooleanFunction.constant(6), 0.3, rng)
    assert (constant.S, constant.achieved_cor) == (0, 1.0)
    ledger = QueryLedger()
    realizable_weak_parity(BooleanFunction.constant(4), 0.1, rng, ledger)
    assert ledger.counters == {"qex": 200}


def test_realizable_learner_finds_heavy_coefficient():
    rng = np.random.default_rng(8)
    hits = 0
    for _ in range(100):
        f = tree_function(10, 8, rng)
        coeffs = np.abs(wht(f).coeffs)
        result = realizable_weak_parity(f, 0.1, rng)
        hits += coeffs[result.S] >= coeffs.max() - 0.2
        assert result.achieved_cor == pytest.approx(result.sign * wht(f).coeffs[result.S])
    assert hits >= 90


def test_rcn_votes():
    assert rcn_votes(0.0, 0.01) == 1
    assert rcn_votes(0.25, 0.01) == 37
    with pytest.raises(ValueError):
        rcn_votes(0.5, 0.1)


def test_rcn_oracle_noiseless_and_charged(rng):
    f = random_function(5, rng)
    ledger = QueryLedger()
    oracle = rcn_majority_oracle(f, 0.0, 0.01, rng, ledger)
    assert np.array_equal(oracle(np.arange(32)), f.values)
    assert ledger.counters == {"rcn_votes": 32}


@pytest.mark.parametrize("p,delta", [(0.25, 0.01), (0.4, 0.1)])
def test_rcn_oracle_error_rate(p, delta):
    rng = np.random.default_rng(9)
    f = random_function(6, rng)
    oracle = rcn_majority_oracle(f, p, delta, rng)
    xs = rng.integers(0, 64, size=100_000)
    wrong = np.mean(oracle(xs) != f.values[xs])
    assert wrong <= delta
    assert abs(wrong - oracle.residual_error) <= slack(oracle.residual_error, 100_000)


def test_rcn_weak_parity_bound():
    rng = np.random.default_rng(10)
    misses, trials = 0, 40
    for _ in range(trials):
        f = tree_function(8, 4, rng)
        result = rcn_weak_parity(f, 0.1, 4, 0.1, 0.1, rng)
        misses += result.achieved_cor < 0.8 / 4 - 0.1
    assert misses / trials <= 0.1 + slack(0.1, trials)
