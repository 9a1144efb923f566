import numpy as np
import pytest
from scipy import stats

from conftest import discrete_schema, make_dataset
from eigenprob.estimation import BetaSpec, HyperParams
from eigenprob.model import EigenModel
from eigenprob.sampling import (GibbsConfig, RandomSource, gibbs_run, inverse_cdf, log_gamma_variate, sample_beta,
                                sample_conditional, sample_pmf, sample_rows, sample_vector)
from eigenprob.schema import AttributeSpec, Schema, load_dataset


def chi2_ok(counts, probs, level=0.01):
    _, pval = stats.chisquare(counts, np.asarray(probs) * np.sum(counts))
    return pval > level


def test_random_source_is_deterministic_and_splits():
    a, b = RandomSource(5), RandomSource(5)
    assert [a.uniform() for _ in range(5)] == [b.uniform() for _ in range(5)]
    s0, s1 = RandomSource(5).substream(0), RandomSource(5).substream(1)
    assert s0.uniform() != s1.uniform()
    assert all(0.0 < RandomSource(1).uniform() <= 1.0 for _ in range(100))


def test_inverse_cdf():
    assert all(sample_pmf([0.0, 1.0, 0.0], RandomSource(i)) == 1 for i in range(50))
    assert inverse_cdf([0.5, 0.5], 0.49) == 0
    assert inverse_cdf([0.5, 0.5], 0.51) == 1
    assert inverse_cdf([0.5, 0.5], 1.0) == 1


def test_pmf_frequencies():
    rng = RandomSource(11)
    draws = [sample_pmf([0.2, 0.3, 0.5], rng) for _ in range(10_000)]
    assert chi2_ok(np.bincount(draws, minlength=3), [0.2, 0.3, 0.5])


def test_beta_uniform_ks():
    rng = RandomSource(3)
    x = [sample_beta(BetaSpec(1.0, 1.0), rng) for _ in range(5000)]
    assert stats.kstest(x, "uniform").pvalue > 0.01


def test_beta_mean_and_variance():
    rng = RandomSource(4)
    x = np.array([sample_beta(BetaSpec(4.62, 1.38), rng) for _ in range(100_000)])
    assert abs(x.mean() - 0.77) <= 0.01
    spec = BetaSpec(50.0, 50.0)
    y = np.array([sample_beta(spec, rng) for _ in range(20_000)])
    assert y.var() == pytest.approx(spec.variance, rel=0.10)


def test_small_shape_gamma_stays_finite():
    rng = RandomSource(9)
    logs = [log_gamma_variate(0.006, rng) for _ in range(500)]
    assert np.isfinite(logs).all()
    x = [sample_beta(BetaSpec(0.006, 5.994), rng) for _ in range(500)]
    assert all(0.0 <= v <= 1.0 for v in x)
    with pytest.raises(ValueError):
        log_gamma_variate(0.0, rng)


def test_single_discrete_attribute_draws_marginal():
    ds = make_dataset(discrete_schema(("a", "xyz"),), [("x",)] * 5 + [("y",)] * 2 + [("z",)])
    m = EigenModel.from_dataset(ds)
    rows = sample_rows(m, 10_000, RandomSource(2))
    assert chi2_ok(np.bincount(rows[:, 0].astype(int), minlength=3), m.marginals[0].pmf)


def test_repeated_row_concentrates():
    # the last attribute is drawn from its marginal; a smoothed discrete marginal could never be exact there
    schema = Schema((AttributeSpec("k", "discrete", ("p", "q", "r")),
                     AttributeSpec("t", "continuous", minimum=0.0, maximum=10.0)))
    ds = load_dataset("k,t\n" + "q,7\n" * 6, schema)
    m = EigenModel.from_dataset(ds, HyperParams(50.0, 50.0))
    rows = sample_rows(m, 500, RandomSource(8))
    assert (rows[:, 0] == 1).all()
    assert np.abs(rows[:, 1] / 10.0 - 0.7).max() <= 0.1
    # a conditional draw carries the Beta(beta * mu, beta * (1 - mu)) spread around the stored value
    cond = np.array([sample_conditional(m, {0: 1.0}, RandomSource(i))[1] for i in range(400)])
    assert abs(cond.mean() / 10.0 - 0.7) <= 0.02


def test_playtennis_correlation_preserved(tennis_model):
    rows = sample_rows(tennis_model, 10_000, RandomSource(1))
    pairs = set(map(tuple, rows[:, 2:4].astype(int)))
    coupled = np.mean([(o, p) in ((0, 0), (2, 1)) for o, p in rows[:, 2:4].astype(int)])
    assert coupled >= 0.95, pairs


def test_batched_rows_equal_one_at_a_time(tennis_model):
    batch = sample_rows(tennis_model, 6, RandomSource(21))
    single = np.array([sample_vector(tennis_model, RandomSource(21).substream(i)) for i in range(6)])
    np.testing.assert_array_equal(batch, single)
    np.testing.assert_array_equal(batch, sample_rows(tennis_model, 6, RandomSource(21)))


def test_validity_of_rows(credit_model):
    rows = sample_rows(credit_model, 300, RandomSource(6))
    for j, spec in enumerate(credit_model.schema):
        col = rows[:, j]
        if spec.is_discrete:
            assert set(col.astype(int)) <= set(range(len(spec.values)))
        else:
            assert (col >= spec.minimum).all() and (col <= spec.maximum).all()


def test_conditional_clamps(tennis_model, tennis):
    row = tennis.values[0]
    np.testing.assert_array_equal(sample_conditional(tennis_model, dict(enumerate(row)), RandomSource(0)), row)
    draws = np.array([sample_conditional(tennis_model, {3: 0.0}, RandomSource(i)) for i in range(300)])
    assert (draws[:, 3] == 0).all()
    assert np.mean(draws[:, 2] == 0) >= 0.9


def test_no_clamps_matches_sample_vector(tennis_model):
    for i in range(5):
        np.testing.assert_array_equal(sample_conditional(tennis_model, {}, RandomSource(i)),
                                      sample_vector(tennis_model, RandomSource(i)))


def test_gibbs_contract(tennis_model, tennis):
    assert gibbs_run(tennis_model, GibbsConfig(10, 10), RandomSource(0)).shape == (0, 4)
    out = gibbs_run(tennis_model, GibbsConfig(20, 10, 2), RandomSource(0))
    assert out.shape == (5, 4)
    again = gibbs_run(tennis_model, GibbsConfig(20, 10, 2), RandomSource(0))
    np.testing.assert_array_equal(out, again)
    start = gibbs_run(tennis_model, GibbsConfig(3, 0, init="provided"), RandomSource(0), tennis.values[1])
    assert start.shape == (3, 4)
    for bad in (dict(sweeps=5, burn_in=6), dict(sweeps=5, thinning=0), dict(sweeps=5, init="x")):
        with pytest.raises(ValueError):
            GibbsConfig(**bad)
    with pytest.raises(ValueError):
        gibbs_run(tennis_model, GibbsConfig(3, 0, init="provided"), RandomSource(0))


def test_gibbs_single_attribute_is_marginal():
    ds = make_dataset(discrete_schema(("a", "xyz"),), [("x",)] * 5 + [("y",)] * 2 + [("z",)])
    m = EigenModel.from_dataset(ds)
    rows = gibbs_run(m, GibbsConfig(3010, 10), RandomSource(3))
    assert chi2_ok(np.bincount(rows[:, 0].astype(int), minlength=3), m.marginals[0].pmf)
