import numpy as np
import pytest

from helpers import FIG2_SITES, draw_data, random_functional_set, textbook_gp
from opgp import (DimensionMismatch, Kernel, LinearFunctional, MeanFunction, PosteriorState,
                  RedundantBatch, apply, assimilate, condition, expanded_two_stage_moments,
                  posterior_cov, posterior_mean, posterior_via_representing, seq_cov, seq_mean,
                  seq_var, timing_report)
from opgp.experiment import random_splits

K = Kernel("matern52", 0.4, 1.0)
M = MeanFunction.zero()
GRID = np.linspace(-1, 1, 401)


def _run(k, m, batches):
    state = PosteriorState.prior(k, m)
    for fs, y in batches:
        state = assimilate(state, fs, y)
    return state


def test_empty_state_is_prior():
    state = PosteriorState.prior(K, MeanFunction.constant(0.4))
    assert np.all(seq_mean(state, GRID) == 0.4)
    assert seq_cov(state, 0.1, 0.3) == K(0.1, 0.3)


def test_first_batch_is_batch_conditioning(fig2):
    k, m, fs, y = fig2
    state = assimilate(PosteriorState.prior(k, m), fs, y)
    pg = condition(k, m, fs, y)
    assert np.max(np.abs(seq_mean(state, GRID) - posterior_mean(pg, GRID))) <= 1e-12
    assert np.max(np.abs(state.chol - pg.sys.chol)) <= 1e-12


def test_zero_innovation_keeps_mean(fig2):
    k, m, fs, y = fig2
    first = assimilate(PosteriorState.prior(k, m), fs[:3], y[:3])
    mf = first.mean_function()
    predicted = [apply(f, mf) for f in fs[3:]]
    second = assimilate(first, fs[3:], predicted)
    assert np.max(np.abs(seq_mean(second, GRID) - seq_mean(first, GRID))) <= 1e-10
    assert np.all(seq_var(second, GRID) <= seq_var(first, GRID) + 1e-10)
    assert np.any(seq_var(second, GRID) < seq_var(first, GRID) - 1e-3)


def test_fig2_derivative_update_matches_batch(fig2):
    k, m, fs, y = fig2
    state = _run(k, m, [(fs[:6], y[:6]), (fs[6:], y[6:])])
    pg = condition(k, m, fs, y)
    assert np.max(np.abs(seq_mean(state, GRID) - posterior_mean(pg, GRID))) <= 1e-8
    assert np.max(np.abs(seq_cov(state, GRID, GRID) - posterior_cov(pg, GRID, GRID))) <= 1e-8


def test_observed_sites_after_pointwise_batch(fig2):
    k, m, fs, y = fig2
    state = assimilate(PosteriorState.prior(k, m), fs[:3], y[:3])
    for s, v in zip(FIG2_SITES, y[:3]):
        assert seq_mean(state, s) == pytest.approx(v, abs=1e-10)
        assert abs(seq_var(state, s)) <= 1e-10


def test_split_agreement(fig2):
    k, m, fs, y = fig2
    rng = np.random.default_rng(12)
    q = rng.uniform(-1, 1, 20)
    results = []
    for _ in range(12):
        parts = random_splits(len(fs), rng)
        state = _run(k, m, [([fs[i] for i in p], y[p]) for p in parts])
        results.append((seq_mean(state, q), seq_cov(state, q, q)))
    for mean_a, cov_a in results:
        for mean_b, cov_b in results:
            assert np.max(np.abs(mean_a - mean_b)) <= 1e-8
            assert np.max(np.abs(cov_a - cov_b)) <= 1e-8


def test_persistent_update(fig2):
    k, m, fs, y = fig2
    first = assimilate(PosteriorState.prior(k, m), fs[:3], y[:3])
    snapshot = (first.chol.copy(), first.white.copy(), first.functionals)
    assimilate(first, fs[3:], y[3:])
    assert np.array_equal(first.chol, snapshot[0])
    assert np.array_equal(first.white, snapshot[1])
    assert first.functionals == snapshot[2]


def test_cholesky_invariant_and_boundaries(fig2):
    k, m, fs, y = fig2
    state = _run(k, m, [(fs[:3], y[:3]), (fs[3:4], y[3:4]), (fs[4:6], y[4:6]), (fs[6:], y[6:])])
    full = condition(k, m, fs, y).sys.kgg
    assert np.max(np.abs(state.chol @ state.chol.T - full)) <= 1e-9
    assert state.batch_boundaries == (0, 3, 4, 6)


def test_redundant_batch():
    state = assimilate(PosteriorState.prior(K, M), [LinearFunctional.point(0.2)], [1.0])
    with pytest.raises(RedundantBatch):
        assimilate(state, [LinearFunctional.point(0.2)], [1.0])


def test_length_mismatch():
    with pytest.raises(DimensionMismatch):
        assimilate(PosteriorState.prior(K, M), [LinearFunctional.point(0.2)], [])


def test_empty_batch_is_noop(fig2):
    k, m, fs, y = fig2
    a = assimilate(PosteriorState.prior(k, m), fs, y)
    b = assimilate(a, [], [])
    assert np.array_equal(seq_mean(a, GRID), seq_mean(b, GRID))


def test_monotone_variance_across_steps(fig2):
    k, m, fs, y = fig2
    g = np.linspace(-1, 1, 101)
    state = PosteriorState.prior(k, m)
    prev = seq_var(state, g)
    for i in range(len(fs)):
        state = assimilate(state, fs[i:i + 1], y[i:i + 1])
        cur = seq_var(state, g)
        assert np.all(cur <= prev + 1e-10)
        prev = cur


def test_transitivity_random_corpus():
    rng = np.random.default_rng(13)
    for _ in range(15):
        fs = random_functional_set(rng, int(rng.integers(2, 13)))
        y = draw_data(fs, K, M, rng)
        pg = condition(K, M, fs, y)
        q = rng.uniform(-1, 1, 20)
        parts = random_splits(len(fs), rng) if len(fs) > 1 else [np.arange(1)]
        state = _run(K, M, [([fs[i] for i in p], y[p]) for p in parts])
        assert np.max(np.abs(seq_mean(state, q) - posterior_mean(pg, q))) <= 1e-8
        assert np.max(np.abs(seq_cov(state, q, q) - posterior_cov(pg, q, q))) <= 1e-8


def test_order_invariance(fig2):
    k, m, fs, y = fig2
    batches = [(fs[:3], y[:3]), (fs[3:6], y[3:6]), (fs[6:], y[6:])]
    a = _run(k, m, batches)
    b = _run(k, m, batches[::-1])
    q = np.linspace(-1, 1, 57)
    assert np.max(np.abs(seq_mean(a, q) - seq_mean(b, q))) <= 1e-8
    assert np.max(np.abs(seq_cov(a, q, q) - seq_cov(b, q, q))) <= 1e-8


def test_expanded_formulae_empty_second_batch(fig2):
    k, m, fs, y = fig2
    pg = condition(k, m, fs, y)
    g = np.linspace(-1, 1, 51)
    got = expanded_two_stage_moments(k, m, fs, y, [], [], g)
    assert np.max(np.abs(got - posterior_via_representing(pg, g))) <= 1e-12
    got = expanded_two_stage_moments(k, m, fs, y, [], [], g, g)
    assert np.max(np.abs(got - posterior_via_representing(pg, g, g))) <= 1e-12


def test_expanded_formulae_scalar_scalar():
    mean = MeanFunction.constant(-0.2)
    sites, y = [-0.3, 0.45], np.array([0.8, -1.1])
    q = np.linspace(-1, 1, 23)
    mu, cov = textbook_gp(K, mean, sites, y, q)
    f1, f2 = [LinearFunctional.point(sites[0])], [LinearFunctional.point(sites[1])]
    assert np.max(np.abs(expanded_two_stage_moments(K, mean, f1, y[:1], f2, y[1:], q) - mu)) <= 1e-10
    assert np.max(np.abs(expanded_two_stage_moments(K, mean, f1, y[:1], f2, y[1:], q, q) - cov)) <= 1e-10


def test_expanded_formulae_fig2_split(fig2):
    k, m, fs, y = fig2
    state = _run(k, m, [(fs[:6], y[:6]), (fs[6:], y[6:])])
    assert np.max(np.abs(expanded_two_stage_moments(k, m, fs[:6], y[:6], fs[6:], y[6:], GRID)
                         - seq_mean(state, GRID))) <= 1e-8
    g = GRID[::4]
    assert np.max(np.abs(expanded_two_stage_moments(k, m, fs[:6], y[:6], fs[6:], y[6:], g, g)
                         - seq_cov(state, g, g))) <= 1e-8
    assert expanded_two_stage_moments(k, m, fs[:6], y[:6], fs[6:], y[6:], 0.3) == \
        pytest.approx(seq_mean(state, 0.3), abs=1e-8)


def _point_builder(n):
    sites = np.linspace(-1, 1, n)
    return Kernel("matern52", 0.05, 1.0), M, [LinearFunctional.point(s) for s in sites], np.sin(3 * sites)


def test_timing_report_shapes():
    assert timing_report(_point_builder, []).rows == []
    single = timing_report(_point_builder, [1])
    assert len(single.rows) == 1 and single.incremental_faster is None


def test_timing_incremental_beats_recompute():
    table = timing_report(_point_builder, [8] * 64)
    assert table.total_p == 512
    assert table.incremental_faster is True
