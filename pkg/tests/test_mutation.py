import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from nalab.mutation import (
    Kind,
    MutationOperator,
    MutationStream,
    apply_steps,
    harmonic,
    harmonic_cdf,
    harmonic_number,
    mutate,
    mutate_continuous,
    reflect,
    sample_magnitudes,
    sample_step,
    unit,
)
from nalab.network import BiasMode, NetworkTopology

from oracles import harmonic_pmf

ONE = NetworkTopology()
FIXED = NetworkTopology(bias_mode=BiasMode.FIXED_ZERO)


def test_harmonic_r3_exact():
    cdf = harmonic_cdf(3)
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    assert pmf == pytest.approx([6 / 11, 3 / 11, 2 / 11], abs=1e-15)
    assert harmonic_number(3) == pytest.approx(11 / 6)


def test_harmonic_r3_signs_and_sizes():
    rng = np.random.default_rng(0)
    draws = np.array([sample_step(harmonic(), 3, rng) for _ in range(60_000)])
    assert set(np.abs(draws)) <= {1, 2, 3}
    assert abs(np.mean(draws > 0) - 0.5) < 4 * math.sqrt(0.25 / len(draws))
    for i, p in zip((1, 2, 3), (6 / 11, 3 / 11, 2 / 11)):
        assert abs(np.mean(np.abs(draws) == i) - p) < 4 * math.sqrt(p * (1 - p) / len(draws))


def test_unit_always_one():
    rng = np.random.default_rng(1)
    assert {abs(sample_step(unit(), 500, rng)) for _ in range(1000)} == {1}


@pytest.mark.parametrize("r", [1, 7, 120, 1200, 5000])
def test_cdf_last_entry_is_one(r):
    cdf = harmonic_cdf(r)
    assert abs(cdf[-1] - 1.0) <= 1e-15
    assert np.all(np.diff(cdf) > 0)


def test_harmonic_frequencies_1e7():
    r, n = 120, 10_000_000
    draws = sample_magnitudes(harmonic(), r, np.random.default_rng(2024), n)
    counts = np.bincount(draws, minlength=r + 1)[1:]
    pmf = np.array(harmonic_pmf(r))
    sigma = np.sqrt(n * pmf * (1 - pmf))
    assert np.all(np.abs(counts - n * pmf) <= 4 * sigma)


def test_harmonic_interval_bound():
    r, a, b, n = 1200, 100, 1100, 1_000_000
    draws = sample_magnitudes(harmonic(), r, np.random.default_rng(5), n)
    freq = np.mean((draws > a) & (draws <= b))
    bound = (math.log(b / a) - 1 / a) / harmonic_number(r)
    assert freq >= bound - 3 * math.sqrt(bound * (1 - bound) / n)


def test_chi_square_goodness_of_fit():
    r, n = 120, 10_000_000
    draws = sample_magnitudes(harmonic(), r, np.random.default_rng(99), n)
    counts = np.bincount(draws, minlength=r + 1)[1:]
    _, pvalue = stats.chisquare(counts, n * np.array(harmonic_pmf(r)))
    assert pvalue > 0.001


def test_wrap_on_forced_steps():
    assert apply_steps((119, 120), (1, 1), ONE, 120) == (0, 0)
    assert apply_steps((0, 0), (-1, -1), ONE, 120) == (119, 120)


class _NoSelect:
    """Generator stand-in whose uniforms never fall below the selection rate."""

    def random(self, size=None):
        return 0.99 if size is None else np.full(size, 0.99)


def test_void_step_returns_input():
    g = (5, 9)
    assert mutate(g, harmonic(), ONE, 120, _NoSelect()) == g
    assert MutationStream(harmonic(), ONE, 120, _NoSelect(), block=4)(g) == g


def test_fixed_zero_never_touches_bias():
    rng = np.random.default_rng(4)
    g = (10, 60)
    for _ in range(2000):
        y = mutate(g, harmonic(), FIXED, 120, rng)
        assert y[1] == 60
    stream = MutationStream(harmonic(), FIXED, 120, rng)
    assert all(stream(g)[1] == 60 for _ in range(2000))


def test_selection_rate_default():
    topo = NetworkTopology(2)
    assert harmonic().selection_probability(topo) == 0.25
    assert harmonic().selection_probability(FIXED) == 0.5
    assert harmonic(selection=1.0).selection_probability(topo) == 1.0


def test_stream_matches_mutate_distribution():
    topo = NetworkTopology(2)
    n = 40_000
    rng_a, rng_b = np.random.default_rng(8), np.random.default_rng(9)
    g = (50, 50, 50, 50)
    stream = MutationStream(harmonic(), topo, 120, rng_b)
    a = np.array([mutate(g, harmonic(), topo, 120, rng_a) for _ in range(n)])
    b = np.array([stream(g) for _ in range(n)])
    for j in range(4):
        changed_a, changed_b = np.mean(a[:, j] != 50), np.mean(b[:, j] != 50)
        assert abs(changed_a - changed_b) < 5 * math.sqrt(0.25 * 0.75 * 2 / n)
        assert stats.ks_2samp(a[:, j], b[:, j]).pvalue > 1e-4


def test_shift_invariance_with_paired_streams():
    topo = NetworkTopology(2)
    g = (3, 7, 100, 118)
    c = 37
    shifted = tuple((x + c) % (120 if k % 2 == 0 else 121) for k, x in enumerate(g))
    mods = np.array([120, 121, 120, 121])
    sa = MutationStream(harmonic(), topo, 120, np.random.default_rng(12))
    sb = MutationStream(harmonic(), topo, 120, np.random.default_rng(12))
    for _ in range(5000):
        da = (np.array(sa(g)) - g) % mods
        db = (np.array(sb(shifted)) - shifted) % mods
        assert np.array_equal(da, db)


def test_resample_void():
    op = harmonic(resample_void=True)
    rng = np.random.default_rng(0)
    stream = MutationStream(op, ONE, 120, rng)
    assert np.mean([stream((5, 5)) != (5, 5) for _ in range(2000)]) > 0.99
    changed = [mutate((5, 5), op, ONE, 120, rng) != (5, 5) for _ in range(2000)]
    # a selected component can still land back on itself only via a full wrap
    assert np.mean(changed) > 0.99


@given(st.integers(0, 119), st.integers(0, 120), st.integers(0, 2**32 - 1))
def test_unit_moves_at_most_one(phi, b, seed):
    y = mutate((phi, b), unit(), ONE, 120, np.random.default_rng(seed))
    assert min((y[0] - phi) % 120, (phi - y[0]) % 120) <= 1
    assert min((y[1] - b) % 121, (b - y[1]) % 121) <= 1


def test_continuous_examples():
    rng = np.random.default_rng(1)
    zero = MutationOperator(Kind.EXPONENTIAL, {"mean": 0.0})
    assert mutate_continuous((1.0, 0.2), zero, rng) == (1.0, 0.2)
    assert reflect(1.05, -1, 1) == pytest.approx(0.95)
    assert reflect(-1.3, -1, 1) == pytest.approx(-0.7)
    assert (2 * math.pi - 0.1 + 0.2) % (2 * math.pi) == pytest.approx(0.1)


def test_continuous_rejects_bad_params():
    with pytest.raises(ValueError):
        MutationOperator(Kind.PARETO, {"shape": 0.0})
    with pytest.raises(ValueError):
        MutationOperator(Kind.CAUCHY, {"scale": -1.0})
    with pytest.raises(ValueError):
        mutate_continuous((0.0, 0.0), harmonic(), np.random.default_rng(0))


@pytest.mark.parametrize("kind", [Kind.PARETO, Kind.EXPONENTIAL, Kind.CAUCHY])
def test_continuous_stays_in_domain(kind):
    rng = np.random.default_rng(3)
    x = (0.0, 0.9)
    op = MutationOperator(kind)
    for _ in range(2000):
        x = mutate_continuous(x, op, rng)
        assert 0 <= x[0] < 2 * math.pi and -1 <= x[1] <= 1
