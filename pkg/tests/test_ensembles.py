import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brentlab.ensembles import (
    EnsembleId,
    EnsembleStats,
    census_by_enumeration,
    ensemble_census,
    enumerate_pairs,
    fit_log_slope,
    geometric_ladder,
    in_ensemble,
    ladder_stats,
    mean_cost,
    mean_cost_direct,
    per_denominator_counts,
    sample_mean_cost,
    scan_odd_pairs,
    slope_fit,
    totients,
)
from brentlab.gcd import COST_E, COST_S, COST_T, cost_from_table


def test_enumerate_examples():
    assert list(enumerate_pairs(EnsembleId.ODD_COPRIME, 5)) == [(1, 3), (1, 5), (3, 5)]
    assert len(list(enumerate_pairs(EnsembleId.ODD, 9))) == 10
    assert list(enumerate_pairs(EnsembleId.ALL, 2)) == [(1, 2)]


@pytest.mark.parametrize("eid", list(EnsembleId))
def test_enumeration_matches_definition(eid):
    n = 30
    want = [(u, v) for v in range(1, n + 1) for u in range(1, v)
            if (eid not in (1, 2) or (u % 2 and v % 2)) and (eid not in (1, 3) or math.gcd(u, v) == 1)]
    assert list(enumerate_pairs(eid, n)) == want
    assert all(in_ensemble(eid, u, v) for u, v in want)


def test_census_examples():
    assert ensemble_census(EnsembleId.ODD_COPRIME, 10).count == 9
    c = ensemble_census(EnsembleId.ODD, 10)
    assert (c.count, c.ratio) == (10, 0.10)
    for n in (1, 2, 17, 1000):
        assert ensemble_census(EnsembleId.ALL, n).count == n * (n - 1) // 2


def test_totient_sieve():
    phi = totients(50)
    assert all(phi[n] == sum(math.gcd(a, n) == 1 for a in range(1, n + 1)) for n in range(1, 51))


@pytest.mark.parametrize("eid", list(EnsembleId))
@pytest.mark.parametrize("n", [3, 10, 99, 600])
def test_sieve_census_matches_binary_gcd(eid, n):
    assert ensemble_census(eid, n).count == census_by_enumeration(eid, n).count
    assert ensemble_census(eid, n).count == sum(1 for _ in enumerate_pairs(eid, n))


def test_census_limits_at_1e5():
    n = 10**5
    assert abs(ensemble_census(EnsembleId.ODD_COPRIME, n).ratio * math.pi**2 - 1) <= 0.005
    assert abs(ensemble_census(EnsembleId.ODD, n).ratio * 8 - 1) <= 0.005


@pytest.mark.parametrize("cost, mean", [(COST_S, 4 / 3), (COST_E, 1 / 3), (COST_T, 5 / 3)])
def test_mean_cost_examples(cost, mean):
    s = mean_cost(EnsembleId.ODD, 5, cost)
    assert s.count == 3
    assert s.mean == pytest.approx(mean, abs=1e-15)
    assert s.mean_over_logn == pytest.approx(mean / math.log(5))


def test_mean_cost_rejects_small_n():
    with pytest.raises(ValueError):
        mean_cost(EnsembleId.ODD, 2, COST_S)


@pytest.mark.parametrize("eid", list(EnsembleId))
@pytest.mark.parametrize("n", [3, 8, 33, 64, 101])
def test_compiled_statistics_match_direct(eid, n):
    stats = ladder_stats([eid], [n], [COST_S, COST_T, COST_E])
    for c in (COST_S, COST_T, COST_E):
        fast = stats[(eid, n, c.name)]
        slow = mean_cost_direct(eid, n, c)
        assert fast.count == slow.count
        assert fast.sum_cost == pytest.approx(slow.sum_cost, rel=1e-14)
        assert fast.sum_cost_sq == pytest.approx(slow.sum_cost_sq, rel=1e-14)


def test_ladder_equals_separate_runs():
    ns = [40, 80, 160]
    both = ladder_stats(list(EnsembleId), ns, [COST_S])
    for e in EnsembleId:
        for n in ns:
            assert both[(e, n, "S")] == mean_cost(e, n, COST_S)


def test_band_partition_is_exact_and_deterministic():
    ref = scan_odd_pairs(2001, [COST_S, COST_T], ladder=[500, 2001], threads=1, nbands=1)
    for threads, nbands in [(1, 7), (3, 12), (4, 4)]:
        got = scan_odd_pairs(2001, [COST_S, COST_T], ladder=[500, 2001], threads=threads, nbands=nbands)
        assert np.array_equal(got.cnt_b, ref.cnt_b) and np.array_equal(got.cnt_l, ref.cnt_l)
        assert np.array_equal(got.sum_b, ref.sum_b) and np.array_equal(got.sq_b, ref.sq_b)
        # integer-valued costs: compensated float sums are exact
        assert np.array_equal(got.sum_l, ref.sum_l) and np.array_equal(got.sq_l, ref.sq_l)
    again = scan_odd_pairs(2001, [COST_S, COST_T], ladder=[500, 2001], threads=3, nbands=12)
    assert np.array_equal(again.sum_l, got.sum_l)


def test_merge_of_bands():
    n = 301
    whole = mean_cost(EnsembleId.ODD, n, COST_T)
    pieces = []
    for lo, hi in [(1, 100), (100, 250), (250, n + 1)]:
        pairs = [(u, v) for u, v in enumerate_pairs(EnsembleId.ODD, n) if lo <= v < hi]
        from brentlab.gcd import binary_gcd_trace, total_cost
        cs = [total_cost(binary_gcd_trace(u, v), COST_T) for u, v in pairs]
        pieces.append(EnsembleStats(EnsembleId.ODD, n, len(cs), math.fsum(cs),
                                    math.fsum(c * c for c in cs), "T"))
    a = pieces[0].merge(pieces[1]).merge(pieces[2])
    b = pieces[2].merge(pieces[0].merge(pieces[1]))
    assert a == b
    assert (a.count, a.sum_cost, a.sum_cost_sq) == (whole.count, whole.sum_cost, whole.sum_cost_sq)
    with pytest.raises(ValueError):
        a.merge(mean_cost(EnsembleId.ODD, n, COST_S))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.integers(0, 2**32))
def test_statistics_linear_in_cost(a, b, seed):
    rng = np.random.default_rng(seed)
    c1 = cost_from_table({(i, k): float(rng.uniform(0, k)) for i in (1, 2) for k in range(1, 6)},
                         1.0, "linear", "c1")
    combo = a * c1 + b * COST_E
    n = 200
    stats = ladder_stats([EnsembleId.ODD], [n], [c1, COST_E, combo])
    lhs = stats[(EnsembleId.ODD, n, combo.name)].mean
    rhs = a * stats[(EnsembleId.ODD, n, "c1")].mean + b * stats[(EnsembleId.ODD, n, "E")].mean
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_slope_fit_errors():
    with pytest.raises(ValueError):
        slope_fit(EnsembleId.ODD, COST_S, [1024, 1024, 1024])
    with pytest.raises(ValueError):
        slope_fit(EnsembleId.ODD, COST_S, [1024, 2048])
    with pytest.raises(ValueError):
        fit_log_slope([4, 2, 8], [1, 2, 3])


def test_fit_recovers_exact_line():
    ns = [10, 100, 1000, 10000]
    fit = fit_log_slope(ns, [1.5 * math.log(n) - 0.25 for n in ns])
    assert fit.slope == pytest.approx(1.5) and fit.intercept == pytest.approx(-0.25)
    assert fit.residual < 1e-12


def test_geometric_ladder():
    assert geometric_ladder(2**10, 2**15) == [2**k for k in range(10, 16)]


def test_exhaustive_limit_enforced():
    with pytest.raises(ValueError):
        mean_cost(EnsembleId.ODD, 10**6 + 1, COST_S)


def test_sampling_reproducible_and_consistent():
    a = sample_mean_cost(EnsembleId.ODD, 2000, COST_S, 20000, seed=3)
    b = sample_mean_cost(EnsembleId.ODD, 2000, COST_S, 20000, seed=3)
    assert a == b
    exact = mean_cost(EnsembleId.ODD, 2000, COST_S).mean
    assert abs(a.mean - exact) < 5 * a.stderr
    big = sample_mean_cost(EnsembleId.COPRIME, 10**12, COST_S, 5000, seed=1)
    assert big.mean / math.log(10**12) == pytest.approx(1.0185, rel=0.1)


def test_per_denominator_counts_sum():
    for e in EnsembleId:
        assert per_denominator_counts(e, 500).sum() == census_by_enumeration(e, 500).count


def test_second_moment_trend(ctx):
    # E[C^2] / (mu ln n)^2 approaches 1 from below; the gap shrinks along the ladder
    stats = ctx.slopes
    mu = 4 / (math.pi**2 * 0.3979226811883166)
    gaps = [abs(stats[(EnsembleId.ODD, n, "S")].second_moment / (mu * math.log(n)) ** 2 - 1)
            for n in geometric_ladder(2**10, 2**15)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # relative spread vanishes: E[C^2] / E[C]^2 -> 1
    s = stats[(EnsembleId.ODD, 2**15, "S")]
    assert s.second_moment / s.mean**2 == pytest.approx(1.0, abs=0.10)


@pytest.mark.xfail(strict=True, reason="E[C^2]/(ln n)^2 is still ~13% below mu^2 at n=1e5 "
                                        "(O(1) offset in the mean enters squared)")
@pytest.mark.slow
def test_second_moment_law_at_1e5():
    n = 10**5
    mu = 4 / (math.pi**2 * 0.3979226811883166)
    s = mean_cost(EnsembleId.ODD, n, COST_S)
    assert s.second_moment / math.log(n) ** 2 == pytest.approx(mu**2, rel=0.10)
