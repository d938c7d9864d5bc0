import json
import math

import mpmath
import pytest

from brentlab.dirichlet import (
    SeriesQuery,
    convolution_factor,
    odd_ensemble_closed_form,
    pole_estimate,
    series_truncated,
    tail_bound,
    verify_convolution,
    verify_numthy,
    zeta,
)
from brentlab.ensembles import EnsembleId
from brentlab.gcd import COST_E, COST_S, COST_T


def test_zeta_classical_values():
    assert zeta(2) == pytest.approx(math.pi**2 / 6, abs=1e-14)
    assert zeta(4) == pytest.approx(math.pi**4 / 90, abs=1e-14)
    direct = math.fsum(n**-3.0 for n in range(1, 200001)) + 0.5 / 200000**2
    assert zeta(3) == pytest.approx(direct, abs=1e-12)
    assert zeta(3) == pytest.approx(1.2020569, abs=1e-7)


@pytest.mark.parametrize("s", [1.1, 1.25, 1.5, 2.02, 3.7, 10.0, 40.0])
def test_zeta_against_mpmath(s):
    assert abs(zeta(s) - float(mpmath.zeta(s))) <= 1e-12


def test_zeta_domain():
    for s in (1.0, 0.5, -2.0):
        with pytest.raises(ValueError):
            zeta(s)


def test_series_small_listing():
    r = series_truncated(SeriesQuery(EnsembleId.ODD, 1.5, 0, COST_S, 9))
    assert r.value == pytest.approx(1 / 27 + 2 / 125 + 3 / 343 + 4 / 729, abs=1e-15)
    assert r.value == pytest.approx(0.0672703612, abs=1e-10)


def test_closed_form_ensemble_one():
    # independent evaluation of the same closed form
    want = float((mpmath.mpf(6) / 7) * mpmath.zeta(2) / (2 * mpmath.zeta(3)) - mpmath.mpf(1) / 2)
    assert odd_ensemble_closed_form(EnsembleId.ODD_COPRIME, 1.5) == pytest.approx(want, abs=1e-13)
    assert want == pytest.approx(0.0864712, abs=1e-7)


def test_p0_ignores_cost():
    a = series_truncated(SeriesQuery(EnsembleId.ODD_COPRIME, 2.0, 0, COST_S, 500))
    b = series_truncated(SeriesQuery(EnsembleId.ODD_COPRIME, 2.0, 0, COST_T, 500))
    assert a.value == b.value


def test_query_validation():
    for kw in [dict(ensemble=3), dict(s=1.0), dict(p=2), dict(v_max=2)]:
        args = dict(ensemble=2, s=1.5, p=0, cost=COST_S, v_max=100) | kw
        with pytest.raises(ValueError):
            SeriesQuery(**args)


def test_monotone_in_vmax():
    for p, c in [(0, COST_S), (1, COST_S), (1, COST_E)]:
        vals = [series_truncated(SeriesQuery(EnsembleId.ODD, 1.5, p, c, v)).value for v in (50, 100, 400, 1600)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eid", [EnsembleId.ODD, EnsembleId.ODD_COPRIME])
@pytest.mark.parametrize("p", [0, 1])
def test_tail_honesty(eid, p):
    for v in (64, 256, 1024):
        a = series_truncated(SeriesQuery(eid, 1.5, p, COST_T, v))
        b = series_truncated(SeriesQuery(eid, 1.5, p, COST_T, 4 * v))
        assert b.value - a.value <= a.tail_bound


def test_tail_bound_shapes():
    assert tail_bound(1.5, 10**6, 0) == pytest.approx(1 / (4 * (10**6 - 1)))
    assert tail_bound(1.5, 1000, 1, 2.0) > tail_bound(1.5, 1000, 1, 1.0) > tail_bound(1.5, 1000, 0)


def test_numthy_identities():
    for s, v in [(1.5, 10**6), (2.0, 10**4)]:
        r1, r2 = verify_numthy(s, v)
        assert r1.passed and r2.passed
    r1, _ = verify_numthy(1.5, 10**6)
    assert r1.residual <= 3e-7
    r1, r2 = verify_numthy(2.0, 10**4)
    assert r1.residual <= 1e-8 and r2.residual <= 1e-8
    r1, r2 = verify_numthy(1.25, 60)
    assert r1.passed and r1.residual > 0.5 * r1.tail_bound
    with pytest.raises(ValueError):
        verify_numthy(1.2, 100)


def test_convolution_p0_and_numthy_ratio():
    chk = verify_convolution(1.5, 10**5, 0)
    assert chk.passed
    closed_ratio = (odd_ensemble_closed_form(EnsembleId.ODD, 1.5)
                    / odd_ensemble_closed_form(EnsembleId.ODD_COPRIME, 1.5))
    assert closed_ratio == pytest.approx(convolution_factor(1.5), rel=1e-13)


@pytest.mark.parametrize("cost", [COST_S, COST_E])
def test_convolution_p1(cost):
    chk = verify_convolution(1.5, 2**14, 1, cost)
    assert chk.passed


def test_pole_constant_trend():
    ests = [pole_estimate(s) for s in (1.05, 1.02, 1.01)]
    gaps = [abs(e.scaled - 0.125) for e in ests]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 0.1 * 0.125
    # the tail estimate tracks the closed form closely
    for e in ests:
        exact = (e.s - 1) * odd_ensemble_closed_form(EnsembleId.ODD, e.s)
        assert e.scaled == pytest.approx(exact, rel=1e-3)


def test_series_json():
    r = series_truncated(SeriesQuery(EnsembleId.ODD, 2.0, 0, COST_S, 100))
    data = json.loads(r.to_json())
    assert set(data) == {"query", "value", "tail_bound", "closed_form", "residual"}
