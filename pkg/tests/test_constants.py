import json
import math

import numpy as np
import pytest

from brentlab.constants import (
    beta_constants,
    constants_report,
    exchange_bracket,
    exchange_constant,
    knuth_variant,
    lambda_omega,
    lambda_s_sheepdip,
    lambda_s_three_ways,
    mu_of_cost,
    mu_tail_bound,
    stationarity_check,
)
from brentlab.gcd import COST_E, COST_N, COST_S, COST_T, cost_from_table

XI_ONE = 0.3979226811883166440767
MU_S = 4 / (math.pi**2 * XI_ONE)
# 30-digit evaluations from the published xi(1)
MU_S_REF = 1.01850121576143671698693
LAMBDA_S_REF = -1.96366972277474384067746
BETA_TILDE_REF = 0.98183486138737192033873


def test_reference_arithmetic():
    assert MU_S == pytest.approx(MU_S_REF, rel=1e-15)
    assert -math.pi**2 * XI_ONE / 2 == pytest.approx(LAMBDA_S_REF, rel=1e-15)


def test_mu_values(xi):
    assert mu_of_cost(xi, COST_S) == pytest.approx(MU_S, abs=1e-10)
    assert mu_of_cost(xi, COST_T) == pytest.approx(2 * MU_S, abs=1e-10)
    assert mu_of_cost(xi, COST_E) + mu_of_cost(xi, COST_N) == pytest.approx(mu_of_cost(xi, COST_S), abs=1e-14)
    assert mu_tail_bound(xi, COST_T) < 1e-15


def test_lambda_omega_sums(xi):
    assert lambda_omega(xi, COST_S) == pytest.approx(1.0, abs=1e-12)
    assert lambda_omega(xi, COST_T) == pytest.approx(2.0, abs=1e-12)


def test_lambda_s(xi):
    v1, v2, v3 = lambda_s_three_ways(xi)
    assert v3 < 0
    assert abs(v1 - v3) <= 1e-6 and abs(v2 - v3) <= 1e-6
    assert v3 == pytest.approx(LAMBDA_S_REF, abs=1e-9)
    assert abs(lambda_s_sheepdip(xi) - v3) <= 1e-5


def test_sheepdip_homogeneous(xi):
    assert lambda_s_sheepdip(xi.scaled(2.0)) == pytest.approx(2 * lambda_s_sheepdip(xi), rel=1e-15)


@pytest.mark.parametrize("cost", [COST_S, COST_T, COST_E])
def test_mu_two_routes(xi, cost):
    lam_s = lambda_s_three_ways(xi)[2]
    assert mu_of_cost(xi, cost) == pytest.approx(-2 * lambda_omega(xi, cost) / lam_s, abs=1e-8)


def test_mu_two_routes_random_tables(xi):
    rng = np.random.default_rng(17)
    lam_s = lambda_s_three_ways(xi)[2]
    for _ in range(5):
        c = cost_from_table({(i, k): float(rng.uniform(0, 2 * k)) for i in (1, 2) for k in range(1, 12)},
                            2.0, "constant")
        assert mu_of_cost(xi, c) == pytest.approx(-2 * lambda_omega(xi, c) / lam_s, abs=1e-8)


def test_mu_linear(xi):
    c1 = cost_from_table({(1, 1): 0.3, (2, 2): 1.7, (1, 5): 2.0}, 1.0, "linear")
    combo = 2.5 * c1 + 0.5 * COST_E
    assert mu_of_cost(xi, combo) == pytest.approx(2.5 * mu_of_cost(xi, c1) + 0.5 * mu_of_cost(xi, COST_E),
                                                  abs=1e-12)


def test_beta(xi, F):
    beta, beta_tilde = beta_constants(xi, F)
    assert beta_tilde == pytest.approx(BETA_TILDE_REF, abs=1e-9)
    assert 1 / beta_tilde == pytest.approx(mu_of_cost(xi, COST_S), abs=1e-8)
    assert 1 / beta == pytest.approx(mu_of_cost(xi, COST_S), abs=1e-6)
    assert knuth_variant(F) == pytest.approx(MU_S, abs=1e-6)


def test_exchange(xi):
    f1, f2 = exchange_constant(xi)
    assert abs(f1 - f2) <= 1e-8
    assert 0.5 < exchange_bracket(xi) < 0.6
    assert f1 < mu_of_cost(xi, COST_S)


@pytest.mark.parametrize("f, tol", [("2log1p", 1e-7), ("log", 1e-6), ("one", 1e-9)])
def test_stationarity(xi, f, tol):
    res, tail = stationarity_check(xi, f)
    assert res <= tol and tail < 1e-15


def test_stationarity_rejects_unknown(xi):
    with pytest.raises(ValueError):
        stationarity_check(xi, "sqrt")


def test_report(xi, F):
    rep = constants_report(xi, F)
    data = json.loads(rep.to_json())
    assert data["xi_one"] == xi.xi_at_one
    assert rep.lambda_s_spread <= 1e-5
    assert all(v < 1e-5 for v in rep.residuals.values())
    assert "mu_S" in rep.table()
