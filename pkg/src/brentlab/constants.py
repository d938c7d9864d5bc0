"""Constants and identities computed from a solved invariant density.

Every truncated k-sum reports an explicit bound on its discarded tail.
Nothing here re-solves the density: all routes share one ``SingularDensity``
so residuals measure identity error rather than solver variance.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .density import DistributionGrid, SingularDensity, integrate
from .gcd import COST_E, COST_S, COST_T, CostFunction
from .quadrature import gauss_panels, integrate_function

LN2 = math.log(2.0)
#: Default truncation for k-sums over the two branch families.
K_SUM = 60


def breakpoint(k: int) -> float:
    """``1 / (1 + 2**k)``, where the two branches of ``T_k`` meet."""
    return 1.0 / (1.0 + 2.0**k)


def mean_prefactor(d: SingularDensity) -> float:
    return 4.0 / (math.pi**2 * d.xi_at_one)


@functools.lru_cache(maxsize=8)
def split_masses(d: SingularDensity, K: int = K_SUM) -> tuple[np.ndarray, np.ndarray]:
    """``(lo, hi)`` with ``lo[k-1] = int_0^{a_k} xi`` and ``hi[k-1] = int_{a_k}^1 xi``."""
    lo = np.array([integrate(d, "one", 0.0, breakpoint(k)) for k in range(1, K + 1)])
    hi = np.array([integrate(d, "one", breakpoint(k), 1.0) for k in range(1, K + 1)])
    return lo, hi


def _kweights(K: int) -> np.ndarray:
    return 2.0 ** -np.arange(1, K + 1)


def cost_tail_bound(c: CostFunction, K: int) -> float:
    """Bound on ``sum_{k>K} 2**-k max_i c(i, k)`` from ``c(i, k) <= C k``."""
    return c.bound * (K + 2) / 2.0**K


def lambda_omega(d: SingularDensity, c: CostFunction, K: int = K_SUM) -> float:
    """``sum_k 2**-k (c(2,k) int_0^{a_k} xi + c(1,k) int_{a_k}^1 xi)``."""
    lo, hi = split_masses(d, K)
    c1 = np.array([c(1, k) for k in range(1, K + 1)])
    c2 = np.array([c(2, k) for k in range(1, K + 1)])
    return math.fsum(_kweights(K) * (c2 * lo + c1 * hi))


def mu_of_cost(d: SingularDensity, c: CostFunction, K: int = K_SUM) -> float:
    """Asymptotic mean cost per unit of ``ln n``."""
    return mean_prefactor(d) * lambda_omega(d, c, K)


def mu_tail_bound(d: SingularDensity, c: CostFunction, K: int = K_SUM) -> float:
    return mean_prefactor(d) * cost_tail_bound(c, K)


def lambda_s_three_ways(d: SingularDensity, K: int = K_SUM) -> tuple[float, float, float]:
    """Three expressions for the derivative of the leading eigenvalue in ``s``."""
    v1 = []
    v2 = []
    for k in range(1, K + 1):
        a = breakpoint(k)
        left = integrate(d, "log1m", 0.0, a) - k * LN2 * integrate(d, "one", 0.0, a)
        right = integrate(d, "log", a, 1.0)
        v1.append(2.0 / 2**k * (left + right))
        v2.append(-2.0 / 2**k * integrate(d, ("logratio", k)))
    v3 = integrate(d, "log1m") - math.log(4.0)
    return math.fsum(v1), math.fsum(v2), v3


def lambda_s_tail_bounds(d: SingularDensity, K: int = K_SUM) -> tuple[float, float]:
    """Tail bounds for the first two expressions of ``lambda_s_three_ways``."""
    abs_log = -integrate(d, "log")
    t1 = 2 * LN2 * (K + 3) / 2.0**K + 2 * abs_log / 2.0**K
    t2 = 2 * LN2 * (K + 3) / 2.0**K
    return t1, t2


def lambda_s_sheepdip(d: SingularDensity) -> float:
    """Closed form ``-pi**2 xi(1) / 2``."""
    return -math.pi**2 * d.xi_at_one / 2.0


def beta_weight(x: np.ndarray, K: int = K_SUM) -> np.ndarray:
    """``sum_{k=2}^K (1 - 2**-k) / (1 + (2**k - 1) x) - 1 / (2 (1 + x))``."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for k in range(K, 1, -1):
        acc += (1.0 - 2.0**-k) / (1.0 + (2.0**k - 1.0) * x)
    return acc - 0.5 / (1.0 + x)


def beta_constants(d: SingularDensity, F: DistributionGrid, K: int = K_SUM) -> tuple[float, float]:
    """``(beta, beta_tilde)``: mean decrease of ``log`` per subtraction, two ways."""
    beta = LN2 + integrate_function(lambda x: beta_weight(x, K) * F(x), F.nodes, 0.0, 1.0)
    beta_tilde = LN2 - 0.5 * integrate(d, "log1m")
    return beta, beta_tilde


def beta_tail_bound(F: DistributionGrid, K: int = K_SUM) -> float:
    """``sum_{k>K} 1/(1 + (2**k-1) x) <= 2**(1-K) / x``, integrated against ``F``."""
    return 2.0 ** (1 - K) * integrate_function(lambda x: F(x) / x, F.nodes, 0.0, 1.0)


def knuth_variant(F: DistributionGrid) -> float:
    """``2 / (log 4 + int_0^1 (1 - F(x)) / (1 - x) dx)``.

    The upper half is integrated in ``t = 1 - x`` using the complement
    interpolant, so the removable 0/0 at ``x = 1`` costs no accuracy.
    """
    lower = integrate_function(lambda x: (1.0 - F(x)) / (1.0 - x), F.nodes, 0.0, 0.5)
    t_nodes = (1.0 - F.nodes[F.nodes > 0.5])[::-1]
    upper = gauss_panels(lambda t: F.complement(1.0 - t, t) / t, np.append(t_nodes, 0.5))
    return 2.0 / (math.log(4.0) + lower + upper)


def exchange_constant(d: SingularDensity, K: int = K_SUM) -> tuple[float, float]:
    """Asymptotic exchanges per unit of ``ln n``, as a k-sum and in closed form."""
    _, hi = split_masses(d, K)
    pref = mean_prefactor(d)
    form1 = pref * math.fsum(_kweights(K) * hi)
    form2 = pref * (integrate(d, "one", 0.5, 1.0) + 2.0 / 3.0 * integrate(d, "one", 1.0 / 3.0, 1.0))
    return form1, form2


def exchange_bracket(d: SingularDensity, K: int = K_SUM) -> float:
    _, hi = split_masses(d, K)
    return math.fsum(_kweights(K) * hi)


# --- stationarity --------------------------------------------------------------


def _stationarity_pieces(name: str, k: int):
    """``(f o left branch, f o right branch, f)`` for a supported test function."""
    c = k * LN2
    m = 2.0**k - 1.0
    if name == "one":
        one = lambda x: np.ones_like(x)
        return one, one, one
    if name == "log":
        return (lambda x: c + np.log(x) - np.log1p(-x),
                lambda x: np.log1p(-x) - np.log(x) - c,
                np.log)
    if name == "2log1p":
        return (lambda x: 2.0 * (np.log1p(m * x) - np.log1p(-x)),
                lambda x: 2.0 * (np.log1p(m * x) - c - np.log(x)),
                lambda x: 2.0 * np.log1p(x))
    raise ValueError(f"unsupported stationarity test function {name!r}")


STATIONARITY_FUNCTIONS = ("2log1p", "log", "one")


def stationarity_check(d: SingularDensity, f: str, K: int = K_SUM) -> tuple[float, float]:
    """``(residual, tail_bound)`` for invariance of ``int f xi`` under the branch maps."""
    terms = []
    for k in range(1, K + 1):
        left, right, _ = _stationarity_pieces(f, k)
        a = breakpoint(k)
        terms.append(2.0**-k * (integrate(d, left, 0.0, a) + integrate(d, right, a, 1.0)))
    rhs = integrate(d, _stationarity_pieces(f, 1)[2])
    if f == "one":
        tail = 2.0**-K
    elif f == "2log1p":
        tail = 2 * LN2 * 2.0**-K
    else:
        m = -integrate(d, "log") - integrate(d, "log1m")
        tail = (LN2 * (K + 2) + m) / 2.0**K
    return abs(math.fsum(terms) - rhs), tail


# --- report ------------------------------------------------------------------


@dataclass
class ConstantsReport:
    xi_one: float
    alpha: float
    mu_S: float
    mu_T: float
    mu_E: float
    lambda_s_v1: float
    lambda_s_v2: float
    lambda_s_v3: float
    lambda_s_sheepdip: float
    beta: float | None
    beta_tilde: float
    knuth: float | None
    exch_form1: float
    exch_form2: float
    exch_bracket: float
    residuals: dict = field(default_factory=dict)
    tail_bounds: dict = field(default_factory=dict)

    @property
    def lambda_s_spread(self) -> float:
        vals = (self.lambda_s_v1, self.lambda_s_v2, self.lambda_s_v3, self.lambda_s_sheepdip)
        return max(abs(a - b) for a, b in itertools.combinations(vals, 2))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items() if not isinstance(v, dict)]
        rows += [(f"residual {k}", v) for k, v in self.residuals.items()]
        rows += [(f"tail {k}", v) for k, v in self.tail_bounds.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {'-' if v is None else format(v, '.12g')}" for k, v in rows)


def constants_report(d: SingularDensity, F: DistributionGrid | None = None, K: int = K_SUM) -> ConstantsReport:
    mu_s, mu_t, mu_e = (mu_of_cost(d, c, K) for c in (COST_S, COST_T, COST_E))
    v1, v2, v3 = lambda_s_three_ways(d, K)
    sd = lambda_s_sheepdip(d)
    beta, knuth = (None, None)
    if F is not None:
        beta, beta_tilde = beta_constants(d, F, K)
        knuth = knuth_variant(F)
    else:
        beta_tilde = math.log(2.0) - 0.5 * integrate(d, "log1m")
    f1, f2 = exchange_constant(d, K)
    rep = ConstantsReport(d.xi_at_one, d.alpha, mu_s, mu_t, mu_e, v1, v2, v3, sd, beta, beta_tilde,
                          knuth, f1, f2, exchange_bracket(d, K))
    r = rep.residuals
    r["lambda_s_max_pairwise"] = rep.lambda_s_spread
    r["exchange_forms"] = abs(f1 - f2)
    r["mu_S_vs_inverse_beta_tilde"] = abs(mu_s - 1.0 / beta_tilde)
    if beta is not None:
        r["mu_S_vs_inverse_beta"] = abs(mu_s - 1.0 / beta)
        r["mu_S_vs_knuth"] = abs(mu_s - knuth)
    for name, c, mu in (("S", COST_S, mu_s), ("T", COST_T, mu_t), ("E", COST_E, mu_e)):
        r[f"mu_{name}_route"] = abs(mu - (-2.0 * lambda_omega(d, c, K) / v3))
    r["mu_T_vs_twice_mu_S"] = abs(mu_t - 2.0 * mu_s)
    r["alpha_vs_1.5_xi_one"] = abs(d.alpha - 1.5 * d.xi_at_one)
    for f in STATIONARITY_FUNCTIONS:
        res, tail = stationarity_check(d, f, K)
        r[f"stationarity_{f}"] = res
        rep.tail_bounds[f"stationarity_{f}"] = tail
    t = rep.tail_bounds
    t["mu_S"] = mu_tail_bound(d, COST_S, K)
    t["mu_T"] = mu_tail_bound(d, COST_T, K)
    t["mu_E"] = mu_tail_bound(d, COST_E, K)
    t["lambda_s_v1"], t["lambda_s_v2"] = lambda_s_tail_bounds(d, K)
    t["exch_form1"] = mean_prefactor(d) * 2.0**-K
    if F is not None:
        t["beta"] = beta_tail_bound(F, K)
    return rep
