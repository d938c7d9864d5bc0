"""Truncated Dirichlet series over the odd ensembles and their zeta identities.

For real ``s > 1`` the series ``sum C(u, v)**p / v**(2s)`` over odd pairs
(``p`` in {0, 1}) is summed ascending in ``v`` up to ``v_max``, and an
integral-comparison bound on the discarded tail is reported alongside.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .ensembles import EnsembleId, per_denominator_counts, scan_odd_pairs
from .gcd import COST_S, CostFunction

LN2 = math.log(2.0)

_EM_N = 50
_EM_TERMS = 12
_B2 = bernoulli(2 * _EM_TERMS)[2::2]


def zeta(s: float) -> float:
    """Riemann zeta for real ``s > 1`` by Euler-Maclaurin summation."""
    s = float(s)
    if not s > 1.0:
        raise ValueError("zeta is only provided for real s > 1")
    N = _EM_N
    head = math.fsum(n**-s for n in range(1, N))
    tail = [N ** (1 - s) / (s - 1), 0.5 * N**-s]
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, _EM_TERMS + 1):
        tail.append(_B2[j - 1] / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1))
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + math.fsum(tail)


def odd_ensemble_closed_form(eid: EnsembleId, s: float) -> float:
    """Exact ``sum v**(-2s)`` over all pairs of an odd ensemble."""
    eid = EnsembleId(eid)
    q = 4.0**-s
    if eid == EnsembleId.ODD:
        return (0.5 - q) * zeta(2 * s - 1) - 0.5 * (1 - q) * zeta(2 * s)
    if eid == EnsembleId.ODD_COPRIME:
        return (4.0**s - 2) / (4.0**s - 1) * zeta(2 * s - 1) / (2 * zeta(2 * s)) - 0.5
    raise ValueError("closed forms exist for the odd ensembles only")


def convolution_factor(s: float) -> float:
    """``sum_{g odd} g**(-2s)``: odd pairs are odd multiples of odd coprime ones."""
    return zeta(2 * s) * (1 - 4.0**-s)


@dataclass(frozen=True)
class SeriesQuery:
    ensemble: EnsembleId
    s: float
    p: int = 0
    cost: CostFunction = COST_S
    v_max: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "ensemble", EnsembleId(self.ensemble))
        if self.ensemble not in (EnsembleId.ODD_COPRIME, EnsembleId.ODD):
            raise ValueError("series are defined over ensembles 1 and 2")
        if not self.s > 1:
            raise ValueError("s must exceed 1")
        if self.p not in (0, 1):
            raise ValueError("moment order p must be 0 or 1")
        if self.v_max < 3:
            raise ValueError("v_max must be >= 3")

    def to_dict(self) -> dict:
        return {"ensemble": int(self.ensemble), "s": self.s, "p": self.p,
                "cost": self.cost.name, "v_max": self.v_max}


def tail_bound(s: float, v_max: int, p: int = 0, cost_bound: float = 1.0) -> float:
    """Bound on ``sum_{v > v_max}`` of the per-denominator terms.

    Each odd ``v`` has at most ``v/2`` partners, and a run costs at most
    ``C * (2 log2 v + 2)``.  Both summands decrease for ``s >= 5/4``, so each
    odd ``v`` is bounded by half the integral over ``[v - 2, v]``.
    """
    A = float(v_max - 1)
    a = 2 * s - 1
    base = A ** (1 - a)
    if p == 0:
        return 0.25 * base / (a - 1)
    logs = (2 / LN2) * base * (math.log(A) / (a - 1) + 1 / (a - 1) ** 2)
    return 0.25 * cost_bound * (logs + 2 * base / (a - 1))


def denominator_weights(eid: EnsembleId, v_max: int, p: int, c: CostFunction = COST_S,
                        threads: int | None = None) -> np.ndarray:
    """``out[v] = sum_u C(u, v)**p`` over the ensemble's pairs with denominator ``v``."""
    eid = EnsembleId(eid)
    if p == 0:
        return per_denominator_counts(eid, v_max).astype(float)
    scan = scan_odd_pairs(v_max, [c], threads=threads)
    return scan.sum_b[0 if eid == EnsembleId.ODD_COPRIME else 1, 0]


def _weighted_sum(weights: np.ndarray, s: float) -> float:
    v = np.arange(weights.size, dtype=float)
    nz = weights != 0
    return math.fsum(weights[nz] * v[nz] ** (-2 * s))


@dataclass(frozen=True)
class SeriesResult:
    query: SeriesQuery
    value: float
    tail_bound: float
    closed_form: float | None = None

    @property
    def residual(self) -> float | None:
        return None if self.closed_form is None else abs(self.value - self.closed_form)

    def to_dict(self) -> dict:
        return {"query": self.query.to_dict(), "value": self.value, "tail_bound": self.tail_bound,
                "closed_form": self.closed_form, "residual": self.residual}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def series_truncated(q: SeriesQuery, threads: int | None = None) -> SeriesResult:
    w = denominator_weights(q.ensemble, q.v_max, q.p, q.cost, threads)
    closed = odd_ensemble_closed_form(q.ensemble, q.s) if q.p == 0 else None
    return SeriesResult(q, _weighted_sum(w, q.s), tail_bound(q.s, q.v_max, q.p, q.cost.bound), closed)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    s: float
    v_max: int
    residual: float
    tail_bound: float
    slack: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.residual <= self.tail_bound + self.slack

    def to_dict(self) -> dict:
        return {"name": self.name, "s": self.s, "v_max": self.v_max, "residual": self.residual,
                "tail_bound": self.tail_bound, "passed": self.passed}


def verify_numthy(s: float, v_max: int) -> tuple[IdentityCheck, IdentityCheck]:
    """Truncated series over ensembles 2 and 1 against their zeta closed forms."""
    if s < 1.25:
        raise ValueError("identity checks need s >= 1.25")
    out = []
    for eid in (EnsembleId.ODD, EnsembleId.ODD_COPRIME):
        r = series_truncated(SeriesQuery(eid, s, 0, COST_S, v_max))
        out.append(IdentityCheck(f"closed_form_ensemble_{int(eid)}", s, v_max, r.residual, r.tail_bound))
    return out[0], out[1]


def verify_convolution(s: float, v_max: int, p: int = 0, c: CostFunction = COST_S,
                       threads: int | None = None) -> IdentityCheck:
    """Ensemble-2 series against the zeta factor times the ensemble-1 series."""
    if s < 1.25:
        raise ValueError("identity checks need s >= 1.25")
    if p == 0:
        w2 = denominator_weights(EnsembleId.ODD, v_max, 0)
        w1 = denominator_weights(EnsembleId.ODD_COPRIME, v_max, 0)
    else:
        scan = scan_odd_pairs(v_max, [c], threads=threads)
        w1, w2 = scan.sum_b[0, 0], scan.sum_b[1, 0]
    factor = convolution_factor(s)
    resid = abs(_weighted_sum(w2, s) - factor * _weighted_sum(w1, s))
    tb = tail_bound(s, v_max, p, c.bound)
    return IdentityCheck(f"convolution_p{p}", s, v_max, resid, tb + factor * tb)


# --- behaviour near the pole -------------------------------------------------


@dataclass(frozen=True)
class PoleEstimate:
    s: float
    v_max: int
    truncated: float
    tail_estimate: float

    @property
    def scaled(self) -> float:
        """``(s - 1)`` times the series, with the tail estimated by an integral."""
        return (self.s - 1) * (self.truncated + self.tail_estimate)


def pole_estimate(s: float, v_max: int | None = None) -> PoleEstimate:
    """Ensemble-2 series near ``s = 1`` where ``(s-1) * sum`` tends to 1/8.

    The truncated sum alone converges too slowly there (the tail decays like
    ``v_max**(2-2s)``), so the tail is estimated by ``(1/4) int_{v_max}^inf x**(1-2s) dx``.
    """
    if v_max is None:
        v_max = int(round(1e3 / (s - 1)))
    w = denominator_weights(EnsembleId.ODD, v_max, 0)
    return PoleEstimate(s, v_max, _weighted_sum(w, s), 0.25 * v_max ** (2 - 2 * s) / (2 * s - 2))
