"""The four input ensembles, exact censuses and mean-cost statistics.

Ensemble ``i`` at bound ``n`` holds the pairs ``1 <= u < v <= n`` with

1. ``u, v`` odd and coprime
2. ``u, v`` odd
3. ``u, v`` coprime
4. no restriction

Exhaustive statistics are computed by scanning odd pairs only: the cost of a
general pair is the cost of its odd parts, so every odd pair ``(a, b)``
stands for ``m(a) * m(b)`` unrestricted pairs and ``m(a) + m(b) - 1``
coprime ones, where ``m(a)`` counts the ``i >= 0`` with ``a * 2**i <= n``.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .gcd import INPUT_LIMIT, CostFunction, binary_gcd_trace, total_cost

CSV_COLUMNS = "ensemble,n,count,ratio,cost,mean,mean_over_logn,second_moment"

#: Above this bound ``mean_cost`` refuses to enumerate; use ``sample_mean_cost``.
EXHAUSTIVE_LIMIT = 10**6


class EnsembleId(enum.IntEnum):
    ODD_COPRIME = 1
    ODD = 2
    COPRIME = 3
    ALL = 4


def _binary_gcd(u: int, v: int) -> int:
    return binary_gcd_trace(u, v).gcd


def in_ensemble(eid: EnsembleId, u: int, v: int) -> bool:
    if not 1 <= u < v:
        return False
    eid = EnsembleId(eid)
    if eid in (EnsembleId.ODD_COPRIME, EnsembleId.ODD) and not (u & 1 and v & 1):
        return False
    if eid in (EnsembleId.ODD_COPRIME, EnsembleId.COPRIME):
        return _binary_gcd(u, v) == 1
    return True


def enumerate_pairs(eid: EnsembleId, n: int) -> Iterator[tuple[int, int]]:
    """Yield the ensemble's pairs ordered by ``v`` then ``u``."""
    eid = EnsembleId(eid)
    odd = eid in (EnsembleId.ODD_COPRIME, EnsembleId.ODD)
    coprime = eid in (EnsembleId.ODD_COPRIME, EnsembleId.COPRIME)
    step = 2 if odd else 1
    for v in range(3 if odd else 2, n + 1, step):
        for u in range(1, v, step):
            if coprime and _binary_gcd(u, v) != 1:
                continue
            yield u, v


# --- census -----------------------------------------------------------------


def totients(n: int) -> np.ndarray:
    """Euler's phi for ``0..n`` by sieve."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


def per_denominator_counts(eid: EnsembleId, n: int) -> np.ndarray:
    """``out[v]`` = number of ``u`` with ``(u, v)`` in the ensemble."""
    eid = EnsembleId(eid)
    v = np.arange(n + 1, dtype=np.int64)
    out = np.zeros(n + 1, dtype=np.int64)
    if eid == EnsembleId.ALL:
        out[1:] = v[1:] - 1
    elif eid == EnsembleId.ODD:
        out[3::2] = (v[3::2] - 1) // 2
    else:
        phi = totients(n)
        if eid == EnsembleId.COPRIME:
            out[2:] = phi[2:]
        else:
            # for odd v, u and v - u have opposite parity and are both coprime to v
            out[3::2] = phi[3::2] // 2
    return out


@dataclass(frozen=True)
class Census:
    ensemble: EnsembleId
    n: int
    count: int

    @property
    def ratio(self) -> float:
        return self.count / self.n**2


def ensemble_census(eid: EnsembleId, n: int) -> Census:
    """Exact ensemble size.

    Coprime counts come from a totient sieve; the binary-gcd route is
    :func:`census_by_enumeration`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eid = EnsembleId(eid)
    if eid == EnsembleId.ALL:
        return Census(eid, n, n * (n - 1) // 2)
    return Census(eid, n, int(per_denominator_counts(eid, n).sum()))


def census_by_enumeration(eid: EnsembleId, n: int) -> Census:
    """Ensemble size by exhaustive binary-gcd tests (compiled)."""
    eid = EnsembleId(eid)
    if eid in (EnsembleId.ODD, EnsembleId.ALL):
        return ensemble_census(eid, n)
    if eid == EnsembleId.ODD_COPRIME:
        return Census(eid, n, int(_kernels.count_coprime_odd(1, n + 1).sum()))
    us, vs = np.triu_indices(n + 1, 1)
    keep = us >= 1
    gcds, _ = _kernels.trace_pairs(us[keep].astype(np.int64), vs[keep].astype(np.int64),
                                   np.zeros((0, 3, 2)))
    return Census(eid, n, int((gcds == 1).sum()))


# --- statistics -------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleStats:
    ensemble: EnsembleId
    n: int
    count: int
    sum_cost: float
    sum_cost_sq: float
    cost_id: str

    @property
    def mean(self) -> float:
        return self.sum_cost / self.count

    @property
    def mean_over_logn(self) -> float:
        return self.mean / math.log(self.n)

    @property
    def second_moment(self) -> float:
        return self.sum_cost_sq / self.count

    @property
    def ratio(self) -> float:
        return self.count / self.n**2

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        """Combine statistics over two disjoint pieces of one ensemble."""
        if (self.ensemble, self.n, self.cost_id) != (other.ensemble, other.n, other.cost_id):
            raise ValueError("can only merge pieces of the same ensemble, bound and cost")
        return EnsembleStats(self.ensemble, self.n, self.count + other.count,
                             self.sum_cost + other.sum_cost,
                             self.sum_cost_sq + other.sum_cost_sq, self.cost_id)

    def csv_row(self) -> str:
        return (f"{int(self.ensemble)},{self.n},{self.count},{self.ratio:.10g},{self.cost_id},"
                f"{self.mean:.12g},{self.mean_over_logn:.12g},{self.second_moment:.12g}")


def _band_edges(b_max: int, nbands: int) -> list[int]:
    # equal pair counts per band: work on [0, b) grows like b**2
    edges = [1]
    for j in range(1, nbands):
        e = int(b_max * math.sqrt(j / nbands))
        if e > edges[-1]:
            edges.append(e)
    edges.append(b_max + 1)
    return edges


def default_threads() -> int:
    return int(os.environ.get("BRENTLAB_THREADS", "1"))


@dataclass
class OddScan:
    """Raw output of an exhaustive odd-pair scan up to ``b_max``."""

    b_max: int
    ladder: np.ndarray
    cost_ids: list[str]
    cnt_b: np.ndarray  # (2, b_max + 1): [odd-coprime, odd] per denominator
    sum_b: np.ndarray  # (2, ncost, b_max + 1)
    sq_b: np.ndarray
    cnt_l: np.ndarray  # (2, nl): [coprime, all] per ladder point, odd parts distinct
    sum_l: np.ndarray  # (2, ncost, nl)
    sq_l: np.ndarray


def scan_odd_pairs(b_max: int, costs: Sequence[CostFunction], ladder: Sequence[int] = (),
                   threads: int | None = None, nbands: int | None = None) -> OddScan:
    """Exhaustive scan of all odd pairs with denominator ``<= b_max``.

    ``ladder`` lists the bounds at which the coprime/unrestricted ensembles
    are wanted; leave empty when only odd ensembles are needed.  Work is
    split into fixed denominator bands whose results are merged in band
    order, so the output does not depend on ``threads``.
    """
    if b_max >= INPUT_LIMIT:
        raise OverflowError("bound exceeds supported integer range")
    threads = threads or default_threads()
    nbands = nbands or max(8, 4 * threads)
    tables = np.stack([c.table() for c in costs]) if costs else np.zeros((0, 3, 2))
    lad = np.asarray(sorted(ladder), dtype=np.int64)
    if lad.size and lad[-1] > b_max:
        raise ValueError("ladder exceeds scan bound")
    edges = _band_edges(b_max, nbands)
    jobs = list(zip(edges[:-1], edges[1:]))

    def run(job):
        return _kernels.scan_odd_pairs(job[0], job[1], lad, tables)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    ncost = tables.shape[0]
    cnt_b = np.zeros((2, b_max + 1), np.int64)
    sum_b = np.zeros((2, ncost, b_max + 1))
    sq_b = np.zeros((2, ncost, b_max + 1))
    cnt_l = np.zeros((2, lad.size), np.int64)
    sum_parts, sq_parts = [], []
    for (lo, hi), (cb, sb, qb, cl, sl, ql) in zip(jobs, parts):
        cnt_b[:, lo:hi] = cb
        sum_b[:, :, lo:hi] = sb
        sq_b[:, :, lo:hi] = qb
        cnt_l += cl
        sum_parts.append(sl)
        sq_parts.append(ql)
    sum_l = _fsum_stack(sum_parts, (2, ncost, lad.size))
    sq_l = _fsum_stack(sq_parts, (2, ncost, lad.size))
    return OddScan(b_max, lad, [c.name for c in costs], cnt_b, sum_b, sq_b, cnt_l, sum_l, sq_l)


def _fsum_stack(parts, shape):
    out = np.zeros(shape)
    if not parts:
        return out
    stack = np.stack(parts)
    for idx in np.ndindex(*shape):
        out[idx] = math.fsum(stack[(slice(None),) + idx])
    return out


def _stats_from_scan(scan: OddScan, eid: EnsembleId, n: int, c: int) -> EnsembleStats:
    eid = EnsembleId(eid)
    name = scan.cost_ids[c]
    if eid in (EnsembleId.ODD_COPRIME, EnsembleId.ODD):
        e = 0 if eid == EnsembleId.ODD_COPRIME else 1
        return EnsembleStats(eid, n, int(scan.cnt_b[e, : n + 1].sum()),
                             math.fsum(scan.sum_b[e, c, : n + 1]),
                             math.fsum(scan.sq_b[e, c, : n + 1]), name)
    li = int(np.searchsorted(scan.ladder, n))
    if li >= scan.ladder.size or scan.ladder[li] != n:
        raise KeyError(f"bound {n} was not on the scan ladder")
    e = 0 if eid == EnsembleId.COPRIME else 1
    count = int(scan.cnt_l[e, li])
    # pairs whose odd parts coincide have zero cost but still count
    if eid == EnsembleId.COPRIME:
        count += n.bit_length() - 1  # (1, 2**j)
    else:
        count += sum(m * (m - 1) // 2 for m in
                     ((n // a).bit_length() for a in range(1, n + 1, 2)))
    return EnsembleStats(eid, n, count, float(scan.sum_l[e, c, li]),
                         float(scan.sq_l[e, c, li]), name)


def ladder_stats(ensembles: Sequence[EnsembleId], n_values: Sequence[int],
                 costs: Sequence[CostFunction], threads: int | None = None
                 ) -> dict[tuple[EnsembleId, int, str], EnsembleStats]:
    """Exact statistics for every (ensemble, n, cost) combination in one scan."""
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values or n_values[0] < 3:
        raise ValueError("bounds must be >= 3")
    if n_values[-1] > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive statistics limited to n <= {EXHAUSTIVE_LIMIT}; "
                         "use sample_mean_cost")
    ensembles = [EnsembleId(e) for e in ensembles]
    need_ladder = any(e in (EnsembleId.COPRIME, EnsembleId.ALL) for e in ensembles)
    scan = scan_odd_pairs(n_values[-1], costs, n_values if need_ladder else (), threads)
    out = {}
    for e in ensembles:
        for n in n_values:
            for ci, c in enumerate(costs):
                out[(e, n, c.name)] = _stats_from_scan(scan, e, n, ci)
    return out


def mean_cost(eid: EnsembleId, n: int, c: CostFunction, threads: int | None = None) -> EnsembleStats:
    if n < 3:
        raise ValueError("n must be >= 3")
    eid = EnsembleId(eid)
    return ladder_stats([eid], [n], [c], threads)[(eid, n, c.name)]


def mean_cost_direct(eid: EnsembleId, n: int, c: CostFunction) -> EnsembleStats:
    """Pure-Python reference: trace every pair of the ensemble."""
    eid = EnsembleId(eid)
    costs = [total_cost(binary_gcd_trace(u, v), c) for u, v in enumerate_pairs(eid, n)]
    return EnsembleStats(eid, n, len(costs), math.fsum(costs),
                         math.fsum(x * x for x in costs), c.name)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    n_values: tuple[int, ...]
    means: tuple[float, ...]


def fit_log_slope(n_values: Sequence[int], means: Sequence[float]) -> SlopeFit:
    """Least-squares line ``mean ~ slope * ln n + intercept``."""
    ns = [int(n) for n in n_values]
    if len(ns) < 3:
        raise ValueError("slope fit needs at least 3 ladder points")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ladder must be strictly increasing")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.asarray(means, dtype=float)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return SlopeFit(float(slope), float(intercept), resid, tuple(ns), tuple(float(m) for m in y))


def slope_fit(eid: EnsembleId, c: CostFunction, n_values: Sequence[int],
              threads: int | None = None) -> SlopeFit:
    ns = [int(n) for n in n_values]
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ladder must have at least 3 strictly increasing points")
    eid = EnsembleId(eid)
    stats = ladder_stats([eid], ns, [c], threads)
    return fit_log_slope(ns, [stats[(eid, n, c.name)].mean for n in ns])


def geometric_ladder(lo: int, hi: int, ratio: int = 2) -> list[int]:
    out = [lo]
    while out[-1] * ratio <= hi:
        out.append(out[-1] * ratio)
    return out


# --- sampling ---------------------------------------------------------------


@dataclass(frozen=True)
class SampledStats:
    ensemble: EnsembleId
    n: int
    samples: int
    mean: float
    stderr: float
    second_moment: float
    cost_id: str
    seed: int


def sample_mean_cost(eid: EnsembleId, n: int, c: CostFunction, samples: int = 10**5,
                     seed: int = 0) -> SampledStats:
    """Monte Carlo mean cost from uniformly drawn ensemble members.

    Pairs are drawn uniformly from ``[1, n]**2`` and rejected until
    ``samples`` members of the ensemble are collected.
    """
    eid = EnsembleId(eid)
    if n >= INPUT_LIMIT:
        raise OverflowError("bound exceeds supported integer range")
    rng = np.random.default_rng(seed)
    table = c.table()[None]
    got = []
    have = 0
    while have < samples:
        batch = max(2 * (samples - have), 1024)
        if eid in (EnsembleId.ODD_COPRIME, EnsembleId.ODD):
            u = 2 * rng.integers(0, (n + 1) // 2, batch, dtype=np.int64) + 1
            v = 2 * rng.integers(0, (n + 1) // 2, batch, dtype=np.int64) + 1
        else:
            u = rng.integers(1, n + 1, batch, dtype=np.int64)
            v = rng.integers(1, n + 1, batch, dtype=np.int64)
        keep = u != v
        u, v = np.minimum(u[keep], v[keep]), np.maximum(u[keep], v[keep])
        gcds, costs = _kernels.trace_pairs(u, v, table)
        if eid in (EnsembleId.ODD_COPRIME, EnsembleId.COPRIME):
            costs = costs[gcds == 1]
        got.append(costs[:, 0])
        have += costs.shape[0]
    x = np.concatenate(got)[:samples]
    mean = math.fsum(x) / samples
    var = math.fsum((x - mean) ** 2) / (samples - 1)
    return SampledStats(eid, n, samples, mean, math.sqrt(var / samples),
                        math.fsum(x * x) / samples, c.name, seed)
