"""Compiled inner loops for bulk tracing.

All kernels release the GIL so band-parallel callers can use threads.
Cost tables have shape ``(ncost, 3, KMAX)`` indexed ``[c, branch, k]``.
"""

import numba as nb
import numpy as np
from numba.cpython.unsafe.numbers import trailing_zeros


@nb.njit(nogil=True, cache=True, inline="always")
def _multiplicity(a, n):
    # number of i >= 0 with a * 2**i <= n
    q = n // a
    m = 0
    while q:
        q >>= 1
        m += 1
    return m


@nb.njit(nogil=True, cache=True)
def trace_pairs(us, vs, tables):
    """gcd and per-cost totals for arbitrary positive pairs."""
    npairs = us.shape[0]
    ncost = tables.shape[0]
    gcds = np.empty(npairs, np.int64)
    costs = np.zeros((npairs, ncost))
    for j in range(npairs):
        u = us[j]
        v = vs[j]
        eu = trailing_zeros(u)
        ev = trailing_zeros(v)
        x = u >> eu
        y = v >> ev
        if x > y:
            x, y = y, x
        while x != y:
            d = y - x
            k = trailing_zeros(d)
            d >>= k
            if d >= x:
                y = d
                br = 2
            else:
                y = x
                x = d
                br = 1
            for c in range(ncost):
                costs[j, c] += tables[c, br, k]
        gcds[j] = x << min(eu, ev)
    return gcds, costs


@nb.njit(nogil=True, cache=True)
def scan_odd_pairs(b_lo, b_hi, ladder, tables):
    """Exhaustive scan of odd pairs ``a < b`` with ``b_lo <= b < b_hi``.

    Returns per-denominator arrays for the odd and odd-coprime ensembles and
    ladder-weighted totals for the coprime and unrestricted ensembles (each
    odd pair stands for every general pair with those odd parts).
    """
    ncost = tables.shape[0]
    nl = ladder.shape[0]
    nb_ = b_hi - b_lo
    cnt_b = np.zeros((2, nb_), np.int64)  # [odd-coprime, odd]
    sum_b = np.zeros((2, ncost, nb_))
    sq_b = np.zeros((2, ncost, nb_))
    cnt_l = np.zeros((2, nl), np.int64)  # [coprime, all]
    sum_l = np.zeros((2, ncost, nl))
    sq_l = np.zeros((2, ncost, nl))
    comp_s = np.zeros((2, ncost, nl))
    comp_q = np.zeros((2, ncost, nl))
    cost = np.zeros(ncost)
    mb = np.zeros(nl, np.int64)

    start = b_lo if b_lo & 1 else b_lo + 1
    for b in range(max(start, 3), b_hi, 2):
        ib = b - b_lo
        for l in range(nl):
            mb[l] = _multiplicity(b, ladder[l]) if b <= ladder[l] else 0
        for a in range(1, b, 2):
            x = a
            y = b
            for c in range(ncost):
                cost[c] = 0.0
            while x != y:
                d = y - x
                k = trailing_zeros(d)
                d >>= k
                if d >= x:
                    y = d
                    br = 2
                else:
                    y = x
                    x = d
                    br = 1
                for c in range(ncost):
                    cost[c] += tables[c, br, k]
            coprime = x == 1
            cnt_b[1, ib] += 1
            if coprime:
                cnt_b[0, ib] += 1
            for c in range(ncost):
                cc = cost[c]
                sum_b[1, c, ib] += cc
                sq_b[1, c, ib] += cc * cc
                if coprime:
                    sum_b[0, c, ib] += cc
                    sq_b[0, c, ib] += cc * cc
            for l in range(nl):
                if mb[l] == 0:
                    continue
                ma = _multiplicity(a, ladder[l])
                w_all = ma * mb[l]
                w_cop = ma + mb[l] - 1
                cnt_l[1, l] += w_all
                if coprime:
                    cnt_l[0, l] += w_cop
                for c in range(ncost):
                    cc = cost[c]
                    for e in range(2):
                        if e == 0:
                            if not coprime:
                                continue
                            w = w_cop
                        else:
                            w = w_all
                        # Kahan accumulation
                        t = w * cc - comp_s[e, c, l]
                        s = sum_l[e, c, l] + t
                        comp_s[e, c, l] = (s - sum_l[e, c, l]) - t
                        sum_l[e, c, l] = s
                        t = w * cc * cc - comp_q[e, c, l]
                        s = sq_l[e, c, l] + t
                        comp_q[e, c, l] = (s - sq_l[e, c, l]) - t
                        sq_l[e, c, l] = s
    return cnt_b, sum_b, sq_b, cnt_l, sum_l, sq_l


@nb.njit(nogil=True, cache=True)
def count_coprime_odd(b_lo, b_hi):
    """Per-denominator count of odd ``a < b`` with gcd 1, by binary gcd."""
    out = np.zeros(b_hi - b_lo, np.int64)
    start = b_lo if b_lo & 1 else b_lo + 1
    for b in range(max(start, 3), b_hi, 2):
        n = 0
        for a in range(1, b, 2):
            x = a
            y = b
            while x != y:
                d = y - x
                d >>= trailing_zeros(d)
                if d >= x:
                    y = d
                else:
                    y = x
                    x = d
            if x == 1:
                n += 1
        out[b - b_lo] = n
    return out
