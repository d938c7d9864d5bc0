"""Composite Gauss-Legendre rules on graded panels over [0, 1].

Panels follow the solution grid, continue dyadically below its smallest
node (where densities carry a log singularity), and can be refined
dyadically toward the right endpoint for weights singular at 1.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

GAUSS_ORDER = 10
_GX, _GW = leggauss(GAUSS_ORDER)

#: Dyadic panels added below the smallest grid node; the neglected piece
#: ``[0, x_min * 2**-DYADIC_DEPTH]`` is far below double precision.
DYADIC_DEPTH = 64

RIGHT_FLOOR = 2.0**-40

WeightId = Union[str, tuple, Callable[[np.ndarray], np.ndarray]]


def _logratio(k: int):
    m = float(2**k - 1)
    c = k * math.log(2.0)

    def w(x):
        return c + np.log1p(x) - np.log1p(m * x)

    return w


def resolve_weight(weight: WeightId) -> tuple[Callable[[np.ndarray], np.ndarray], list[float], bool]:
    """Vectorized weight function, extra breakpoints, and whether it is singular at 1.

    Accepted ids: ``"one"``, ``"log"`` (natural log of x), ``"log1m"``
    (natural log of 1 - x), ``("logratio", k)`` for
    ``log(2**k (1+x) / (1 + (2**k - 1) x))``, a tabulated ``(xs, ws)`` pair
    (piecewise linear) or any vectorized callable.
    """
    if isinstance(weight, str):
        if weight == "one":
            return (lambda x: np.ones_like(x)), [], False
        if weight == "log":
            return np.log, [], False
        if weight == "log1m":
            return (lambda x: np.log1p(-x)), [], True
        raise ValueError(f"unknown weight {weight!r}")
    if isinstance(weight, tuple) and len(weight) == 2:
        if isinstance(weight[0], str) and weight[0] == "logratio":
            k = int(weight[1])
            if k < 1:
                raise ValueError("logratio weight needs k >= 1")
            return _logratio(k), [], False
        xs = np.asarray(weight[0], dtype=float)
        ws = np.asarray(weight[1], dtype=float)
        if xs.ndim != 1 or xs.shape != ws.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated weight needs increasing xs and matching ws")
        return (lambda x: np.interp(x, xs, ws)), list(xs), False
    if callable(weight):
        return weight, [], True
    raise ValueError(f"unknown weight {weight!r}")


def panel_breaks(nodes: np.ndarray, a: float, b: float, refine_right: bool = False,
                 extra: Sequence[float] = ()) -> np.ndarray:
    """Breakpoints for ``[a, b]`` built from the grid ``nodes``.

    Right refinement halves the last panel toward ``b`` down to width
    ``RIGHT_FLOOR``; narrower panels would put Gauss nodes within rounding
    distance of ``b``.
    """
    x_min = nodes[0]
    pts = [nodes[(nodes > a) & (nodes < b)]]
    if a < x_min:
        dy = x_min * 2.0 ** -np.arange(1, DYADIC_DEPTH + 1)
        pts.append(dy[dy > a])
        if a == 0.0:
            a = dy[-1]
    pts.append(np.array([a, b] + [e for e in extra if a < e < b]))
    br = np.unique(np.concatenate(pts))
    if refine_right and br.size >= 2:
        width = b - br[-2]
        depth = max(0, math.floor(math.log2(width / RIGHT_FLOOR)))
        br = np.unique(np.concatenate([br, b - width * 2.0 ** -np.arange(1, depth + 1)]))
    return br


def gauss_panels(f: Callable[[np.ndarray], np.ndarray], breaks: np.ndarray) -> float:
    """Sum of fixed-order Gauss-Legendre rules over consecutive panels."""
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _GX[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    per_panel = half * (vals @ _GW)
    return math.fsum(per_panel)


def integrate_function(f: Callable[[np.ndarray], np.ndarray], nodes: np.ndarray, a: float, b: float,
                       refine_right: bool = False, extra: Sequence[float] = ()) -> float:
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"need 0 <= a < b <= 1, got [{a}, {b}]")
    return gauss_panels(f, panel_breaks(nodes, a, b, refine_right, extra))
