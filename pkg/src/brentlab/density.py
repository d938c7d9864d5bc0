"""Fixed points of the binary-gcd transfer operator on a graded grid.

Two independent routes are provided:

* the distribution function ``F`` via the recursion
  ``F(x) <- 1 + sum_k 2**-k (F(x/(x+2**k)) - F(1/(1+2**k x)))``;
* the invariant density ``xi = alpha * (-log2 x) + chi(x)`` by iterating
  the operator with the log coefficient carried exactly
  (``alpha <- xi(1) + alpha/3``) and only the bounded part ``chi`` on the grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .quadrature import WeightId, integrate_function, resolve_weight

LN2 = math.log(2.0)
#: Extra terms beyond ``log2(1/x_min)`` in every truncated k-sum; the
#: neglected tail is below ``2**-64`` relative.
K_MARGIN = 64
#: Stored constant in the small-x bound ``F(x_min) <= C x_min |log x_min|``.
F_SMALL_BOUND = 2.0


class NonConvergenceError(RuntimeError):
    pass


# --- grid -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    m_geometric: int = 2048
    m_uniform: int = 2048
    x_min: float = 2.0**-48
    x_split: float = 1.0 / 16

    def __post_init__(self):
        if self.m_geometric < 16 or self.m_uniform < 16:
            raise ValueError("node counts must be >= 16")
        if not 0.0 < self.x_min <= 2.0**-40:
            raise ValueError("x_min must lie in (0, 2**-40]")
        if not self.x_min < self.x_split < 1.0:
            raise ValueError("need x_min < x_split < 1")

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.m_geometric, 2 * self.m_uniform, self.x_min, self.x_split)

    @property
    def k_terms(self) -> int:
        return K_MARGIN + math.ceil(-math.log2(self.x_min))


def make_grid(spec: GridSpec) -> np.ndarray:
    """Geometric nodes from ``x_min`` up to ``x_split``, then uniform nodes to 1.

    Uniform nodes are laid out as ``1 - j*h`` so that distances to 1 are exact.
    """
    ratio = (spec.x_split / spec.x_min) ** (1.0 / spec.m_geometric)
    geo = spec.x_min * ratio ** np.arange(spec.m_geometric)
    h = (1.0 - spec.x_split) / (spec.m_uniform - 1)
    uni = 1.0 - h * np.arange(spec.m_uniform - 1, -1, -1)
    uni[0] = spec.x_split
    nodes = np.concatenate([geo, uni])
    if np.any(np.diff(nodes) <= 0) or nodes[-1] != 1.0:
        raise ValueError("grid spec produced a non-increasing node list")
    return nodes


def _k_powers(K: int) -> np.ndarray:
    return 2.0 ** np.arange(1, K + 1)


# --- distribution function --------------------------------------------------


def _limited_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Spline slopes clipped so the Hermite interpolant stays monotone."""
    d = CubicSpline(x, y)(x, 1)
    d = np.maximum(d, 0.0)
    sec = np.diff(y) / np.diff(x)
    scale = np.ones_like(d)
    flat = sec <= 0
    a = np.where(flat, 0.0, d[:-1] / np.where(flat, 1.0, sec))
    b = np.where(flat, 0.0, d[1:] / np.where(flat, 1.0, sec))
    r = np.hypot(a, b)
    s = np.where(r > 3.0, 3.0 / np.where(r > 0, r, 1.0), 1.0)
    s = np.where(flat, 0.0, s)
    scale[:-1] = np.minimum(scale[:-1], s)
    scale[1:] = np.minimum(scale[1:], s)
    return d * scale


@dataclass(frozen=True, eq=False)
class DistributionGrid:
    """Values of a distribution function at the grid nodes.

    Evaluation uses a monotone cubic Hermite interpolant.  Near 1 the
    complement ``1 - F`` has its own interpolant in ``t = 1 - x`` so that
    small complements keep full relative accuracy.  Below ``x_min`` the
    function is extended by ``y * (A + B * (-log y))`` matched at the two
    smallest nodes.
    """

    grid: GridSpec
    values: np.ndarray
    nodes: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        nodes = make_grid(self.grid) if self.nodes is None else self.nodes
        object.__setattr__(self, "nodes", nodes)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != nodes.shape:
            raise ValueError("values must match the grid")
        if v.min() < 0.0 or v.max() > 1.0 or v[-1] != 1.0:
            raise ValueError("distribution values must lie in [0, 1] with F(1) = 1")
        if np.any(np.diff(v) < 0):
            raise ValueError("distribution values must be non-decreasing")
        x0 = nodes[0]
        if v[0] > F_SMALL_BOUND * x0 * abs(math.log(x0)):
            raise ValueError("F(x_min) violates the small-x bound")
        object.__setattr__(self, "_interp", CubicHermiteSpline(nodes, v, _limited_slopes(nodes, v)))
        upper = nodes >= 0.5
        t = (1.0 - nodes[upper])[::-1]
        h = (1.0 - v[upper])[::-1]
        object.__setattr__(self, "_t_max", t[-1])
        object.__setattr__(self, "_tail", CubicHermiteSpline(t, h, _limited_slopes(t, h)))
        x1 = nodes[1]
        l0, l1 = -math.log(x0), -math.log(x1)
        bcoef = (v[1] / x1 - v[0] / x0) / (l1 - l0)
        object.__setattr__(self, "_small", (v[0] / x0 - bcoef * l0, bcoef))

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if np.any(y < 0.0) or np.any(y > 1.0 + 1e-15):
            raise ValueError("evaluation point outside [0, 1]")
        out = self._interp(np.minimum(y, 1.0))
        small = y < self.nodes[0]
        if np.any(small):
            ys = np.where(y[small] > 0, y[small], 1.0)
            A, B = self._small
            out[small] = np.where(y[small] > 0, ys * (A - B * np.log(ys)), 0.0)
        return out

    def complement(self, y, t) -> np.ndarray:
        """``1 - F(y)`` where ``t = 1 - y`` is supplied exactly by the caller."""
        t = np.asarray(t, dtype=float)
        near = t <= self._t_max
        out = np.empty_like(t)
        out[near] = self._tail(t[near])
        if np.any(~near):
            out[~near] = 1.0 - self(np.asarray(y)[~near])
        return out

    def small_x_ratio(self, count: int = 10) -> np.ndarray:
        """``F(x) / (x |log2 x|)`` at the smallest nodes."""
        x = self.nodes[:count]
        return self.values[:count] / (x * np.abs(np.log2(x)))


def identity_distribution(spec: GridSpec | None = None) -> DistributionGrid:
    spec = spec or GridSpec()
    nodes = make_grid(spec)
    return DistributionGrid(spec, nodes.copy(), nodes)


def recursion_eval(F: DistributionGrid, x) -> np.ndarray:
    """One application of the recursion to ``F`` at arbitrary points ``x >= 0``.

    Written as ``sum_k 2**-k (F(x/(x+2**k)) + 1 - F(1/(1+2**k x)))`` plus the
    tail ``2**-K``, so every term is non-negative and small values keep
    relative accuracy.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = F.grid.k_terms
    acc = np.zeros_like(x)
    for p in _k_powers(K)[::-1]:
        px = p * x
        low = F(x / (x + p))
        high = F.complement(1.0 / (1.0 + px), px / (1.0 + px))
        acc += (low + high) / p
    return acc + 2.0**-K


def iterate_F(F: DistributionGrid) -> DistributionGrid:
    new = recursion_eval(F, F.nodes)
    # both arguments coincide at x = 1, so the update is exactly 1 there
    new[-1] = 1.0
    new = np.clip(new, 0.0, 1.0)
    return DistributionGrid(F.grid, new, F.nodes)


@dataclass
class ConvergenceRecord:
    deltas: list[float] = field(default_factory=list)
    theta_hat: float = float("nan")
    iterations: int = 0
    residual: float = float("nan")

    def finish(self):
        self.iterations = len(self.deltas)
        self.residual = self.deltas[-1]
        d = self.deltas[-6:]
        if len(d) >= 2 and d[0] > 0 and d[-1] > 0:
            self.theta_hat = (d[-1] / d[0]) ** (1.0 / (len(d) - 1))
        return self

    def ratios(self) -> np.ndarray:
        d = np.asarray(self.deltas)
        return d[1:] / d[:-1]


MAX_ITERATIONS = 500


def _check_progress(rec: ConvergenceRecord, what: str):
    d = rec.deltas
    if len(d) >= MAX_ITERATIONS:
        raise NonConvergenceError(f"{what}: no convergence after {MAX_ITERATIONS} iterations "
                                  f"(last delta {d[-1]:.3e})")
    if not math.isfinite(d[-1]):
        raise NonConvergenceError(f"{what}: iteration diverged")


def solve_F(tol: float = 1e-12, spec: GridSpec | None = None) -> tuple[DistributionGrid, ConvergenceRecord]:
    """Iterate from the identity until the sup-norm change drops below ``tol``."""
    if tol < 1e-13:
        raise ValueError("tol must be >= 1e-13")
    F = identity_distribution(spec)
    rec = ConvergenceRecord()
    while True:
        G = iterate_F(F)
        rec.deltas.append(float(np.max(np.abs(G.values - F.values))))
        F = G
        if rec.deltas[-1] < tol:
            return F, rec.finish()
        _check_progress(rec, "distribution recursion")


# --- invariant density ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SingularDensity:
    """``xi(x) = alpha * (-log2 x) + chi(x)`` with ``chi`` a cubic spline on the grid.

    ``chi`` is continued as a constant below the smallest node; this is where
    the representation is least accurate, but the affected mass is below
    ``x_min * |log x_min|``.
    """

    grid: GridSpec
    alpha: float
    chi: np.ndarray
    nodes: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        nodes = make_grid(self.grid) if self.nodes is None else self.nodes
        object.__setattr__(self, "nodes", nodes)
        chi = np.asarray(self.chi, dtype=float)
        object.__setattr__(self, "chi", chi)
        if chi.shape != nodes.shape:
            raise ValueError("chi must match the grid")
        object.__setattr__(self, "_spline", CubicSpline(nodes, chi))

    @property
    def xi_at_one(self) -> float:
        return float(self.chi[-1])

    def node_values(self) -> np.ndarray:
        return self.alpha * -np.log2(self.nodes) + self.chi

    def chi_eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.nodes[0], self.chi[0], self._spline(np.maximum(x, self.nodes[0])))
        return np.where(x == 1.0, self.chi[-1], out)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0) or np.any(x > 1.0):
            raise ValueError("density is evaluated on (0, 1] only")
        return self.alpha * -np.log2(x) + self.chi_eval(x)

    def total(self) -> float:
        """Integral over [0, 1], the log part in closed form."""
        x0 = self.nodes[0]
        return self.alpha / LN2 + float(self._spline.integrate(x0, 1.0)) + self.chi[0] * x0

    def scaled(self, a: float) -> "SingularDensity":
        return SingularDensity(self.grid, a * self.alpha, a * self.chi, self.nodes)

    def to_json(self, rec: "ConvergenceRecord | None" = None) -> str:
        out = {"alpha": self.alpha, "xi_at_one": self.xi_at_one, "grid_spec": asdict(self.grid)}
        if rec is not None:
            out.update(theta_hat=rec.theta_hat, iterations=rec.iterations, residual=rec.residual)
        return json.dumps(out, indent=2, sort_keys=True)


def xi_eval(d: SingularDensity, x: float) -> float:
    if not 0.0 < x <= 1.0:
        raise ValueError("x must lie in (0, 1]")
    return float(d(x))


def uniform_density(spec: GridSpec | None = None) -> SingularDensity:
    spec = spec or GridSpec()
    nodes = make_grid(spec)
    return SingularDensity(spec, 0.0, np.ones_like(nodes), nodes)


def density_from_function(f, spec: GridSpec | None = None) -> SingularDensity:
    """A bounded density given by a vectorized function (no log part)."""
    spec = spec or GridSpec()
    nodes = make_grid(spec)
    return SingularDensity(spec, 0.0, np.asarray(f(nodes), dtype=float), nodes)


def transfer_values(d: SingularDensity, x) -> np.ndarray:
    """``(L xi)(x)`` at arbitrary points of (0, 1], k-sum truncated at ``grid.k_terms``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    acc = np.zeros_like(x)
    for p in _k_powers(d.grid.k_terms)[::-1]:
        g = 1.0 + p * x
        s = x + p
        acc += d(1.0 / g) / (g * g) + d(x / s) / (s * s)
    return acc


def apply_transfer(d: SingularDensity) -> SingularDensity:
    """One application of the operator in split form (no renormalization)."""
    alpha = d.xi_at_one + d.alpha / 3.0
    vals = transfer_values(d, d.nodes)
    return SingularDensity(d.grid, alpha, vals - alpha * -np.log2(d.nodes), d.nodes)


def solve_xi(tol: float = 1e-12, spec: GridSpec | None = None) -> tuple[SingularDensity, ConvergenceRecord]:
    """Iterate the operator from the uniform density, renormalizing each step,
    until ``max|delta chi| + |delta alpha| < tol``."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    d = uniform_density(spec)
    rec = ConvergenceRecord()
    while True:
        nxt = apply_transfer(d)
        nxt = nxt.scaled(1.0 / nxt.total())
        if np.any(nxt.node_values() <= 0):
            raise NonConvergenceError("density iterate lost positivity")
        rec.deltas.append(float(np.max(np.abs(nxt.chi - d.chi)) + abs(nxt.alpha - d.alpha)))
        d = nxt
        if rec.deltas[-1] < tol:
            return d, rec.finish()
        _check_progress(rec, "density iteration")


# --- quadrature against the density ------------------------------------------


def integrate(d: SingularDensity, weight: WeightId, a: float = 0.0, b: float = 1.0) -> float:
    """``int_a^b weight(x) xi(x) dx``.

    For the unit weight the log part is integrated in closed form; otherwise
    the whole integrand goes through graded Gauss-Legendre panels, refined
    toward 1 for weights singular there.
    """
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"need 0 <= a < b <= 1, got [{a}, {b}]")
    w, extra, singular_right = resolve_weight(weight)
    refine = singular_right and b == 1.0
    if isinstance(weight, str) and weight == "one":
        return _log_part_one(d.alpha, a, b) + integrate_function(d.chi_eval, d.nodes, a, b)
    return integrate_function(lambda x: w(x) * d(x), d.nodes, a, b, refine, extra)


def _log_part_one(alpha: float, a: float, b: float) -> float:
    def anti(x):
        return 0.0 if x == 0.0 else (x - x * math.log(x)) / LN2

    return alpha * (anti(b) - anti(a))


# --- export -------------------------------------------------------------------


def grid_csv(F: DistributionGrid, d: SingularDensity) -> str:
    lines = ["#brentlab-v1 density grid", "x,F,xi"]
    for x, f, xi in zip(F.nodes, F.values, d.node_values()):
        lines.append(f"{x:.17g},{f:.17g},{xi:.17g}")
    return "\n".join(lines) + "\n"


def distribution_derivative(F: DistributionGrid, x: float, h: float = 1e-3) -> float:
    """Derivative of the solved distribution function at ``x``.

    Off-grid values come from one exact application of the recursion, so
    interpolation error is smoothed out; differences are Richardson
    extrapolated (central in the interior, one-sided at 1).
    """
    if x >= 1.0:
        hs = h / 2.0 ** np.arange(3)
        D = np.array([(recursion_eval(F, [1.0])[0] - recursion_eval(F, [1.0 - s])[0]) / s for s in hs])
        D1 = 2 * D[1:] - D[:-1]
        return float((4 * D1[1] - D1[0]) / 3)
    hs = np.array([h, h / 2])
    D = np.array([(recursion_eval(F, [x + s])[0] - recursion_eval(F, [x - s])[0]) / (2 * s) for s in hs])
    return float((4 * D[1] - D[0]) / 3)
