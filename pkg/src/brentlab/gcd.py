"""Exact binary Euclidean algorithm with step tracing and cost accounting.

A run on odd ``(u, v)`` with ``u <= v`` repeatedly replaces ``v`` by the odd
part ``w`` of ``v - u``; when ``w < u`` the two are exchanged.  Each step is
recorded as ``(branch, k)`` where ``k`` is the dyadic valuation of ``v - u``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

#: Inputs at or above this bound are rejected; keeps ``v - u`` inside int64.
INPUT_LIMIT = 1 << 62

#: Number of ``k`` columns in tabulated cost arrays (``k < KMAX``).
KMAX = 64


class Branch(enum.IntEnum):
    """The two step families.  Values match the cost-function index ``i``."""

    EXCHANGE = 1
    NO_EXCHANGE = 2


@dataclass(frozen=True)
class OddPair:
    u: int
    v: int

    def __post_init__(self):
        if self.u < 1 or self.v < 1:
            raise ValueError(f"pair entries must be positive, got ({self.u}, {self.v})")
        if not (self.u & 1 and self.v & 1):
            raise ValueError(f"pair entries must be odd, got ({self.u}, {self.v})")
        if self.u > self.v:
            raise ValueError(f"pair must satisfy u <= v, got ({self.u}, {self.v})")

    def __iter__(self):
        yield self.u
        yield self.v


@dataclass(frozen=True)
class StepRecord:
    branch: Branch
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("dyadic valuation k must be >= 1")


@dataclass(frozen=True)
class Trace:
    """Step sequence of the odd-part pair, plus the gcd of the original input."""

    steps: tuple[StepRecord, ...]
    gcd: int
    start: OddPair | None = None

    def __len__(self):
        return len(self.steps)

    @property
    def subtractions(self) -> int:
        return len(self.steps)

    @property
    def halvings(self) -> int:
        return sum(s.k for s in self.steps)

    @property
    def exchanges(self) -> int:
        return sum(1 for s in self.steps if s.branch is Branch.EXCHANGE)

    def dumps(self) -> str:
        """Compact ``(i,k);(i,k);...`` form used by ``--dump-trace``."""
        return ";".join(f"({int(s.branch)},{s.k})" for s in self.steps)

    @staticmethod
    def parse_steps(text: str) -> tuple[StepRecord, ...]:
        text = text.strip()
        if not text:
            return ()
        out = []
        for tok in text.split(";"):
            i, k = tok.strip().strip("()").split(",")
            out.append(StepRecord(Branch(int(i)), int(k)))
        return tuple(out)


def _check_input(n: int) -> None:
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    if n >= INPUT_LIMIT:
        raise OverflowError(f"input {n} exceeds the supported range (< 2**62)")


def strip_twos(n: int) -> tuple[int, int]:
    """Return ``(odd_part, exponent)`` with ``n == odd_part * 2**exponent``."""
    _check_input(n)
    e = (n & -n).bit_length() - 1
    return n >> e, e


def reduce_to_odd(u: int, v: int) -> tuple[OddPair, int, bool]:
    """Odd parts of ``u`` and ``v`` (ordered), the shared power of two, and
    whether the odd parts had to be swapped."""
    a, ea = strip_twos(u)
    b, eb = strip_twos(v)
    swap = a > b
    if swap:
        a, b = b, a
    return OddPair(a, b), min(ea, eb), swap


def binary_step(pair: OddPair) -> tuple[OddPair, StepRecord]:
    u, v = pair.u, pair.v
    if u == v:
        raise ValueError("cannot step from an equal pair; the run has terminated")
    w, k = strip_twos(v - u)
    if w >= u:
        return OddPair(u, w), StepRecord(Branch.NO_EXCHANGE, k)
    return OddPair(w, u), StepRecord(Branch.EXCHANGE, k)


def iter_steps(pair: OddPair) -> Iterator[tuple[OddPair, StepRecord]]:
    while pair.u != pair.v:
        pair, rec = binary_step(pair)
        yield pair, rec


def binary_gcd_trace(u: int, v: int) -> Trace:
    """Run the algorithm on the odd parts of ``u`` and ``v``.

    The returned gcd is that of the original inputs, the steps are those of
    the odd-part pair.
    """
    pair, shared, _ = reduce_to_odd(u, v)
    steps = []
    last = pair
    for last, rec in iter_steps(pair):
        steps.append(rec)
    return Trace(tuple(steps), last.u << shared, pair)


def replay(pair: OddPair, steps: Iterable[StepRecord]) -> OddPair:
    """Apply recorded steps to ``pair``, checking that each one matches."""
    for rec in steps:
        pair, got = binary_step(pair)
        if got != rec:
            raise AssertionError(f"replay diverged: expected {rec}, computed {got}")
    return pair


def apply_fraction_maps(u: int, v: int, ks: Iterable[int]):
    """Apply the interval maps ``T_k`` to the exact fraction ``u/v``.

    ``T_k(x) = 2**k x / (1 - x)`` on ``(0, 1/(1+2**k)]`` and
    ``(1 - x) / (2**k x)`` on ``[1/(1+2**k), 1]``.  Returns the final
    fraction as a reduced ``(num, den)`` pair.
    """
    from fractions import Fraction

    x = Fraction(u, v)
    for k in ks:
        p = 1 << k
        if x <= Fraction(1, 1 + p):
            x = p * x / (1 - x)
        else:
            x = (1 - x) / (p * x)
    return x.numerator, x.denominator


def classical_gcd(u: int, v: int) -> int:
    """Remainder-based Euclid, used as the oracle for the binary algorithm."""
    while v:
        u, v = v, u % v
    return u


# --- cost functions ---------------------------------------------------------


@dataclass
class CostFunction:
    """A non-negative weight ``c(i, k)`` per step, with regularity bound
    ``c(i, k) <= bound * k``.

    The bound is checked lazily on every evaluated point.
    """

    evaluator: Callable[[int, int], float]
    bound: float
    name: str = "custom"
    _checked: set = field(default_factory=set, repr=False, compare=False)

    def __post_init__(self):
        if not self.bound > 0:
            raise ValueError("regularity constant must be positive")

    def __call__(self, i: int, k: int) -> float:
        val = float(self.evaluator(int(i), int(k)))
        if (i, k) not in self._checked:
            if val < 0:
                raise ValueError(f"{self.name}: negative cost c({i},{k}) = {val}")
            if val > self.bound * k * (1 + 1e-12):
                raise ValueError(
                    f"{self.name}: c({i},{k}) = {val} violates regularity bound {self.bound}*k"
                )
            self._checked.add((i, k))
        return val

    def table(self, kmax: int = KMAX) -> np.ndarray:
        """Dense array ``t[i, k]`` for ``i in {1, 2}``, ``1 <= k < kmax``;
        row/column 0 are unused zeros."""
        t = np.zeros((3, kmax))
        for i in (1, 2):
            for k in range(1, kmax):
                t[i, k] = self(i, k)
        if not t.any():
            raise ValueError(f"{self.name}: cost function is identically zero")
        return t

    def __add__(self, other: "CostFunction") -> "CostFunction":
        f, g = self.evaluator, other.evaluator
        return CostFunction(
            lambda i, k: f(i, k) + g(i, k), self.bound + other.bound, f"({self.name}+{other.name})"
        )

    def __rmul__(self, a: float) -> "CostFunction":
        if a <= 0:
            raise ValueError("cost functions may only be scaled by positive factors")
        f = self.evaluator
        return CostFunction(lambda i, k: a * f(i, k), a * self.bound, f"{a:g}*{self.name}")

    __mul__ = __rmul__


def total_cost(trace: Trace, c: CostFunction) -> float:
    return math.fsum(c(int(s.branch), s.k) for s in trace.steps)


COST_S = CostFunction(lambda i, k: 1.0, 1.0, "S")
COST_T = CostFunction(lambda i, k: float(k), 1.0, "T")
COST_E = CostFunction(lambda i, k: 1.0 if i == 1 else 0.0, 1.0, "E")
#: Counts steps without exchange; ``COST_E + COST_N`` is ``COST_S``.
COST_N = CostFunction(lambda i, k: 0.0 if i == 1 else 1.0, 1.0, "N")

BUILTIN_COSTS = {"S": COST_S, "T": COST_T, "E": COST_E, "N": COST_N}


def cost_from_table(entries: dict[tuple[int, int], float], bound: float, extend: str = "constant",
                    name: str = "table") -> CostFunction:
    """Cost function from explicit ``(i, k) -> value`` entries.

    Missing ``k`` beyond the largest tabulated one for a branch are filled by
    ``extend``: ``"constant"`` repeats the last value, ``"linear"`` scales it
    by ``k / k_last``.  Missing ``k`` below it are zero.
    """
    if extend not in ("constant", "linear"):
        raise ValueError(f"unknown extension pattern {extend!r}")
    last = {}
    for (i, k), val in entries.items():
        if i not in (1, 2) or k < 1:
            raise ValueError(f"bad table index ({i},{k})")
        if k > last.get(i, (0, 0.0))[0]:
            last[i] = (k, val)
    table = dict(entries)

    def ev(i, k):
        if (i, k) in table:
            return table[(i, k)]
        kl, vl = last.get(i, (0, 0.0))
        if k < kl or kl == 0:
            return 0.0
        return vl if extend == "constant" else vl * k / kl

    return CostFunction(ev, bound, name)


def read_cost_file(path) -> CostFunction:
    """Parse a cost table file.

    Format::

        # brentlab-cost C=2.0 extend=linear
        1 1 1.0
        2 3 0.5

    Each data line is ``i k value``.
    """
    bound = None
    extend = "constant"
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line.lstrip("#").split():
                    if tok.startswith("C="):
                        bound = float(tok[2:])
                    elif tok.startswith("extend="):
                        extend = tok[7:]
                continue
            i, k, val = line.split()
            entries[(int(i), int(k))] = float(val)
    if bound is None:
        raise ValueError(f"{path}: missing regularity header 'C=<bound>'")
    return cost_from_table(entries, bound, extend, name=str(path))
