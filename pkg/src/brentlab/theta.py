"""Pairs needing exactly ``n`` steps, generated from words of branch maps.

Running the algorithm backwards from ``1/1`` means composing inverse
branches.  A word ``h_n o ... o h_1`` uses the two families

* ``D_k: u/v -> u/(u + 2**k v)``, matrix ``[[1, 0], [1, 2**k]]`` (a step without exchange)
* ``G_k: u/v -> v/(v + 2**k u)``, matrix ``[[0, 1], [2**k, 1]]`` (a step with exchange)

with ``h_1`` always from ``D`` since the last step never exchanges.
Denominators strictly grow along a word, so truncating at ``v_max`` keeps
the search finite.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .gcd import Branch, CostFunction, binary_gcd_trace, total_cost


class Family(enum.Enum):
    G = "G"
    D = "D"

    @property
    def branch(self) -> Branch:
        return Branch.EXCHANGE if self is Family.G else Branch.NO_EXCHANGE


@dataclass(frozen=True)
class BranchWord:
    letters: tuple[tuple[Family, int], ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a branch word needs at least one letter")
        if self.letters[0][0] is not Family.D:
            raise ValueError("the first letter must be from the D family")
        if any(k < 1 for _, k in self.letters):
            raise ValueError("letter exponents must be >= 1")

    def evaluate(self) -> tuple[int, int]:
        """The image of ``1/1`` as an unreduced integer pair."""
        u, v = 1, 1
        for fam, k in self.letters:
            u, v = _apply(fam, k, u, v)
        return u, v

    def determinant(self) -> int:
        return math.prod(_det(f, k) for f, k in self.letters)

    def derivative_at_one(self) -> Fraction:
        """Derivative of the composed map at 1 by the chain rule, exactly."""
        x = Fraction(1)
        d = Fraction(1)
        for fam, k in self.letters:
            p = 1 << k
            if fam is Family.D:
                d *= Fraction(p) / (x + p) ** 2
                x = x / (x + p)
            else:
                d *= Fraction(-p) / (1 + p * x) ** 2
                x = 1 / (1 + p * x)
        return d

    def cost(self, c: CostFunction) -> float:
        return math.fsum(c(int(f.branch), k) for f, k in self.letters)


def _apply(fam: Family, k: int, u: int, v: int) -> tuple[int, int]:
    if fam is Family.D:
        return u, u + (v << k)
    return v, v + (u << k)


def _det(fam: Family, k: int) -> int:
    return (1 << k) if fam is Family.D else -(1 << k)


def theta_words(n_steps: int, v_max: int) -> list[BranchWord]:
    """All words of length ``n_steps`` whose image has denominator ``<= v_max``."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if v_max < 3:
        raise ValueError("v_max must be >= 3")
    level = [((), 1, 1)]
    for depth in range(n_steps):
        fams = (Family.D,) if depth == 0 else (Family.D, Family.G)
        nxt = []
        for letters, u, v in level:
            for fam in fams:
                k = 1
                while True:
                    nu, nv = _apply(fam, k, u, v)
                    if nv > v_max:
                        break
                    nxt.append((letters + ((fam, k),), nu, nv))
                    k += 1
        level = nxt
    return [BranchWord(w) for w, _, _ in level]


def theta_enumerate(n_steps: int, v_max: int, c: CostFunction) -> dict[tuple[int, int], float]:
    """Map each pair of the ``n_steps`` level with ``v <= v_max`` to its cost."""
    out = {}
    for w in theta_words(n_steps, v_max):
        pair = w.evaluate()
        if pair in out:
            raise AssertionError(f"two words reach {pair}")
        out[pair] = w.cost(c)
    return out


def theta_brute_force(n_max: int, v_max: int, c: CostFunction) -> dict[int, dict[tuple[int, int], float]]:
    """Group odd coprime pairs ``u < v <= v_max`` by their step count."""
    levels: dict[int, dict[tuple[int, int], float]] = {n: {} for n in range(1, n_max + 1)}
    for v in range(3, v_max + 1, 2):
        for u in range(1, v, 2):
            tr = binary_gcd_trace(u, v)
            if tr.gcd != 1 or len(tr) > n_max:
                continue
            levels[len(tr)][(u, v)] = total_cost(tr, c)
    return levels


@dataclass
class ThetaReport:
    n: int
    v_max: int
    cost_id: str
    status: str = "pass"
    level_sizes: dict[int, int] = field(default_factory=dict)
    mismatches: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"n": self.n, "v_max": self.v_max, "cost": self.cost_id, "status": self.status,
                "level_sizes": {str(k): v for k, v in sorted(self.level_sizes.items())},
                "mismatches": self.mismatches}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def verify_theta(n_max: int, v_max: int, c: CostFunction, max_reported: int = 50) -> ThetaReport:
    """Compare word enumeration against brute force for every level up to ``n_max``.

    Each word is also checked for a reduced image and for the determinant
    identity ``derivative(1) == det / v**2``.
    """
    report = ThetaReport(n_max, v_max, c.name)
    brute = theta_brute_force(n_max, v_max, c)

    def bad(**kw):
        if len(report.mismatches) < max_reported:
            report.mismatches.append(kw)
        report.status = "fail"

    for n in range(1, n_max + 1):
        words = theta_words(n, v_max)
        got: dict[tuple[int, int], float] = {}
        for w in words:
            u, v = w.evaluate()
            if math.gcd(u, v) != 1 or not (u & 1 and v & 1):
                bad(n=n, pair=[u, v], kind="not reduced odd")
            if w.derivative_at_one() != Fraction(w.determinant(), v * v):
                bad(n=n, pair=[u, v], kind="determinant")
            if (u, v) in got:
                bad(n=n, pair=[u, v], kind="duplicate word")
            got[(u, v)] = w.cost(c)
        want = brute[n]
        report.level_sizes[n] = len(got)
        for pair in sorted(set(got) - set(want)):
            bad(n=n, pair=list(pair), kind="extra")
        for pair in sorted(set(want) - set(got)):
            bad(n=n, pair=list(pair), kind="missing")
        for pair in sorted(set(got) & set(want)):
            if abs(got[pair] - want[pair]) > 1e-12 * max(1.0, abs(want[pair])):
                bad(n=n, pair=list(pair), kind="cost", expected=want[pair], got=got[pair])
    return report
