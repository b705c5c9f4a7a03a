"""Symmetric generalized arithmetic progressions: properness, membership, coordinates.

Q = {c_1 v_1 + ... + c_r v_r : c_i in Z, |c_i| <= q_i}.  Inverse-theorem
output is handled as a certificate (a GAP plus the elements it covers); no
GAP is ever searched for.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, exp, prod, sqrt
from typing import NamedTuple, Sequence

import numpy as np

from lolab import config
from lolab.anticoncentration import VectorSequence, sum_distribution, wilson_interval
from lolab.exactmath import GR, LatticeEncoder, as_vector, rank, solve_linear

__all__ = [
    "SymmetricGAP",
    "IntegerBox",
    "ProperCheck",
    "CoverageReport",
    "ContainmentReport",
    "CoverageError",
    "is_proper",
    "gap_contains",
    "dilate",
    "hoeffding_tail_bound",
    "empirical_containment",
    "exact_escape_probability",
    "gap_coordinates",
    "coverage_check",
]


class CoverageError(ValueError):
    def __init__(self, index: int):
        super().__init__(f"element {index} is not in the progression")
        self.index = index


@dataclass(frozen=True)
class IntegerBox:
    """Q_r(q_1, ..., q_r): integer points x with |x_i| <= q_i."""

    radii: tuple

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(int(q) for q in self.radii))

    @property
    def volume(self) -> int:
        return prod(2 * q + 1 for q in self.radii)

    def contains(self, x: Sequence[int]) -> bool:
        return all(abs(c) <= q for c, q in zip(x, self.radii))


@dataclass(frozen=True)
class SymmetricGAP:
    generators: tuple
    radii: tuple

    def __post_init__(self):
        gens = tuple(as_vector(v) for v in self.generators)
        radii = tuple(int(q) for q in self.radii)
        if len(gens) != len(radii):
            raise ValueError("one radius per generator")
        if any(q < 0 for q in radii):
            raise ValueError("radii must be non-negative")
        if gens and len({len(v) for v in gens}) != 1:
            raise ValueError("generators must share a dimension")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "radii", radii)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def k(self) -> int:
        return len(self.generators[0]) if self.generators else 0

    @property
    def volume(self) -> int:
        """Number of coefficient tuples, prod(2 q_i + 1); equals |Q| when proper."""
        return prod(2 * q + 1 for q in self.radii)

    def box(self) -> IntegerBox:
        return IntegerBox(self.radii)

    def point(self, coeffs: Sequence[int]) -> tuple:
        out = [GR(0)] * self.k
        for c, v in zip(coeffs, self.generators):
            if c:
                out = [a + c * b for a, b in zip(out, v)]
        return tuple(out)

    def coefficient_tuples(self):
        """All coefficient tuples, each coordinate running from +q_i down to -q_i."""
        return product(*[range(q, -q - 1, -1) for q in self.radii])

    def independent_generators(self) -> bool:
        return rank(list(self.generators), ncols=self.k) == self.rank

    def _encoder(self, *extra) -> LatticeEncoder:
        return LatticeEncoder.for_vectors(self.k, self.generators, *extra)


class ProperCheck(NamedTuple):
    proper: bool
    witness: tuple | None  # two distinct coefficient tuples with equal value

    def __bool__(self):
        return self.proper


def _half_sums(gens: list, radii: Sequence[int]) -> dict:
    """{encoded sum: first coefficient tuple} over the box with radii ``radii``."""
    dim = len(gens[0]) if gens else 0
    table: dict = {}
    for coeffs in product(*[range(q, -q - 1, -1) for q in radii]):
        s = [0] * dim
        for c, g in zip(coeffs, gens):
            if c:
                for t in range(dim):
                    s[t] += c * g[t]
        table.setdefault(tuple(s), coeffs)
    return table


def _relation_to_witness(c: Sequence[int]) -> tuple:
    # c = a - b with |a_i|, |b_i| <= q_i whenever |c_i| <= 2 q_i
    a = tuple(-((-ci) // 2) for ci in c)
    b = tuple(ai - ci for ai, ci in zip(a, c))
    return a, b


def is_proper(Q: SymmetricGAP, budget: config.Budget | None = None) -> ProperCheck:
    """Unique-representation test.

    Independent generators are proper outright.  Otherwise a nonzero integer
    relation sum c_i v_i = 0 with |c_i| <= 2 q_i is searched for by
    meet-in-the-middle over the two halves of the generator list.
    """
    budget = config.resolve(budget)
    if Q.rank == 0 or Q.independent_generators():
        return ProperCheck(True, None)
    if any(not any(v) and q > 0 for v, q in zip(Q.generators, Q.radii)):
        i = next(i for i, (v, q) in enumerate(zip(Q.generators, Q.radii)) if not any(v) and q > 0)
        c = tuple(1 if j == i else 0 for j in range(Q.rank))
        return ProperCheck(False, _relation_to_witness(c))
    enc = Q._encoder()
    gens = [enc.encode(v) for v in Q.generators]
    doubled = [2 * q for q in Q.radii]
    h = Q.rank // 2
    left_vol = prod(2 * q + 1 for q in doubled[:h])
    right_vol = prod(2 * q + 1 for q in doubled[h:])
    config.check(max(left_vol, right_vol), budget.max_enumeration, "half-box size")
    left = _half_sums(gens[:h], doubled[:h])
    relations = []
    dim = len(gens[0])
    for coeffs in product(*[range(q, -q - 1, -1) for q in doubled[h:]]):
        s = [0] * dim
        for c, g in zip(coeffs, gens[h:]):
            if c:
                for t in range(dim):
                    s[t] -= c * g[t]
        lhs = left.get(tuple(s))
        if lhs is None:
            continue
        rel = tuple(lhs) + tuple(coeffs)
        if any(rel):
            relations.append(rel)
            break
        # the zero relation matched; look for another left tuple with the same sum
        for other in product(*[range(q, -q - 1, -1) for q in doubled[:h]]):
            if any(other) and _encoded_sum(gens[:h], other, dim) == tuple(s):
                relations.append(tuple(other) + tuple(coeffs))
                break
        if relations:
            break
    if not relations:
        return ProperCheck(True, None)
    rel = relations[0]
    first = next(c for c in rel if c)
    if first < 0:
        rel = tuple(-c for c in rel)
    return ProperCheck(False, _relation_to_witness(rel))


def _encoded_sum(gens, coeffs, dim) -> tuple:
    s = [0] * dim
    for c, g in zip(coeffs, gens):
        for t in range(dim):
            s[t] += c * g[t]
    return tuple(s)


def enumerate_gap(Q: SymmetricGAP, budget: config.Budget | None = None) -> dict:
    """{point: coefficient tuple} for every coefficient tuple; first representative wins."""
    budget = config.resolve(budget)
    config.check(Q.volume, budget.max_enumeration, "GAP volume")
    enc = Q._encoder()
    gens = [enc.encode(v) for v in Q.generators]
    table = _half_sums(gens, Q.radii)
    return {enc.decode(p): c for p, c in table.items()}


def gap_contains(Q: SymmetricGAP, x: Sequence, budget: config.Budget | None = None):
    """A coefficient tuple c with sum c_i v_i = x and |c_i| <= q_i, or None."""
    x = as_vector(x)
    if Q.rank == 0:
        return () if not any(x) else None
    if Q.independent_generators():
        cols = [[v[r] for v in Q.generators] for r in range(Q.k)]
        sol = solve_linear(cols, x, ncols=Q.rank)
        if sol is None or not all(c.is_integer() for c in sol):
            return None
        coeffs = tuple(int(c.re) for c in sol)
        return coeffs if Q.box().contains(coeffs) else None
    budget = config.resolve(budget)
    config.check(Q.volume, budget.max_enumeration, "GAP volume")
    enc = Q._encoder([x])
    target = enc.encode(x)
    gens = [enc.encode(v) for v in Q.generators]
    for coeffs in Q.coefficient_tuples():
        if _encoded_sum(gens, coeffs, len(target)) == target:
            return tuple(coeffs)
    return None


def dilate(Q, t) -> IntegerBox:
    """Box with radii ceil(t * q_i) for a positive rational t."""
    t = Fraction(t) if not isinstance(t, str) else Fraction(t)
    if t <= 0:
        raise ValueError("dilation factor must be positive")
    return IntegerBox(tuple(ceil(t * q) for q in Q.radii))


def hoeffding_tail_bound(m: int, r: int, t: float) -> float:
    """2 r exp(-t^2 / (2 m)): bound on the escape probability from the t-dilated box."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return 2 * r * exp(-(t * t) / (2 * m))


def _check_box_sequence(A_star: Sequence[Sequence[int]], radii: Sequence[int]) -> np.ndarray:
    arr = np.array([[int(c) for c in v] for v in A_star], dtype=np.int64).reshape(len(A_star), len(radii))
    if np.any(np.abs(arr) > np.array(radii, dtype=np.int64)):
        raise ValueError("every vector must lie in the box Q_r(q)")
    return arr


def exact_escape_probability(A_star, radii, t, budget: config.Budget | None = None) -> Fraction:
    """Exact P[sum xi_i a_i* leaves Q_r(t q_1, ..., t q_r)] by full enumeration."""
    _check_box_sequence(A_star, radii)
    t = Fraction(t)
    D = sum_distribution(VectorSequence(len(radii), A_star), budget)
    outside = 0
    for p, m in D.encoded.items():
        L = D.encoder.scale
        if any(abs(Fraction(c, L)) > t * q for c, q in zip(p, radii)):
            outside += m
    return Fraction(outside, D.denominator)


@dataclass(frozen=True)
class ContainmentReport:
    escapes: int
    trials: int
    bound: float
    low: float
    high: float

    @property
    def frequency(self) -> float:
        return self.escapes / self.trials

    @property
    def sigma(self) -> float:
        p = min(self.bound, 1.0)
        return sqrt(p * (1 - p) / self.trials)

    def within_bound(self, slack_sigmas: float = 3.0) -> bool:
        return self.frequency <= self.bound + slack_sigmas * self.sigma


def empirical_containment(A_star, radii, t, trials: int, seed=None, confidence: float = 0.99) -> ContainmentReport:
    """Monte Carlo escape frequency from the dilated box, next to the Hoeffding bound."""
    arr = _check_box_sequence(A_star, radii)
    m, r = arr.shape
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(trials, m), dtype=np.int64) * 2 - 1
    sums = signs @ arr
    limits = float(t) * np.array(radii, dtype=float)
    escaped = int(np.count_nonzero(np.any(np.abs(sums) > limits, axis=1)))
    lo, hi = wilson_interval(escaped, trials, confidence)
    return ContainmentReport(escaped, trials, hoeffding_tail_bound(m, r, float(t)), lo, hi)


def gap_coordinates(A: VectorSequence, Q: SymmetricGAP, check_proper: bool = True,
                    budget: config.Budget | None = None) -> list:
    """Coefficient tuples c(a) with sum c_i v_i = a, one per element of A."""
    if check_proper and not is_proper(Q, budget):
        raise ValueError("progression is not proper; coordinates are not unique")
    lookup = None
    if not Q.independent_generators():
        lookup = {}
        for p, c in enumerate_gap(Q, budget).items():
            lookup.setdefault(p, c)
    out = []
    for i, a in enumerate(A.vectors):
        c = lookup.get(a) if lookup is not None else gap_contains(Q, a, budget)
        if c is None:
            raise CoverageError(i)
        out.append(tuple(c))
    return out


@dataclass(frozen=True)
class CoverageReport:
    outside: int
    outside_indices: tuple
    volume: int
    rank: int


def coverage_check(A: VectorSequence, Q: SymmetricGAP, budget: config.Budget | None = None) -> CoverageReport:
    """How many elements of A fall outside Q (volume reported alongside)."""
    lookup = None
    if not Q.independent_generators():
        lookup = set(enumerate_gap(Q, budget))
    bad = []
    for i, a in enumerate(A.vectors):
        inside = a in lookup if lookup is not None else gap_contains(Q, a, budget) is not None
        if not inside:
            bad.append(i)
    return CoverageReport(len(bad), tuple(bad), Q.volume, Q.rank)
