"""Exact laws of Rademacher sums X = xi_1 a_1 + ... + xi_n a_n and concentration functionals."""

from __future__ import annotations

import csv
import io
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from lolab import config
from lolab.exactmath import (
    GR,
    LatticeEncoder,
    as_vector,
    dot,
    format_scalar,
    span_annihilator,
    vec_sub,
)

__all__ = [
    "VectorSequence",
    "SumDistribution",
    "FinitePointSet",
    "SubspaceSet",
    "TranslatedSet",
    "sum_distribution",
    "rho",
    "prob_in_set",
    "rho_translate_lower_bound",
    "rho_finite",
    "rho_subspace",
    "quotient_map",
    "monte_carlo_prob",
    "MonteCarloEstimate",
    "TranslateBound",
    "wilson_interval",
]


class VectorSequence:
    """Multiset A = (a_1, ..., a_n) of vectors in F^k."""

    __slots__ = ("k", "vectors")

    def __init__(self, k: int, vectors: Iterable[Sequence] = ()):
        vecs = tuple(as_vector(v) for v in vectors)
        for v in vecs:
            if len(v) != k:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {k}")
        self.k = k
        self.vectors = vecs

    @classmethod
    def scalars(cls, values: Iterable) -> "VectorSequence":
        return cls(1, [(v,) for v in values])

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]

    @property
    def n(self) -> int:
        return len(self.vectors)

    def subsequence(self, indices: Iterable[int]) -> "VectorSequence":
        return VectorSequence(self.k, [self.vectors[i] for i in indices])

    def map(self, rows: Sequence[Sequence]) -> "VectorSequence":
        """Image under the linear map with the given matrix rows."""
        return VectorSequence(len(rows), [tuple(dot(r, v) for r in rows) for v in self.vectors])

    def is_real(self) -> bool:
        return all(x.is_real() for v in self.vectors for x in v)

    def __eq__(self, other):
        return isinstance(other, VectorSequence) and self.k == other.k and self.vectors == other.vectors

    def __repr__(self):
        body = ", ".join("(" + ", ".join(format_scalar(x) for x in v) + ")" for v in self.vectors)
        return f"VectorSequence(k={self.k}, [{body}])"


# membership sets ------------------------------------------------------------


class FinitePointSet:
    def __init__(self, points: Iterable[Sequence], k: int | None = None):
        pts = []
        seen = set()
        for p in points:
            v = as_vector(p)
            if v not in seen:
                seen.add(v)
                pts.append(v)
        if k is None:
            if not pts:
                raise ValueError("ambient dimension required for an empty point set")
            k = len(pts[0])
        for p in pts:
            if len(p) != k:
                raise ValueError("point of the wrong dimension")
        self.k = k
        self.points = tuple(pts)
        self._set = frozenset(pts)

    def contains(self, point) -> bool:
        return as_vector(point) in self._set

    __contains__ = contains

    def __len__(self):
        return len(self.points)

    def union(self, other: "FinitePointSet") -> "FinitePointSet":
        return FinitePointSet(self.points + other.points, self.k)


class SubspaceSet:
    """Linear subspace span(basis) of F^k."""

    def __init__(self, basis: Iterable[Sequence], k: int):
        self.k = k
        self.basis = tuple(as_vector(b) for b in basis)
        self.annihilator = span_annihilator(self.basis, k)

    @property
    def dim(self) -> int:
        return self.k - len(self.annihilator)

    def contains(self, point) -> bool:
        p = as_vector(point)
        return all(not dot(y, p) for y in self.annihilator)

    __contains__ = contains


class TranslatedSet:
    """S + shift."""

    def __init__(self, base, shift: Sequence):
        self.base = base
        self.k = base.k
        self.shift = as_vector(shift)

    def contains(self, point) -> bool:
        return self.base.contains(vec_sub(as_vector(point), self.shift))

    __contains__ = contains


# distributions -----------------------------------------------------------------


def _convolve(vectors: Sequence[tuple], limit: int) -> dict:
    """Law of sum xi_i v_i for integer-tuple vectors, as {point: count}."""
    if not vectors:
        return {}
    dim = len(vectors[0])
    dist = {(0,) * dim: 1}
    for v in vectors:
        new: dict = {}
        for p, m in dist.items():
            plus = tuple(a + b for a, b in zip(p, v))
            minus = tuple(a - b for a, b in zip(p, v))
            new[plus] = new.get(plus, 0) + m
            new[minus] = new.get(minus, 0) + m
        if len(new) > limit:
            raise config.BudgetExceeded(f"support size {len(new)} exceeds budget {limit}")
        dist = new
    return dist


def _merge(a: dict, b: dict, limit: int) -> dict:
    out: dict = {}
    for p, m in a.items():
        for q, w in b.items():
            s = tuple(x + y for x, y in zip(p, q))
            out[s] = out.get(s, 0) + m * w
        if len(out) > limit:
            raise config.BudgetExceeded(f"support size {len(out)} exceeds budget {limit}")
    return out


def _encoded_law(keys: list, dim: int, limit: int, workers: int = 1) -> dict:
    if not keys:
        return {(0,) * dim: 1}
    if workers <= 1 or len(keys) < 2 * workers:
        return _convolve(keys, limit)
    chunks = [keys[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_convolve, chunks, [limit] * len(chunks)))
    dist = parts[0]
    for part in parts[1:]:
        dist = _merge(dist, part, limit)
    return dist


class SumDistribution:
    """Exact law of X as {point: m}, probability m / 2^n.

    Points are stored encoded as integer tuples by ``encoder``; iteration
    decodes them in sorted order.
    """

    def __init__(self, n: int, k: int, encoded: dict, encoder: LatticeEncoder):
        self.n = n
        self.k = k
        self.encoder = encoder
        self.encoded = dict(sorted(encoded.items()))
        self._decoded = None

    @property
    def denominator(self) -> int:
        return 2**self.n

    @property
    def support(self) -> dict:
        if self._decoded is None:
            self._decoded = {self.encoder.decode(p): m for p, m in self.encoded.items()}
        return self._decoded

    def __len__(self):
        return len(self.encoded)

    def items(self):
        return self.support.items()

    def probability(self, point) -> Fraction:
        p = as_vector(point)
        if not self.encoder.covers(p):
            return Fraction(0)
        return Fraction(self.encoded.get(self.encoder.encode(p), 0), 2**self.n)

    def max_count(self) -> int:
        return max(self.encoded.values())

    def total(self) -> int:
        return sum(self.encoded.values())

    def is_symmetric(self) -> bool:
        return all(self.encoded.get(tuple(-c for c in p)) == m for p, m in self.encoded.items())

    def reencode(self, encoder: LatticeEncoder) -> "SumDistribution":
        enc = {self.encoder.convert(p, encoder): m for p, m in self.encoded.items()}
        return SumDistribution(self.n, self.k, enc, encoder)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.k)] + ["numerator", "n"])
        for point, m in self.support.items():
            w.writerow([format_scalar(x) for x in point] + [m, self.n])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "support": [
                {"point": [format_scalar(x) for x in p], "numerator": m} for p, m in self.support.items()
            ],
        }


def sum_distribution(
    A: VectorSequence,
    budget: config.Budget | None = None,
    workers: int = 1,
    encoder: LatticeEncoder | None = None,
) -> SumDistribution:
    """Exact law of xi_1 a_1 + ... + xi_n a_n by incremental convolution."""
    budget = config.resolve(budget)
    config.check(A.n, budget.max_n, "n")
    if encoder is None:
        encoder = LatticeEncoder.for_vectors(A.k, A.vectors)
    keys = [encoder.encode(v) for v in A.vectors]
    dim = A.k * (2 if encoder.complex else 1)
    law = _encoded_law(keys, dim, budget.max_support, workers)
    return SumDistribution(A.n, A.k, law, encoder)


def rho(A: VectorSequence, budget: config.Budget | None = None, workers: int = 1) -> Fraction:
    """Maximum point probability sup_x P[X = x]."""
    D = sum_distribution(A, budget, workers)
    return Fraction(D.max_count(), D.denominator)


def prob_in_set(
    A: VectorSequence,
    S,
    shift: Sequence | None = None,
    budget: config.Budget | None = None,
    distribution: SumDistribution | None = None,
) -> Fraction:
    """P[X in S + shift] (shift defaults to 0)."""
    D = distribution if distribution is not None else sum_distribution(A, budget)
    target = S if shift is None else TranslatedSet(S, shift)
    if isinstance(S, FinitePointSet) and shift is None:
        total = sum(D.probability(p) * D.denominator for p in S.points)
        return Fraction(int(total), D.denominator)
    contains = target.contains
    hits = sum(m for p, m in D.items() if contains(p))
    return Fraction(hits, D.denominator)


class TranslateBound(NamedTuple):
    probability: Fraction
    shift: tuple


def rho_translate_lower_bound(
    A: VectorSequence,
    S,
    candidates: Iterable[Sequence] | None = None,
    witness: Iterable[Sequence] | None = None,
    budget: config.Budget | None = None,
) -> TranslateBound:
    """max over candidate shifts x of P[X in S + x]; a certified lower bound on rho(A, S).

    Without explicit candidates the shifts are {y - s : y in supp X, s in
    witness}; with neither, only x = 0 is tried.
    """
    D = sum_distribution(A, budget)
    zero = tuple(GR(0) for _ in range(A.k))
    shifts: list = []
    if candidates is not None:
        shifts = [as_vector(c) for c in candidates]
    if witness is not None:
        ws = [as_vector(s) for s in witness]
        shifts.extend(vec_sub(y, s) for y in D.support for s in ws)
    if not shifts:
        shifts = [zero]
    seen = set()
    best = TranslateBound(Fraction(-1), zero)
    for x in shifts:
        if x in seen:
            continue
        seen.add(x)
        p = prob_in_set(A, S, shift=x, distribution=D)
        if p > best.probability:
            best = TranslateBound(p, x)
    return best


def rho_finite(A: VectorSequence, S: FinitePointSet, budget: config.Budget | None = None) -> TranslateBound:
    """Exact rho(A, S) for finite S: every useful shift has the form y - s."""
    if not S.points:
        return TranslateBound(Fraction(0), tuple(GR(0) for _ in range(A.k)))
    enc = LatticeEncoder.for_vectors(A.k, A.vectors, S.points)
    D = sum_distribution(A, budget, encoder=enc)
    spts = [enc.encode(s) for s in S.points]
    buckets: dict = {}
    for y, m in D.encoded.items():
        for s in spts:
            x = tuple(a - b for a, b in zip(y, s))
            buckets[x] = buckets.get(x, 0) + m
    best = max(buckets.items(), key=lambda kv: (kv[1], tuple(-c for c in kv[0])))
    return TranslateBound(Fraction(best[1], D.denominator), enc.decode(best[0]))


def quotient_map(V_basis: Sequence[Sequence], k: int) -> list:
    """Rows of a surjective linear map F^k -> F^(k - dim V) with kernel V."""
    return span_annihilator([as_vector(b) for b in V_basis], k)


def rho_subspace(A: VectorSequence, V_basis: Sequence[Sequence], budget: config.Budget | None = None) -> Fraction:
    """rho(A, V) for a linear subspace V, computed as rho of the quotient sequence."""
    rows = quotient_map(V_basis, A.k)
    return rho(A.map(rows), budget)


# Monte Carlo --------------------------------------------------------------------


def wilson_interval(hits: int, trials: int, confidence: float = 0.99) -> tuple:
    z = statistics.NormalDist().inv_cdf(0.5 + confidence / 2)
    p = hits / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class MonteCarloEstimate:
    hits: int
    trials: int
    low: float
    high: float
    confidence: float

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    def covers(self, value) -> bool:
        return self.low <= float(value) <= self.high


def monte_carlo_prob(
    A: VectorSequence, S, trials: int, seed=None, confidence: float = 0.99
) -> MonteCarloEstimate:
    """Frequency of X in S over ``trials`` sampled sign vectors, with a Wilson interval."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if isinstance(S, FinitePointSet) and not S.points:
        return MonteCarloEstimate(0, trials, 0.0, 0.0, confidence)
    rng = np.random.default_rng(seed)
    enc = LatticeEncoder.for_vectors(A.k, A.vectors)
    keys = [enc.encode(v) for v in A.vectors]
    dim = A.k * (2 if enc.complex else 1)
    if A.n == 0:
        sums = np.zeros((trials, dim), dtype=object)
    else:
        M = np.array(keys, dtype=object).reshape(A.n, dim)
        bound = max((abs(int(c)) for row in keys for c in row), default=0) * A.n
        signs = rng.integers(0, 2, size=(trials, A.n), dtype=np.int64) * 2 - 1
        if bound < 2**62:
            sums = signs @ M.astype(np.int64)
        else:
            sums = signs.astype(object) @ M
    tally = Counter(tuple(int(x) for x in row) for row in np.asarray(sums).reshape(trials, dim))
    contains = S.contains
    hits = sum(c for key, c in tally.items() if contains(enc.decode(key)))
    lo, hi = wilson_interval(hits, trials, confidence)
    return MonteCarloEstimate(hits, trials, lo, hi, confidence)
