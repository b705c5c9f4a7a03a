"""Decoupling inequalities, structure certificates and the Halász-type bound, checked exactly."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import NamedTuple, Sequence

import sympy

from lolab import config
from lolab.algebra import SparsePoly, Variety, quadric_reducibility
from lolab.anticoncentration import (
    FinitePointSet,
    VectorSequence,
    rho,
    rho_subspace,
    rho_translate_lower_bound,
    sum_distribution,
)
from lolab.config import CertificateError
from lolab.exactmath import GR, LatticeEncoder, as_vector, rank, solve_linear
from lolab.matroid import basis_packing_number

__all__ = [
    "Partition",
    "DecouplingResult",
    "decoupling_check",
    "IteratedBound",
    "iterated_decoupling_bound",
    "LineSearch",
    "lines_in_plane_curve",
    "StructureCertificate",
    "CertificateReport",
    "structure_certificate_check",
    "HalaszResult",
    "halasz_check",
]


@dataclass(frozen=True)
class Partition:
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def validate(self, n: int) -> None:
        seen: list = [i for b in self.blocks for i in b]
        if len(seen) != len(set(seen)):
            raise ValueError("blocks overlap")
        if sorted(seen) != list(range(n)):
            raise ValueError("blocks do not cover 0..n-1")

    @classmethod
    def contiguous(cls, n: int, parts: int) -> "Partition":
        """Split 0..n-1 into ``parts`` consecutive blocks of near-equal size."""
        edges = [n * i // parts for i in range(parts + 1)]
        return cls([range(edges[i], edges[i + 1]) for i in range(parts)])


def _pow_le(a: Fraction, p: int, b: Fraction, q: int) -> bool:
    """a^p <= b^q for non-negative rationals."""
    return a**p <= b**q


# single decoupling step ------------------------------------------------------------


class DecouplingResult(NamedTuple):
    lhs: Fraction  # P(E)^2
    rhs: Fraction  # P(E and E') = E_Y[q_Y^2]
    passed: bool
    probability: Fraction  # P(E)

    def __bool__(self):
        return self.passed


def decoupling_check(A: VectorSequence, I0: Sequence[int], S, x: Sequence | None = None,
                     budget: config.Budget | None = None) -> DecouplingResult:
    """P(E)^2 <= P(E and E') for E = {X + Y + x in S}.

    X sums over I0, Y over the remaining indices, and E' is the same event
    with X replaced by an independent copy.  q_Y = P[E | Y] is computed for
    every outcome of Y, so both sides are exact.
    """
    budget = config.resolve(budget)
    config.check(A.n, budget.decoupling_max_n, "n")
    I0 = sorted(set(I0))
    if any(i < 0 or i >= A.n for i in I0):
        raise IndexError("I0 contains an index outside the sequence")
    rest = [i for i in range(A.n) if i not in set(I0)]
    shift = as_vector(x) if x is not None else tuple(GR(0) for _ in range(A.k))
    groups = [A.vectors, [shift]]
    if isinstance(S, FinitePointSet):
        groups.append(S.points)
    enc = LatticeEncoder.for_vectors(A.k, *groups)
    DX = sum_distribution(A.subsequence(I0), budget, encoder=enc)
    DY = sum_distribution(A.subsequence(rest), budget, encoder=enc)
    sh = enc.encode(shift)
    nx = len(I0)
    if isinstance(S, FinitePointSet):
        targets = [enc.encode(p) for p in S.points if enc.covers(p)]

        def hits(y):
            # X = s - y - x for some s in S
            total = 0
            for s in targets:
                key = tuple(si - yi - hi for si, yi, hi in zip(s, y, sh))
                total += DX.encoded.get(key, 0)
            return total
    else:
        contains = S.contains
        xs = list(DX.encoded.items())

        def hits(y):
            total = 0
            for p, m in xs:
                pt = enc.decode(tuple(a + b + c for a, b, c in zip(p, y, sh)))
                if contains(pt):
                    total += m
            return total

    first = 0  # sum over y of P(Y=y) * count_y
    second = 0  # sum over y of P(Y=y) * count_y^2
    for y, m in DY.encoded.items():
        h = hits(y)
        first += m * h
        second += m * h * h
    ny = len(rest)
    pE = Fraction(first, 2 ** (nx + ny))
    rhs = Fraction(second, 2 ** (2 * nx + ny))
    lhs = pE * pE
    return DecouplingResult(lhs, rhs, lhs <= rhs, pE)


# lines on plane curves -----------------------------------------------------------


class LineSearch(NamedTuple):
    lines: list  # linear SparsePoly factors
    complete: bool
    note: str


def lines_in_plane_curve(f: SparsePoly) -> LineSearch:
    """Linear components of the plane curve f = 0.

    Factors over Q(i).  Completeness is claimed when every non-linear
    irreducible factor has degree 2 and nonsingular projective quadric
    matrix (hence no lines at all, over any extension).
    """
    if f.nvars != 2:
        raise ValueError("plane curves only")
    if f.is_zero():
        return LineSearch([], False, "zero polynomial: the whole plane")
    if f.degree() > 4:
        return LineSearch([], False, "degree above 4 is not searched")
    syms = sympy.symbols("x1 x2")
    expr = f.to_sympy(syms)
    _, factors = sympy.factor_list(expr, *syms, gaussian=True)
    lines = []
    complete = True
    notes = []
    for fac, _mult in factors:
        g = SparsePoly.from_sympy(sympy.expand(fac), syms)
        d = g.degree()
        if d == 1:
            if g not in lines:
                lines.append(g)
        elif d == 2:
            if quadric_reducibility(g) == "reducible":
                complete = False
                notes.append(f"quadric factor {g} splits into lines outside Q(i)")
        elif d >= 3:
            complete = False
            notes.append(f"irreducible factor of degree {d} not certified line-free")
    return LineSearch(lines, complete, "; ".join(notes) or ("complete" if complete else ""))


def _line_direction(g: SparsePoly) -> tuple:
    a = g.terms.get((1, 0), GR(0))
    b = g.terms.get((0, 1), GR(0))
    return (-b, a) if (a or b) else None


# iterated decoupling -------------------------------------------------------------


class IteratedBound(NamedTuple):
    lhs: Fraction
    rhs_base: Fraction  # sup over blocks and candidate subspaces of rho(A_i, V)
    factor: int  # (ell + 1) * d
    ell: int
    passed: bool
    status: str
    shift: tuple

    @property
    def rhs(self) -> float:
        return self.factor * float(self.rhs_base) ** (1.0 / 2**self.ell)

    def __bool__(self):
        return self.passed


def iterated_decoupling_bound(A: VectorSequence, partition: Partition, S: Variety,
                              candidates: Sequence[Sequence[Sequence]] | None = None,
                              translates: Sequence[Sequence] | None = None,
                              witness: Sequence[Sequence] | None = None,
                              complete: bool | None = None,
                              budget: config.Budget | None = None) -> IteratedBound:
    """max_x P[X in S + x] against (ell + 1) d (sup_{i,V} rho(A_i, V))^(1/2^ell).

    ``candidates`` are bases of subspaces V lying in translates of S; the
    zero subspace is always included.  ``translates`` and ``witness`` (points
    on S, turned into shifts y - s) determine which x are tried on the left.
    The status is "verified" when the candidate list is known to contain every
    such subspace, otherwise "bound-with-caveat".
    """
    budget = config.resolve(budget)
    if S.dim is None or S.degree is None:
        raise ValueError("variety needs declared dim and degree")
    ell, d = S.dim, S.degree
    partition.validate(A.n)
    if len(partition) != ell + 1:
        raise ValueError(f"need ell + 1 = {ell + 1} blocks, got {len(partition)}")
    cands = [()]
    for V in candidates or ():
        V = tuple(as_vector(v) for v in V)
        if V and V not in cands:
            cands.append(V)
    status_complete = complete
    if status_complete is None:
        status_complete = False
        if ell == 0:
            status_complete = True
        elif ell == 1 and S.k == 2 and len([p for p in S.polynomials if not p.is_zero()]) == 1:
            f = next(p for p in S.polynomials if not p.is_zero())
            search = lines_in_plane_curve(f)
            if search.complete:
                status_complete = True
                for g in search.lines:
                    V = (_line_direction(g),)
                    if V not in cands:
                        cands.append(V)
    base = Fraction(0)
    for block in partition:
        sub = A.subsequence(block)
        for V in cands:
            r = rho(sub, budget) if not V else rho_subspace(sub, V, budget)
            base = max(base, r)
    best = rho_translate_lower_bound(A, S, candidates=translates, witness=witness, budget=budget)
    lhs = best.probability
    factor = (ell + 1) * d
    e = 2**ell
    passed = _pow_le(lhs, e, Fraction(factor) ** e * base, 1)
    status = "verified" if status_complete else "bound-with-caveat"
    return IteratedBound(lhs, base, factor, ell, passed, status, best.shift)


# structure certificates ----------------------------------------------------------


@dataclass
class StructureCertificate:
    U: list  # basis vectors of U
    W: list  # basis vectors of W
    S_prime: Variety  # variety in W-coordinates (dim W variables)
    indices: list  # surviving index set of A'
    delta: object
    C: object
    C1: object
    witness: list = field(default_factory=list)  # points of pi_W^-1(S') to test against S
    translates: list = field(default_factory=list)


@dataclass
class ConditionResult:
    passed: bool
    lhs: object
    rhs: object
    note: str = ""


@dataclass
class CertificateReport:
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def __bool__(self):
        return self.passed


def _exact_exponent(c) -> Fraction:
    return Fraction(str(c)) if isinstance(c, float) else Fraction(c)


def _w_projection_rows(U: list, W: list, k: int) -> list:
    """Rows of the map x -> W-coordinates of pi_W(x) (projection along U)."""
    basis = list(U) + list(W)
    cols = [[b[r] for b in basis] for r in range(k)]
    rows = [[None] * k for _ in range(len(W))]
    for j in range(k):
        e = [1 if i == j else 0 for i in range(k)]
        sol = solve_linear(cols, e, ncols=k)
        for t in range(len(W)):
            rows[t][j] = sol[len(U) + t]
    return rows


def _le_power(p: Fraction, n: int, C: Fraction) -> bool:
    """p <= n^(-C), exactly."""
    a, b = C.numerator, C.denominator
    if p <= 0:
        return True
    # p^b <= n^(-a)
    return p**b * Fraction(n) ** a <= 1


def _ge_power(p: Fraction, n: int, C: Fraction) -> bool:
    """p >= n^(-C), exactly."""
    a, b = C.numerator, C.denominator
    return p**b * Fraction(n) ** a >= 1


def _divides(h: SparsePoly, f: SparsePoly) -> bool:
    syms = sympy.symbols(f"y1:{f.nvars + 1}")
    fe, he = f.to_sympy(syms), h.to_sympy(syms)
    if he == 0:
        return fe == 0
    hs = sympy.sqf_part(he, *syms, gaussian=True) if he.free_symbols else he
    _, r = sympy.div(sympy.Poly(fe, *syms, domain="QQ_I"), sympy.Poly(hs, *syms, domain="QQ_I"))
    return r.is_zero


def structure_certificate_check(A: VectorSequence, cert: StructureCertificate, S: Variety,
                                budget: config.Budget | None = None) -> CertificateReport:
    """Check the four certificate conditions exactly (containment may be sampled)."""
    k, n = A.k, A.n
    U = [as_vector(u) for u in cert.U]
    W = [as_vector(w) for w in cert.W]
    if len(U) + len(W) != k or rank(U + W, ncols=k) != k:
        raise CertificateError("U and W do not form a direct sum U + W = F^k")
    if cert.S_prime.k != len(W):
        raise CertificateError("S' must live in W-coordinates")
    delta = Fraction(cert.delta) if not isinstance(cert.delta, float) else Fraction(str(cert.delta))
    C = _exact_exponent(cert.C)
    C1 = _exact_exponent(cert.C1)
    A1 = A.subsequence(cert.indices)
    out = {}

    need = delta / (2 * (2 * k) ** k) * n
    packing = basis_packing_number(A1).b if A1.n else 0
    out["packing"] = ConditionResult(packing >= need, packing, need)

    rows = _w_projection_rows(U, W, k)
    if W:
        r = rho(A1.map(rows), budget)
    else:
        r = Fraction(1)
    out["concentration"] = ConditionResult(_ge_power(r, n, C), r, f"n^-{C}")

    forms = [SparsePoly.linear(row) for row in rows]
    pulled = [p.compose(forms) if forms else p for p in cert.S_prime.polynomials]
    pulled = [p if p.nvars == k else SparsePoly.constant(p.evaluate(()), k) for p in pulled]
    preimage = Variety(k, tuple(pulled))
    f_polys = [p for p in S.polynomials if not p.is_zero()]
    g_polys = [p for p in pulled if not p.is_zero()]
    symbolic = None
    if not f_polys:
        symbolic = True
    elif len(f_polys) == 1 and len(g_polys) == 1:
        symbolic = _divides(g_polys[0], f_polys[0])
    if symbolic:
        out["containment"] = ConditionResult(True, "symbolic", "divisible", "exact")
    else:
        bad = [w for w in cert.witness if preimage.contains(as_vector(w)) and not S.contains(as_vector(w))]
        note = "sampled" + ("" if symbolic is None else "; symbolic divisibility failed")
        out["containment"] = ConditionResult(not bad, len(cert.witness) - len(bad), len(cert.witness), note)

    D = sum_distribution(A1, budget)
    zero = tuple(GR(0) for _ in range(k))
    shifts = [as_vector(x) for x in cert.translates] or [zero]
    worst = Fraction(0)
    for x in shifts:
        hits = 0
        for p, m in D.items():
            q = tuple(a - b for a, b in zip(p, x))
            if S.contains(q) and not preimage.contains(q):
                hits += m
        worst = max(worst, Fraction(hits, D.denominator))
    out["remainder"] = ConditionResult(_le_power(worst, n, C1), worst, f"n^-{C1}")
    return CertificateReport(out)


# Halász-type bound ---------------------------------------------------------------


class HalaszResult(NamedTuple):
    t: Fraction
    base: Fraction  # 2^-s C(s, s/2)
    bound: float
    rho: Fraction
    passed: bool

    def __bool__(self):
        return self.passed


def halasz_check(A: VectorSequence, blocks: Partition | Sequence[Sequence[int]],
                 budget: config.Budget | None = None, workers: int = 1) -> HalaszResult:
    """rho(A) <= (2^-s C(s, s/2))^t with t = (1/s) sum_j dim span A[I_j]; exact comparison."""
    part = blocks if isinstance(blocks, Partition) else Partition(blocks)
    s = len(part)
    if s == 0 or s % 2:
        raise ValueError("the number of blocks s must be even and positive")
    if not A.is_real():
        raise ValueError("real sequences only")
    part.validate(A.n)
    t = Fraction(sum(rank([A.vectors[i] for i in b], ncols=A.k) for b in part), s)
    base = Fraction(comb(s, s // 2), 2**s)
    r = rho(A, budget, workers)
    passed = r**t.denominator <= base**t.numerator
    bound = base**t.numerator if t.denominator == 1 else float(base) ** float(t)
    return HalaszResult(t, base, bound, r, passed)

