"""Sparse polynomials over Q(i), varieties as data, and Chow-form reductions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb, lcm
from typing import Iterable, Mapping, NamedTuple, Sequence

from lolab import config
from lolab.config import PreconditionError
from lolab.exactmath import GR, GaussianRational, as_scalar, as_vector, kernel_basis, rank

__all__ = [
    "SparsePoly",
    "Variety",
    "ChowRepresentation",
    "evaluate",
    "expand_chow",
    "reduction_to_vectors",
    "substitute_pm1",
    "robust_dependence_check",
    "RobustnessResult",
    "invariance_subspace",
    "translation_difference",
    "quadric_matrix",
    "quadric_reducibility",
    "homogeneous_part",
    "galois_pair_variety",
    "nonzero_coefficient_count",
]

_ZERO = GR(0)
_ONE = GR(1)


def _graded_key(exps):
    return (-sum(exps), tuple(-e for e in exps))


class SparsePoly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}."""

    __slots__ = ("nvars", "terms", "_int_form")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != nvars:
                    raise ValueError(f"exponent {exps} does not have {nvars} entries")
                if any(e < 0 for e in exps):
                    raise ValueError("negative exponent")
                c = as_scalar(c)
                if c:
                    clean[exps] = clean.get(exps, _ZERO) + c
                    if not clean[exps]:
                        del clean[exps]
        self.terms = clean
        self._int_form = None

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "SparsePoly":
        return cls(nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "SparsePoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "SparsePoly":
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def linear(cls, coeffs: Sequence, const=0) -> "SparsePoly":
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            exps = [0] * n
            exps[i] = 1
            terms[tuple(exps)] = c
        return cls(n, terms)

    # basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, i: int) -> int:
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _graded_key(t[0]))

    def leading_coefficient(self) -> GaussianRational:
        if not self.terms:
            return _ZERO
        return self.sorted_terms()[0][1]

    def variables(self) -> set:
        return {i for exps in self.terms for i, e in enumerate(exps) if e}

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == SparsePoly.constant(other, self.nvars)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # arithmetic ---------------------------------------------------------

    def _lift(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different numbers of variables")
            return other
        return SparsePoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, _ZERO) + c
        return SparsePoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            c = as_scalar(other)
            return SparsePoly(self.nvars, {e: c * v for e, v in self.terms.items()})
        other = self._lift(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, _ZERO) + c1 * c2
        return SparsePoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = SparsePoly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "SparsePoly":
        return SparsePoly(self.nvars, {e: c.conjugate() for e, c in self.terms.items()})

    # evaluation ---------------------------------------------------------

    def evaluate(self, point: Sequence) -> GaussianRational:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        pt = as_vector(point)
        total = _ZERO
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(pt, exps):
                if e:
                    term = term * x**e
            total = total + term
        return total

    __call__ = evaluate

    def _integer_form(self):
        if self._int_form is None:
            den = 1
            for c in self.terms.values():
                den = lcm(den, c.re.denominator, c.im.denominator)
            self._int_form = [
                (int(c.re * den), int(c.im * den), exps) for exps, c in self.terms.items()
            ]
        return self._int_form

    def vanishes_at_integer_point(self, point: Sequence[int]) -> bool:
        """Exact zero test at an integer point, using integer arithmetic only."""
        re_sum = 0
        im_sum = 0
        for cre, cim, exps in self._integer_form():
            m = 1
            for x, e in zip(point, exps):
                if e:
                    m *= x**e
            re_sum += cre * m
            im_sum += cim * m
        return re_sum == 0 and im_sum == 0

    # calculus and substitution --------------------------------------------

    def partial(self, i: int) -> "SparsePoly":
        terms = {}
        for exps, c in self.terms.items():
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                terms[tuple(e)] = c * exps[i]
        return SparsePoly(self.nvars, terms)

    def substitute(self, values: Mapping[int, object]) -> "SparsePoly":
        """Replace variables by constants; the number of variables is kept."""
        vals = {i: as_scalar(v) for i, v in values.items()}
        terms: dict = {}
        for exps, c in self.terms.items():
            e = list(exps)
            for i, v in vals.items():
                if e[i]:
                    c = c * v ** e[i]
                    e[i] = 0
            key = tuple(e)
            terms[key] = terms.get(key, _ZERO) + c
        return SparsePoly(self.nvars, terms)

    def compose(self, polys: Sequence["SparsePoly"], max_terms: int | None = None) -> "SparsePoly":
        """Substitute ``polys[i]`` for variable i; result lives in their ring."""
        if len(polys) != self.nvars:
            raise ValueError("need one polynomial per variable")
        if not polys:
            raise ValueError("cannot compose a polynomial in zero variables")
        m = polys[0].nvars
        powers: dict = {}

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = polys[i] ** e
            return powers[key]

        result = SparsePoly.zero(m)
        for exps, c in self.sorted_terms():
            term = SparsePoly.constant(c, m)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            result = result + term
            if max_terms is not None and len(result.terms) > max_terms:
                raise config.BudgetExceeded(f"expansion exceeds {max_terms} terms")
        return result

    def extend(self, nvars: int) -> "SparsePoly":
        """Same polynomial viewed in ``nvars >= self.nvars`` variables."""
        pad = (0,) * (nvars - self.nvars)
        return SparsePoly(nvars, {e + pad: c for e, c in self.terms.items()})

    def homogeneous_part(self, d: int) -> "SparsePoly":
        return SparsePoly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    # interop --------------------------------------------------------------

    def to_sympy(self, symbols=None):
        import sympy

        if symbols is None:
            symbols = sympy.symbols(f"x1:{self.nvars + 1}")
        expr = sympy.Integer(0)
        for exps, c in self.terms.items():
            coef = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
                c.im.numerator, c.im.denominator
            )
            mono = sympy.Integer(1)
            for s, e in zip(symbols, exps):
                if e:
                    mono = mono * s**e
            expr = expr + coef * mono
        return expr

    @classmethod
    def from_sympy(cls, expr, symbols) -> "SparsePoly":
        import sympy

        poly = sympy.Poly(sympy.expand(expr), *symbols)
        terms = {}
        for exps, coef in poly.terms():
            re, im = sympy.re(coef), sympy.im(coef)
            terms[tuple(exps)] = GR(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
        return cls(len(symbols), terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e
            )
            cs = str(c)
            if c.re and c.im:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == _ONE:
                parts.append(mono)
            elif c == -_ONE:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"SparsePoly({self.nvars}, '{self}')"


def evaluate(f: SparsePoly, x: Sequence) -> GaussianRational:
    return f.evaluate(x)


def homogeneous_part(F: SparsePoly, d: int) -> SparsePoly:
    return F.homogeneous_part(d)


def nonzero_coefficient_count(F: SparsePoly, degree: int | None = None) -> int:
    """Number of stored (nonzero) terms, optionally only those of total degree ``degree``."""
    if degree is None:
        return len(F.terms)
    return sum(1 for e in F.terms if sum(e) == degree)


# varieties ------------------------------------------------------------------


@dataclass(frozen=True)
class Variety:
    """Common zero set of ``polynomials`` in F^k with declared metadata.

    ``dim`` and ``degree`` are user-declared upper bounds; they are not
    computed.  An empty polynomial list (or only zero polynomials) is the
    whole space.
    """

    k: int
    polynomials: tuple = ()
    dim: int | None = None
    degree: int | None = None
    irreducible: bool | None = None
    name: str | None = None

    def __post_init__(self):
        polys = tuple(self.polynomials)
        for p in polys:
            if p.nvars != self.k:
                raise ValueError(f"polynomial in {p.nvars} variables for ambient dimension {self.k}")
        object.__setattr__(self, "polynomials", polys)

    @classmethod
    def hypersurface(cls, f: SparsePoly, **meta) -> "Variety":
        return cls(f.nvars, (f,), **meta)

    @classmethod
    def whole_space(cls, k: int) -> "Variety":
        return cls(k, (SparsePoly.zero(k),), dim=k, degree=1)

    def is_whole_space(self) -> bool:
        return all(p.is_zero() for p in self.polynomials)

    def contains(self, point) -> bool:
        if all(isinstance(x, int) for x in point):
            return all(p.vanishes_at_integer_point(point) for p in self.polynomials)
        return all(not p.evaluate(point) for p in self.polynomials)

    __contains__ = contains

    def lift(self, r: int) -> "Variety":
        """Preimage under the projection F^r -> F^k onto the first k coordinates."""
        if r < self.k:
            raise ValueError("lift target must have at least k coordinates")
        dim = None if self.dim is None else self.dim + (r - self.k)
        return Variety(r, tuple(p.extend(r) for p in self.polynomials), dim, self.degree, self.irreducible)

    def affine_image(self, phi) -> "Variety":
        """The variety phi(S) for a bijective affine map phi."""
        inv = phi.inverse()
        forms = inv.as_polynomials()
        polys = tuple(p.compose(forms) for p in self.polynomials)
        return Variety(self.k, polys, self.dim, self.degree, self.irreducible, self.name)


# Chow representations ---------------------------------------------------------


@dataclass(frozen=True)
class ChowRepresentation:
    """F(t) = f(L_1(t), ..., L_k(t)) with homogeneous linear forms L_j."""

    n: int
    forms: tuple
    f: SparsePoly
    degree: int | None = None
    chow_rank: int | None = None

    def __post_init__(self):
        forms = tuple(as_vector(L) for L in self.forms)
        for L in forms:
            if len(L) != self.n:
                raise ValueError("every linear form needs n coefficients")
        if self.f.nvars != len(forms):
            raise ValueError("outer polynomial must have one variable per linear form")
        if self.degree is not None and self.chow_rank is not None:
            if len(forms) != self.degree * self.chow_rank:
                raise ValueError("number of forms must equal degree * chow_rank")
        object.__setattr__(self, "forms", forms)

    @property
    def k(self) -> int:
        return len(self.forms)

    @classmethod
    def from_products(cls, n: int, products: Sequence[Sequence[tuple]]) -> "ChowRepresentation":
        """Build from F = sum_i prod_j (c_ij . t + b_ij).

        Each product is a list of ``(coefficients, constant)`` pairs, all
        products having the same length d.
        """
        if not products:
            raise ValueError("need at least one product")
        d = len(products[0])
        if any(len(p) != d for p in products):
            raise ValueError("all products must have the same number of factors")
        k = d * len(products)
        forms = []
        f = SparsePoly.zero(k)
        idx = 0
        for prod_ in products:
            term = SparsePoly.constant(1, k)
            for coeffs, const in prod_:
                forms.append(tuple(coeffs))
                term = term * (SparsePoly.variable(idx, k) + as_scalar(const))
                idx += 1
            f = f + term
        return cls(n, tuple(forms), f, degree=d, chow_rank=len(products))

    def linear_polys(self) -> list:
        return [SparsePoly.linear(L) for L in self.forms]

    def evaluate(self, t: Sequence) -> GaussianRational:
        t = as_vector(t)
        u = [sum((c * x for c, x in zip(L, t)), _ZERO) for L in self.forms]
        return self.f.evaluate(u)


def expand_chow(R: ChowRepresentation, budget: config.Budget | None = None) -> SparsePoly:
    budget = config.resolve(budget)
    return R.f.compose(R.linear_polys(), max_terms=budget.max_terms)


def reduction_to_vectors(R: ChowRepresentation):
    """Vectors a_j = (L_1[j], ..., L_k[j]) and the hypersurface S = {f = 0}.

    F(xi) = 0 exactly when xi_1 a_1 + ... + xi_n a_n lies in S.
    """
    from lolab.anticoncentration import VectorSequence

    vectors = [tuple(L[j] for L in R.forms) for j in range(R.n)]
    seq = VectorSequence(R.k, vectors)
    deg = R.f.degree()
    S = Variety(R.k, (R.f,), dim=R.k - 1 if not R.f.is_zero() else R.k, degree=max(deg, 1))
    return seq, S


def substitute_pm1(F: SparsePoly, assignment: Mapping[int, int]) -> SparsePoly:
    for v in assignment.values():
        if v not in (1, -1):
            raise ValueError("assignment values must be +1 or -1")
    return F.substitute(assignment)


class RobustnessResult(NamedTuple):
    robust: bool
    witness: dict | None


def robust_dependence_check(F: SparsePoly, b: int, budget: config.Budget | None = None) -> RobustnessResult:
    """Does every +-1 substitution into fewer than ``b`` variables leave F nonzero?"""
    budget = config.resolve(budget)
    n = F.nvars
    work = sum(comb(n, j) * 2**j for j in range(min(b, n + 1)))
    config.check(work, budget.max_substitutions, "substitution count")
    for j in range(min(b, n + 1)):
        for subset in combinations(range(n), j):
            for signs in product((1, -1), repeat=j):
                assignment = dict(zip(subset, signs))
                if F.substitute(assignment).is_zero():
                    return RobustnessResult(False, assignment)
    return RobustnessResult(True, None)


def translation_difference(f: SparsePoly, v: Sequence) -> SparsePoly:
    """f(x + v) - f(x), expanded symbolically."""
    shifted = [SparsePoly.variable(i, f.nvars) + as_scalar(c) for i, c in enumerate(v)]
    return f.compose(shifted) - f


def invariance_subspace(f: SparsePoly) -> list:
    """Basis of {v : sum_i v_i * df/dx_i == 0}; each v satisfies f(x+v) == f(x)."""
    k = f.nvars
    partials = [f.partial(i) for i in range(k)]
    monomials = sorted({e for p in partials for e in p.terms}, key=_graded_key)
    if not monomials:
        return kernel_basis([], ncols=k)
    M = [[p.terms.get(m, _ZERO) for p in partials] for m in monomials]
    return kernel_basis(M, ncols=k)


def quadric_matrix(f: SparsePoly) -> list:
    """Symmetric (k+1)x(k+1) matrix of the homogenised quadric; index 0 is the new variable."""
    k = f.nvars
    half = GR(Fraction(1, 2))
    M = [[_ZERO] * (k + 1) for _ in range(k + 1)]
    for exps, c in f.terms.items():
        idx = [i + 1 for i, e in enumerate(exps) for _ in range(e)]
        while len(idx) < 2:
            idx.insert(0, 0)
        i, j = idx
        if i == j:
            M[i][i] = M[i][i] + c
        else:
            M[i][j] = M[i][j] + c * half
            M[j][i] = M[j][i] + c * half
    return M


def quadric_reducibility(f: SparsePoly) -> str:
    """'reducible' or 'irreducible' over C, by the rank of the homogenised form."""
    if f.degree() != 2:
        raise PreconditionError(f"expected a quadric, got degree {f.degree()}")
    return "reducible" if rank(quadric_matrix(f)) <= 2 else "irreducible"


def galois_pair_variety(f: SparsePoly) -> Variety:
    """T = {f = 0, conj(f) = 0} after scaling f so its leading coefficient is 1.

    T and {f = 0} have the same points with real rational coordinates.
    """
    if f.is_zero():
        raise PreconditionError("zero polynomial")
    g = f * (_ONE / f.leading_coefficient())
    if all(c.is_real() for c in g.terms.values()):
        raise PreconditionError("polynomial is proportional to one with real rational coefficients")
    d = g.degree()
    return Variety(f.nvars, (g, g.conjugate()), dim=f.nvars - 2, degree=d * d, name="galois-pair")
