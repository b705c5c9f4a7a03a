"""Exact arithmetic over the Gaussian rationals Q(i).

Scalars are :class:`GaussianRational` values; vectors are plain tuples of
them and matrices are sequences of rows.  Elimination is fraction-free
(Bareiss) on rows scaled to Gaussian integers.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

__all__ = [
    "GaussianRational",
    "GR",
    "as_scalar",
    "as_vector",
    "as_matrix",
    "parse_scalar",
    "format_scalar",
    "vec_add",
    "vec_sub",
    "vec_neg",
    "vec_scale",
    "dot",
    "mat_vec",
    "is_zero_vector",
    "rank",
    "kernel_basis",
    "solve_linear",
    "span_annihilator",
    "LatticeEncoder",
]


class GaussianRational:
    """Immutable a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, str):
            if im != 0:
                raise TypeError("string form cannot be combined with an imaginary part")
            parsed = parse_scalar(re)
            re, im = parsed.re, parsed.im
        elif isinstance(re, GaussianRational):
            extra = _rational(im)
            re, im = re.re, re.im + extra
        else:
            re = _rational(re)
            im = _rational(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not self.im and not o.im:
            return GaussianRational._make(self.re * o.re, _ZERO)
        return GaussianRational._make(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not o.re and not o.im:
            raise ZeroDivisionError("division by zero in Q(i)")
        if not o.im:
            return GaussianRational._make(self.re / o.re, self.im / o.re)
        norm = o.re * o.re + o.im * o.im
        return GaussianRational._make(
            (self.re * o.re + self.im * o.im) / norm,
            (self.im * o.re - self.re * o.im) / norm,
        )

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Integral):
            return NotImplemented
        if exponent < 0:
            return GaussianRational._make(_ONE, _ZERO) / (self ** (-exponent))
        result = GaussianRational._make(_ONE, _ZERO)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # predicates -----------------------------------------------------------

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def is_integer(self) -> bool:
        """True for rational integers (imaginary part zero)."""
        return not self.im and self.re.denominator == 1

    def is_gaussian_integer(self) -> bool:
        return self.re.denominator == 1 and self.im.denominator == 1

    def denominator(self) -> int:
        return lcm(self.re.denominator, self.im.denominator)

    # comparison / hashing ---------------------------------------------------

    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def sort_key(self):
        return (self.re, self.im)

    def __repr__(self):
        return f"GaussianRational('{format_scalar(self)}')"

    def __str__(self):
        return format_scalar(self)


GR = GaussianRational

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (numbers.Rational, Fraction)):
        return GaussianRational._make(_rational(x), _ZERO)
    return NotImplemented


def as_scalar(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    return GaussianRational(x)


def as_vector(v: Iterable) -> tuple:
    return tuple(as_scalar(c) for c in v)


def as_matrix(rows: Iterable[Iterable]) -> list:
    return [list(as_vector(r)) for r in rows]


def parse_scalar(text: str) -> GaussianRational:
    """Parse ``"p/q"``, ``"p/q+r/s*i"``, ``"r/s*i"``, ``"i"`` and friends."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar string")
    if not s.endswith("i"):
        return GaussianRational._make(Fraction(s), _ZERO)
    body = s[:-1]
    if body.endswith("*"):
        body = body[:-1]
    split = max(body.rfind("+"), body.rfind("-"))
    # a sign right after '/' or at position 0 belongs to a number, not the split
    while split > 0 and body[split - 1] in "/eE":
        split = max(body.rfind("+", 0, split), body.rfind("-", 0, split))
    if split <= 0:
        re_part, im_part = "", body
    else:
        re_part, im_part = body[:split], body[split:]
    if im_part in ("", "+"):
        im = _ONE
    elif im_part == "-":
        im = -_ONE
    else:
        im = Fraction(im_part)
    re = Fraction(re_part) if re_part else _ZERO
    return GaussianRational._make(re, im)


def format_scalar(x) -> str:
    x = as_scalar(x)
    if not x.im:
        return str(x.re)
    if not x.re:
        return f"{x.im}*i"
    sign = "+" if x.im > 0 else "-"
    return f"{x.re}{sign}{abs(x.im)}*i"


# vectors ----------------------------------------------------------------


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_neg(u):
    return tuple(-a for a in u)


def vec_scale(c, u):
    c = as_scalar(c)
    return tuple(c * a for a in u)


def dot(u, v):
    total = GaussianRational._make(_ZERO, _ZERO)
    for a, b in zip(u, v):
        total = total + a * b
    return total


def mat_vec(M, v):
    return tuple(dot(row, v) for row in M)


def is_zero_vector(v) -> bool:
    return not any(v)


# elimination -------------------------------------------------------------


def _row_to_gaussian_integers(row):
    """Scale a row of scalars by the lcm of its denominators."""
    den = 1
    for x in row:
        den = lcm(den, x.re.denominator, x.im.denominator)
    return [x * den for x in row], den


def _bareiss(rows: list, ncols: int):
    """Fraction-free forward elimination, in place.

    Works for python ints (real data) and for GaussianRational entries that
    are Gaussian integers; every division performed is exact.  Returns the
    list of pivot columns; row ``r`` of the result has its pivot at
    ``pivots[r]``.
    """
    nrows = len(rows)
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = r
        while p < nrows and not rows[p][c]:
            p += 1
        if p == nrows:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        prow = rows[r]
        for i in range(r + 1, nrows):
            row = rows[i]
            f = row[c]
            for j in range(c + 1, ncols):
                val = piv * row[j] - f * prow[j]
                row[j] = _exact_div(val, prev)
            row[c] = 0 * piv
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _exact_div(a, b):
    if isinstance(a, int):
        if b == 1:
            return a
        q, rem = divmod(a, b)
        assert rem == 0, "non-exact Bareiss division"
        return q
    if isinstance(b, int) and b == 1:
        return a
    return a / b


def _prepare(M, extra=None):
    rows = [list(as_vector(r)) for r in M]
    if extra is not None:
        rows = [r + [as_scalar(e)] for r, e in zip(rows, extra)]
    real = all(not x.im for r in rows for x in r)
    out = []
    for r in rows:
        scaled, _ = _row_to_gaussian_integers(r)
        if real:
            out.append([x.re.numerator for x in scaled])
        else:
            out.append(scaled)
    return out


def _ncols(M, ncols):
    if ncols is not None:
        return ncols
    if not M:
        raise ValueError("number of columns is ambiguous for an empty matrix")
    return len(M[0])


def rank(M: Sequence[Sequence], ncols: int | None = None) -> int:
    """Dimension of the row space of ``M``."""
    if not M:
        return 0
    n = _ncols(M, ncols)
    rows = _prepare(M)
    return len(_bareiss(rows, n))


def _to_gr(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    return GaussianRational._make(Fraction(x), _ZERO)


def _back_substitute(rows, pivots, ncols, rhs_col=None, free_values=None):
    """Solve an echelon system; free variables take ``free_values`` (default 0)."""
    x = [GaussianRational._make(_ZERO, _ZERO)] * ncols
    if free_values:
        for j, val in free_values.items():
            x[j] = val
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        row = rows[r]
        s = _to_gr(row[rhs_col]) if rhs_col is not None else GaussianRational._make(_ZERO, _ZERO)
        for j in range(c + 1, ncols):
            if row[j] and x[j]:
                s = s - _to_gr(row[j]) * x[j]
        x[c] = s / _to_gr(row[c])
    return tuple(x)


def kernel_basis(M: Sequence[Sequence], ncols: int | None = None) -> list:
    """Basis of {v : M v = 0}; one vector per free column, that column set to 1."""
    n = _ncols(M, ncols)
    if not M:
        return [tuple(GR(1) if j == i else GR(0) for j in range(n)) for i in range(n)]
    rows = _prepare(M)
    pivots = _bareiss(rows, n)
    pivset = set(pivots)
    basis = []
    one = GaussianRational._make(_ONE, _ZERO)
    for f in range(n):
        if f in pivset:
            continue
        basis.append(_back_substitute(rows, pivots, n, free_values={f: one}))
    return basis


def solve_linear(M: Sequence[Sequence], b: Sequence, ncols: int | None = None):
    """One exact solution of ``M x = b`` (free variables set to 0), or None."""
    if len(b) != len(M):
        raise ValueError("right-hand side length must equal the number of rows")
    n = _ncols(M, ncols)
    if not M:
        return tuple(GR(0) for _ in range(n))
    rows = _prepare(M, extra=b)
    pivots = _bareiss(rows, n + 1)
    if pivots and pivots[-1] == n:
        return None
    return _back_substitute(rows, pivots, n, rhs_col=n)


def span_annihilator(basis: Sequence[Sequence], k: int) -> list:
    """Vectors y_j with span(basis) = {v : y_j . v = 0 for all j}."""
    if not basis:
        return [tuple(GR(1) if j == i else GR(0) for j in range(k)) for i in range(k)]
    return kernel_basis(basis, ncols=k)


class LatticeEncoder:
    """Maps vectors over Q(i) to integer tuples by a common scale factor.

    A vector ``v`` is encoded as ``(L*re(v_1), [L*im(v_1)], ...)`` where the
    imaginary slots are present only for complex data.  Sums of encoded
    vectors encode sums of the originals, so distributions can be built with
    plain integer arithmetic.
    """

    def __init__(self, k: int, scale: int = 1, complex_: bool = False):
        self.k = k
        self.scale = scale
        self.complex = complex_

    @classmethod
    def for_vectors(cls, k: int, *groups) -> "LatticeEncoder":
        scale = 1
        cplx = False
        for group in groups:
            for v in group:
                for x in v:
                    x = as_scalar(x)
                    scale = lcm(scale, x.re.denominator, x.im.denominator)
                    if x.im:
                        cplx = True
        return cls(k, scale, cplx)

    def covers(self, v) -> bool:
        for x in v:
            x = as_scalar(x)
            if self.scale % x.re.denominator or self.scale % x.im.denominator:
                return False
            if x.im and not self.complex:
                return False
        return True

    def encode(self, v) -> tuple:
        L = self.scale
        out = []
        for x in v:
            x = as_scalar(x)
            re = x.re * L
            if re.denominator != 1:
                raise ValueError("vector not representable at this scale")
            out.append(re.numerator)
            if self.complex:
                im = x.im * L
                if im.denominator != 1:
                    raise ValueError("vector not representable at this scale")
                out.append(im.numerator)
            elif x.im:
                raise ValueError("complex vector given to a real encoder")
        return tuple(out)

    def decode(self, key: tuple) -> tuple:
        L = self.scale
        if self.complex:
            return tuple(
                GaussianRational._make(Fraction(key[2 * i], L), Fraction(key[2 * i + 1], L))
                for i in range(self.k)
            )
        return tuple(GaussianRational._make(Fraction(c, L), _ZERO) for c in key)

    def rescaled(self, scale: int, complex_: bool | None = None) -> "LatticeEncoder":
        if scale % self.scale:
            raise ValueError("new scale must be a multiple of the old one")
        return LatticeEncoder(self.k, scale, self.complex if complex_ is None else complex_)

    def convert(self, key: tuple, target: "LatticeEncoder") -> tuple:
        """Re-express an encoded key under ``target`` (a refinement of self)."""
        f = target.scale // self.scale
        if self.complex == target.complex:
            return tuple(c * f for c in key)
        if target.complex and not self.complex:
            out = []
            for c in key:
                out.append(c * f)
                out.append(0)
            return tuple(out)
        raise ValueError("cannot drop imaginary parts")
