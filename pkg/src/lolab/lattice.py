"""Integer points of varieties in boxes, affine-image densities, convex position and hulls."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import floor, gcd, isqrt, log
from typing import NamedTuple, Sequence

import numpy as np

from lolab import config
from lolab.algebra import SparsePoly, Variety
from lolab.anticoncentration import FinitePointSet
from lolab.exactmath import GR, as_matrix, as_vector, mat_vec, rank, solve_linear, vec_add

__all__ = [
    "AffineMap",
    "AffineMapFamily",
    "CountReport",
    "count_lattice_points",
    "density_lower_bound",
    "schwartz_zippel_check",
    "slicing_identity_check",
    "is_convex_position",
    "hull_vertices_ball",
    "exponent_fit",
    "FitResult",
]


def _floor(B) -> int:
    return floor(Fraction(B)) if not isinstance(B, int) else B


# affine maps ---------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """x -> M x + s with M invertible."""

    matrix: tuple
    shift: tuple

    def __post_init__(self):
        M = tuple(tuple(r) for r in as_matrix(self.matrix))
        s = as_vector(self.shift)
        k = len(s)
        if len(M) != k or any(len(r) != k for r in M):
            raise ValueError("matrix must be k x k with a length-k shift")
        if rank(M, ncols=k) != k:
            raise ValueError("affine map is not bijective")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "shift", s)

    @classmethod
    def identity(cls, k: int) -> "AffineMap":
        return cls([[1 if i == j else 0 for j in range(k)] for i in range(k)], [0] * k)

    @classmethod
    def translation(cls, t: Sequence) -> "AffineMap":
        k = len(t)
        return cls([[1 if i == j else 0 for j in range(k)] for i in range(k)], t)

    @property
    def k(self) -> int:
        return len(self.shift)

    def __call__(self, x):
        return vec_add(mat_vec(self.matrix, as_vector(x)), self.shift)

    def is_identity(self) -> bool:
        k = self.k
        return not any(self.shift) and all(
            self.matrix[i][j] == (1 if i == j else 0) for i in range(k) for j in range(k)
        )

    def inverse(self) -> "AffineMap":
        k = self.k
        cols = []
        for j in range(k):
            e = [1 if i == j else 0 for i in range(k)]
            cols.append(solve_linear(self.matrix, e, ncols=k))
        inv = [[cols[j][i] for j in range(k)] for i in range(k)]
        shift = [-c for c in mat_vec(inv, self.shift)]
        return AffineMap(inv, shift)

    def as_polynomials(self) -> list:
        """The k coordinate functions as degree-1 polynomials."""
        return [SparsePoly.linear(row, c) for row, c in zip(self.matrix, self.shift)]

    def describe(self) -> str:
        if self.is_identity():
            return "identity"
        fmt = lambda v: "(" + ",".join(str(x) for x in v) + ")"  # noqa: E731
        return "M=" + fmt(fmt(r) for r in self.matrix) + " s=" + fmt(self.shift)


@dataclass
class AffineMapFamily:
    maps: list = field(default_factory=list)

    def __post_init__(self):
        self.maps = [m if isinstance(m, AffineMap) else AffineMap(*m) for m in self.maps]

    def __iter__(self):
        return iter(self.maps)

    def __len__(self):
        return len(self.maps)

    @classmethod
    def translates(cls, k: int, radius: int) -> "AffineMapFamily":
        return cls([AffineMap.translation(t) for t in product(range(-radius, radius + 1), repeat=k)])


def _image(S, phi: AffineMap):
    if phi.is_identity():
        return S
    if isinstance(S, FinitePointSet):
        return FinitePointSet([phi(p) for p in S.points], S.k)
    return S.affine_image(phi)


# counting ------------------------------------------------------------------------


@dataclass(frozen=True)
class CountReport:
    B: object
    count: int
    map: str = "identity"
    strategy: str = "scan"
    elapsed: float = 0.0
    visited: int = 0


def _ambient(S) -> int:
    return S.k


def _count_finite(S: FinitePointSet, Bf: int) -> int:
    total = 0
    for p in S.points:
        if all(x.is_integer() and abs(x.re) <= Bf for x in p):
            total += 1
    return total


def _scan_slab(polys, k: int, Bf: int, lead_values) -> int:
    """Row-major scan (last coordinate innermost) over the slab of given leading values."""
    rest = [range(-Bf, Bf + 1)] * (k - 1)
    count = 0
    for x0 in lead_values:
        for tail in product(*rest):
            pt = (x0,) + tail
            for p in polys:
                if not p.vanishes_at_integer_point(pt):
                    break
            else:
                count += 1
    return count


def _int_poly_terms(p: SparsePoly, j: int):
    """Integer form of p grouped by the exponent of variable j."""
    groups: dict = {}
    for cre, cim, exps in p._integer_form():
        rest = exps[:j] + (0,) + exps[j + 1:]
        groups.setdefault(exps[j], []).append((cre, cim, rest))
    return groups


def _eval_groups(groups: dict, pt: Sequence[int]):
    re_c: dict = {}
    im_c: dict = {}
    for e, terms in groups.items():
        r = i = 0
        for cre, cim, exps in terms:
            m = 1
            for x, d in zip(pt, exps):
                if d:
                    m *= x**d
            r += cre * m
            i += cim * m
        if r:
            re_c[e] = r
        if i:
            im_c[e] = i
    return re_c, im_c


def _int_roots(coeffs: dict, Bf: int) -> list:
    """Integer roots in [-Bf, Bf] of sum c_e x^e with integer c_e (not identically zero)."""
    if not coeffs:
        return list(range(-Bf, Bf + 1))
    deg = max(coeffs)
    low = min(coeffs)
    if deg == 0:
        return []
    roots = [0] if low > 0 else []
    shifted = {e - low: c for e, c in coeffs.items()}
    d = deg - low
    if d == 0:
        return roots
    if d == 1:
        a, b = shifted[1], shifted.get(0, 0)
        if b % a == 0 and abs(b // a) <= Bf and b // a != 0:
            roots.append(-b // a)
        return sorted(set(roots))
    if d == 2:
        a, b, c = shifted[2], shifted.get(1, 0), shifted[0]
        disc = b * b - 4 * a * c
        if disc >= 0:
            s = isqrt(disc)
            if s * s == disc:
                for num in (-b + s, -b - s):
                    if num % (2 * a) == 0:
                        r = num // (2 * a)
                        if abs(r) <= Bf and r != 0:
                            roots.append(r)
        return sorted(set(roots))
    c0 = abs(shifted[0])
    for r in range(1, min(Bf, c0) + 1):
        if c0 % r:
            continue
        for cand in (r, -r):
            if sum(c * cand**e for e, c in shifted.items()) == 0:
                roots.append(cand)
    return sorted(set(roots))


def _solved_slab(polys, k: int, Bf: int, j: int, lead_values) -> int:
    """Enumerate all coordinates except x_j, then solve for integer x_j exactly."""
    pivot = next(p for p in polys if p.degree_in(j) > 0)
    groups = _int_poly_terms(pivot, j)
    others = [p for p in polys if p is not pivot]
    free = [i for i in range(k) if i != j]
    rng = range(-Bf, Bf + 1)
    count = 0
    for lead in lead_values:
        iters = [rng] * max(len(free) - 1, 0)
        for tail in product(*iters):
            vals = (lead,) + tail if free else ()
            pt = [0] * k
            for i, v in zip(free, vals):
                pt[i] = v
            re_c, im_c = _eval_groups(groups, pt)
            if not re_c and not im_c:
                cands = list(rng)
            else:
                cands = _int_roots(re_c if re_c else im_c, Bf)
                if re_c and im_c:
                    cands = [r for r in cands if sum(c * r**e for e, c in im_c.items()) == 0]
            for r in cands:
                pt[j] = r
                if all(p.vanishes_at_integer_point(pt) for p in others):
                    count += 1
    return count


def _solved_variable(S: Variety):
    """Variable of lowest positive degree in some defining polynomial, or None."""
    best = None
    for p in S.polynomials:
        if p.is_zero():
            continue
        for i in range(S.k):
            d = p.degree_in(i)
            if d > 0 and (best is None or d < best[0]):
                best = (d, i)
    return None if best is None else best[1]


def _run_slabs(fn, args, lead: list, workers: int) -> int:
    if workers <= 1 or len(lead) < 2:
        return fn(*args, lead)
    chunks = [lead[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(fn, *args, c) for c in chunks]
        return sum(f.result() for f in futures)


def count_lattice_points(S, B, strategy: str = "auto", workers: int = 1,
                         budget: config.Budget | None = None, phi: AffineMap | None = None) -> CountReport:
    """Exact N_S(B): integer points of S (or phi(S)) with every |x_i| <= B."""
    budget = config.resolve(budget)
    start = time.perf_counter()
    Bf = _floor(B)
    if Bf < 0:
        return CountReport(B, 0, "identity", strategy, 0.0, 0)
    desc = "identity"
    if phi is not None:
        S = _image(S, phi)
        desc = phi.describe()
    k = _ambient(S)
    side = 2 * Bf + 1
    if isinstance(S, FinitePointSet):
        n = _count_finite(S, Bf)
        return CountReport(B, n, desc, "finite", time.perf_counter() - start, len(S))
    polys = [p for p in S.polynomials if not p.is_zero()]
    if not polys:
        return CountReport(B, side**k, desc, "closed-form", time.perf_counter() - start, 0)
    if k == 0:
        n = int(all(not p.evaluate(()) for p in polys))
        return CountReport(B, n, desc, "closed-form", time.perf_counter() - start, 1)
    j = _solved_variable(S)
    if strategy == "auto":
        strategy = "solved" if j is not None else "scan"
    lead = list(range(-Bf, Bf + 1))
    if strategy == "scan":
        config.check(side**k, budget.max_enumeration, "box size")
        n = _run_slabs(_scan_slab, (polys, k, Bf), lead, workers)
        visited = side**k
    elif strategy == "solved":
        if j is None:
            raise ValueError("no variable to solve for")
        config.check(side ** (k - 1), budget.max_enumeration, "box size")
        if k == 1:
            n = _solved_slab(polys, k, Bf, j, [None])
        else:
            n = _run_slabs(_solved_slab, (polys, k, Bf, j), lead, workers)
        visited = side ** (k - 1)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return CountReport(B, n, desc, strategy, time.perf_counter() - start, visited)


def density_lower_bound(S, B, family: AffineMapFamily | None = None, translate_radius: int = 0,
                        budget: config.Budget | None = None):
    """max over the family of N_{phi(S)}(B) / (2 floor(B) + 1)^k, with the maximizing map.

    The family always contains the identity, and integer translates with
    coordinates in [-translate_radius, translate_radius] are appended.
    """
    k = _ambient(S)
    maps = [AffineMap.identity(k)]
    if family is not None:
        maps.extend(family)
    if translate_radius:
        maps.extend(AffineMapFamily.translates(k, translate_radius))
    side = 2 * _floor(B) + 1
    best = None
    for phi in maps:
        rep = count_lattice_points(S, B, budget=budget, phi=phi)
        if best is None or rep.count > best.count:
            best = rep
    return Fraction(best.count, side**k), best


class CheckResult(NamedTuple):
    passed: bool
    lhs: object
    rhs: object

    def __bool__(self):
        return self.passed


def schwartz_zippel_check(S: Variety, B, budget: config.Budget | None = None) -> CheckResult:
    """N_S(B) <= d (2B + 1)^ell for the declared dimension ell and degree d."""
    if S.dim is None or S.degree is None:
        raise ValueError("variety needs declared dim and degree")
    n = count_lattice_points(S, B, budget=budget).count
    bound = S.degree * (2 * Fraction(B) + 1) ** S.dim
    return CheckResult(n <= bound, n, bound)


def slicing_identity_check(S, B, r: int, budget: config.Budget | None = None) -> CheckResult:
    """N_{p^-1(S)}(B) == (2B + 1)^(r - k) N_S(B) for the projection onto the first k coordinates."""
    if isinstance(S, FinitePointSet):
        raise ValueError("slicing needs a variety")
    Bf = _floor(B)
    lifted = S.lift(r)
    lhs = count_lattice_points(lifted, Bf, budget=budget).count
    rhs = (2 * Bf + 1) ** (r - S.k) * count_lattice_points(S, Bf, budget=budget).count
    return CheckResult(lhs == rhs, lhs, rhs)


# convex position -----------------------------------------------------------------


def _real_coords(p) -> tuple:
    out = []
    cplx = any(GR(x).im for x in p)
    for x in p:
        x = GR(x)
        out.append(x.re)
        if cplx:
            out.append(x.im)
    return tuple(out)


def _feasible(A: list, b: list) -> bool:
    """Is {lam >= 0 : A lam = b} nonempty?  Phase-one simplex in exact rationals, Bland's rule."""
    m, n = len(A), len(A[0]) if A else 0
    rows = []
    for i in range(m):
        row = [Fraction(x) for x in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        art = [Fraction(1) if t == i else Fraction(0) for t in range(m)]
        rows.append(row + art + [rhs])
    basis = [n + i for i in range(m)]
    width = n + m
    # objective: minimize sum of artificials -> reduced costs
    obj = [Fraction(0)] * (width + 1)
    for r in rows:
        for t in range(n):
            obj[t] -= r[t]
        obj[width] -= r[width]
    while True:
        enter = next((t for t in range(width) if obj[t] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, r in enumerate(rows):
            if r[enter] > 0:
                ratio = r[width] / r[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            break
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter]:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[leave])]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, rows[leave])]
        basis[leave] = enter
    return obj[width] == 0


def _in_hull(p, others: list) -> bool:
    if not others:
        return False
    dim = len(p)
    A = [[q[i] for q in others] for i in range(dim)] + [[1] * len(others)]
    return _feasible(A, list(p) + [1])


class ConvexCheck(NamedTuple):
    convex: bool
    witness: tuple | None

    def __bool__(self):
        return self.convex


def is_convex_position(points: Sequence[Sequence]) -> ConvexCheck:
    """True iff no point is a convex combination of the others (duplicates merged)."""
    seen = {}
    for p in points:
        v = as_vector(p)
        seen.setdefault(v, _real_coords(v))
    pts = list(seen.items())
    if len(pts) <= 2:
        return ConvexCheck(True, None)
    for i, (orig, p) in enumerate(pts):
        others = [q for j, (_, q) in enumerate(pts) if j != i]
        if _in_hull(p, others):
            return ConvexCheck(False, orig)
    return ConvexCheck(True, None)


# hulls of ball lattice points -----------------------------------------------------


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull2(points: list) -> list:
    """Monotone chain; strict vertices only, counter-clockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _crossv(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _orient(a, b, c, p) -> int:
    n = _crossv(_sub(b, a), _sub(c, a))
    d = _sub(p, a)
    return n[0] * d[0] + n[1] * d[1] + n[2] * d[2]


def _hull3_vertices(points: list) -> list:
    """Strict vertices of the 3-d hull, by incremental construction in integers."""
    pts = sorted(set(points))
    if len(pts) < 4:
        return pts
    a = pts[0]
    b = next((p for p in pts if p != a), None)
    c = next((p for p in pts if _crossv(_sub(b, a), _sub(p, a)) != (0, 0, 0)), None)
    if c is None:
        return [pts[0], pts[-1]]
    d = next((p for p in pts if _orient(a, b, c, p) != 0), None)
    if d is None:
        raise ValueError("coplanar point set")
    if _orient(a, b, c, d) > 0:
        b, c = c, b
    faces = {(a, b, c), (a, d, b), (b, d, c), (c, d, a)}
    for p in pts:
        if p in (a, b, c, d):
            continue
        visible = [f for f in faces if _orient(*f, p) > 0]
        if not visible:
            continue
        vis_edges = set()
        for f in visible:
            vis_edges.update(((f[0], f[1]), (f[1], f[2]), (f[2], f[0])))
        horizon = [e for e in vis_edges if (e[1], e[0]) not in vis_edges]
        faces.difference_update(visible)
        for u, v in horizon:
            faces.add((u, v, p))
    normals: dict = {}
    for f in faces:
        nrm = _crossv(_sub(f[1], f[0]), _sub(f[2], f[0]))
        for v in f:
            normals.setdefault(v, set()).add(nrm)
    return sorted(v for v, ns in normals.items() if rank([list(n) for n in ns], ncols=3) == 3)


def _ball_candidates(k: int, B) -> list:
    """Column-extreme lattice points of the ball (the only possible hull vertices)."""
    r2 = Fraction(B) ** 2
    Bf = _floor(B)
    out = []
    if k == 2:
        for x in range(-Bf, Bf + 1):
            rest = r2 - x * x
            if rest < 0:
                continue
            y = isqrt(floor(rest))
            out.extend(((x, y), (x, -y)))
    else:
        for x in range(-Bf, Bf + 1):
            for y in range(-Bf, Bf + 1):
                rest = r2 - x * x - y * y
                if rest < 0:
                    continue
                z = isqrt(floor(rest))
                out.extend(((x, y, z), (x, y, -z)))
    return out


def hull_vertices_ball(k: int, B, boundary: bool = False, budget: config.Budget | None = None) -> int:
    """Vertices of the convex hull of Z^k inside the closed ball of radius B (k = 2 or 3).

    With ``boundary=True`` (k = 2 only) every lattice point on the hull
    boundary is counted, not just the corners.
    """
    budget = config.resolve(budget)
    if k not in (2, 3):
        raise ValueError("only k = 2 or 3")
    Bf = _floor(B)
    if Bf < 0:
        return 0
    config.check((2 * Bf + 1) ** (k - 1), budget.max_enumeration, "ball columns")
    cand = _ball_candidates(k, B)
    if k == 2:
        hull = _hull2(cand)
        if not boundary or len(hull) < 2:
            return len(hull)
        return sum(
            gcd(abs(hull[i][0] - hull[i - 1][0]), abs(hull[i][1] - hull[i - 1][1])) for i in range(len(hull))
        )
    if boundary:
        raise ValueError("boundary counting is only implemented for k = 2")
    return len(_hull3_vertices(cand))


# exponent fits -------------------------------------------------------------------


class FitResult(NamedTuple):
    slope: float
    intercept: float
    residual: float


def exponent_fit(pairs: Sequence[tuple]) -> FitResult:
    """Least-squares slope of log(count) against log(B); residual is the RMS error."""
    if len(pairs) < 3:
        raise ValueError("need at least three (B, count) pairs")
    xs, ys = [], []
    for B, c in pairs:
        if B <= 0 or c <= 0:
            raise ValueError("B and counts must be positive")
        xs.append(log(float(B)))
        ys.append(log(float(c)))
    if len(set(xs)) < 2:
        raise ValueError("need at least two distinct B values")
    x = np.array(xs)
    y = np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    res = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return FitResult(float(slope), float(intercept), res)
