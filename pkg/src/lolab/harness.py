"""Named experiments: extremal examples, exponent scans and the polynomial pipeline."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, pi, sqrt
from typing import Callable

import numpy as np

from lolab import config
from lolab.algebra import (
    ChowRepresentation,
    SparsePoly,
    Variety,
    expand_chow,
    reduction_to_vectors,
    robust_dependence_check,
)
from lolab.anticoncentration import (
    FinitePointSet,
    VectorSequence,
    prob_in_set,
    rho,
    sum_distribution,
)
from lolab.exactmath import GR, LatticeEncoder, format_scalar
from lolab.lattice import _hull2, count_lattice_points, exponent_fit, hull_vertices_ball, is_convex_position
from lolab.matroid import basis_packing_number, coordinates_in, drop_to_subspace

__all__ = [
    "ExperimentSpec",
    "ScanRow",
    "ExperimentResult",
    "REGISTRY",
    "THEOREMS",
    "run_experiment",
    "erdos_lo_value",
    "theorem_scan",
    "chow_pipeline",
    "PipelineReport",
    "equidistribution",
    "convex_sharpness",
    "line_example",
    "mixed_polynomial",
    "erdos_lo",
    "halasz_equality",
    "hull_scan",
    "parabola_counts",
]


@dataclass
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int | None = 0
    budget: config.Budget | None = None
    workers: int = 1


@dataclass
class ScanRow:
    params: dict
    exact: Fraction | None = None
    estimate: float | None = None
    bound: float | None = None  # theorem shape value, constant 1
    extra: dict = field(default_factory=dict)

    @property
    def value(self) -> float | None:
        if self.exact is not None:
            return float(self.exact)
        return self.estimate

    @property
    def ratio(self) -> float | None:
        v = self.value
        if v is None or not self.bound:
            return None
        return v / self.bound

    def as_dict(self) -> dict:
        out = dict(self.params)
        out["exact"] = None if self.exact is None else str(self.exact)
        out["estimate"] = self.estimate
        out["bound"] = self.bound
        out["ratio"] = self.ratio
        out.update(self.extra)
        return out


@dataclass
class ExperimentResult:
    name: str
    rows: list
    summary: dict = field(default_factory=dict)
    passed: bool | None = None

    def to_json(self) -> str:
        payload = {
            "experiment": self.name,
            "rows": [r.as_dict() for r in self.rows],
            "summary": {k: _jsonable(v) for k, v in self.summary.items()},
            "passed": self.passed,
        }
        return json.dumps(payload, indent=2, sort_keys=False, default=_jsonable)

    def to_csv(self) -> str:
        dicts = [r.as_dict() for r in self.rows]
        cols: list = []
        for d in dicts:
            for c in d:
                if c not in cols:
                    cols.append(c)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for d in dicts:
            w.writerow({c: _csv_cell(d.get(c)) for c in cols})
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, GR):
        return format_scalar(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(_jsonable(v)) if not isinstance(v, (int, str)) else v


# closed forms and extremal examples -------------------------------------------


def erdos_lo_value(n: int) -> Fraction:
    """2^-n C(n, floor(n/2)): the largest point probability for n nonzero scalars."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return Fraction(comb(n, n // 2), 2**n)


def equidistribution(m: int = 8, k: int = 1, radius: int | None = None, budget=None, workers: int = 1):
    """2m copies of e_i / 2 per coordinate: ratio of largest to smallest P[X_1 = t] for |t| <= radius.

    The radius defaults to floor(sqrt(m)).
    """
    if radius is None:
        radius = int(sqrt(m))
        while (radius + 1) ** 2 <= m:
            radius += 1
        while radius * radius > m:
            radius -= 1
    # coordinates of X are independent, so one coordinate carries the whole law
    D = sum_distribution(VectorSequence(1, [(Fraction(1, 2),)] * (2 * m)), budget, workers)
    probs = {t: D.probability((t,)) for t in range(-radius, radius + 1)}
    hi, lo = max(probs.values()), min(probs.values())
    rows = [ScanRow({"t": t}, p) for t, p in probs.items()]
    return ExperimentResult("equidistribution", rows, {"ratio": hi / lo, "radius": radius, "n": 2 * m * k})


def convex_sharpness(n: int = 7, budget=None, workers: int = 1):
    """S = {-a, a} with n copies of a (a = 1)."""
    A = VectorSequence.scalars([1] * n)
    D = sum_distribution(A, budget, workers)
    p = prob_in_set(A, FinitePointSet([(-1,), (1,)]), distribution=D)
    return ExperimentResult("convex_sharpness", [ScanRow({"n": n}, p)], {"probability": p})


def line_example(n: int = 10, budget=None, workers: int = 1):
    """a_i = (1, 2^i) and S = {x_1 = 0}: P[X in S] is large although rho(A) = 2^-n."""
    A = VectorSequence(2, [(1, 2**i) for i in range(n)])
    D = sum_distribution(A, budget, workers)
    S = Variety(2, (SparsePoly.variable(0, 2),), dim=1, degree=1)
    p = prob_in_set(A, S, distribution=D)
    r = Fraction(D.max_count(), D.denominator)
    return ExperimentResult("line_example", [ScanRow({"n": n}, p, extra={"rho": r})], {"probability": p, "rho": r})


def _mixed_instance(n: int, d: int):
    h = n // 2
    A = VectorSequence(2, [(1, 0)] * h + [(0, 1)] * (n - h))
    y1, y2 = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
    S = Variety(2, (y1**d - y2,), dim=1, degree=d, irreducible=True)
    return A, S


def mixed_polynomial(n: int = 8, d: int = 2, budget=None, workers: int = 1):
    """P[(t_1 + ... + t_{n/2})^d = t_{n/2+1} + ... + t_n]."""
    A, S = _mixed_instance(n, d)
    p = prob_in_set(A, S, distribution=sum_distribution(A, budget, workers))
    return ExperimentResult("mixed_polynomial", [ScanRow({"n": n, "d": d}, p)], {"probability": p})


def halasz_equality(copies: int = 4, budget=None, workers: int = 1):
    from lolab.decoupling import Partition, halasz_check

    A = VectorSequence(2, [(1, 0), (0, 1)] * copies)
    blocks = Partition([[2 * j, 2 * j + 1] for j in range(copies)])
    res = halasz_check(A, blocks, budget, workers)
    row = ScanRow({"copies": copies}, res.rho, bound=float(res.bound), extra={"t": str(res.t)})
    return ExperimentResult("halasz_equality", [row], {"rho": res.rho, "bound": res.bound}, res.passed)


def erdos_lo(n_max: int = 20, budget=None, workers: int = 1):
    rows = []
    ok = True
    for n in range(1, n_max + 1):
        r = rho(VectorSequence.scalars([1] * n), budget, workers)
        ok &= r == erdos_lo_value(n)
        rows.append(ScanRow({"n": n}, r, bound=float(erdos_lo_value(n))))
    return ExperimentResult("erdos_lo", rows, {}, ok)


def hull_scan(k: int = 2, grid=(10, 20, 50, 100, 200, 500, 1000), budget=None, workers: int = 1):
    rows = [ScanRow({"B": B}, extra={"count": hull_vertices_ball(k, B, budget=budget)}) for B in grid]
    fit = exponent_fit([(r.params["B"], r.extra["count"]) for r in rows])
    target = Fraction(2, 3) if k == 2 else None
    summary = {"slope": fit.slope, "residual": fit.residual, "target": target}
    passed = 0.55 <= fit.slope <= 0.75 if k == 2 else None
    return ExperimentResult("hull_scan", rows, summary, passed)


def parabola_counts(grid=(1, 10, 100, 1000, 10000), budget=None, workers: int = 1):
    y1, y2 = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
    S = Variety(2, (y1 - y2**2,), dim=1, degree=2)
    rows = []
    ok = True
    for B in grid:
        c = count_lattice_points(S, B, budget=budget, workers=workers).count
        expect = 2 * _isqrt(B) + 1
        ok &= c == expect
        rows.append(ScanRow({"B": B}, extra={"count": c, "expected": expect}))
    pairs = [(r.params["B"], r.extra["count"]) for r in rows if r.params["B"] > 1]
    summary = {"slope": exponent_fit(pairs).slope} if len(pairs) >= 3 else {}
    return ExperimentResult("parabola_counts", rows, summary, ok)


def _isqrt(B) -> int:
    from math import isqrt

    return isqrt(int(B))


# theorem scans -----------------------------------------------------------------


def _point_family(b: int):
    """2b copies of each standard basis vector of F^2 (packing number 2b), S a point."""
    A = VectorSequence(2, [(1, 0)] * (2 * b) + [(0, 1)] * (2 * b))
    return A, FinitePointSet([(0, 0)])


def _greedy_convex_subset(D, limit: int = 200) -> list:
    """Highest-probability support points, added greedily while in convex position."""
    pts = sorted(D.encoded.items(), key=lambda kv: (-kv[1], kv[0]))[:limit]
    chosen: list = []
    for key, _ in pts:
        trial = chosen + [key]
        if len(trial) <= 2 or _convex(trial):
            chosen = trial
    return chosen


def _convex(points: list) -> bool:
    if len(points[0]) == 2:
        return len(_hull2(points)) == len(set(points))
    if len(points[0]) == 1:
        return len(set(points)) <= 2
    return bool(is_convex_position(points))


def _semialgebraic_arc(point) -> bool:
    """{(x, y) : y = x^2, x >= 0}, which contains no line segment."""
    x, y = point
    return y == x * x and x.re >= 0


class _PredicateSet:
    def __init__(self, pred):
        self.contains = pred


@dataclass
class TheoremInfo:
    exponent: Callable  # params -> exponent in the scaling variable
    variable: str
    default_grid: tuple
    run: Callable  # (param, rng, budget, workers) -> ScanRow


def _row_point(b, rng, budget, workers):
    A, S = _point_family(b)
    p = prob_in_set(A, S, distribution=sum_distribution(A, budget, workers))
    expect = Fraction(comb(2 * b, b), 4**b) ** 2
    return ScanRow({"b": b, "packing": 2 * b}, p, bound=float(b) ** -1, extra={"closed_form": expect})


def _row_mixed(n, rng, budget, workers, d=2):
    A, S = _mixed_instance(n, d)
    p = prob_in_set(A, S, distribution=sum_distribution(A, budget, workers))
    b = n // 2
    return ScanRow({"n": n, "b": b, "d": d}, p, bound=float(b) ** (-1 + 1 / (2 * d)))


def _row_all1(n, rng, budget, workers, d=2):
    # F = (t_1 + ... + t_n)^d; zero exactly when the sum vanishes
    A = VectorSequence.scalars([1] * n)
    y = SparsePoly.variable(0, 1)
    S = Variety(1, (y**d,), dim=0, degree=d)
    p = prob_in_set(A, S, distribution=sum_distribution(A, budget, workers))
    return ScanRow({"n": n, "b": n, "d": d}, p, bound=float(n) ** -0.5)


def _row_parabola(b, rng, budget, workers):
    A = VectorSequence(2, [(1, 0)] * b + [(0, 1)] * b)
    y1, y2 = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
    S = Variety(2, (y2 - y1**2,), dim=1, degree=2, irreducible=True)
    p = prob_in_set(A, S, distribution=sum_distribution(A, budget, workers))
    return ScanRow({"b": b}, p, bound=float(b) ** -0.75)


def _row_convex_position(b, rng, budget, workers):
    A = VectorSequence(2, [(1, 0)] * b + [(0, 1)] * b)
    D = sum_distribution(A, budget, workers)
    chosen = _greedy_convex_subset(D)
    p = Fraction(sum(D.encoded[c] for c in chosen), D.denominator)
    return ScanRow({"b": b, "points": len(chosen)}, p, bound=float(b) ** (-1 + 1 / 3))


def _row_convex_half(n, rng, budget, workers, k=2, height=3):
    vecs = []
    while len(vecs) < n:
        v = tuple(int(x) for x in rng.integers(-height, height + 1, size=k))
        if any(v):
            vecs.append(v)
    A = VectorSequence(k, vecs)
    D = sum_distribution(A, budget, workers)
    chosen = _greedy_convex_subset(D)
    p = Fraction(sum(D.encoded[c] for c in chosen), D.denominator)
    bound = 2 * sqrt(2 / pi) * n**-0.5
    return ScanRow({"n": n, "points": len(chosen)}, p, bound=bound,
                   extra={"slack_ok": float(p) <= 2 * bound, "vectors": vecs})


def _row_semialgebraic(n, rng, budget, workers):
    A = VectorSequence(2, [(1, 1)] * n)
    D = sum_distribution(A, budget, workers)
    p = prob_in_set(A, _PredicateSet(_semialgebraic_arc), distribution=D)
    return ScanRow({"n": n}, p, bound=float(n) ** -0.5)


SCAN_MAX_N = 64

THEOREMS = {
    "varieties-(k-ell)/2": TheoremInfo(lambda: -1.0, "b", tuple(range(2, 11)), _row_point),
    "polynomials-mixed": TheoremInfo(lambda: -0.75, "b", (8, 12, 16, 20, 24), _row_mixed),
    "polynomials-all-1": TheoremInfo(lambda: -0.5, "b", (4, 8, 12, 16, 20, 24), _row_all1),
    "varieties-1/d": TheoremInfo(lambda: -0.75, "b", (4, 8, 12, 16, 20, 24), _row_parabola),
    "convex-position": TheoremInfo(lambda: -2 / 3, "b", (4, 6, 8, 10, 12), _row_convex_position),
    "convex-1/2": TheoremInfo(lambda: -0.5, "n", (8, 12, 16, 20, 24), _row_convex_half),
    "semialgebraic-shape": TheoremInfo(lambda: -0.5, "n", (8, 12, 16, 20, 24), _row_semialgebraic),
}


def theorem_scan(theorem: str, grid=None, seed=0, budget=None, workers: int = 1, tolerance=None) -> ExperimentResult:
    """Exact probabilities along a family, with the fitted log-log slope next to the theorem exponent.

    Only exponents are compared; the theorems' constants are not available.
    For convex-1/2 every row must satisfy P <= 2 (2 sqrt(2/pi)) n^-1/2.
    """
    if theorem not in THEOREMS:
        raise KeyError(f"unknown theorem {theorem!r}; choose from {sorted(THEOREMS)}")
    info = THEOREMS[theorem]
    grid = tuple(grid) if grid else info.default_grid
    rng = np.random.default_rng(seed)
    if budget is None:
        # the families have small supports, so the 2^n guard can be relaxed
        budget = replace(config.DEFAULT_BUDGET, max_n=SCAN_MAX_N)
    rows = []
    for g in grid:
        try:
            rows.append(info.run(g, rng, budget, workers))
        except config.BudgetExceeded as exc:
            rows.append(ScanRow({info.variable: g}, extra={"error": str(exc)}))
    var = info.variable
    pairs = [(r.params[var], r.exact) for r in rows if r.exact]
    summary = {"theorem": theorem, "exponent": info.exponent()}
    passed = None
    if len(pairs) >= 3:
        fit = exponent_fit([(x, float(p)) for x, p in pairs])
        summary.update(slope=fit.slope, residual=fit.residual)
        if tolerance is not None:
            passed = abs(fit.slope - info.exponent()) <= tolerance
    if theorem == "convex-1/2":
        passed = all(r.extra.get("slack_ok", False) for r in rows)
    return ExperimentResult(f"scan:{theorem}", rows, summary, passed)


# polynomial pipeline -------------------------------------------------------------


@dataclass
class PipelineReport:
    status: str  # "ok" or "hypothesis-failed"
    probability: Fraction | None
    stages: dict


def chow_pipeline(R: ChowRepresentation, b: int | None = None, budget=None, workers: int = 1) -> PipelineReport:
    """Reduce F to vectors, check robust dependence, drop to a subspace, then condition.

    The final probability is the average over outcomes of the dropped signs of
    the conditional probability that the remaining sum lands in S.
    """
    budget = config.resolve(budget)
    stages: dict = {}
    A, S = reduction_to_vectors(R)
    k = A.k
    stages["reduction"] = {"k": k, "n": A.n, "vectors": [[format_scalar(x) for x in v] for v in A.vectors]}
    if b is None:
        b = 1
    F = expand_chow(R, budget)
    robust = robust_dependence_check(F, b, budget)
    stages["robustness"] = {"b": b, "robust": robust.robust,
                            "witness": None if robust.witness is None else dict(robust.witness)}
    if not robust.robust:
        return PipelineReport("hypothesis-failed", None, stages)
    nonzero = [i for i, v in enumerate(A.vectors) if any(v)]
    zero_count = A.n - len(nonzero)
    b0 = b // (k * (k + 1)) + 1
    sub = A.subsequence(nonzero)
    drop = drop_to_subspace(sub, b0) if sub.n else None
    I0 = [nonzero[i] for i in drop.indices] if drop else []
    I1 = [i for i in nonzero if i not in set(I0)]
    stages["drop"] = {
        "b0": b0,
        "subspace_dim": drop.dim if drop else 0,
        "I0": I0,
        "I1": I1,
        "ignored_zero_vectors": zero_count,
        "packing": drop.packing if drop else None,
    }
    if drop and drop.basis:
        coords = VectorSequence(drop.dim, [coordinates_in(drop.basis, A.vectors[i]) for i in I0])
        stages["drop"]["verified_packing"] = basis_packing_number(coords).b
    enc = LatticeEncoder.for_vectors(k, A.vectors)
    A0 = A.subsequence(I0)
    D0 = sum_distribution(A0, budget, workers, encoder=enc)
    D1 = sum_distribution(A.subsequence(I1), budget, workers, encoder=enc)
    total = 0
    worst = Fraction(0)
    for y, m in D1.encoded.items():
        hits = 0
        for p, c in D0.encoded.items():
            if S.contains(enc.decode(tuple(a + q for a, q in zip(p, y)))):
                hits += c
        worst = max(worst, Fraction(hits, D0.denominator))
        total += m * hits
    prob = Fraction(total, D0.denominator * D1.denominator)
    stages["conditional"] = {"outcomes": len(D1), "max_conditional": worst}
    return PipelineReport("ok", prob, stages)


def _pipeline_experiment(n: int = 4, d: int = 2, b: int | None = None, budget=None, workers: int = 1):
    R = ChowRepresentation.from_products(n, [[([1] * n, 0)] * d])
    rep = chow_pipeline(R, b, budget, workers)
    row = ScanRow({"n": n, "d": d}, rep.probability, extra={"status": rep.status})
    return ExperimentResult("chow_pipeline", [row], {"stages": rep.stages}, rep.status == "ok")


REGISTRY: dict = {
    "erdos_lo": erdos_lo,
    "equidistribution": equidistribution,
    "convex_sharpness": convex_sharpness,
    "line_example": line_example,
    "mixed_polynomial": mixed_polynomial,
    "halasz_equality": halasz_equality,
    "hull_scan": hull_scan,
    "parabola_counts": parabola_counts,
    "chow_pipeline": _pipeline_experiment,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    if spec.name not in REGISTRY:
        raise KeyError(f"unknown experiment {spec.name!r}; choose from {sorted(REGISTRY)}")
    fn = REGISTRY[spec.name]
    return fn(**spec.params, budget=spec.budget, workers=spec.workers)

