"""Acceptance gate: each criterion prints one PASS/FAIL line and asserts it.

Tolerances and time limits are the contract values; nothing is loosened here.
"""

import itertools
import random
import time
from fractions import Fraction
from math import comb, isqrt, sqrt

import pytest

from lolab.algebra import ChowRepresentation, SparsePoly, Variety
from lolab.anticoncentration import (
    FinitePointSet,
    VectorSequence,
    monte_carlo_prob,
    rho,
    rho_finite,
    rho_subspace,
    sum_distribution,
)
from lolab.decoupling import Partition, decoupling_check, halasz_check, iterated_decoupling_bound
from lolab.exactmath import kernel_basis, mat_vec, rank
from lolab.gap import (
    SymmetricGAP,
    empirical_containment,
    gap_contains,
    gap_coordinates,
    is_proper,
)
from lolab.harness import (
    chow_pipeline,
    convex_sharpness,
    equidistribution,
    erdos_lo,
    hull_scan,
    line_example,
    mixed_polynomial,
    parabola_counts,
    theorem_scan,
)
from lolab.lattice import count_lattice_points, schwartz_zippel_check, slicing_identity_check
from lolab.matroid import basis_packing_number, coordinates_in, drop_to_subspace, verify_packing

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def verdict(num, title, ok, elapsed, limit, detail=""):
    passed = bool(ok) and (limit is None or elapsed < limit)
    timing = f"{elapsed:.2f}s" + (f" < {limit}s" if limit is not None else "")
    if limit is not None and elapsed >= limit:
        timing = f"{elapsed:.2f}s exceeds {limit}s"
    line = f"AC{num} {'PASS' if passed else 'FAIL'} {title}: {detail} [{timing}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def xs(k):
    return [SparsePoly.variable(i, k) for i in range(k)]


# 1 ---------------------------------------------------------------------------------


def test_ac1_erdos_lo_equality():
    start = time.perf_counter()
    bad = []
    for n in range(1, 21):
        r = rho(VectorSequence.scalars([7] * n))
        if r != Fraction(comb(n, n // 2), 2**n):
            bad.append(n)
    elapsed = time.perf_counter() - start
    verdict(1, "Erdos-LO equality n=1..20", not bad, elapsed, 1, f"mismatches {bad}")


# 2 ---------------------------------------------------------------------------------


def _random_sequence(rnd, n_max=12, k_max=3):
    k = rnd.randint(1, k_max)
    n = rnd.randint(1, n_max)
    vecs = [tuple(rnd.randint(-2, 2) for _ in range(k)) for _ in range(n)]
    return VectorSequence(k, vecs)


def _random_finite_set(rnd, k):
    return FinitePointSet([tuple(rnd.randint(-3, 3) for _ in range(k)) for _ in range(rnd.randint(1, 3))])


def test_ac2_property_suite():
    rnd = random.Random(2024)
    start = time.perf_counter()
    failures = {"subsequence": 0, "union": 0, "projection": 0}
    for _ in range(500):
        A = _random_sequence(rnd)
        k = A.k
        S1, S2 = _random_finite_set(rnd, k), _random_finite_set(rnd, k)
        keep = sorted(rnd.sample(range(A.n), rnd.randint(0, A.n)))
        full = rho_finite(A, S1).probability
        if not full <= rho_finite(A.subsequence(keep), S1).probability:
            failures["subsequence"] += 1
        r2 = rho_finite(A, S2).probability
        r12 = rho_finite(A, S1.union(S2)).probability
        if not max(full, r2) <= r12 <= full + r2:
            failures["union"] += 1
        m = rnd.randint(1, k)
        while True:
            rows = [[rnd.randint(-2, 2) for _ in range(k)] for _ in range(m)]
            if rank(rows, ncols=k) == m:
                break
        projected = VectorSequence(m, [mat_vec(rows, v) for v in A.vectors])
        if rho_subspace(A, kernel_basis(rows, ncols=k)) != rho(projected):
            failures["projection"] += 1
    elapsed = time.perf_counter() - start
    verdict(2, "subsequence, union and projection properties on 500 instances", not any(failures.values()), elapsed, 60,
            f"failures {failures}")


# 3 ---------------------------------------------------------------------------------


def test_ac3_dropping_to_subspace():
    rnd = random.Random(3)
    start = time.perf_counter()
    bad = 0
    done = 0
    while done < 200:
        k = rnd.randint(1, 3)
        n = rnd.randint(1, 14)
        vecs = [v for v in (tuple(rnd.randint(-2, 2) for _ in range(k)) for _ in range(n)) if any(v)]
        if not vecs:
            continue
        A = VectorSequence(k, vecs)
        b = rnd.randint(1, 4)
        if 2 * A.n < (b - 1) * k * (k + 1):
            continue
        done += 1
        D = drop_to_subspace(A, b)
        ok = 2 * len(D.indices) >= 2 * A.n - (b - 1) * k * (k + 1)
        if D.dim:
            coords = VectorSequence(D.dim, [coordinates_in(D.basis, A.vectors[i]) for i in D.indices])
            P = basis_packing_number(coords)
            ok = ok and verify_packing(coords, P) and P.b >= b
        else:
            ok = ok and not D.indices
        bad += not ok
    elapsed = time.perf_counter() - start
    verdict(3, "dropping to a subspace on 200 sequences", bad == 0, elapsed, 60, f"violations {bad}")


# 4 ---------------------------------------------------------------------------------


def _distinct_by_enumeration(Q):
    seen = set()
    for c in itertools.product(*[range(-q, q + 1) for q in Q.radii]):
        p = Q.point(c)
        if p in seen:
            return False
        seen.add(p)
    return True


def test_ac4_gap_suite():
    rnd = random.Random(4)
    start = time.perf_counter()
    proper_bad = coord_bad = 0
    n_gaps = 0
    while n_gaps < 100:
        k = rnd.randint(1, 2)
        r = rnd.randint(1, 4)
        gens = [tuple(rnd.randint(-12, 12) for _ in range(k)) for _ in range(r)]
        radii = [rnd.randint(0, 8) for _ in range(r)]
        Q = SymmetricGAP(gens, radii)
        if Q.volume > 10**5:
            continue
        n_gaps += 1
        chk = is_proper(Q)
        if chk.proper != _distinct_by_enumeration(Q):
            proper_bad += 1
        if not chk.proper:
            a, b = chk.witness
            proper_bad += not (a != b and Q.point(a) == Q.point(b))
            continue
        coeffs = [tuple(rnd.randint(-q, q) for q in radii) for _ in range(5)]
        A = VectorSequence(Q.k, [Q.point(c) for c in coeffs])
        if gap_coordinates(A, Q) != coeffs or any(gap_contains(Q, Q.point(c)) != c for c in coeffs):
            coord_bad += 1
    hoeff_bad = 0
    for i in range(100):
        r = rnd.randint(1, 3)
        m = rnd.randint(4, 40)
        radii = [rnd.randint(1, 4) for _ in range(r)]
        A = [tuple(rnd.randint(-q, q) for q in radii) for _ in range(m)]
        t = rnd.uniform(0.5, 3.0) * sqrt(m)
        rep = empirical_containment(A, radii, t, 2000, seed=i)
        hoeff_bad += not rep.within_bound(3)
    elapsed = time.perf_counter() - start
    ok = proper_bad == coord_bad == hoeff_bad == 0
    verdict(4, "GAP properness, coordinates, Hoeffding", ok, elapsed, 120,
            f"properness mismatches {proper_bad}, coordinate failures {coord_bad}, Hoeffding excess {hoeff_bad}")


# 5 ---------------------------------------------------------------------------------


def _line_free_curves():
    x, y = xs(2)
    return [
        ("circle r^2=2", Variety(2, (x**2 + y**2 - 2,), dim=1, degree=2)),
        ("circle r^2=5", Variety(2, (x**2 + y**2 - 5,), dim=1, degree=2)),
        ("ellipse", Variety(2, (x**2 + 2 * y**2 - 3,), dim=1, degree=2)),
        ("ellipse 2", Variety(2, (2 * x**2 + 3 * y**2 - 5,), dim=1, degree=2)),
        ("parabola", Variety(2, (x - y**2,), dim=1, degree=2)),
        ("parabola 2", Variety(2, (y - x**2 - 1,), dim=1, degree=2)),
    ]


def test_ac5_decoupling():
    rnd = random.Random(5)
    start = time.perf_counter()
    single_bad = 0
    x, y = xs(2)
    for _ in range(200):
        A = _random_sequence(rnd, n_max=10, k_max=2)
        I0 = sorted(rnd.sample(range(A.n), rnd.randint(0, A.n)))
        shift = tuple(rnd.randint(-2, 2) for _ in range(A.k))
        if A.k == 2 and rnd.random() < 0.3:
            S = Variety(2, (x**2 + y**2 - rnd.choice([1, 2, 4, 5]),), dim=1, degree=2)
        else:
            S = _random_finite_set(rnd, A.k)
        single_bad += not decoupling_check(A, I0, S, shift).passed
    verified = passed = 0
    for _, S in _line_free_curves():
        for n in (4, 8, 12, 16):
            vecs = [tuple(rnd.randint(-1, 1) for _ in range(2)) for _ in range(n)]
            A = VectorSequence(2, vecs)
            witness = [p for p in itertools.product(range(-3, 4), repeat=2) if S.contains(p)]
            res = iterated_decoupling_bound(A, Partition.contiguous(n, 2), S, witness=witness)
            verified += res.status == "verified"
            passed += res.passed and res.status == "verified"
    elapsed = time.perf_counter() - start
    ok = single_bad == 0 and passed >= 20 and passed == verified
    verdict(5, "decoupling lemmas", ok, elapsed, 120,
            f"single-step failures {single_bad}/200, iterated verified+passed {passed}/{verified}")


# 6 ---------------------------------------------------------------------------------


def test_ac6_halasz():
    rnd = random.Random(6)
    start = time.perf_counter()
    bad = 0
    for _ in range(100):
        A = _random_sequence(rnd, n_max=16, k_max=3)
        if A.n < 2:
            A = VectorSequence(A.k, list(A.vectors) * 2)
        s = 2 * rnd.randint(1, A.n // 2)
        idx = list(range(A.n))
        rnd.shuffle(idx)
        blocks = [idx[j::s] for j in range(s)]
        bad += not halasz_check(A, blocks).passed
    eq = halasz_check(VectorSequence(2, [(1, 0), (0, 1)] * 4), [[0, 1], [2, 3], [4, 5], [6, 7]])
    elapsed = time.perf_counter() - start
    ok = bad == 0 and eq.rho == eq.bound == Fraction(9, 64)
    verdict(6, "Halasz bound", ok, elapsed, 120, f"violations {bad}/100, equality case rho={eq.rho} bound={eq.bound}")


# 7 ---------------------------------------------------------------------------------


def _random_variety(rnd):
    k = rnd.randint(1, 3)
    x = xs(k)
    polys = []
    for _ in range(rnd.choice([1, 1, 1, 2])):
        terms = {tuple(rnd.randint(0, 3) for _ in range(k)): rnd.randint(-3, 3) for _ in range(rnd.randint(1, 4))}
        j = rnd.randrange(k)
        f = SparsePoly(k, terms) + rnd.choice([1, -1, 2]) * x[j] ** rnd.randint(1, 3) + rnd.randint(-5, 5)
        polys.append(f)
    if len(polys) == 1:
        return Variety(k, tuple(polys), dim=k - 1, degree=polys[0].degree())
    return Variety(k, tuple(polys))


def test_ac7_lattice_counting():
    rnd = random.Random(7)
    start = time.perf_counter()
    disagree = sz_bad = sz_checked = 0
    for _ in range(50):
        S = _random_variety(rnd)
        B = rnd.randint(1, 10 if S.k < 3 else 5)
        a = count_lattice_points(S, B, strategy="scan").count
        b = count_lattice_points(S, B, strategy="solved").count
        disagree += a != b
        if S.dim is not None:
            sz_checked += 1
            sz_bad += not schwartz_zippel_check(S, B).passed
    # N(B) is non-decreasing and 2 isqrt(B) + 1 only changes at squares, so checking
    # both sides of every square up to 10^4 covers every B <= 10^4
    x1, x2 = xs(2)
    P = Variety(2, (x1 - x2**2,), dim=1, degree=2)
    grid = sorted({0, 10**4} | {m * m for m in range(1, 101)} | {m * m - 1 for m in range(1, 101)})
    parabola_bad = [B for B in grid if count_lattice_points(P, B).count != 2 * isqrt(B) + 1]
    slice_bad = 0
    for S, B, r in [(P, 5, 3), (P, 3, 4), (Variety(1, (xs(1)[0],)), 3, 2),
                    (Variety(2, (x1**2 + x2**2 - 25,)), 5, 3), (Variety(1, (SparsePoly.constant(1, 1),)), 4, 2)]:
        slice_bad += not slicing_identity_check(S, B, r).passed
    elapsed = time.perf_counter() - start
    ok = disagree == sz_bad == slice_bad == 0 and not parabola_bad
    verdict(7, "lattice counting", ok, elapsed, 120,
            f"strategy disagreements {disagree}/50, Schwartz-Zippel failures {sz_bad}/{sz_checked}, "
            f"parabola mismatches {parabola_bad}, slicing failures {slice_bad}")


# 8 ---------------------------------------------------------------------------------


def test_ac8_jarnik_exponent():
    start = time.perf_counter()
    res = hull_scan(2, (10, 20, 50, 100, 200, 500, 1000))
    slope = res.summary["slope"]
    elapsed = time.perf_counter() - start
    counts = [r.extra["count"] for r in res.rows]
    verdict(8, "hull vertex exponent", 0.55 <= slope <= 0.75, elapsed, 180,
            f"slope {slope:.3f} (target 2/3, window [0.55, 0.75]), counts {counts}")


# 9 ---------------------------------------------------------------------------------


def test_ac9_extremal_examples():
    start = time.perf_counter()
    line = line_example(10).summary
    got = {
        "line_example": (line["probability"], line["rho"]),
        "convex_sharpness": convex_sharpness(7).summary["probability"],
        "mixed_polynomial": mixed_polynomial(8, 2).summary["probability"],
        "chow_pipeline": chow_pipeline(ChowRepresentation.from_products(4, [[([1, 1, 1, 1], 0)] * 2])).probability,
    }
    want = {
        "line_example": (Fraction(252, 1024), Fraction(1, 1024)),
        "convex_sharpness": Fraction(70, 128),
        "mixed_polynomial": Fraction(11, 64),
        "chow_pipeline": Fraction(3, 8),
    }
    elapsed = time.perf_counter() - start
    wrong = [k for k in want if got[k] != want[k]]
    verdict(9, "extremal examples", not wrong, elapsed, 60,
            "all exact" if not wrong else f"mismatches {[(k, got[k], want[k]) for k in wrong]}")


# 10 --------------------------------------------------------------------------------


def test_ac10_theorem_scans():
    start = time.perf_counter()
    point = theorem_scan("varieties-(k-ell)/2", grid=range(2, 11))
    mixed = theorem_scan("polynomials-mixed", grid=(8, 12, 16, 20, 24))
    convex = theorem_scan("convex-1/2", grid=(8, 12, 16, 20, 24), seed=0)
    elapsed = time.perf_counter() - start
    s_point, s_mixed = point.summary["slope"], mixed.summary["slope"]
    ok_point = abs(s_point + 1) <= 0.15
    ok_mixed = abs(s_mixed + 0.75) <= 0.2
    ok_convex = bool(convex.passed)
    detail = (f"point family slope {s_point:.3f} vs -1 +-0.15 [{'ok' if ok_point else 'out'}]; "
              f"mixed slope {s_mixed:.3f} vs -0.75 +-0.2 [{'ok' if ok_mixed else 'out'}]; "
              f"convex-1/2 slack-2 rows {sum(r.extra['slack_ok'] for r in convex.rows)}/{len(convex.rows)}")
    verdict(10, "theorem exponent scans", ok_point and ok_mixed and ok_convex, elapsed, 600, detail)


# 11 --------------------------------------------------------------------------------


def _exact_outputs(workers):
    out = []
    out.append(erdos_lo(16, workers=workers).to_csv())
    out.append(equidistribution(8, workers=workers).to_json())
    out.append(line_example(10, workers=workers).to_csv())
    out.append(mixed_polynomial(12, workers=workers).to_csv())
    out.append(parabola_counts((1, 10, 100, 1000), workers=workers).to_csv())
    out.append(theorem_scan("convex-1/2", grid=(8, 12), seed=11, workers=workers).to_csv())
    out.append(theorem_scan("varieties-(k-ell)/2", grid=range(2, 7), workers=workers).to_json())
    A = VectorSequence(2, [(1, 3), (2, -1), (1, 1), (0, 5), (3, 2)] * 3)
    out.append(sum_distribution(A, workers=workers).to_csv())
    x1, x2 = xs(2)
    S = Variety(2, (x1**2 + x2**2 - 25,))
    out.append(repr([count_lattice_points(S, B, workers=workers).count for B in (5, 10, 30)]))
    mc = monte_carlo_prob(A, FinitePointSet([(0, 0)]), 5000, seed=99)
    out.append(repr((mc.hits, mc.low, mc.high)))
    return out


def test_ac11_determinism():
    start = time.perf_counter()
    runs = {w: _exact_outputs(w) for w in (1, 2, 8)}
    repeat = _exact_outputs(1)
    elapsed = time.perf_counter() - start
    same_workers = runs[1] == runs[2] == runs[8]
    same_run = runs[1] == repeat
    verdict(11, "determinism", same_workers and same_run, elapsed, None,
            f"identical across workers 1/2/8: {same_workers}; identical across two runs: {same_run}")
