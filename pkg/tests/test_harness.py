import json
from fractions import Fraction
from math import comb

import pytest

from lolab.algebra import ChowRepresentation, SparsePoly
from lolab.anticoncentration import FinitePointSet, VectorSequence, monte_carlo_prob, prob_in_set
from lolab.harness import (
    THEOREMS,
    ExperimentSpec,
    chow_pipeline,
    convex_sharpness,
    equidistribution,
    erdos_lo,
    erdos_lo_value,
    halasz_equality,
    line_example,
    mixed_polynomial,
    parabola_counts,
    run_experiment,
    theorem_scan,
)

from conftest import sign_vectors


def test_erdos_lo_value():
    assert erdos_lo_value(4) == Fraction(3, 8)
    assert erdos_lo_value(1) == Fraction(1, 2)
    assert erdos_lo_value(2) == Fraction(1, 2)
    with pytest.raises(ValueError):
        erdos_lo_value(0)
    assert erdos_lo(12).passed


def test_equidistribution():
    # radius floor(sqrt 8) = 2
    res = equidistribution(8)
    assert res.summary["radius"] == 2
    assert res.summary["ratio"] == Fraction(comb(16, 8), comb(16, 10))
    # radius 3 reproduces the C(16,8)/C(16,11) ratio
    assert equidistribution(8, radius=3).summary["ratio"] == Fraction(12870, 4368)


def test_extremal_examples():
    assert convex_sharpness(7).summary["probability"] == Fraction(70, 128)
    res = line_example(10)
    assert res.summary["probability"] == Fraction(252, 1024)
    assert res.summary["rho"] == Fraction(1, 1024)
    assert mixed_polynomial(8, 2).summary["probability"] == Fraction(11, 64)
    h = halasz_equality()
    assert h.passed and h.summary["rho"] == h.summary["bound"] == Fraction(9, 64)
    assert parabola_counts((1, 10, 100)).passed


def test_mixed_polynomial_brute_force():
    # P[(t1+..+t4)^2 = t5+..+t8] over all 2^8 signs
    hits = sum(1 for s in sign_vectors(8) if sum(s[:4]) ** 2 == sum(s[4:]))
    assert Fraction(hits, 256) == mixed_polynomial(8).summary["probability"]


def test_chow_pipeline_examples():
    R = ChowRepresentation.from_products(4, [[([1, 1, 1, 1], 0)] * 2])
    rep = chow_pipeline(R)
    assert rep.status == "ok" and rep.probability == Fraction(3, 8)
    # an extra variable with a zero coefficient changes nothing
    R5 = ChowRepresentation.from_products(5, [[([1, 1, 1, 1, 0], 0)] * 2])
    rep5 = chow_pipeline(R5)
    assert rep5.probability == rep.probability
    assert rep5.stages["drop"]["ignored_zero_vectors"] == 1
    f = SparsePoly(2, {(1, 1): 1})
    R = ChowRepresentation(3, [(1, 0, 0), (0, 1, -1)], f)
    rep = chow_pipeline(R, b=3)
    assert rep.status == "hypothesis-failed" and rep.probability is None
    assert rep.stages["robustness"]["witness"] is not None


def test_chow_pipeline_matches_brute_force():
    R = ChowRepresentation.from_products(6, [[([1, 1, 0, 1, 0, 1], 1), ([0, 1, 1, 0, 1, 1], -1)]])
    rep = chow_pipeline(R, b=2)
    from lolab.algebra import expand_chow

    F = expand_chow(R)
    brute = Fraction(sum(1 for s in sign_vectors(6) if not F.evaluate(s)), 64)
    assert rep.status == "ok" and rep.probability == brute


@pytest.mark.parametrize("name", ["varieties-(k-ell)/2", "polynomials-all-1", "semialgebraic-shape"])
def test_scan_rows_are_dyadic(name):
    res = theorem_scan(name, grid=THEOREMS[name].default_grid[:4])
    for r in res.rows:
        assert r.exact is not None and 0 <= r.exact <= 1
        den = r.exact.denominator
        assert den & (den - 1) == 0


def test_point_family_closed_form():
    res = theorem_scan("varieties-(k-ell)/2", grid=range(2, 9))
    for r in res.rows:
        assert r.exact == r.extra["closed_form"]


def test_convex_half_small():
    res = theorem_scan("convex-1/2", grid=(8, 10, 12), seed=3)
    assert res.passed


def test_scan_unknown():
    with pytest.raises(KeyError):
        theorem_scan("nope")
    with pytest.raises(KeyError):
        run_experiment(ExperimentSpec("nope"))


def test_run_experiment_serialization():
    res = run_experiment(ExperimentSpec("line_example", {"n": 6}))
    payload = json.loads(res.to_json())
    assert payload["rows"][0]["exact"] == str(Fraction(comb(6, 3), 64))
    csv = res.to_csv()
    assert csv.splitlines()[0].startswith("n,exact")
    again = run_experiment(ExperimentSpec("line_example", {"n": 6}, workers=3))
    assert again.to_csv() == csv


def test_monte_carlo_rows_cover_exact():
    # the exact value should sit inside the 99% Wilson interval for nearly every seed
    A = VectorSequence.scalars([1] * 12)
    S = FinitePointSet([(0,), (2,)])
    exact = prob_in_set(A, S)
    covered = sum(monte_carlo_prob(A, S, 4000, seed=s).covers(exact) for s in range(100))
    assert covered >= 95


def _mixed_closed_form(n):
    h = n // 2

    def pr(s):
        if (s + h) % 2 or abs(s) > h:
            return Fraction(0)
        return Fraction(comb(h, (s + h) // 2), 2**h)

    return sum(pr(s) * pr(s * s) for s in range(-h, h + 1))


def test_mixed_family_closed_form():
    res = theorem_scan("polynomials-mixed", grid=(8, 12, 16, 28, 32))
    for r in res.rows:
        assert r.exact == _mixed_closed_form(r.params["n"])
