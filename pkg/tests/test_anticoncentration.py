from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from lolab.algebra import SparsePoly, Variety
from lolab.anticoncentration import (
    FinitePointSet,
    SubspaceSet,
    VectorSequence,
    monte_carlo_prob,
    prob_in_set,
    rho,
    rho_finite,
    rho_subspace,
    rho_translate_lower_bound,
    sum_distribution,
)
from lolab.config import Budget, BudgetExceeded
from lolab.exactmath import GR, kernel_basis, mat_vec, rank

from conftest import brute_sums, int_vectors

LINE4 = VectorSequence(2, [(1, 2), (1, 4), (1, 8), (1, 16)])


def _circle():
    x, y = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
    return Variety(2, (x**2 + y**2 - 2,), dim=1, degree=2)


def test_distribution_binomial():
    D = sum_distribution(VectorSequence.scalars([1] * 4))
    assert {p[0]: m for p, m in D.items()} == {-4: 1, -2: 4, 0: 6, 2: 4, 4: 1}
    assert D.denominator == 16 and D.total() == 16


def test_distribution_independent_coordinates():
    D = sum_distribution(VectorSequence(2, [(1, 0), (0, 1)]))
    assert len(D.support) == 4
    assert all(D.probability((a, b)) == Fraction(1, 4) for a in (-1, 1) for b in (-1, 1))


def test_distribution_distinct_sums():
    D = sum_distribution(LINE4)
    assert len(D.support) == 16 and D.max_count() == 1


def test_rho_examples():
    assert rho(VectorSequence.scalars([1] * 4)) == Fraction(3, 8)
    assert rho(LINE4) == Fraction(1, 16)
    assert rho(VectorSequence(3, [(0, 5, GR(0, 1))])) == Fraction(1, 2)


def test_prob_in_set_examples():
    A = VectorSequence.scalars([1] * 4)
    assert prob_in_set(A, FinitePointSet([(0,)])) == Fraction(3, 8)
    x1 = Variety(2, (SparsePoly.variable(0, 2),), dim=1, degree=1)
    assert prob_in_set(LINE4, x1) == Fraction(3, 8)
    assert prob_in_set(A, FinitePointSet([], k=1)) == 0


def test_translate_lower_bound_examples():
    A = VectorSequence(2, [(1, 0), (0, 1), (1, 0), (0, 1)])
    best = rho_translate_lower_bound(A, _circle(), candidates=[(0, 0), (1, 1)])
    assert best.probability == Fraction(9, 16)
    assert best.shift == (1, 1)
    D = sum_distribution(A)
    pt = rho_translate_lower_bound(A, FinitePointSet([(0, 0)]), candidates=list(D.support))
    assert pt.probability == rho(A)
    assert rho_translate_lower_bound(A, Variety.whole_space(2)).probability == 1
    # no candidates: only x = 0
    assert rho_translate_lower_bound(A, _circle()).probability == prob_in_set(A, _circle())


def test_rho_subspace_examples():
    A = VectorSequence(2, [(1, 0), (0, 1), (1, 0)])
    assert rho_subspace(A, [(0, 1)]) == Fraction(1, 2)
    assert rho_subspace(A, [(1, 0), (0, 1)]) == 1
    assert rho_subspace(A, []) == rho(A)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        sum_distribution(VectorSequence.scalars([1] * 30))
    with pytest.raises(BudgetExceeded):
        sum_distribution(VectorSequence.scalars([2**i for i in range(12)]), Budget(max_support=100))


def test_monte_carlo():
    A = VectorSequence.scalars([1] * 10)
    S = FinitePointSet([(0,)])
    exact = prob_in_set(A, S)
    est = monte_carlo_prob(A, S, 100_000, seed=1)
    assert est.covers(exact)
    assert monte_carlo_prob(A, S, 1000, seed=7) == monte_carlo_prob(A, S, 1000, seed=7)
    assert monte_carlo_prob(A, FinitePointSet([], k=1), 50, seed=0).hits == 0
    one = monte_carlo_prob(A, S, 1, seed=3)
    assert one.estimate in (0.0, 1.0)
    with pytest.raises(ValueError):
        monte_carlo_prob(A, S, 0)


# properties -----------------------------------------------------------------------

sequences = st.integers(1, 3).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(int_vectors(k, -2, 2), min_size=1, max_size=7))
)


@given(sequences)
def test_distribution_matches_brute_force(case):
    k, vecs = case
    D = sum_distribution(VectorSequence(k, vecs))
    assert dict(D.items()) == brute_sums(vecs, k)


@given(sequences)
def test_symmetry_and_mass(case):
    k, vecs = case
    D = sum_distribution(VectorSequence(k, vecs))
    assert D.is_symmetric()
    assert sum(Fraction(m, D.denominator) for _, m in D.items()) == 1


@given(sequences, st.integers(1, 4))
def test_parallel_matches_serial(case, workers):
    k, vecs = case
    A = VectorSequence(k, vecs)
    assert sum_distribution(A, workers=workers).support == sum_distribution(A).support


def _exact_rho_finite_brute(vecs, k, points):
    sums = brute_sums(vecs, k)
    best = Fraction(0)
    for y in sums:
        for s in points:
            x = tuple(a - GR(b) for a, b in zip(y, s))
            hit = sum(m for p, m in sums.items() if tuple(a - b for a, b in zip(p, x)) in
                      {tuple(GR(c) for c in q) for q in points})
            best = max(best, Fraction(hit, 2 ** len(vecs)))
    return best


@settings(max_examples=40)
@given(sequences, st.data())
def test_rho_finite_matches_brute_force(case, data):
    k, vecs = case
    pts = data.draw(st.lists(int_vectors(k, -3, 3), min_size=1, max_size=3))
    assert rho_finite(VectorSequence(k, vecs), FinitePointSet(pts)).probability == _exact_rho_finite_brute(vecs, k, pts)


@given(sequences, st.data())
def test_subsequence_monotonicity(case, data):
    k, vecs = case
    A = VectorSequence(k, vecs)
    keep = data.draw(st.lists(st.sampled_from(range(A.n)), unique=True))
    S = FinitePointSet(data.draw(st.lists(int_vectors(k), min_size=1, max_size=3)))
    assert rho_finite(A, S).probability <= rho_finite(A.subsequence(keep), S).probability


@given(sequences, st.data())
def test_union_bounds(case, data):
    k, vecs = case
    A = VectorSequence(k, vecs)
    S1 = FinitePointSet(data.draw(st.lists(int_vectors(k), min_size=1, max_size=3)))
    S2 = FinitePointSet(data.draw(st.lists(int_vectors(k), min_size=1, max_size=3)))
    r1, r2 = rho_finite(A, S1).probability, rho_finite(A, S2).probability
    r12 = rho_finite(A, S1.union(S2)).probability
    assert max(r1, r2) <= r12 <= r1 + r2


@given(sequences, st.data())
def test_projection_identity(case, data):
    k, vecs = case
    A = VectorSequence(k, vecs)
    m = data.draw(st.integers(1, k))
    rows = data.draw(st.lists(st.lists(st.integers(-2, 2), min_size=k, max_size=k), min_size=m, max_size=m))
    if rank(rows, ncols=k) < m:
        return
    V = kernel_basis(rows, ncols=k)
    projected = VectorSequence(m, [mat_vec(rows, v) for v in vecs])
    assert rho_subspace(A, V) == rho(projected)
    # independent check: group sums into cosets of V directly
    sums = brute_sums(vecs, k)
    Vset = SubspaceSet(V, k)
    best = max(sum(m2 for q, m2 in sums.items() if Vset.contains(tuple(a - b for a, b in zip(q, p))))
               for p in sums)
    assert rho_subspace(A, V) == Fraction(best, 2 ** len(vecs))


@pytest.mark.parametrize("n", range(1, 21))
def test_erdos_lo_equality(n):
    assert rho(VectorSequence.scalars([3] * n)) == Fraction(comb(n, n // 2), 2**n)
