import itertools

import numpy as np
import pytest

from conijsr.bounds import (
    RadiusCache,
    SmpCandidate,
    brute_force_bounds,
    classical_upper,
    smp_search,
    subproduct_scan,
)
from conijsr.errors import BudgetError, InputError
from conijsr.matrix_core import MatrixSet, averaged_radius, operator_norm_2, product_eval

from conftest import load


def _naive(mset, depth):
    lower, upper = 0.0, np.inf
    for k in range(1, depth + 1):
        words = list(itertools.product(range(len(mset)), repeat=k))
        lower = max(lower, max(averaged_radius(w, mset) for w in words))
        upper = min(upper, max(operator_norm_2(product_eval(w, mset)) for w in words) ** (1 / k))
    return lower, upper


def test_brute_force_matches_naive_enumeration(rng):
    for _ in range(10):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 4))
        mset = MatrixSet(list(rng.standard_normal((m, n, n))))
        b = brute_force_bounds(mset, 4)
        lo, up = _naive(mset, 4)
        assert b.lower == pytest.approx(lo, rel=1e-10)
        assert b.upper == pytest.approx(up, rel=1e-10)
        assert b.lower <= b.upper * (1 + 1e-12)
        assert averaged_radius(b.lower_word, mset) == pytest.approx(b.lower, rel=1e-10)


def test_single_diagonal_matrix():
    b = brute_force_bounds(MatrixSet([np.diag([2.0, 3.0])]), 1)
    assert b.lower == pytest.approx(3.0) and b.upper == pytest.approx(3.0)
    lo, up = b
    assert lo == b.lower and up == b.upper


def test_budget_truncates_and_search_raises():
    mset = MatrixSet([np.eye(2), 2 * np.eye(2)])
    b = brute_force_bounds(mset, 10, product_budget=100)
    assert b.truncated and b.depth_reached < 10
    with pytest.raises(BudgetError) as info:
        smp_search(mset, 30, product_budget=1000)
    assert info.value.budget == 1000 and info.value.required > 1000
    with pytest.raises(InputError):
        brute_force_bounds(mset, 0)


def test_smp_search_example_two():
    mset = load("ex2")
    best = smp_search(mset, 5)
    assert best.word == (0, 0, 1, 0, 1)
    assert best.value == pytest.approx(2.2401, abs=1e-4)


def test_smp_search_example_one():
    mset = load("ex1")
    best = smp_search(mset, 4)
    assert best.word == (1,)
    assert best.value == pytest.approx(np.max(np.abs(np.linalg.eigvals(mset[1]))), rel=1e-12)


def test_candidate_tie_breaking():
    a = SmpCandidate((0, 1), 2.0)
    b = SmpCandidate((0, 0, 1, 1), 2.0)
    c = SmpCandidate((1,), 2.0 * (1 + 1e-15))
    assert a.better_than(b) and not b.better_than(a)
    assert c.better_than(a)
    assert SmpCandidate((1,), 3.0).better_than(a)
    assert a.better_than(None)


def test_subproduct_scan(rng):
    mset = MatrixSet(list(rng.standard_normal((2, 3, 3))))
    word = (0, 1, 1, 0, 1)
    best = subproduct_scan(word, mset)
    subs = {word[i:j] for i in range(5) for j in range(i + 1, 6)}
    assert best.value == pytest.approx(max(averaged_radius(s, mset) for s in subs), rel=1e-12)
    lead = subproduct_scan(word, mset, leading_only=True)
    assert lead.value == pytest.approx(max(averaged_radius(word[:j], mset) for j in range(1, 6)), rel=1e-12)


def test_radius_cache_is_rotation_invariant(rng):
    mset = MatrixSet(list(rng.standard_normal((2, 3, 3))))
    cache = RadiusCache(mset)
    v = cache.value((1, 0, 0))
    assert cache.value((0, 1, 0)) == v
    assert len(cache) == 1
    assert cache.candidate((1, 0, 0)).word == (0, 0, 1)


def test_classical_upper_decreases_with_depth(rng):
    mset = MatrixSet(list(rng.standard_normal((2, 3, 3))))
    ups = [classical_upper(mset, k) for k in range(1, 6)]
    assert all(b <= a + 1e-15 for a, b in zip(ups, ups[1:]))
    assert ups[-1] >= brute_force_bounds(mset, 5).lower
