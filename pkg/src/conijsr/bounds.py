"""Product enumeration: SMP candidates and brute-force JSR bounds.

For every word length ``k`` the averaged spectral radius of a product is a
lower bound on the JSR and ``max_w ||A_w||^(1/k)`` is an upper bound; these
enumerations are the independent oracle the conitope engine is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, InputError
from .matrix_core import (
    count_lyndon,
    cyclic_canonical,
    lyndon_words,
    operator_norms_2,
    product_eval,
    spectral_radius,
)

PRODUCT_BUDGET = 10**6
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SmpCandidate:
    word: tuple
    value: float

    @property
    def length(self):
        return len(self.word)

    def better_than(self, other):
        """Larger value wins; near-ties go to the shorter, then lexicographically smaller word."""
        if other is None:
            return True
        if self.value > other.value * (1 + _TIE_RTOL):
            return True
        if self.value < other.value * (1 - _TIE_RTOL):
            return False
        return (len(self.word), self.word) < (len(other.word), other.word)


class RadiusCache:
    """Averaged spectral radii keyed by cyclically canonical word."""

    def __init__(self, mset):
        self.mset = mset
        self.values = {}

    def __len__(self):
        return len(self.values)

    def value(self, word):
        key = cyclic_canonical(word)
        val = self.values.get(key)
        if val is None:
            rho = spectral_radius(product_eval(key, self.mset))
            val = rho ** (1.0 / len(key))
            self.values[key] = val
        return val

    def candidate(self, word):
        key = cyclic_canonical(word)
        return SmpCandidate(key, self.value(key))


def lyndon_budget(m, max_len):
    return sum(count_lyndon(m, k) for k in range(1, max_len + 1))


def smp_search(mset, max_len, product_budget=PRODUCT_BUDGET, cache=None):
    """Best averaged spectral radius over all words of length at most ``max_len``.

    Only Lyndon words are evaluated: one per aperiodic necklace, and periodic
    necklaces repeat a shorter word's value.
    """
    if max_len < 1:
        raise InputError("max_len must be at least 1")
    m = len(mset)
    required = lyndon_budget(m, max_len)
    if required > product_budget:
        raise BudgetError(
            f"SMP search up to length {max_len} needs {required} products, over the budget of "
            f"{product_budget}; use a smaller depth",
            budget=product_budget,
            required=required,
        )
    cache = cache if cache is not None else RadiusCache(mset)
    best = None
    for w in lyndon_words(m, max_len):
        cand = SmpCandidate(w, cache.value(w))
        if cand.better_than(best):
            best = cand
    return best


def subproduct_scan(word, mset, cache=None, leading_only=False):
    """Best averaged spectral radius over the contiguous subwords of ``word``.

    With ``leading_only`` only subwords starting at the first letter are
    scanned, which is all that is new when a word grew by one letter on the left.
    """
    word = tuple(word)
    if not word:
        raise InputError("subproduct scan needs a nonempty word")
    cache = cache if cache is not None else RadiusCache(mset)
    starts = [0] if leading_only else range(len(word))
    best = None
    for i in starts:
        for j in range(i + 1, len(word) + 1):
            cand = cache.candidate(word[i:j])
            if cand.better_than(best):
                best = cand
    return best


@dataclass
class BruteForceBounds:
    lower: float
    upper: float
    lower_word: tuple
    depth_reached: int
    truncated: bool = False

    def __iter__(self):
        return iter((self.lower, self.upper))


def _level_stacks(mset, depth, budget):
    """Yield ``(k, stack)`` with all ``m**k`` products of length ``k``.

    Products are ordered so that word ``(i1..ik)`` sits at index ``sum i_j m^(k-j)``.
    """
    mats = mset.stacked()
    m = len(mset)
    stack = mats
    used = m
    yield 1, stack
    for k in range(2, depth + 1):
        used += m**k
        if used > budget:
            return
        stack = (stack[:, None] @ mats[None]).reshape(-1, mset.n, mset.n)
        yield k, stack


def classical_upper(mset, depth, product_budget=PRODUCT_BUDGET):
    """``min_k max_w ||A_w||_2^(1/k)`` over the lengths reachable within the budget."""
    best = np.inf
    for k, stack in _level_stacks(mset, depth, product_budget):
        best = min(best, float(np.max(operator_norms_2(stack))) ** (1.0 / k))
    return best


def brute_force_bounds(mset, depth, product_budget=PRODUCT_BUDGET, cache=None):
    """Sandwich bounds ``max_k rho_bar_k <= rho <= min_k rho_hat_k`` up to ``depth``.

    When the budget runs out the bounds of the deepest completed level are
    returned with ``truncated`` set.
    """
    if depth < 1:
        raise InputError("depth must be at least 1")
    m = len(mset)
    cache = cache if cache is not None else RadiusCache(mset)
    upper = np.inf
    reached = 0
    for k, stack in _level_stacks(mset, depth, product_budget):
        upper = min(upper, float(np.max(operator_norms_2(stack))) ** (1.0 / k))
        reached = k
    lyndon_depth = reached
    while lyndon_depth > 1 and lyndon_budget(m, lyndon_depth) + sum(m**k for k in range(1, reached + 1)) > product_budget:
        lyndon_depth -= 1
    best = smp_search(mset, lyndon_depth, product_budget=np.inf, cache=cache)
    return BruteForceBounds(
        lower=best.value,
        upper=upper,
        lower_word=best.word,
        depth_reached=reached,
        truncated=reached < depth,
    )
