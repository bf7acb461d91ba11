"""Matrix sets, product words and the small dense primitives built on them.

A word is a tuple of matrix indices.  ``(i1, ..., ik)`` denotes the product
``A[i1] @ ... @ A[ik]``: the first index is the leftmost factor, so the last
index acts first on a vector.  The empty word is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .eigen import (  # noqa: F401  (re-exported)
    EigenResult,
    leading_eigenpair,
    leading_eigenvectors,
    spectral_radius,
)
from .errors import InputError


@dataclass(frozen=True, eq=False)
class MatrixSet:
    """A finite nonempty family of square matrices of a common dimension."""

    matrices: tuple
    labels: tuple | None = None

    def __init__(self, matrices, labels=None):
        mats = [np.asarray(m) for m in matrices]
        if not mats:
            raise InputError("matrix set is empty")
        cplx = any(np.iscomplexobj(m) and np.any(m.imag) for m in mats)
        n = None
        frozen = []
        for i, m in enumerate(mats):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InputError(f"matrix {i} is not square (shape {m.shape})")
            if n is None:
                n = m.shape[0]
            elif m.shape[0] != n:
                raise InputError(
                    f"inconsistent dimension: matrix {i} is {m.shape[0]}x{m.shape[0]}, expected {n}x{n}"
                )
            if n < 1:
                raise InputError("matrices must have dimension >= 1")
            if not np.all(np.isfinite(m)):
                raise InputError(f"matrix {i} has non-finite entries")
            m = np.array(m if cplx else np.real(m), dtype=complex if cplx else float)
            m.setflags(write=False)
            frozen.append(m)
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(frozen):
                raise InputError("labels must match the number of matrices")
        object.__setattr__(self, "matrices", tuple(frozen))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.matrices[0].shape[0]

    @property
    def scalar_kind(self):
        return "complex" if np.iscomplexobj(self.matrices[0]) else "real"

    @property
    def is_complex(self):
        return self.scalar_kind == "complex"

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]

    def __iter__(self):
        return iter(self.matrices)

    def scaled(self, factor):
        return MatrixSet([m / factor for m in self.matrices], self.labels)

    def stacked(self):
        return np.stack(self.matrices)


def check_word(word, m):
    word = tuple(int(i) for i in word)
    for i in word:
        if i < 0 or i >= m:
            raise InputError(f"word index {i} out of range for a set of {m} matrices")
    return word


def product_eval(word, mset):
    """``A[w0] @ A[w1] @ ... @ A[wk]``; the empty word gives the identity."""
    word = check_word(word, len(mset))
    p = np.eye(mset.n, dtype=mset.matrices[0].dtype)
    for i in word:
        p = p @ mset.matrices[i]
    return p


def averaged_radius(word, mset):
    """``rho(A_w) ** (1/|w|)``."""
    if not word:
        raise InputError("averaged spectral radius needs a nonempty word")
    return spectral_radius(product_eval(word, mset)) ** (1.0 / len(word))


def cyclic_canonical(word):
    """Lexicographically least rotation of ``word``."""
    word = tuple(word)
    if not word:
        return word
    return min(word[k:] + word[:k] for k in range(len(word)))


def is_lyndon(word):
    word = tuple(word)
    return bool(word) and all(word < word[k:] + word[:k] for k in range(1, len(word)))


def lyndon_words(m, max_len):
    """Lyndon words over ``range(m)`` of length 1..max_len (Duval's generator).

    Every aperiodic necklace has exactly one Lyndon representative; periodic
    necklaces are powers of shorter Lyndon words and share their averaged
    spectral radius, so these words cover all necklaces for radius searches.
    """
    if m < 1 or max_len < 1:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        k = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - k])
        while w and w[-1] == m - 1:
            w.pop()


def _mobius(k):
    res, p, x = 1, 2, k
    while p * p <= x:
        if x % p == 0:
            x //= p
            if x % p == 0:
                return 0
            res = -res
        p += 1
    return -res if x > 1 else res


def count_lyndon(m, length):
    """Number of Lyndon words of exactly ``length`` letters over ``m`` symbols."""
    return sum(_mobius(d) * m ** (length // d) for d in range(1, length + 1) if length % d == 0) // length


def count_necklaces(m, length):
    def phi(k):
        return sum(1 for j in range(1, k + 1) if gcd(j, k) == 1)

    return sum(phi(d) * m ** (length // d) for d in range(1, length + 1) if length % d == 0) // length


def operator_norm_2(a):
    """Largest singular value, from the top eigenvalue of ``A^H A``."""
    a = np.asarray(a)
    gram = a.conj().T @ a
    return float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))


def operator_norms_2(stack):
    """Vectorized :func:`operator_norm_2` over a ``(k, n, n)`` stack."""
    gram = np.conj(np.swapaxes(stack, -1, -2)) @ stack
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[..., -1], 0.0))
