"""Common invariant subspaces and the block splitting they allow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .matrix_core import MatrixSet

TOL_RANK = 1e-9
_BORDERLINE = 1e-6


@dataclass
class SubspaceSplit:
    basis_S: np.ndarray
    basis_Sperp: np.ndarray
    projected_sets: tuple
    borderline: bool = False

    @property
    def dim(self):
        return self.basis_S.shape[1]


def _orth(x, tol_rank):
    """Orthonormal basis of the column span of ``x`` and a borderline-rank flag."""
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0], False
    rank = int(np.sum(s > tol_rank * s[0]))
    borderline = bool(np.any((s > tol_rank * s[0]) & (s < _BORDERLINE * s[0])))
    return u[:, :rank], borderline


def orbit_span(mset, vectors, tol_rank=TOL_RANK):
    """Orthonormal basis of the smallest common invariant subspace containing ``vectors``."""
    q, flag = _orth(np.column_stack(vectors), tol_rank)
    mats = mset.stacked()
    for _ in range(mset.n):
        grown = np.concatenate([q] + [a @ q for a in mats], axis=1)
        q2, f2 = _orth(grown, tol_rank)
        flag = flag or f2
        if q2.shape[1] == q.shape[1]:
            return q2, flag
        q = q2
    return q, flag


def complement(q):
    """Orthonormal basis of the orthogonal complement of ``span(q)``."""
    n, k = q.shape
    if k == 0:
        return np.eye(n, dtype=q.dtype)
    u, _, _ = np.linalg.svd(q, full_matrices=True)
    return u[:, k:]


def split_along(mset, q, borderline=False):
    p = complement(q)
    qh, ph = np.conj(q).T, np.conj(p).T
    inner = MatrixSet([qh @ a @ q for a in mset])
    outer = MatrixSet([ph @ a @ p for a in mset])
    return SubspaceSplit(basis_S=q, basis_Sperp=p, projected_sets=(inner, outer), borderline=borderline)


def _starts(mset, v0):
    v0 = np.asarray(v0)
    if not np.any(v0):
        raise InputError("starting vector must be nonzero")
    if mset.is_complex:
        return [v0.astype(complex)]
    parts = [np.real(v0), np.imag(v0)] if np.iscomplexobj(v0) else [v0]
    return [p.astype(float) for p in parts if np.any(p)]


def detect_invariant_subspace(mset, v0, tol_rank=TOL_RANK):
    """Split ``mset`` along the orbit span of ``v0`` if that span is proper.

    ``v0`` may also be a list of vectors.  For a real set the real and
    imaginary parts are used: first jointly, then each on its own.  Returns
    ``None`` when every tried orbit spans the whole space.
    """
    vecs = v0 if isinstance(v0, (list, tuple)) else [v0]
    starts = [s for v in vecs for s in _starts(mset, v)]
    tries = [starts] + ([[s] for s in starts] if len(starts) > 1 else [])
    for group in tries:
        q, flag = orbit_span(mset, group, tol_rank)
        if q.shape[1] < mset.n:
            return split_along(mset, q, flag)
    return None
