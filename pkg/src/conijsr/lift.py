"""Semidefinite lifting of vectors and matrices.

Real matrix sets act on real symmetric matrices by ``X -> A X A^T``; complex
sets act on Hermitian matrices by ``X -> A X A^H``.  Both cones are coordinatized
by an isometric ``svec`` (off-diagonal entries carry a sqrt(2) factor, and the
Hermitian case splits them into real and imaginary parts), so lifted operators
are plain real ``d x d`` matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError
from .matrix_core import MatrixSet

SYM = "real-symmetric"
HERM = "hermitian"
CONE_KINDS = (SYM, HERM)

SQRT2 = np.sqrt(2.0)


def cone_kind_for(mset):
    return HERM if mset.is_complex else SYM


def lifted_dim(n, kind):
    _check_kind(kind)
    return n * (n + 1) // 2 if kind == SYM else n * n


def _check_kind(kind):
    if kind not in CONE_KINDS:
        raise InputError(f"unknown cone kind {kind!r}; expected one of {CONE_KINDS}")


@dataclass(frozen=True, eq=False)
class SymPoint:
    entries: np.ndarray
    kind: str = SYM

    def __post_init__(self):
        _check_kind(self.kind)
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise InputError(f"SymPoint needs a square matrix, got shape {e.shape}")
        if self.kind == SYM and np.iscomplexobj(e) and np.any(np.imag(e)):
            raise InputError("complex entries given for a real-symmetric point")
        e = np.array(np.real(e) if self.kind == SYM else e, dtype=float if self.kind == SYM else complex)
        object.__setattr__(self, "entries", e)

    @property
    def n(self):
        return self.entries.shape[0]

    def svec(self):
        return svec(self)

    def __add__(self, other):
        return SymPoint(self.entries + other.entries, self.kind)

    def __sub__(self, other):
        return SymPoint(self.entries - other.entries, self.kind)

    def __mul__(self, c):
        return SymPoint(self.entries * c, self.kind)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return SymPoint(self.entries / c, self.kind)


@lru_cache(maxsize=None)
def _layout(n, kind):
    """Index arrays describing the svec coordinate order for dimension ``n``."""
    rows, cols, part = [], [], []
    for i in range(n):
        for j in range(i, n):
            if i == j:
                rows.append(i), cols.append(j), part.append(0)
            elif kind == SYM:
                rows.append(i), cols.append(j), part.append(1)
            else:
                rows.extend((i, i)), cols.extend((j, j)), part.extend((1, 2))
    return np.array(rows), np.array(cols), np.array(part)


def svec_array(x, kind):
    """svec of a raw self-adjoint matrix or a ``(..., n, n)`` stack of them."""
    x = np.asarray(x)
    n = x.shape[-1]
    r, c, part = _layout(n, kind)
    vals = x[..., r, c]
    out = np.where(part == 0, vals.real, SQRT2 * vals.real)
    if kind == HERM:
        out = np.where(part == 2, SQRT2 * vals.imag, out)
    return np.ascontiguousarray(out, dtype=float)


def smat_array(v, n, kind):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != lifted_dim(n, kind):
        raise InputError(f"svec of length {v.shape[-1]} does not match n={n} ({kind})")
    r, c, part = _layout(n, kind)
    dtype = float if kind == SYM else complex
    x = np.zeros(v.shape[:-1] + (n, n), dtype=dtype)
    diag = part == 0
    x[..., r[diag], c[diag]] = v[..., diag]
    re = part == 1
    x[..., r[re], c[re]] += v[..., re] / SQRT2
    if kind == HERM:
        im = part == 2
        x[..., r[im], c[im]] += 1j * v[..., im] / SQRT2
    upper = ~diag
    x[..., c[upper], r[upper]] = np.conj(x[..., r[upper], c[upper]])
    return x


def svec(x):
    if not isinstance(x, SymPoint):
        raise InputError("svec expects a SymPoint")
    return svec_array(x.entries, x.kind)


def smat(v, n, kind=SYM):
    return SymPoint(smat_array(v, n, kind), kind)


def lift_vector(v, kind=SYM):
    """``Re(v v^*)`` on the real-symmetric cone, ``v v^*`` on the Hermitian one."""
    _check_kind(kind)
    v = np.asarray(v).reshape(-1)
    if not np.any(v):
        raise InputError("cannot lift the zero vector")
    outer = np.outer(v, np.conj(v))
    return SymPoint(outer.real if kind == SYM else outer, kind)


def congruence(a, x, kind=SYM):
    """``A X A^H`` on raw matrices (kept real on the real-symmetric cone)."""
    y = a @ x @ np.conj(a).T
    if kind == SYM:
        y = y.real
    return 0.5 * (y + np.conj(y).T)


@dataclass(frozen=True, eq=False)
class LiftedOperator:
    rep: np.ndarray
    n: int
    kind: str
    source_word: tuple | None = None

    @property
    def d(self):
        return self.rep.shape[0]


def lift_operator(a, kind=SYM, source_word=None):
    """Dense ``d x d`` representation of ``X -> A X A^H`` in svec coordinates."""
    _check_kind(kind)
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"lift_operator needs a square matrix, got shape {a.shape}")
    if kind == SYM and np.iscomplexobj(a) and np.any(a.imag):
        raise InputError("complex matrix cannot be lifted on the real-symmetric cone; use the hermitian cone")
    if kind == SYM:
        a = np.real(a)
    n = a.shape[0]
    d = lifted_dim(n, kind)
    basis = smat_array(np.eye(d), n, kind)
    images = a @ basis @ np.conj(a).T
    rep = svec_array(images, kind).T
    rep.setflags(write=False)
    return LiftedOperator(rep=rep, n=n, kind=kind, source_word=source_word)


def lift_set(mset, kind=None):
    kind = kind or cone_kind_for(mset)
    return [lift_operator(a, kind, source_word=(i,)) for i, a in enumerate(mset)]


def lifted_matrix_set(mset, kind=None):
    """The lifted family as a MatrixSet of real ``d x d`` matrices."""
    return MatrixSet([op.rep for op in lift_set(mset, kind)], mset.labels)


def apply_lifted(op, x):
    if not isinstance(x, SymPoint):
        raise InputError("apply_lifted expects a SymPoint")
    if x.kind != op.kind or x.n != op.n:
        raise InputError(f"dimension mismatch: operator on n={op.n} ({op.kind}), point n={x.n} ({x.kind})")
    return smat(op.rep @ svec(x), op.n, op.kind)
