"""Conitopes: downward-closed convex hulls of finitely many PSD points.

A conitope ``coni(U)`` contains every PSD ``x`` with ``x <= sum(l_i u_i)`` for
some convex weights ``l``.  When the vertices jointly reach the interior of the
cone (their sum is positive definite) its gauge is a norm on the cone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericError, StateError
from .lift import SymPoint
from .sdp import TOL_GAP, solve_norm_program

log = logging.getLogger(__name__)

TOL_MEMBER = 1e-8
TOL_INTERIOR = 1e-10


@dataclass(frozen=True, eq=False)
class Vertex:
    """A conitope vertex with its provenance.

    ``point = exp(scale_log) * lift(A_word) seed``; ``seed`` indexes the list
    of starting points of the run that produced the vertex.  ``coords`` keeps
    the svec coordinates a vertex was read from, so files re-emit bitwise.
    """

    point: SymPoint
    word: tuple = ()
    scale_log: float = 0.0
    seed: int = 0
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.scale_log):
            raise InputError("vertex scale_log must be finite")
        object.__setattr__(self, "word", tuple(int(i) for i in self.word))

    @property
    def length(self):
        return len(self.word)


def as_vertex(x):
    if isinstance(x, Vertex):
        return x
    if isinstance(x, SymPoint):
        return Vertex(x)
    raise InputError(f"expected a Vertex or SymPoint, got {type(x).__name__}")


def _matrix(x):
    if isinstance(x, Vertex):
        return x.point.entries
    if isinstance(x, SymPoint):
        return x.entries
    return np.asarray(x)


def gauge(points, x, tol_gap=TOL_GAP):
    """Gauge of ``x`` w.r.t. ``coni(points)``; ``inf`` if no multiple of ``x`` fits.

    Unlike :func:`norm` this accepts vertex sets without interior points,
    which the pruning steps of the preprocessing phase need.
    """
    sol = solve_norm_program([_matrix(p) for p in points], _matrix(x), tol_gap=tol_gap)
    if sol.status == "iteration_limit":
        raise NumericError(f"norm program hit its iteration limit (gap {sol.gap:.3g})", partial=sol.objective)
    return sol.objective


class Conitope:
    """An immutable list of vertices sharing one cone kind and dimension."""

    def __init__(self, vertices, kind=None):
        verts = tuple(as_vertex(v) for v in vertices)
        if not verts:
            raise InputError("a conitope needs at least one vertex")
        kind = kind or verts[0].point.kind
        n = verts[0].point.n
        for v in verts:
            if v.point.kind != kind or v.point.n != n:
                raise InputError("conitope vertices must share cone kind and dimension")
        self.vertices = verts
        self.kind = kind
        self.n = n
        self._validity = None

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def points(self):
        return [v.point for v in self.vertices]

    @property
    def validity(self):
        if self._validity is None:
            self._validity = interior_nonempty(self)
        return self._validity

    def norm(self, x):
        return norm(self, x)

    def contains(self, x, tol_member=TOL_MEMBER):
        return contains(self, x, tol_member)

    def essential_system(self, tol_member=TOL_MEMBER):
        return essential_system(self, tol_member)

    def extend(self, new_points, tol_member=TOL_MEMBER):
        return extend(self, new_points, tol_member)

    def __repr__(self):
        return f"Conitope({len(self.vertices)} vertices, {self.kind}, n={self.n})"


def min_eig_of_mean(points):
    stack = np.stack([_matrix(p) for p in points])
    return float(np.linalg.eigvalsh(stack.mean(axis=0))[0])


def interior_nonempty(c, tol_interior=TOL_INTERIOR):
    """Whether the vertices' span meets the interior of the PSD cone.

    For PSD vertices this holds iff their plain sum is positive definite, so a
    single eigenvalue computation replaces a feasibility program.
    """
    ok = min_eig_of_mean(c.points) > tol_interior
    c._validity = ok
    return ok


def norm(c, x):
    """The conitope norm ``|x|_U``."""
    if not c.validity:
        raise StateError("conitope has no interior point; run the preprocessing loop first")
    x = _matrix(x)
    if not np.any(x):
        return 0.0
    return gauge(c.points, x)


def contains(c, x, tol_member=TOL_MEMBER):
    return norm(c, x) <= 1.0 + tol_member


def _is_zero(v):
    return not np.any(v.point.entries)


def _prune(vertices, candidates, tol_member):
    """Drop redundant vertices, testing the indices in ``candidates`` newest first."""
    keep = list(vertices)
    alive = [True] * len(keep)
    for i in sorted(candidates, reverse=True):
        others = [keep[j].point for j in range(len(keep)) if alive[j] and j != i]
        if not others:
            continue
        try:
            value = gauge(others, keep[i].point)
        except NumericError as exc:
            log.warning("keeping vertex %s: %s", keep[i].word, exc)
            continue
        if value <= 1.0 + tol_member:
            alive[i] = False
    return [v for v, a in zip(keep, alive) if a]


def essential_system(c, tol_member=TOL_MEMBER):
    """A vertex subset generating the same conitope with no removable vertex."""
    verts = [v for v in c.vertices if not _is_zero(v)]
    if not verts:
        return Conitope(c.vertices[:1], c.kind)
    kept = _prune(verts, range(len(verts)), tol_member)
    return Conitope(kept, c.kind)


def extend(c, new_points, tol_member=TOL_MEMBER, known_norms=None):
    """Essential system of ``coni(U u W)`` keeping provenance of survivors.

    ``known_norms`` may give, for each new point, its gauge against ``c``
    already computed by the caller; points at most ``1 + tol_member`` are
    dominated by ``c`` and skipped without another solve.
    """
    new = [as_vertex(p) for p in new_points]
    if known_norms is not None:
        new = [v for v, val in zip(new, known_norms) if val > 1.0 + tol_member]
    new = [v for v in new if not _is_zero(v)]
    for v in new:
        if v.point.kind != c.kind or v.point.n != c.n:
            raise InputError("new points must match the conitope's cone kind and dimension")
    if not new:
        return Conitope(c.vertices, c.kind)
    old = list(c.vertices)
    # drop new points already covered by the old vertices plus the other new ones
    kept_new = _prune(old + new, range(len(old), len(old) + len(new)), tol_member)[len(old):]
    if not kept_new:
        return Conitope(old, c.kind)
    merged = old + kept_new
    kept = _prune(merged, range(len(old)), tol_member)
    return Conitope(kept, c.kind)
