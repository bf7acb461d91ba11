"""Certificates for JSR values and their independent re-verification.

A certificate pairs a product word (the lower bound ``rho(A_w)^(1/|w|)``)
with, for each diagonal block of the set, a conitope whose vertices are
mapped back into it (up to a factor ``B``) by the block's lifted matrices
divided by ``scale**2``.  That invariance caps the block's JSR at
``scale * sqrt(B)``.  Blocks come from common invariant subspaces; with no
split there is one block covering the whole space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import classical_upper
from .conitope import gauge, min_eig_of_mean
from .errors import InputError, NumericError
from .lift import congruence, cone_kind_for
from .matrix_core import MatrixSet, check_word, product_eval, spectral_radius
from .sdp import psd_check

EXACT = "exact"
BOUNDS_ONLY = "bounds_only"

TOL_CERT = 1e-7
TOL_PROVENANCE = 1e-8
TOL_SUBSPACE = 1e-9


@dataclass
class CertBlock:
    """One diagonal block: ``basis`` is ``None`` for the whole space.

    ``seed_coords`` keeps the svec coordinates seeds were read from, so a
    parsed certificate re-emits bitwise.
    """

    scale: float
    kind: str
    seeds: list
    vertices: list
    bound_factor: float = 1.0
    basis: np.ndarray | None = None
    smp_word: tuple = ()
    smp_value: float = 0.0
    classical_depth: int = 0
    seed_coords: list | None = field(default=None, repr=False)

    @property
    def upper(self):
        if self.vertices:
            return self.scale * math.sqrt(max(self.bound_factor, 1.0))
        return math.inf

    def matrices(self, mset):
        return block_set(mset, self.basis)


@dataclass
class Certificate:
    kind: str
    smp_word: tuple
    smp_value: float
    lower: float
    upper: float
    blocks: list
    tolerances: dict = field(default_factory=dict)
    algorithm: str = ""

    @property
    def exact(self):
        return self.kind == EXACT

    @property
    def vertex_count(self):
        return sum(len(b.vertices) for b in self.blocks)


def block_set(mset, basis):
    if basis is None:
        return mset
    bh = np.conj(basis).T
    mats = [bh @ a @ basis for a in mset]
    if not mset.is_complex:
        mats = [np.real(a) for a in mats]
    return MatrixSet(mats)


@dataclass
class VerificationReport:
    violations: list = field(default_factory=list)
    checked_images: int = 0
    max_image_norm: float = 0.0

    def __bool__(self):
        return not self.violations

    @property
    def ok(self):
        return bool(self)

    def fail(self, check, message):
        self.violations.append({"check": check, "message": message})


def _check_structure(cert, mset, report):
    n = mset.n
    if not cert.blocks:
        report.fail("structure", "certificate has no blocks")
        return False
    bases = [b.basis for b in cert.blocks]
    if len(bases) == 1 and bases[0] is None:
        return True
    if any(b is None for b in bases):
        report.fail("structure", "a split certificate needs a basis for every block")
        return False
    for b in bases:
        if b.ndim != 2 or b.shape[0] != n:
            report.fail("structure", f"block basis has shape {b.shape}, expected ({n}, k)")
            return False
    full = np.concatenate(bases, axis=1)
    if full.shape[1] != n or np.linalg.norm(np.conj(full).T @ full - np.eye(n)) > 1e-9 * n:
        report.fail("structure", "block bases do not form an orthonormal basis of the whole space")
        return False
    # every leading run of blocks must span a common invariant subspace
    k = 0
    for b in bases[:-1]:
        k += b.shape[1]
        q = full[:, :k]
        proj = np.eye(n) - q @ np.conj(q).T
        for i, a in enumerate(mset):
            err = np.linalg.norm(proj @ a @ q)
            if err > TOL_SUBSPACE * max(1.0, np.linalg.norm(a)):
                report.fail("structure", f"matrix {i} does not leave the span of the first {k} basis vectors invariant")
                return False
    return True


def _check_smp(cert, mset, report, tol):
    try:
        word = check_word(cert.smp_word, len(mset))
    except InputError as exc:
        report.fail("smp", str(exc))
        return None
    if not word:
        if cert.lower > 0:
            report.fail("smp", "empty SMP word cannot support a positive lower bound")
        return 0.0
    value = spectral_radius(product_eval(word, mset)) ** (1.0 / len(word))
    if abs(value - cert.smp_value) > tol * (1.0 + value):
        report.fail("smp", f"claimed SMP value {cert.smp_value!r} but the word gives {value!r}")
    if cert.lower > value * (1 + tol) + tol:
        report.fail("smp", f"lower bound {cert.lower!r} exceeds the SMP value {value!r}")
    return value


def _check_block(i, block, mset, report, tol):
    sub = block_set(mset, block.basis)
    kind = cone_kind_for(sub)
    if block.kind != kind:
        report.fail("cone", f"block {i}: cone kind {block.kind!r} does not match the matrices ({kind!r})")
        return None
    if not block.vertices:
        if block.classical_depth < 1:
            report.fail("interval", f"block {i} has neither a conitope nor a classical estimate depth")
            return None
        return classical_upper(sub, block.classical_depth)
    if not (block.scale > 0 and math.isfinite(block.scale)):
        report.fail("scale", f"block {i}: scale must be positive and finite")
        return None
    k = sub.n
    for v in block.vertices:
        if v.point.n != k or v.point.kind != kind:
            report.fail("structure", f"block {i}: vertex dimension does not match the block")
            return None
    # (b) PSD vertices and interior
    for j, v in enumerate(block.vertices):
        ok, lmin = psd_check(v.point)
        if not ok:
            report.fail("psd", f"block {i}: vertex {j} is not PSD (min eigenvalue {lmin:.3g})")
    if min_eig_of_mean([v.point for v in block.vertices]) <= 1e-10:
        report.fail("interior", f"block {i}: vertices do not reach the interior of the cone")
        return None
    # (e) provenance: each vertex is a scaled image of a seed
    scaled = [a / block.scale for a in sub]
    log_scale = math.log(block.scale)
    for j, v in enumerate(block.vertices):
        if not 0 <= v.seed < len(block.seeds):
            report.fail("provenance", f"block {i}: vertex {j} refers to a missing seed")
            continue
        seed = block.seeds[v.seed]
        if not psd_check(seed)[0]:
            report.fail("provenance", f"block {i}: seed {v.seed} is not PSD")
        expected_log = -2.0 * len(v.word) * log_scale
        if abs(v.scale_log - expected_log) > 1e-9 * (1.0 + abs(expected_log)):
            report.fail("provenance", f"block {i}: vertex {j} has scale_log {v.scale_log!r}, expected {expected_log!r}")
        try:
            word = check_word(v.word, len(sub))
        except InputError as exc:
            report.fail("provenance", f"block {i}: vertex {j}: {exc}")
            continue
        x = seed.entries
        for idx in reversed(word):
            x = congruence(scaled[idx], x, kind)
        err = np.linalg.norm(x - v.point.entries)
        if err > TOL_PROVENANCE * (1.0 + np.linalg.norm(x)):
            report.fail("provenance", f"block {i}: vertex {j} differs from the image of its seed by {err:.3g}")
    # (c) invariance
    points = [v.point.entries for v in block.vertices]
    worst = 0.0
    for j, v in enumerate(block.vertices):
        for idx, a in enumerate(scaled):
            img = congruence(a, v.point.entries, kind)
            try:
                val = gauge(points, img)
            except NumericError as exc:
                report.fail("invariance", f"block {i}: norm of image of vertex {j} under matrix {idx} failed: {exc}")
                continue
            report.checked_images += 1
            worst = max(worst, val)
            if val > block.bound_factor * (1.0 + tol):
                report.fail(
                    "invariance",
                    f"block {i}: image of vertex {j} under matrix {idx} has norm {val:.12g} > {block.bound_factor:.12g}",
                )
    report.max_image_norm = max(report.max_image_norm, worst)
    return block.scale * math.sqrt(max(block.bound_factor, 1.0))


def verify_certificate(cert, mset, tol_cert=None):
    """Re-check a certificate against ``mset`` from scratch.

    Checks the SMP value (a), PSD vertices and an interior point (b),
    invariance of every block's conitope under its scaled lifted matrices (c),
    the claimed interval (d), and that every vertex is the scaled image of a
    seed under its recorded word (e).  Returns a report that is truthy iff
    nothing failed; ``report.violations`` lists what did.
    """
    report = VerificationReport()
    tol = tol_cert if tol_cert is not None else cert.tolerances.get("tol_cert", TOL_CERT)
    if cert.kind not in (EXACT, BOUNDS_ONLY):
        report.fail("structure", f"unknown certificate kind {cert.kind!r}")
        return report
    smp_value = _check_smp(cert, mset, report, tol)
    if not _check_structure(cert, mset, report):
        return report
    uppers = []
    for i, block in enumerate(cert.blocks):
        up = _check_block(i, block, mset, report, tol)
        uppers.append(math.inf if up is None else up)
    upper = max(uppers)
    # (d) interval
    if not cert.lower <= cert.upper * (1 + tol) + tol:
        report.fail("interval", f"lower {cert.lower!r} exceeds upper {cert.upper!r}")
    if upper > cert.upper * (1 + tol) + tol:
        report.fail("interval", f"claimed upper {cert.upper!r} is below the certified bound {upper!r}")
    if cert.exact:
        if smp_value is not None and upper > smp_value * (1 + tol) + tol:
            report.fail("interval", f"certified upper bound {upper!r} does not meet the SMP value {smp_value!r}")
        if cert.upper - cert.lower > tol * (1.0 + cert.lower):
            report.fail("interval", "exact certificate with a non-degenerate interval")
    return report

