"""Dense nonsymmetric eigenvalue solver.

Hessenberg reduction followed by implicit Francis double-shift QR for real
matrices and Wilkinson-shifted single-shift QR for complex matrices.  Only
eigenvalues come out of the QR phase; eigenvectors are recovered afterwards by
inverse iteration (simple eigenvalues) or by a null-space computation
(clustered leading eigenvalues).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericError

EPS = np.finfo(float).eps

TOL_EIG_TIE = 1e-8
TOL_EIG_RES = 1e-10


@dataclass(frozen=True)
class EigenResult:
    spectral_radius: float
    leading_value: complex
    leading_vector: np.ndarray
    leading_multiplicity_flag: bool
    eigenvalues: np.ndarray = field(repr=False)


def _check_square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    return a


def _householder(x):
    """Reflector (I - beta v v^H) sending ``x`` to a multiple of e1."""
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return x, 0.0
    x0 = x[0]
    if np.iscomplexobj(x):
        phase = x0 / abs(x0) if x0 != 0 else 1.0
    else:
        phase = 1.0 if x0 >= 0 else -1.0
    v = x.copy()
    v[0] = x0 + phase * norm
    return v, 2.0 / np.vdot(v, v).real


def hessenberg(a):
    """Upper Hessenberg matrix unitarily similar to ``a``."""
    h = np.array(_check_square(a), copy=True)
    h = h.astype(complex if np.iscomplexobj(h) else float)
    n = h.shape[0]
    for k in range(n - 2):
        v, beta = _householder(h[k + 1:, k].copy())
        if beta == 0.0:
            continue
        h[k + 1:, k:] -= beta * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= beta * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _eig2x2(b):
    a, bb, c, d = b[0, 0], b[0, 1], b[1, 0], b[1, 1]
    p = 0.5 * (a - d)
    disc = p * p + bb * c
    mean = 0.5 * (a + d)
    if not np.iscomplexobj(b) and disc >= 0:
        sq = math.sqrt(disc)
        r1 = mean + math.copysign(sq, mean) if mean != 0 else sq
        det = a * d - bb * c
        r2 = det / r1 if r1 != 0 else mean - sq
        return [complex(r1), complex(r2)]
    sq = cmath.sqrt(disc)
    return [complex(mean + sq), complex(mean - sq)]


def _deflation_point(h, hi, anorm):
    l = hi
    while l > 0:
        s = abs(h[l - 1, l - 1]) + abs(h[l, l])
        if s == 0.0:
            s = anorm
        if abs(h[l, l - 1]) <= EPS * s:
            h[l, l - 1] = 0.0
            return l
        l -= 1
    return 0


def _francis_step(b, exceptional):
    m = b.shape[0]
    if exceptional:
        w = abs(b[m - 1, m - 2]) + abs(b[m - 2, m - 3])
        s, t = 1.5 * w, w * w
    else:
        s = b[m - 2, m - 2] + b[m - 1, m - 1]
        t = b[m - 2, m - 2] * b[m - 1, m - 1] - b[m - 2, m - 1] * b[m - 1, m - 2]
    x = b[0, 0] * b[0, 0] + b[0, 1] * b[1, 0] - s * b[0, 0] + t
    y = b[1, 0] * (b[0, 0] + b[1, 1] - s)
    z = b[1, 0] * b[2, 1]
    for k in range(m - 2):
        v, beta = _householder(np.array([x, y, z]))
        if beta != 0.0:
            q = max(0, k - 1)
            b[k:k + 3, q:] -= beta * np.outer(v, v @ b[k:k + 3, q:])
            r = min(k + 4, m)
            b[:r, k:k + 3] -= beta * np.outer(b[:r, k:k + 3] @ v, v)
            if k > 0:
                b[k + 1, k - 1] = b[k + 2, k - 1] = 0.0
        x, y = b[k + 1, k], b[k + 2, k]
        if k < m - 3:
            z = b[k + 3, k]
    v, beta = _householder(np.array([x, y]))
    if beta != 0.0:
        b[m - 2:, m - 3:] -= beta * np.outer(v, v @ b[m - 2:, m - 3:])
        b[:, m - 2:] -= beta * np.outer(b[:, m - 2:] @ v, v)
        b[m - 1, m - 3] = 0.0


def _givens(a, b):
    r = math.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0, 0j
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    return abs(a) / r, (a / abs(a)) * np.conj(b) / r


def _complex_step(b, exceptional):
    m = b.shape[0]
    if exceptional:
        mu = b[m - 1, m - 1] + 1.5 * abs(b[m - 1, m - 2])
    else:
        r1, r2 = _eig2x2(b[m - 2:, m - 2:])
        tail = b[m - 1, m - 1]
        mu = r1 if abs(r1 - tail) <= abs(r2 - tail) else r2
    idx = np.arange(m)
    b[idx, idx] -= mu
    rots = []
    for k in range(m - 1):
        c, s = _givens(b[k, k], b[k + 1, k])
        g = np.array([[c, s], [-np.conj(s), c]])
        b[k:k + 2, k:] = g @ b[k:k + 2, k:]
        b[k + 1, k] = 0.0
        rots.append(g)
    for k, g in enumerate(rots):
        b[:k + 2, k:k + 2] = b[:k + 2, k:k + 2] @ g.conj().T
    b[idx, idx] += mu


def eigvals(a, max_qr_sweeps=None):
    """All eigenvalues of ``a`` as a complex array (unordered).

    Raises NumericError if the QR iteration does not converge within
    ``max_qr_sweeps`` sweeps (default ``30 * n``); the partially reduced
    Hessenberg matrix and the eigenvalues deflated so far travel on the
    exception's ``partial`` attribute.
    """
    h = hessenberg(a)
    n = h.shape[0]
    if max_qr_sweeps is None:
        max_qr_sweeps = 30 * max(n, 1)
    real = not np.iscomplexobj(h)
    anorm = max(float(np.abs(h).sum()), np.finfo(float).tiny)
    eigs = []
    hi, its, total = n - 1, 0, 0
    while hi >= 0:
        l = _deflation_point(h, hi, anorm)
        if l == hi:
            eigs.append(complex(h[hi, hi]))
            hi -= 1
            its = 0
            continue
        if real and l == hi - 1:
            eigs.extend(_eig2x2(h[hi - 1:hi + 1, hi - 1:hi + 1]))
            hi -= 2
            its = 0
            continue
        if total >= max_qr_sweeps:
            raise NumericError(
                f"QR iteration did not converge after {total} sweeps",
                partial={"schur": h, "eigenvalues": np.array(eigs)},
            )
        its += 1
        total += 1
        window = h[l:hi + 1, l:hi + 1]
        if real:
            _francis_step(window, exceptional=its % 10 == 0)
        else:
            _complex_step(window, exceptional=its % 10 == 0)
    return np.array(eigs, dtype=complex)


def spectral_radius(a):
    a = _check_square(a)
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(eigvals(a))))


def _inverse_iteration(a, lam, iters=3):
    n = a.shape[0]
    scale = max(float(np.linalg.norm(a, np.inf)), 1.0)
    cplx = np.iscomplexobj(a) or abs(complex(lam).imag) > 0
    dtype = complex if cplx else float
    shift = (complex(lam) if cplx else complex(lam).real) + 64 * EPS * scale
    m = a.astype(dtype) - shift * np.eye(n, dtype=dtype)
    x = np.ones(n, dtype=dtype) + np.arange(n) / (3.0 * n)
    x /= np.linalg.norm(x)
    for _ in range(iters):
        try:
            y = np.linalg.solve(m, x)
        except np.linalg.LinAlgError:
            m = m - 1e3 * EPS * scale * np.eye(n)
            continue
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0:
            break
        x = y / ny
    return x


def _normalize_phase(v):
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    if v[k] != 0:
        v = v * (abs(v[k]) / v[k])
    if not np.any(np.abs(v.imag) > 0):
        v = v.real
    return v


def _leading_clusters(a, ev, tol_eig_tie):
    """Distinct leading eigenvalues (conjugate pairs of a real matrix counted once)."""
    rho = float(np.max(np.abs(ev)))
    lead = [complex(x) for x in ev if abs(x) >= rho * (1.0 - tol_eig_tie)]
    count = len(lead)
    if not np.iscomplexobj(a):
        # conj(v) lifts to the same point as v, so the pair is not a real tie
        paired = [x for x in lead if x.imag < 0]
        count -= len(paired)
        lead = [x for x in lead if x.imag >= 0]
    lead.sort(key=lambda z: (-z.real, -z.imag))
    clusters = []
    for z in lead:
        for c in clusters:
            if abs(c[0] - z) <= max(rho, 1.0) * tol_eig_tie:
                c.append(z)
                break
        else:
            clusters.append([z])
    return rho, clusters, count


def leading_eigenpair(a, tol_eig_tie=TOL_EIG_TIE):
    a = _check_square(a)
    ev = eigvals(a)
    rho, clusters, count = _leading_clusters(a, ev, tol_eig_tie)
    lam = clusters[0][0]
    if rho == 0.0:
        v = np.zeros(a.shape[0])
        v[0] = 1.0
        basis = nullspace_basis(a)
        if basis:
            v = basis[0]
    else:
        v = _normalize_phase(_inverse_iteration(a, lam))
    return EigenResult(
        spectral_radius=rho,
        leading_value=lam,
        leading_vector=v,
        leading_multiplicity_flag=count > 1,
        eigenvalues=ev,
    )


def nullspace_basis(m, rtol=1e-8):
    """Orthonormal basis vectors of the numerical null space of ``m``."""
    m = np.asarray(m)
    if m.size == 0:
        return []
    _, s, vh = np.linalg.svd(m)
    scale = max(float(s[0]) if s.size else 0.0, 1.0)
    rank = int(np.sum(s > rtol * scale))
    return [_normalize_phase(vh[k].conj()) for k in range(rank, m.shape[1])]


def leading_eigenvectors(a, tol_eig_tie=TOL_EIG_TIE):
    """Unit vectors spanning every leading eigenspace of ``a``.

    With a unique leading eigenvalue this is just the leading eigenvector.
    Under ties each tied eigenvalue contributes an orthonormal basis of its
    numerical eigenspace.
    """
    a = _check_square(a)
    ev = eigvals(a)
    rho, clusters, count = _leading_clusters(a, ev, tol_eig_tie)
    if count <= 1 and rho > 0:
        return [_normalize_phase(_inverse_iteration(a, clusters[0][0]))]
    n = a.shape[0]
    vectors = []
    for cluster in clusters:
        lam = sum(cluster) / len(cluster)
        shifted = a - (lam if np.iscomplexobj(a) or lam.imag else lam.real) * np.eye(n)
        basis = nullspace_basis(shifted, rtol=max(1e-8, 10 * tol_eig_tie))
        if not basis:
            basis = [_normalize_phase(_inverse_iteration(a, lam))]
        vectors.extend(basis)
    return vectors
