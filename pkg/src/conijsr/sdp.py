"""Small dense conic solver for conitope-norm programs.

The conitope norm of a PSD point ``x`` with respect to vertices ``u_1..u_l`` is

    min  sum(mu)   s.t.   sum_i mu_i u_i - x  is PSD,   mu >= 0,

whose dual is ``max <Z, x>`` over PSD ``Z`` with ``<Z, u_i> <= 1``.  Both are
solved together by a feasible-start primal-dual interior point method (HKM
direction, Mehrotra predictor-corrector).  The returned ``mu`` is primal
feasible and ``Z`` is rescaled to be exactly dual feasible, so the reported
gap bounds the error of the objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .lift import SymPoint

log = logging.getLogger(__name__)

TOL_GAP = 1e-9
TOL_FEAS = 1e-9
TOL_PSD = 1e-10
MAX_IP_ITERS = 200

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"

_RANGE_RTOL = 1e-11
_OUT_OF_RANGE_RTOL = 1e-9


@dataclass
class SdpSolution:
    status: str
    primal_mu: np.ndarray
    dual_Z: np.ndarray
    objective: float
    gap: float
    dual_objective: float = 0.0
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class NormProgram:
    vertices: list
    target: object
    tol_gap: float = TOL_GAP
    tol_feas: float = TOL_FEAS
    max_iters: int = MAX_IP_ITERS
    extra: dict = field(default_factory=dict)

    def solve(self):
        return solve_norm_program(
            self.vertices, self.target, tol_gap=self.tol_gap, tol_feas=self.tol_feas, max_iters=self.max_iters
        )


def _entries(x):
    return x.entries if isinstance(x, SymPoint) else np.asarray(x)


def _herm(x):
    return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))


def psd_check(x, tol=TOL_PSD):
    """``(is_psd, min_eigenvalue)``; PSD means ``lambda_min >= -tol * (1 + ||X||_F)``."""
    x = _herm(_entries(x))
    slack = tol * (1.0 + np.linalg.norm(x))
    n = x.shape[0]
    try:
        np.linalg.cholesky(x + slack * np.eye(n))
        ok = True
    except np.linalg.LinAlgError:
        ok = False
    lmin = float(np.linalg.eigvalsh(x)[0])
    if ok and lmin < -slack:
        # the shifted factorization can succeed by rounding on borderline inputs
        ok = False
    return ok, lmin


def max_min_eig_combination(vertices):
    """``lambda_min`` of the vertex average; positive iff the vertices' span meets the PD interior."""
    stack = np.stack([_herm(_entries(u)) for u in vertices])
    return float(np.linalg.eigvalsh(stack.mean(axis=0))[0])


def _trivial(l, n, dtype, status=OPTIMAL, objective=0.0):
    return SdpSolution(
        status=status,
        primal_mu=np.zeros(l),
        dual_Z=np.zeros((n, n), dtype=dtype),
        objective=objective,
        gap=0.0,
        dual_objective=0.0 if np.isfinite(objective) else objective,
    )


def solve_norm_program(vertices, target, tol_gap=TOL_GAP, tol_feas=TOL_FEAS, max_iters=MAX_IP_ITERS):
    """Solve the conitope-norm program; see the module docstring."""
    u_all = np.stack([_herm(_entries(u)) for u in vertices])
    x = _herm(_entries(target))
    l, n = u_all.shape[0], u_all.shape[1]
    dtype = complex if (np.iscomplexobj(u_all) or np.iscomplexobj(x)) else float
    u_all = u_all.astype(dtype)
    x = x.astype(dtype)

    if not np.any(x):
        return _trivial(l, n, dtype)
    wx = np.linalg.eigvalsh(x)
    if wx[-1] <= 0.0:
        return _trivial(l, n, dtype)
    sx = float(wx[-1])
    xs = x / sx

    traces = np.einsum("kii->k", u_all).real
    active = traces > 0.0
    if not np.any(active):
        return _trivial(l, n, dtype, INFEASIBLE, np.inf)
    s = traces[active]
    us = u_all[active] / s[:, None, None]
    c = 1.0 / s

    g = us.sum(axis=0)
    wg, vg = np.linalg.eigh(g)
    keep = wg > _RANGE_RTOL * wg[-1]
    basis = None
    if not np.all(keep):
        basis = vg[:, keep]
        proj = basis @ np.conj(basis).T
        resid = xs - proj @ xs @ proj
        if np.linalg.norm(resid) > _OUT_OF_RANGE_RTOL * np.linalg.norm(xs):
            return _trivial(l, n, dtype, INFEASIBLE, np.inf)
        bh = np.conj(basis).T
        us = _herm(bh @ us @ basis)
        xs = _herm(bh @ xs @ basis)
        g = _herm(bh @ g @ basis)

    res = _primal_dual(us, xs, c, tol_gap, max_iters)
    mu_s, z, primal, dual, status, iters = res

    mu = np.zeros(l)
    mu[active] = mu_s * sx / s
    if basis is not None:
        z = basis @ z @ np.conj(basis).T
    z = _herm(z)
    objective = sx * primal
    dual_objective = sx * dual
    sol = SdpSolution(
        status=status,
        primal_mu=mu,
        dual_Z=z,
        objective=float(objective),
        gap=float(objective - dual_objective),
        dual_objective=float(dual_objective),
        iterations=iters,
    )
    if status != OPTIMAL:
        log.debug("norm program stopped with status %s, gap %.3g", status, sol.gap)
    return sol


def _comb(w, us):
    """``sum_i w_i u_i``."""
    return (w @ us.reshape(us.shape[0], -1)).reshape(us.shape[1:])


def _tri_inv(chol):
    return solve_triangular(chol, np.eye(chol.shape[0], dtype=chol.dtype), lower=True, check_finite=False)


def _max_step(li, d):
    """Largest ``a`` with ``L L^H + a d`` PSD, given ``li = L^-1``."""
    lmin = float(np.linalg.eigvalsh(_herm(li @ d @ np.conj(li).T))[0])
    return np.inf if lmin >= 0 else -1.0 / lmin


def _is_pd(x):
    try:
        np.linalg.cholesky(_herm(x))
        return True
    except np.linalg.LinAlgError:
        return False


def _max_step_lp(v, dv):
    neg = dv < 0
    return float(np.min(-v[neg] / dv[neg])) if np.any(neg) else np.inf


def _primal_dual(us, xs, c, tol_gap, max_iters):
    """Feasible-start primal-dual path following with the HKM direction.

    The primal iterate ``mu`` keeps ``S = sum mu_i u_i - x`` PD and the dual
    pair ``(Z, nu)`` keeps ``<u_i, Z> + nu_i = c_i``; Mehrotra's
    predictor-corrector picks the centering parameter.
    """
    l, r = us.shape[0], us.shape[1]
    g = us.sum(axis=0)
    lg = np.linalg.cholesky(g)
    lgi = solve_triangular(lg, np.eye(r, dtype=g.dtype), lower=True)
    lam = float(np.linalg.eigvalsh(_herm(lgi @ xs @ np.conj(lgi).T))[-1])
    mu = np.full(l, 2.0 * max(lam, 1e-12))
    tr_u = np.einsum("kii->k", us).real
    z = np.eye(r, dtype=us.dtype) * (0.5 * float(np.min(c / tr_u)))
    nu = c - 0.5 * float(np.min(c / tr_u)) * tr_u
    nbar = r + l
    status = ITERATION_LIMIT
    iters = 0

    while True:
        sm = _comb(mu, us) - xs
        try:
            chol_s = np.linalg.cholesky(sm)
        except np.linalg.LinAlgError:
            break
        primal = float(c @ mu)
        dual = float(np.einsum("ij,ji->", xs, z).real)
        # relative: the caller unscales by lambda_max(x), so absolute terms would grow
        if primal - dual <= tol_gap * primal:
            status = OPTIMAL
            break
        if iters >= max_iters:
            break
        iters += 1
        li_s = _tri_inv(chol_s)
        sinv = _herm(np.conj(li_s).T @ li_s)
        m = (float(np.einsum("ij,ji->", sm, z).real) + float(mu @ nu)) / nbar
        # big[i, j] = <u_i, S^-1 u_j Z>
        big = np.einsum("iab,jba->ij", us, sinv @ us @ z).real
        big = 0.5 * (big + big.T) + np.diag(nu / mu)
        try:
            fac = cho_factor(big, check_finite=False)
            solve = lambda rhs: cho_solve(fac, rhs, check_finite=False)  # noqa: E731
        except np.linalg.LinAlgError:
            solve = lambda rhs: np.linalg.lstsq(big, rhs, rcond=None)[0]  # noqa: E731

        def direction(sig_m, k_m, k_lp):
            t = _herm(sig_m * sinv - sinv @ k_m)
            rhs = np.einsum("iab,ba->i", us, t).real + (sig_m - k_lp) / mu - c
            dx = solve(rhs)
            ds = _comb(dx, us)
            dz = _herm(sig_m * sinv - z - sinv @ k_m - sinv @ ds @ z)
            # taken from the equality constraint so dual feasibility cannot drift
            dnu = -np.einsum("iab,ba->i", us, dz).real
            return dx, ds, dz, dnu

        try:
            li_z = _tri_inv(np.linalg.cholesky(z))
        except np.linalg.LinAlgError:
            break

        def steps(dx, ds, dz, dnu):
            ap = min(_max_step(li_s, ds), _max_step_lp(mu, dx))
            ad = min(_max_step(li_z, dz), _max_step_lp(nu, dnu))
            return ap, ad

        dx, ds, dz, dnu = direction(0.0, np.zeros_like(sm), np.zeros(l))
        ap, ad = steps(dx, ds, dz, dnu)
        ap, ad = min(1.0, ap), min(1.0, ad)
        m_aff = (
            float(np.einsum("ij,ji->", sm + ap * ds, z + ad * dz).real) + float((mu + ap * dx) @ (nu + ad * dnu))
        ) / nbar
        sigma = min(1.0, max(0.0, m_aff / m)) ** 3
        dx, ds, dz, dnu = direction(sigma * m, ds @ dz, dx * dnu)
        ap, ad = steps(dx, ds, dz, dnu)
        ap, ad = min(1.0, 0.98 * ap), min(1.0, 0.98 * ad)
        # near the optimum S and Z are nearly singular: backtrack until both stay PD
        for _ in range(30):
            if _is_pd(_comb(mu + ap * dx, us) - xs):
                break
            ap *= 0.5
        for _ in range(30):
            if _is_pd(z + ad * dz):
                break
            ad *= 0.5
        mu = mu + ap * dx
        z = _herm(z + ad * dz)
        nu = c - np.einsum("iab,ba->i", us, z).real

    # certify: rescale Z so that <u_i, Z> <= c_i holds exactly
    cons = np.einsum("ij,kji->k", z, us).real / c
    theta = max(1.0, float(np.max(cons)))
    z = z / theta
    vals, vecs = np.linalg.eigh(z)
    if vals[0] < 0:
        # PSD up to rounding; clip
        z = (vecs * np.maximum(vals, 0.0)) @ np.conj(vecs).T
    primal = float(c @ mu)
    dual = float(np.einsum("ij,ji->", xs, z).real)
    if status == OPTIMAL and primal - dual > tol_gap * primal:
        status = ITERATION_LIMIT
    return mu, z, primal, dual, status, iters
