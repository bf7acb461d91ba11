"""JSR computation with lifted conitopes.

Both algorithms iterate in the lifted space with the matrices divided by the
current lower bound ``C`` (so the lifted operators are divided by ``C**2``).
Each step maps the newest vertices, measures the images in the current
conitope norm (``B``), and merges them into an essential system.  Once every
image is back inside (``B <= 1 + tol_B``) the conitope is invariant and
``rho = C`` exactly.

* :func:`algorithm1` starts from the lifted leading eigenvector of a
  candidate product and restarts with a better candidate when the starting
  points fall strictly inside the conitope.
* :func:`algorithm2` starts from the identity, scans subproducts of every new
  image for better candidates, and rescales in place when it finds one.

Bounds reported in unlifted scale are ``C <= rho <= C * sqrt(B)``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import PRODUCT_BUDGET, RadiusCache, SmpCandidate, classical_upper, smp_search, subproduct_scan
from .certificate import BOUNDS_ONLY, EXACT, CertBlock, Certificate
from .conitope import TOL_MEMBER, Conitope, Vertex, essential_system, extend, gauge, interior_nonempty
from .errors import BudgetError, InputError, NumericError
from .lift import SymPoint, cone_kind_for, lift_operator, lift_vector, smat_array, svec_array
from .matrix_core import MatrixSet, leading_eigenvectors, product_eval
from .subspace import detect_invariant_subspace

log = logging.getLogger(__name__)

_TIE = 1e-12
_RESCALE_MIN = 1e-10


@dataclass
class Options:
    max_smp_len: int = 6
    max_iters: int = 100
    max_vertices: int = 5000
    max_restarts: int = 20
    tol_B: float = 1e-8
    tol_cert: float = 1e-7
    tol_member: float = TOL_MEMBER
    product_budget: int = PRODUCT_BUDGET
    fallback_depth: int = 8
    cycle_seeds: bool = True
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_smp_len < 1 or self.max_iters < 1:
            raise InputError("max_smp_len and max_iters must be positive")
        if self.tol_cert < self.tol_B:
            raise InputError("tol_cert must be at least tol_B")

    def tolerances(self):
        return {
            "tol_B": self.tol_B,
            "tol_cert": self.tol_cert,
            "tol_member": self.tol_member,
            "tol_gap": 1e-9,
            "tol_psd": 1e-10,
        }


@dataclass
class BoundsState:
    C: float
    Y: float
    B: float
    iteration: int
    vertex_count: int
    restart: int = 0
    block: int = 0

    def as_dict(self):
        return {
            "C": self.C,
            "Y": self.Y,
            "B": self.B,
            "iteration": self.iteration,
            "vertices": self.vertex_count,
            "restart": self.restart,
            "block": self.block,
        }


@dataclass
class JsrResult:
    lower: float
    upper: float
    exact: bool
    smp: SmpCandidate | None
    certificate: Certificate
    history: list = field(default_factory=list)
    steps: int = 0
    total_steps: int = 0
    restarts: int = 0
    algorithm: str = ""
    runtime_ms: float = 0.0

    @property
    def vertex_count(self):
        return self.certificate.vertex_count

    def summary(self):
        word = list(self.smp.word) if self.smp else []
        return (
            f"JSR in [{self.lower!r}, {self.upper!r}] exact={str(self.exact).lower()} "
            f"smp={word} steps={self.steps}"
        )


@dataclass
class _BlockOutcome:
    block: CertBlock
    lower: float
    upper: float
    exact: bool
    smp: SmpCandidate | None
    steps: int
    total_steps: int
    restarts: int


class _Split(Exception):
    def __init__(self, split):
        super().__init__("common invariant subspace")
        self.split = split


class _Restart(Exception):
    pass


class _Lifted:
    """The lifted family in svec coordinates, scaled by ``1 / C**2``."""

    def __init__(self, mset):
        self.mset = mset
        self.kind = cone_kind_for(mset)
        self.n = mset.n
        self.reps = np.stack([lift_operator(a, self.kind).rep for a in mset])
        self.scale = 1.0

    def rescale(self, scale):
        self.scale = scale

    def images(self, vertices):
        """Images of ``vertices`` under every scaled lifted matrix, as new Vertex objects."""
        if not vertices:
            return []
        x = svec_array(np.stack([v.point.entries for v in vertices]), self.kind)
        imgs = np.einsum("kij,vj->vki", self.reps, x) / self.scale**2
        mats = smat_array(imgs, self.n, self.kind)
        step_log = -2.0 * math.log(self.scale)
        out = []
        for a, v in enumerate(vertices):
            for k in range(len(self.mset)):
                out.append(
                    Vertex(
                        SymPoint(mats[a, k], self.kind),
                        (k,) + v.word,
                        v.scale_log + step_log,
                        v.seed,
                    )
                )
        return out


def _norms(conitope, points):
    pts = conitope.points
    return [gauge(pts, w.point) for w in points]


def upper_bound_from_conitope(conitope, lifted_ops):
    """``max |A u|_U`` over vertices ``u`` and the given lifted operators.

    ``lifted_ops`` are LiftedOperator objects or raw ``d x d`` svec matrices.
    The result bounds the JSR of the lifted family; in unlifted scale the bound
    is ``scale * sqrt(value)``.
    """
    if not conitope.validity:
        from .errors import StateError

        raise StateError("conitope has no interior point")
    kind, n = conitope.kind, conitope.n
    reps = [np.asarray(getattr(op, "rep", op)) for op in lifted_ops]
    best = 0.0
    pts = conitope.points
    for v in conitope.vertices:
        x = svec_array(v.point.entries, kind)
        for rep in reps:
            img = smat_array(rep @ x, n, kind)
            best = max(best, gauge(pts, img))
    return best


def _full_check(conitope, lifted):
    return upper_bound_from_conitope(conitope, [lifted.reps[k] / lifted.scale**2 for k in range(len(lifted.reps))])


class _Clock:
    def __init__(self, limit):
        self.start = time.perf_counter()
        self.limit = limit

    def expired(self):
        return self.limit is not None and time.perf_counter() - self.start > self.limit


def _main_loop(conitope, lifted, opts, history, clock, *, start_C, block, restart, on_images, starting=None):
    """Shared main loop.

    ``on_images(images, retained)`` may return a better candidate value; a
    ``_Restart`` raised from it aborts the loop.  Returns
    ``(conitope, exact, B, steps)`` where ``B`` bounds every image norm.
    """
    frontier = list(conitope.vertices)
    C = start_C
    steps = 0
    drift_steps = 0
    B = math.inf
    while True:
        if steps >= opts.max_iters or len(conitope) > opts.max_vertices or clock.expired():
            break
        steps += 1
        drift_steps += 1
        images = lifted.images(frontier)
        norms = _norms(conitope, images)
        b_frontier = max(norms) if norms else 0.0
        drift = (1.0 + opts.tol_member) ** drift_steps
        B = max(b_frontier, drift)
        Y = C * math.sqrt(max(B, 1.0))
        before = {id(v) for v in conitope.vertices}
        conitope = extend(conitope, images, opts.tol_member, known_norms=norms)
        retained = [v for v in conitope.vertices if id(v) not in before]
        history.append(BoundsState(C, Y, B, steps, len(conitope), restart, block))
        log.info("step %d: C=%.12g Y=%.12g B=%.3g vertices=%d", steps, C, Y, b_frontier, len(conitope))
        update = on_images(images, retained, conitope)
        if update is not None:
            # rescaled in place: every vertex changed, recheck them all
            conitope, C = update
            frontier = list(conitope.vertices)
            drift_steps = 0
            continue
        if starting is not None:
            starting(conitope)
        if b_frontier <= 1.0 + opts.tol_B:
            b_full = _full_check(conitope, lifted)
            if b_full <= 1.0 + opts.tol_B:
                return conitope, True, b_full, steps, C
            log.info("full invariance check gave B=%.3g; continuing", b_full)
            frontier = list(conitope.vertices)
            drift_steps = 0
            continue
        frontier = retained
    return conitope, False, B, steps, C


def _bounds_only_block(conitope, lifted, mset, opts, C, B, seeds, basis, smp):
    """Certificate block and upper bound once the loop gave up."""
    up_classical = classical_upper(mset, opts.fallback_depth, opts.product_budget)
    verts, factor = [], 1.0
    up_conitope = math.inf
    if conitope is not None and conitope.validity and len(conitope) <= 400:
        factor = max(_full_check(conitope, lifted), 1.0)
        up_conitope = C * math.sqrt(factor)
        verts = list(conitope.vertices)
    upper = min(up_conitope, up_classical)
    if upper < up_conitope:
        verts = []
    block = CertBlock(
        scale=C,
        kind=lifted.kind,
        seeds=seeds if verts else [],
        vertices=verts,
        bound_factor=factor if verts else 1.0,
        basis=basis,
        smp_word=smp.word if smp else (),
        smp_value=smp.value if smp else 0.0,
        classical_depth=0 if verts else opts.fallback_depth,
    )
    return block, upper


def _zero_block(mset, opts, basis, smp):
    """Block whose searched products are all nilpotent: only the classical estimate applies."""
    upper = classical_upper(mset, opts.fallback_depth, opts.product_budget)
    block = CertBlock(
        scale=0.0,
        kind=cone_kind_for(mset),
        seeds=[],
        vertices=[],
        basis=basis,
        smp_word=smp.word if smp else (),
        smp_value=0.0,
        classical_depth=opts.fallback_depth,
    )
    exact = upper <= opts.tol_cert
    return _BlockOutcome(block, 0.0, upper, exact, smp, 0, 0, 0)


def _conitope_block(mset, opts, history, clock, block_index, basis):
    """Algorithm 1 on one block; raises ``_Split`` if preprocessing finds an invariant subspace."""
    lifted = _Lifted(mset)
    cache = RadiusCache(mset)
    n = mset.n
    max_len = opts.max_smp_len
    scan_best = [None]
    prev = None
    restarts = 0
    total_steps = 0
    while True:
        try:
            cand = smp_search(mset, max_len, opts.product_budget, cache)
        except BudgetError:
            if prev is None:
                raise
            log.warning("SMP search budget exhausted at length %d", max_len)
            return _finish_bounds(None, lifted, mset, opts, prev, [], basis, total_steps, restarts, history)
        if scan_best[0] is not None and scan_best[0].better_than(cand):
            cand = scan_best[0]
        if prev is not None and cand.value <= prev.value * (1 + _TIE):
            # the escape fired but nothing better is known yet: search longer products
            max_len += 1
            continue
        prev = cand
        C = cand.value
        if C <= 0.0:
            return _zero_block(mset, opts, basis, cand)
        log.info("candidate %s with averaged radius %.15g", list(cand.word), C)
        lifted.rescale(C)
        p = product_eval(cand.word, mset) / C ** cand.length
        vecs = leading_eigenvectors(p)
        seeds = [lift_vector(v, lifted.kind) for v in vecs]

        start = [Vertex(s, (), 0.0, k) for k, s in enumerate(seeds)]
        if opts.cycle_seeds:
            start += _cycle_points(start, cand.word, lifted)
        # preprocessing: grow the orbit until it reaches the interior of the cone
        conitope = essential_system(Conitope(start), opts.tol_member)
        frontier = list(conitope.vertices)
        rounds = 0
        while not interior_nonempty(conitope):
            if rounds >= n:
                split = detect_invariant_subspace(mset, list(vecs))
                if split is not None:
                    raise _Split(split)
                if rounds >= 2 * n:
                    raise NumericError("preprocessing did not reach the interior of the cone")
            images = lifted.images(frontier)
            before = {id(v) for v in conitope.vertices}
            conitope = extend(conitope, images, opts.tol_member)
            frontier = [v for v in conitope.vertices if id(v) not in before]
            if not frontier:
                frontier = list(conitope.vertices)
            rounds += 1
        start_points = list(conitope.vertices)

        def on_images(images, retained, current, C=C):
            for v in retained:
                s = subproduct_scan(v.word, mset, cache, leading_only=True)
                if s.value > C * (1 + _TIE) and s.better_than(scan_best[0]):
                    scan_best[0] = s
            return None

        def starting(current):
            ids = {id(v) for v in current.vertices}
            if any(id(u) in ids for u in start_points):
                return
            d = max(gauge(current.points, u.point) for u in start_points)
            if d < 1.0 - opts.tol_member:
                log.info("starting points fell inside the conitope (D=%.6g): %s is not an SMP", d, list(cand.word))
                raise _Restart()

        try:
            conitope, exact, B, steps, _ = _main_loop(
                conitope, lifted, opts, history, clock,
                start_C=C, block=block_index, restart=restarts, on_images=on_images, starting=starting,
            )
        except _Restart:
            total_steps += history[-1].iteration if history else 0
            restarts += 1
            if restarts > opts.max_restarts:
                log.warning("restart limit reached")
                return _finish_bounds(None, lifted, mset, opts, cand, seeds, basis, total_steps, restarts, history)
            max_len += 1
            continue
        total_steps += steps
        if exact:
            block = CertBlock(
                scale=C,
                kind=lifted.kind,
                seeds=seeds,
                vertices=list(conitope.vertices),
                bound_factor=max(B, 1.0),
                basis=basis,
                smp_word=cand.word,
                smp_value=C,
            )
            return _BlockOutcome(block, C, C * math.sqrt(max(B, 1.0)), True, cand, steps, total_steps, restarts)
        return _finish_bounds(conitope, lifted, mset, opts, cand, seeds, basis, total_steps, restarts, history, steps)


def _cycle_points(start, word, lifted):
    """Images of the seeds under the proper suffixes of the candidate word.

    Suffix ``w[k:]`` maps a leading eigenvector of ``A_w`` to one of the
    rotation ``w[k:] + w[:k]``, so these points lie on the same cycle.
    """
    out = []
    for v in start:
        x = v
        for letter in reversed(word[1:]):
            x = [y for y in lifted.images([x]) if y.word[0] == letter][0]
            out.append(x)
    return out


def _finish_bounds(conitope, lifted, mset, opts, cand, seeds, basis, total_steps, restarts, history, steps=0):
    C = cand.value
    B = history[-1].B if history else math.inf
    block, upper = _bounds_only_block(conitope, lifted, mset, opts, C, B, seeds, basis, cand)
    return _BlockOutcome(block, C, upper, False, cand, steps, total_steps, restarts)


def _solve_blocks(mset, opts, history, clock, basis, outcomes, block_fn):
    try:
        out = block_fn(mset, opts, history, clock, len(outcomes), basis)
    except _Split as sp:
        split = sp.split
        log.info("common invariant subspace of dimension %d; splitting", split.dim)
        inner_basis = split.basis_S if basis is None else basis @ split.basis_S
        outer_basis = split.basis_Sperp if basis is None else basis @ split.basis_Sperp
        inner, outer = split.projected_sets
        _solve_blocks(inner, opts, history, clock, inner_basis, outcomes, block_fn)
        _solve_blocks(outer, opts, history, clock, outer_basis, outcomes, block_fn)
        return
    outcomes.append(out)


def _assemble(mset, outcomes, history, opts, algorithm, started):
    cache = RadiusCache(mset)
    smp, lower = None, 0.0
    for o in outcomes:
        if o.smp is not None and o.smp.word:
            val = cache.value(o.smp.word)
            if val > lower:
                lower, smp = val, SmpCandidate(o.smp.word, val)
    upper = max(o.upper for o in outcomes)
    upper = max(upper, lower)
    exact = all(o.exact or o.upper <= lower for o in outcomes) and upper - lower <= opts.tol_cert * (1.0 + lower)
    cert = Certificate(
        kind=EXACT if exact else BOUNDS_ONLY,
        smp_word=smp.word if smp else (),
        smp_value=smp.value if smp else 0.0,
        lower=lower,
        upper=upper,
        blocks=[o.block for o in outcomes],
        tolerances=opts.tolerances(),
        algorithm=algorithm,
    )
    return JsrResult(
        lower=lower,
        upper=upper,
        exact=exact,
        smp=smp,
        certificate=cert,
        history=history,
        steps=sum(o.steps for o in outcomes),
        total_steps=sum(o.total_steps for o in outcomes),
        restarts=sum(o.restarts for o in outcomes),
        algorithm=algorithm,
        runtime_ms=(time.perf_counter() - started) * 1e3,
    )


def _as_set(mset):
    return mset if isinstance(mset, MatrixSet) else MatrixSet(mset)


def algorithm1(mset, opts=None):
    """The conitope method.

    Returns a :class:`JsrResult`; ``result.exact`` tells whether the
    certificate proves ``rho = result.lower`` or only brackets it.
    """
    mset = _as_set(mset)
    opts = opts or Options()
    started = time.perf_counter()
    history, outcomes = [], []
    _solve_blocks(mset, opts, history, _Clock(opts.time_limit), None, outcomes, _conitope_block)
    return _assemble(mset, outcomes, history, opts, "conitope", started)


def algorithm2(mset, opts=None):
    """The dynamical procedure: start from the identity and rescale on better products."""
    mset = _as_set(mset)
    opts = opts or Options()
    started = time.perf_counter()
    clock = _Clock(opts.time_limit)
    history = []
    lifted = _Lifted(mset)
    cache = RadiusCache(mset)
    best = None
    for i in range(len(mset)):
        cand = cache.candidate((i,))
        if cand.better_than(best):
            best = cand
    if best.value <= 0.0:
        return _assemble(mset, [_zero_block(mset, opts, None, best)], history, opts, "dynamic", started)
    state = {"best": best, "C": best.value}
    lifted.rescale(best.value)
    identity = SymPoint(np.eye(mset.n), lifted.kind)
    seeds = [identity]
    conitope = Conitope([Vertex(identity, (), 0.0, 0)])

    def on_images(images, retained, current):
        top = None
        for z in images:
            s = subproduct_scan(z.word, mset, cache, leading_only=True)
            if s.better_than(top):
                top = s
        C = state["C"]
        if top is None or top.value <= C * (1 + _RESCALE_MIN):
            return None
        L = top.value / C
        C = top.value
        state["best"], state["C"] = top, C
        log.info("better product %s: C=%.15g (L=%.6g)", list(top.word), C, L)
        lifted.rescale(C)
        log_l = math.log(L)
        rescaled = [
            Vertex(v.point * L ** (-2.0 * v.length), v.word, v.scale_log - 2.0 * v.length * log_l, v.seed)
            for v in current.vertices
        ]
        return essential_system(Conitope(rescaled, current.kind), opts.tol_member), C

    conitope, exact, B, steps, C = _main_loop(
        conitope, lifted, opts, history, clock, start_C=best.value, block=0, restart=0, on_images=on_images
    )
    best = state["best"]
    if exact:
        block = CertBlock(
            scale=C,
            kind=lifted.kind,
            seeds=seeds,
            vertices=list(conitope.vertices),
            bound_factor=max(B, 1.0),
            smp_word=best.word,
            smp_value=best.value,
        )
        out = _BlockOutcome(block, C, C * math.sqrt(max(B, 1.0)), True, best, steps, steps, 0)
    else:
        block, upper = _bounds_only_block(conitope, lifted, mset, opts, C, B, seeds, None, best)
        out = _BlockOutcome(block, C, upper, False, best, steps, steps, 0)
    return _assemble(mset, [out], history, opts, "dynamic", started)
