"""Acceptance criteria; each test prints one pass/fail line (repeated in the run summary)."""

import json
import time

import numpy as np
import pytest

from conijsr.bounds import brute_force_bounds
from conijsr.cli import main
from conijsr.conitope import Conitope, contains, norm
from conijsr.engine import Options, algorithm1, algorithm2
from conijsr.lift import lift_operator, lift_vector, lifted_matrix_set
from conijsr.matrix_core import MatrixSet, cyclic_canonical, leading_eigenpair, spectral_radius
from conijsr.sdp import OPTIMAL, solve_norm_program

from conftest import fixture_path, load, random_psd, record, run_conitope
import test_conitope

REF_EX1 = 1.779
REF_EX2 = 2.2401
REF_EX2_WORD = (0, 0, 1, 0, 1)
BCP_EX1_VERTICES = 16


def _cli(capsys, *args):
    code = main([str(a) for a in args])
    return code, capsys.readouterr().out


def test_criterion_01_example1_value(capsys, tmp_path):
    rep = tmp_path / "r.json"
    t0 = time.perf_counter()
    code, out = _cli(capsys, "compute", fixture_path("ex1"), "--algorithm", "conitope", "--out", rep)
    elapsed = time.perf_counter() - t0
    doc = json.loads(rep.read_text())
    rho = spectral_radius(load("ex1")[1])
    value = doc["lower"]
    checks = {
        "exit 0": code == 0,
        "exact": doc["exact"],
        "|value - rho(A2)| <= 1e-6 rho(A2)": abs(value - rho) <= 1e-6 * rho,
        "rho(A2) matches the reference 1.779 to 3 decimals": round(rho, 3) == REF_EX1,
        "runtime < 10 s": elapsed < 10.0,
    }
    failed = record(1, checks, f"value={value!r} rho(A2)={rho!r} round3={round(rho, 3)} reference={REF_EX1} {elapsed:.2f}s")
    assert not failed


def test_criterion_02_example1_shape():
    res = run_conitope("ex1")
    checks = {
        "exact": res.exact,
        "steps <= 6": res.steps <= 6,
        f"vertices <= {BCP_EX1_VERTICES}": res.vertex_count <= BCP_EX1_VERTICES,
    }
    failed = record(2, checks, f"steps={res.steps} (reference 2) vertices={res.vertex_count} (reference 7)")
    assert not failed


def test_criterion_03_example2():
    res = run_conitope("ex2")
    word = res.smp.word if res.smp else ()
    checks = {
        "exact": res.exact,
        "|value - 2.2401| <= 1e-3": abs(res.lower - REF_EX2) <= 1e-3,
        "SMP in the class of A1A1A2A1A2": cyclic_canonical(word) == cyclic_canonical(REF_EX2_WORD),
        "steps <= 20": res.steps <= 20,
        "runtime < 60 s": res.runtime_ms < 60e3,
    }
    failed = record(
        3,
        checks,
        f"value={res.lower!r} smp={list(word)} steps={res.steps} (reference 8) "
        f"vertices={res.vertex_count} (reference 10) {res.runtime_ms / 1e3:.1f}s",
    )
    assert not failed


def test_criterion_04_example3_non_invariance():
    a1, a2 = load("ex3")
    p = a1 @ a2
    eig = leading_eigenpair(p)
    x = np.real(eig.leading_vector)
    assert np.allclose(np.imag(eig.leading_vector), 0)
    # A_i' = A_i / rho(P) as listed
    s1, s2 = a1 / eig.spectral_radius, a2 / eig.spectral_radius
    v1 = x
    v2 = s1 @ v1
    v3 = s2 @ v1
    v4 = s2 @ v2
    v5 = s2 @ v3
    v6 = s1 @ v5
    c = Conitope([lift_vector(v) for v in (v1, v2, v3, v4, v5, v6)])
    w = lift_operator(s2).rep @ lift_vector(v2).svec()
    from conijsr.lift import smat

    w = smat(w, 3)
    value = norm(c, w)
    inside = contains(c, w)
    checks = {"contains(conitope, w) is false": not inside, "norm > 1 + 1e-6": value > 1 + 1e-6}
    failed = record(4, checks, f"norm of w = {value!r}; w equals the lift of v4, a vertex")
    assert not failed


def test_criterion_05_square_law():
    rng = np.random.default_rng(505)
    worst_sets, worst_single = 0.0, 0.0
    ok_sets = ok_single = True
    for _ in range(50):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        mats = rng.standard_normal((m, n, n))
        if rng.random() < 0.3:
            mats = mats + 1j * rng.standard_normal((m, n, n))
        mset = MatrixSet(list(mats))
        lo = brute_force_bounds(mset, 4).lower
        lifted_lo = brute_force_bounds(lifted_matrix_set(mset), 4).lower
        err = abs(lifted_lo - lo**2)
        worst_sets = max(worst_sets, err / (1 + lo**2))
        ok_sets &= err <= 1e-6 * (1 + lo**2)
        for a in mset:
            r = spectral_radius(a)
            rel = abs(spectral_radius(lift_operator(a, "hermitian" if mset.is_complex else "real-symmetric").rep) - r**2) / r**2
            worst_single = max(worst_single, rel)
            ok_single &= rel <= 1e-8
    checks = {"depth-4 lifted lower = lower^2": ok_sets, "rho(lift A) = rho(A)^2": ok_single}
    failed = record(5, checks, f"worst set error {worst_sets:.2e}, worst single-matrix error {worst_single:.2e}")
    assert not failed


def test_criterion_06_sandwich_and_oracle():
    rng = np.random.default_rng(606)
    cases = [(name, load(name), run_conitope(name)) for name in ("ex1", "ex2", "ex3")]
    for k in range(8):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 4))
        mset = MatrixSet(list(rng.standard_normal((m, n, n))))
        cases.append((f"random{k}", mset, algorithm1(mset)))
    bad_iter, bad_oracle = [], []
    for name, mset, res in cases:
        if any(s.C > s.Y + 1e-9 for s in res.history):
            bad_iter.append(name)
        if Options().max_smp_len >= 4 and res.lower < brute_force_bounds(mset, 4).lower - 1e-8:
            bad_oracle.append(name)
    checks = {"C <= Y + 1e-9 at every iteration": not bad_iter, "final C >= depth-4 lower - 1e-8": not bad_oracle}
    failed = record(6, checks, f"{len(cases)} sets, {sum(len(r.history) for _, _, r in cases)} iterations")
    assert not failed


def _grid_norm(us, x, step=1e-3):
    """Minimum over convex weights on a grid of the least t with t * sum(l u) >= x (n = 2)."""
    k = int(round(1 / step))
    if len(us) == 1:
        lam = np.ones((1, 1))
    elif len(us) == 2:
        a = np.arange(k + 1) / k
        lam = np.stack([a, 1 - a], axis=1)
    else:
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        keep = i + j <= k
        a, b = i[keep] / k, j[keep] / k
        lam = np.stack([a, b, 1 - a - b], axis=1)
    g = np.einsum("pl,lab->pab", lam, np.stack(us))
    det_g = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
    cross = x[0, 0] * g[:, 1, 1] + x[1, 1] * g[:, 0, 0] - 2 * x[0, 1] * g[:, 0, 1]
    det_x = x[0, 0] * x[1, 1] - x[0, 1] ** 2
    disc = np.sqrt(np.maximum(cross**2 - 4 * det_g * det_x, 0.0))
    ok = det_g > 1e-12
    t = (cross[ok] + disc[ok]) / (2 * det_g[ok])
    return float(t.min())


def test_criterion_07_solver_duality():
    rng = np.random.default_rng(707)
    worst_gap = 0.0
    ok_gap = True
    for _ in range(200):
        if rng.random() < 0.7:
            n, cplx = int(rng.integers(2, 6)), False
        else:
            n, cplx = int(rng.integers(2, 4)), True
        l = int(rng.integers(1, 11))
        us = [random_psd(rng, n, rank=int(rng.integers(1, n + 1)), complex_=cplx) for _ in range(l - 1)]
        us.append(random_psd(rng, n, complex_=cplx))
        x = random_psd(rng, n, rank=int(rng.integers(1, n + 1)), complex_=cplx)
        sol = solve_norm_program(us, x)
        gap = abs(sol.objective - sol.dual_objective)
        worst_gap = max(worst_gap, gap / (1 + sol.objective))
        ok_gap &= sol.status == OPTIMAL and gap <= 1e-7 * (1 + sol.objective)
    worst_grid = 0.0
    ok_grid = True
    for _ in range(30):
        l = int(rng.integers(1, 4))
        us = [random_psd(rng, 2) for _ in range(l)]
        x = random_psd(rng, 2, rank=int(rng.integers(1, 3)))
        ours = solve_norm_program(us, x).objective
        grid = _grid_norm(us, x)
        rel = abs(ours - grid) / (1 + ours)
        worst_grid = max(worst_grid, rel)
        ok_grid &= rel <= 2e-3 and ours <= grid * (1 + 1e-8)
    checks = {"primal/dual agree within 1e-7": ok_gap, "grid oracle within 2e-3": ok_grid}
    failed = record(7, checks, f"worst duality gap {worst_gap:.2e}, worst grid deviation {worst_grid:.2e}")
    assert not failed


def test_criterion_08_certificate_mutations(capsys, tmp_path):
    certs = {}
    verified = {}
    for name in ("ex1", "ex2", "ex3"):
        res = run_conitope(name)
        if not res.exact:
            continue
        path = tmp_path / f"{name}.cert.json"
        from conijsr import io

        io.emit_certificate(res.certificate, path, n=load(name).n)
        certs[name] = path
        verified[name] = _cli(capsys, "verify", path, fixture_path(name))[0]
    rng = np.random.default_rng(808)
    codes = []
    names = [n for n in ("ex1", "ex3") if n in certs]
    for k in range(20):
        name = names[k % len(names)]
        doc = json.loads(certs[name].read_text())
        block = doc["blocks"][0]
        v = block["vertices"][int(rng.integers(len(block["vertices"])))]
        j = int(rng.integers(len(v["svec"])))
        v["svec"][j] += 1e-3 * (1 if rng.random() < 0.5 else -1)
        path = tmp_path / f"mut{k}.json"
        path.write_text(json.dumps(doc))
        codes.append(_cli(capsys, "verify", path, fixture_path(name))[0])
    checks = {
        "every exact certificate verifies (exit 0)": bool(verified) and all(c == 0 for c in verified.values()),
        "20 perturbations all rejected (exit 1)": codes == [1] * 20,
    }
    failed = record(8, checks, f"verified {sorted(verified)}; mutation exits {sorted(set(codes))}")
    assert not failed


def _irreducible_pair(rng):
    while True:
        a, b = rng.standard_normal((2, 2, 2))
        comm = a @ b - b @ a
        if abs(np.linalg.det(comm)) > 1e-3:
            return a, b


def test_criterion_09_cross_algorithm():
    rows, ok = [], True
    limits = {"ex1": 20.0, "ex2": 20.0}
    for name in ("ex1", "ex2"):
        r1 = run_conitope(name)
        r2 = algorithm2(load(name), Options(time_limit=limits[name], max_iters=400))
        agree = r1.exact and r2.exact and abs(r1.lower - r2.lower) <= 1e-6 * r1.lower
        ok &= agree
        rows.append(f"{name}: alg1 exact={r1.exact} alg2 exact={r2.exact} after {r2.steps} steps, gap {r2.upper / r2.lower - 1:.1e}")
    rng = np.random.default_rng(909)
    pairs_ok = 0
    for _ in range(10):
        a, b = _irreducible_pair(rng)
        lo = brute_force_bounds(MatrixSet([a, b]), 6).lower
        mset = MatrixSet([a / lo, b / lo])
        r1 = algorithm1(mset)
        r2 = algorithm2(mset, Options(time_limit=20.0))
        if r1.exact and r2.exact and abs(r1.lower - r2.lower) <= 1e-6 * r1.lower:
            pairs_ok += 1
    rows.append(f"random pairs agreeing: {pairs_ok}/10")
    checks = {"Examples 1-2 agree exactly": ok, "10 random pairs agree exactly": pairs_ok == 10}
    failed = record(9, checks, "; ".join(rows))
    assert not failed


def test_criterion_10_conitope_properties():
    rng = np.random.default_rng(1010)
    instances = 500
    done = 0
    try:
        for _ in range(instances):
            c, n, cplx = test_conitope.random_conitope(rng)
            test_conitope.check_norm_axioms(rng, c, n, cplx)
            test_conitope.check_pruning(rng, c, n, cplx)
            done += 1
        # one conitope against the full 100-probe pruning check
        c, n, cplx = test_conitope.random_conitope(rng)
        test_conitope.check_pruning(rng, c, n, cplx, probes=100)
    except AssertionError:
        record(10, {"norm axioms and pruning properties": False}, f"failed at instance {done}")
        raise
    record(10, {"norm axioms and pruning properties": True}, f"{instances} instances; suite time checked at session end")
