"""Command-line interface: ``jsr bounds|compute|verify|lift``.

Exit codes: 0 success (exact or valid), 1 bounds only (compute) or invalid
certificate (verify), 2 input error, 3 budget exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import io
from .bounds import PRODUCT_BUDGET, brute_force_bounds
from .certificate import TOL_CERT, verify_certificate
from .engine import Options, algorithm1, algorithm2
from .errors import BudgetError, InputError, NumericError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


def _configure_logging():
    level = os.environ.get("JSR_LOG", "").strip().lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO}
    logging.basicConfig(
        level=levels.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def cmd_bounds(args):
    mset = io.parse_problem(args.file)
    if args.depth < 1:
        raise InputError("--depth must be at least 1")
    m = len(mset)
    required = sum(m**k for k in range(1, args.depth + 1))
    if required > PRODUCT_BUDGET:
        raise BudgetError(
            f"depth {args.depth} needs {required} products, over the product budget of {PRODUCT_BUDGET}",
            budget=PRODUCT_BUDGET,
            required=required,
        )
    started = time.perf_counter()
    bounds = brute_force_bounds(mset, args.depth)
    doc = io.bounds_report(bounds, args.depth, (time.perf_counter() - started) * 1e3)
    sys.stdout.write(io.emit_report(doc))
    return EXIT_OK


def cmd_compute(args):
    mset = io.parse_problem(args.file)
    opts = Options()
    if args.max_smp_len is not None:
        opts.max_smp_len = args.max_smp_len
    if args.max_iters is not None:
        opts.max_iters = args.max_iters
    if args.tol is not None:
        if not args.tol > 0:
            raise InputError("--tol must be positive")
        opts.tol_B = args.tol
        opts.tol_cert = max(TOL_CERT, args.tol)
    opts.__post_init__()
    run = algorithm1 if args.algorithm == "conitope" else algorithm2
    result = run(mset, opts)
    cert_ref = None
    if args.cert:
        io.emit_certificate(result.certificate, args.cert, n=mset.n)
        cert_ref = args.cert
    if args.out:
        io.emit_report(io.report_to_dict(result, cert_ref, n=mset.n), args.out)
    print(result.summary())
    return EXIT_OK if result.exact else EXIT_FAIL


def cmd_verify(args):
    cert, n = io.parse_certificate(args.cert)
    mset = io.parse_problem(args.problem)
    if n is not None and n != mset.n:
        raise InputError(f"certificate is for n={n} but the problem has n={mset.n}")
    for i, b in enumerate(cert.blocks):
        dim = mset.n if b.basis is None else b.basis.shape[0]
        if dim != mset.n:
            raise InputError(f"blocks[{i}]: basis has {dim} rows but the problem has n={mset.n}")
    report = verify_certificate(cert, mset)
    if report:
        print(f"certificate valid: {cert.kind}, JSR in [{cert.lower!r}, {cert.upper!r}], "
              f"{report.checked_images} images checked")
        return EXIT_OK
    print(f"certificate invalid: {len(report.violations)} violation(s)")
    for v in report.violations:
        print(f"  [{v['check']}] {v['message']}")
    return EXIT_FAIL


def cmd_lift(args):
    mset = io.parse_problem(args.file)
    text = io.emit_report(io.lifted_to_dict(mset), args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="jsr", description="Joint spectral radius via lifted conitopes.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="brute-force sandwich bounds")
    b.add_argument("file")
    b.add_argument("--depth", type=int, default=4)
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("compute", help="run a conitope algorithm")
    c.add_argument("file")
    c.add_argument("--algorithm", choices=("conitope", "dynamic"), default="conitope")
    c.add_argument("--max-smp-len", type=int)
    c.add_argument("--max-iters", type=int)
    c.add_argument("--tol", type=float)
    c.add_argument("--out", help="write the JSON report here")
    c.add_argument("--cert", help="write the certificate here")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="re-verify a certificate")
    v.add_argument("cert")
    v.add_argument("problem")
    v.set_defaults(func=cmd_verify)

    lf = sub.add_parser("lift", help="emit the lifted operators")
    lf.add_argument("file")
    lf.add_argument("--out")
    lf.set_defaults(func=cmd_lift)
    return p


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
