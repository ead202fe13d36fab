"""Command line: certify, verify, oracle, export-sdpa, import-solution.

Exit codes
  certify         0 certified, 1 no certificate found, 64 usage, 65 bad data
  verify          0 accepted, 2 identity failure, 3 PSD failure,
                  4 fingerprint/convention mismatch
  oracle          0 all verdicts pass, 1 otherwise
  export-sdpa     0 written
  import-solution 0 solution consistent (and certified if requested)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .certify import (
    CertifierConfig,
    read_certificate_file,
    round_and_repair,
    serialize_certificate,
    verify_certificate,
    write_certificate_file,
)
from .encoder import SOSMode, encode
from .errors import (
    FingerprintMismatch,
    PSDFailedAfterRetries,
    RepairSingular,
    TcertError,
)
from .groups import DEFAULT_BALL_CAP, parse_presentation
from .oracle import builtin_module, cross_check
from .presets import build_complex, preset_presentation
from .resolution import parse_complex, serialize_complex
from .sdpa import export_sdpa, import_sdpa
from .solver import SolverConfig, import_solution, solve

EX_USAGE = 64
EX_DATA = 65


def _add_group_source(sub):
    sub.add_argument("--preset", help="trivial | cyclic:n | z | z2 | s3 | free:k")
    sub.add_argument("--presentation", help="presentation source file")
    sub.add_argument("--complex", dest="complex_path",
                     help="complex file (self-contained, overrides the others)")


def _add_pipeline_flags(sub):
    sub.add_argument("--mode", choices=("ozawa", "bracket", "paren"),
                     default="ozawa")
    sub.add_argument("--degree", type=int, default=None)
    sub.add_argument("--radius", type=int, default=None,
                     help="Gram half radius d (factors live in the d-ball)")
    sub.add_argument("--epsilon-cap", default=None,
                     help="upper bound for the gap variable (rational)")
    sub.add_argument("--assert-resolution", action="store_true",
                     help="accept truncated/degree>=2 targets at your own risk")
    sub.add_argument("--ball-cap", type=int, default=DEFAULT_BALL_CAP)


def _add_solver_flags(sub):
    sub.add_argument("--solver-tol", type=float, default=1e-9)
    sub.add_argument("--max-iter", type=int, default=50_000)
    sub.add_argument("--seed", type=int, default=0)


def _add_certifier_flags(sub):
    sub.add_argument("--margin", type=float, default=None,
                     help="gap retreat before rounding (default 10*residual + 1e-7)")
    sub.add_argument("--max-retries", type=int, default=8)
    sub.add_argument("--denom-bits", type=int, default=48)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcert",
        description="Sum-of-squares spectral-gap certificates over group rings, "
                    "with exact rational verification.")
    subs = parser.add_subparsers(dest="command", required=True)

    certify = subs.add_parser("certify", help="solve and certify a gap")
    _add_group_source(certify)
    _add_pipeline_flags(certify)
    _add_solver_flags(certify)
    _add_certifier_flags(certify)
    certify.add_argument("--out", default="tcert-out")

    verify = subs.add_parser("verify", help="re-verify a certificate exactly")
    verify.add_argument("certificate")
    verify.add_argument("complex_file")

    oracle = subs.add_parser("oracle", help="finite-group brute-force cross-check")
    _add_group_source(oracle)
    oracle.add_argument("--module", default="reg0",
                        choices=("trivial", "reg", "reg0", "sign"))
    oracle.add_argument("--degrees", default="0..1",
                        help="'0..2' or comma list '0,1,2'")
    oracle.add_argument("--bar-cap", type=int, default=1_000_000)
    oracle.add_argument("--ball-cap", type=int, default=DEFAULT_BALL_CAP)
    oracle.add_argument("--out", default=None,
                        help="directory for the machine-readable summary")

    export = subs.add_parser("export-sdpa", help="write the encoded problem")
    _add_group_source(export)
    _add_pipeline_flags(export)
    export.add_argument("--out", default="tcert-out")

    imp = subs.add_parser("import-solution",
                          help="recheck an externally solved problem")
    imp.add_argument("--problem", required=True)
    imp.add_argument("--solution", required=True)
    imp.add_argument("--complex", dest="complex_path", default=None,
                     help="complex file; enables certification")
    imp.add_argument("--certify", action="store_true")
    imp.add_argument("--out", default="tcert-out")
    _add_certifier_flags(imp)
    return parser


def _load_complex(args, degree: int):
    if args.complex_path:
        with open(args.complex_path) as fh:
            return parse_complex(fh.read(), args.ball_cap)
    if args.preset:
        p = preset_presentation(args.preset, args.ball_cap)
        return build_complex(p, degree, args.ball_cap)
    if args.presentation:
        with open(args.presentation) as fh:
            p = parse_presentation(fh.read(), args.ball_cap)
        return build_complex(p, degree, args.ball_cap)
    raise SystemExitUsage("one of --preset/--presentation/--complex is required")


class SystemExitUsage(Exception):
    pass


def _mode_from_args(args) -> SOSMode:
    degree = args.degree
    if degree is None:
        degree = 0 if args.mode == "ozawa" else 1
    return SOSMode(args.mode, degree)


def _slug(args, mode: SOSMode) -> str:
    base = args.preset or args.presentation or args.complex_path or "group"
    base = os.path.splitext(os.path.basename(base))[0].replace(":", "")
    return f"{base}-{mode.kind}{mode.degree}"


def cmd_certify(args) -> int:
    mode = _mode_from_args(args)
    complex_ = _load_complex(args, mode.degree)
    cap = Fraction(args.epsilon_cap) if args.epsilon_cap else None
    problem = encode(complex_, mode, half_radius=args.radius,
                     epsilon_cap=cap, assert_resolution=args.assert_resolution)
    if problem.degenerate:
        print("degenerate problem: the target vanishes identically; "
              "every gap is feasible and none is informative")
        return 1
    started = time.perf_counter()
    solver_cfg = SolverConfig(max_iterations=args.max_iter,
                              tolerance=args.solver_tol, seed=args.seed)
    sol = solve(problem, solver_cfg)
    solve_time = time.perf_counter() - started
    print(f"solver: status {sol.status}, epsilon ~ {sol.epsilon:.9g}, "
          f"{sol.iterations} iterations, residual "
          f"{sol.residuals.constraint_infnorm:.2e}")
    if not sol.converged:
        print("no certificate: the numeric solve did not converge")
        return 1
    cert_cfg = CertifierConfig(denominator_bits=args.denom_bits,
                               margin=args.margin,
                               max_retries=args.max_retries)
    try:
        cert = round_and_repair(sol, problem, cert_cfg)
    except (PSDFailedAfterRetries, RepairSingular) as exc:
        print(f"no certificate at radius {problem.half_radius}: {exc}")
        return 1
    report = verify_certificate(cert, complex_)
    if not report.accepted:
        print(f"internal error: fresh certificate failed verification "
              f"({report.first_failure})")
        return 70
    os.makedirs(args.out, exist_ok=True)
    slug = _slug(args, mode)
    cert_path = os.path.join(args.out, f"{slug}.cert")
    complex_path = os.path.join(args.out, f"{slug}.complex")
    write_certificate_file(cert, cert_path)
    with open(complex_path, "w") as fh:
        fh.write(serialize_complex(complex_))
    total = time.perf_counter() - started
    summary = [
        f"certified: {cert.describe()}",
        f"  epsilon          {cert.epsilon} (~ {float(cert.epsilon):.6g})",
        f"  mode/degree      {mode.kind} / {mode.degree}",
        f"  gram size        {cert.gram_size}",
        f"  half radius      {cert.half_radius}",
        f"  working ball     radius {cert.ball_radius_text}",
        f"  solver           {sol.iterations} iterations in {solve_time:.2f}s",
        f"  total time       {total:.2f}s",
        f"  certificate      {cert_path}",
        f"  complex          {complex_path}",
    ]
    text = "\n".join(summary)
    print(text)
    with open(os.path.join(args.out, f"{slug}.summary.txt"), "w") as fh:
        fh.write(text + "\n")
    return 0


def cmd_verify(args) -> int:
    try:
        cert = read_certificate_file(args.certificate)
        with open(args.complex_file) as fh:
            complex_ = parse_complex(fh.read())
    except (OSError, ValueError) as exc:
        print(f"cannot read inputs: {exc}")
        return EX_DATA
    print(f"verifying: {cert.describe()}")
    try:
        report = verify_certificate(cert, complex_)
    except FingerprintMismatch as exc:
        print(f"REJECTED (fingerprint): {exc}")
        return 4
    except TcertError as exc:
        print(f"REJECTED (identity cannot be formed): {exc}")
        return 2
    if not report.identity_ok:
        print(f"REJECTED (identity): {report.first_failure}")
        return 2
    if not report.psd_ok:
        print(f"REJECTED (positivity): {report.first_failure}")
        return 3
    print(f"ACCEPTED in {report.wall_time:.3f}s: exact identity holds and the "
          f"Gram matrix is positive semidefinite (epsilon = {report.epsilon})")
    return 0


def _parse_degrees(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v != ""]


def cmd_oracle(args) -> int:
    degrees = _parse_degrees(args.degrees)
    complex_ = _load_complex(args, max(degrees))
    module = builtin_module(args.module, complex_.ball)
    report = cross_check(complex_, module, degrees, args.bar_cap)
    print(report.render())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "oracle-summary.json")
        with open(path, "w") as fh:
            json.dump(report.to_summary(), fh, indent=2)
        print(f"summary written to {path}")
    return 0 if report.all_pass else 1


def cmd_export_sdpa(args) -> int:
    mode = _mode_from_args(args)
    complex_ = _load_complex(args, mode.degree)
    cap = Fraction(args.epsilon_cap) if args.epsilon_cap else None
    problem = encode(complex_, mode, half_radius=args.radius,
                     epsilon_cap=cap, assert_resolution=args.assert_resolution)
    os.makedirs(args.out, exist_ok=True)
    slug = _slug(args, mode)
    problem_path = os.path.join(args.out, f"{slug}.dat-s")
    with open(problem_path, "w") as fh:
        fh.write(export_sdpa(problem))
    complex_path = os.path.join(args.out, f"{slug}.complex")
    with open(complex_path, "w") as fh:
        fh.write(serialize_complex(complex_))
    print(f"problem written to {problem_path}")
    print(f"complex written to {complex_path}")
    return 0


def cmd_import_solution(args) -> int:
    try:
        with open(args.problem) as fh:
            problem = import_sdpa(fh.read())
        with open(args.solution) as fh:
            sol_text = fh.read()
    except OSError as exc:
        print(f"cannot read inputs: {exc}")
        return EX_DATA
    sol = import_solution(problem, sol_text)
    print(f"imported solution: status {sol.status}, epsilon ~ {sol.epsilon:.9g}, "
          f"constraint residual {sol.residuals.constraint_infnorm:.2e}, "
          f"PSD violation {sol.residuals.psd_violation:.2e}")
    if not args.certify:
        return 0 if sol.converged else 1
    if not args.complex_path:
        print("--certify needs --complex")
        return EX_USAGE
    with open(args.complex_path) as fh:
        complex_ = parse_complex(fh.read())
    cert_cfg = CertifierConfig(denominator_bits=args.denom_bits,
                               margin=args.margin,
                               max_retries=args.max_retries)
    try:
        cert = round_and_repair(sol, problem, cert_cfg)
    except (PSDFailedAfterRetries, RepairSingular, ValueError) as exc:
        print(f"no certificate: {exc}")
        return 1
    report = verify_certificate(cert, complex_)
    if not report.accepted:
        print(f"certificate failed verification: {report.first_failure}")
        return 1
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "imported.cert")
    write_certificate_file(cert, path)
    print(f"certified: {cert.describe()}")
    print(f"certificate written to {path}")
    return 0


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; normalize to EX_USAGE
        return EX_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "certify":
            return cmd_certify(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        if args.command == "export-sdpa":
            return cmd_export_sdpa(args)
        if args.command == "import-solution":
            return cmd_import_solution(args)
        raise SystemExitUsage(f"unknown command {args.command}")
    except SystemExitUsage as exc:
        print(f"usage error: {exc}")
        return EX_USAGE
    except FileNotFoundError as exc:
        print(f"missing file: {exc}")
        return EX_USAGE
    except TcertError as exc:
        print(f"error: {exc}")
        return EX_DATA
    except ValueError as exc:
        print(f"error: {exc}")
        return EX_DATA


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
