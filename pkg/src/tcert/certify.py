"""Exact rational certificates from numeric Gram solutions, and their re-verification.

The pipeline rounds the numeric gap down with a safety margin, rounds the
Gram matrix onto a dyadic grid, repairs the constraints exactly by an
underdetermined rational solve, and then insists on an exact semidefinite
LDL^T.  Verification recomputes the target from the complex from scratch
and never touches floating point, so an accepted certificate is a proof.
"""

from __future__ import annotations

import gzip
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .encoder import (
    CONVENTION,
    SOSMode,
    SOSProblem,
    build_support_basis,
    expand_gram,
    prepare_encoding,
    target_matrix,
)
from .errors import FingerprintMismatch, PSDFailedAfterRetries
from .exactla import ldl_decompose, solve_min_norm
from .resolution import ChainComplexData
from .ring import GroupRingElement, GroupRingMatrix

ZERO = Fraction(0)


@dataclass
class CertifierConfig:
    denominator_bits: int = 48
    margin: Optional[float] = None     # default: 10 * residual + 1e-7
    max_retries: int = 8


@dataclass
class Certificate:
    mode: SOSMode
    epsilon: Fraction
    gram: list[list[Fraction]]
    gram_size: int
    module_rank: int
    half_radius: int
    ball_radius_text: str
    basis_entries: list[tuple[int, int]]
    complex_fingerprint: str
    convention: str = CONVENTION

    def describe(self) -> str:
        return self.mode.describe(self.epsilon)


@dataclass
class VerificationReport:
    identity_ok: bool
    psd_ok: bool
    epsilon: Fraction
    first_failure: str = ""
    wall_time: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.identity_ok and self.psd_ok


@dataclass
class RepairDiagnostics:
    epsilon_candidates: list[Fraction]
    failure_indices: list[int]


def _round_to_grid(value: float, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(int(round(value * scale)), scale)


def _floor_to_grid(value: float, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.floor(value * scale), scale)


def _clip_psd(gram):
    import numpy as np

    sym = (gram + gram.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def _constraint_rows(problem: SOSProblem):
    """Sparse rows over unordered-pair variable ids, plus the id map."""
    n = problem.gram_size
    var_id = {}
    for p in range(n):
        for q in range(p, n):
            var_id[(p, q)] = len(var_id)
    rows = []
    for con in problem.constraints:
        rows.append({var_id[(p, q)]: coeff for p, q, coeff in con.coeffs})
    pairs = list(var_id)
    return rows, pairs


def _residuals(problem: SOSProblem, gram, epsilon: Fraction):
    out = []
    for con in problem.constraints:
        lhs = sum((coeff * gram[p][q] for p, q, coeff in con.coeffs), ZERO)
        out.append(con.c0 + epsilon * con.c1 - lhs)
    return out


def _order_unit_gram(problem: SOSProblem):
    """PSD Gram matrix U with expansion(U) equal to the epsilon direction.

    bracket: the identity diagonal (sum_j e*e = Id).  ozawa: generator
    diagonal, since sum_{s in S} (s-e)*(s-e) = lap0.  paren: one rank-one
    block per module row built from the coefficients of lap0 over the
    ideal basis, since lap0* lap0 = lap0^2.
    """
    n = problem.gram_size
    unit = [[ZERO] * n for _ in range(n)]
    entries = problem.basis.entries
    kind = problem.mode.kind
    if kind == "bracket":
        for p, e in enumerate(entries):
            if e.ball_index == 0:
                unit[p][p] += 1
        return unit
    ball = problem.ball
    if ball is None:
        raise ValueError("order-unit retreat needs a live ball")
    pres = ball.presentation
    gen_indices = []
    for i in range(pres.n_gens):
        gen_indices.append(ball.index_of(pres.backend.generator(i)))
    if kind == "ozawa":
        pos = {e.ball_index: p for p, e in enumerate(entries)}
        for g in gen_indices:
            p = pos[g]
            unit[p][p] += 1
        return unit
    # paren: coefficient vector of lap0 = -sum_{s in S u S^-1} (s - e)
    rows = problem.module_rank
    by_row: dict[int, dict[int, int]] = {j: {} for j in range(rows)}
    for p, e in enumerate(entries):
        by_row[e.module_row][e.ball_index] = p
    for j in range(rows):
        coeffs: dict[int, Fraction] = {}
        for g in gen_indices:
            for idx in (g, ball.inverse_index[g]):
                p = by_row[j][idx]
                coeffs[p] = coeffs.get(p, ZERO) - 1
        for p, vp in coeffs.items():
            for q, vq in coeffs.items():
                unit[p][q] += vp * vq
    return unit


def round_and_repair(sol, problem: SOSProblem,
                     cfg: CertifierConfig | None = None) -> Certificate:
    """Turn a converged numeric solution into an exactly verified certificate.

    Raises RepairSingular on structural rank defects and
    PSDFailedAfterRetries when no retreated gap stays exactly PSD.
    """
    cfg = cfg or CertifierConfig()
    if not sol.converged:
        raise ValueError(f"solver status is {sol.status}, need Converged")
    if problem.degenerate:
        raise PSDFailedAfterRetries(
            "degenerate problem: the target vanishes identically, "
            "every epsilon is feasible and none is informative")

    residual = max(sol.residuals.constraint_infnorm, sol.residuals.psd_violation)
    margin = cfg.margin if cfg.margin is not None else 10.0 * residual + 1e-7
    eps0 = _floor_to_grid(sol.epsilon - margin, cfg.denominator_bits)
    if eps0 > problem.epsilon_cap:
        eps0 = Fraction(problem.epsilon_cap)
    if eps0 <= 0:
        raise PSDFailedAfterRetries(
            f"no positive gap to certify: numeric epsilon {sol.epsilon!r} "
            f"minus margin {margin!r} is not positive")

    bits = cfg.denominator_bits
    clipped = _clip_psd(sol.gram)
    n = problem.gram_size
    base = [[_round_to_grid(float(clipped[i, j]), bits) for j in range(n)]
            for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            base[j][i] = base[i][j]

    rows, pairs = _constraint_rows(problem)
    unit = _order_unit_gram(problem)
    diagnostics = RepairDiagnostics([], [])

    def emit(gram, epsilon):
        return Certificate(
            mode=problem.mode,
            epsilon=epsilon,
            gram=gram,
            gram_size=n,
            module_rank=problem.module_rank,
            half_radius=problem.half_radius,
            ball_radius_text=problem.ball_radius_text,
            basis_entries=[(e.ball_index, e.module_row)
                           for e in problem.basis.entries],
            complex_fingerprint=problem.complex_fingerprint,
        )

    def repaired_at(epsilon):
        gram = [row[:] for row in base]
        rhs = _residuals(problem, gram, epsilon)
        correction = solve_min_norm(rows, rhs)
        for vid, delta in correction.items():
            p, q = pairs[vid]
            gram[p][q] += delta
            if p != q:
                gram[q][p] += delta
        assert all(r == 0 for r in _residuals(problem, gram, epsilon)), \
            "repair must zero every constraint residual"
        return gram

    anchor = repaired_at(eps0)
    ldl = ldl_decompose(anchor)
    diagnostics.epsilon_candidates.append(eps0)
    diagnostics.failure_indices.append(-1 if ldl.ok else ldl.failure_index)
    if ldl.ok:
        return emit(anchor, eps0)

    epsilon = eps0
    for _ in range(1, max(cfg.max_retries, 1)):
        epsilon = epsilon / 2
        candidate = repaired_at(epsilon)
        ldl = ldl_decompose(candidate)
        diagnostics.epsilon_candidates.append(epsilon)
        diagnostics.failure_indices.append(-1 if ldl.ok else ldl.failure_index)
        if ldl.ok:
            return emit(candidate, epsilon)
        # absorb the retreat into the order unit: the anchor satisfies the
        # identity at eps0 exactly, so anchor + (eps0 - eps) U satisfies it
        # at eps and is strictly more positive
        delta = eps0 - epsilon
        shifted = [[anchor[i][j] + delta * unit[i][j] for j in range(n)]
                   for i in range(n)]
        assert all(r == 0 for r in _residuals(problem, shifted, epsilon)), \
            "order-unit retreat must preserve the exact identity"
        ldl = ldl_decompose(shifted)
        diagnostics.failure_indices[-1] = -1 if ldl.ok else ldl.failure_index
        if ldl.ok:
            return emit(shifted, epsilon)
    raise PSDFailedAfterRetries(
        "exact PSD check failed for every retreated gap; "
        f"candidates {[str(e) for e in diagnostics.epsilon_candidates]}, "
        f"first bad pivots {diagnostics.failure_indices}")


def verify_certificate(cert: Certificate,
                       c: ChainComplexData) -> VerificationReport:
    """Recompute the target from the complex and check the exact identity + PSD.

    Independent of the solver: only exact rational arithmetic is used.
    """
    start = time.perf_counter()
    if cert.complex_fingerprint != c.fingerprint():
        raise FingerprintMismatch(
            "certificate was issued for a different complex")
    if cert.convention != CONVENTION:
        raise FingerprintMismatch(
            f"certificate convention {cert.convention!r} does not match "
            f"this build's convention")

    def report(identity_ok, psd_ok, failure=""):
        return VerificationReport(
            identity_ok, psd_ok, cert.epsilon, failure,
            time.perf_counter() - start)

    if cert.epsilon <= 0:
        return report(False, False, "epsilon must be positive")

    ctx = prepare_encoding(c, cert.mode, cert.half_radius,
                           assert_resolution=True)
    basis = build_support_basis(ctx.ball, cert.mode, ctx.module_rank,
                                cert.half_radius)
    derived = [(e.ball_index, e.module_row) for e in basis.entries]
    if derived != list(cert.basis_entries) or len(derived) != cert.gram_size:
        return report(False, False, "basis does not match the complex")
    if ctx.ball.radius_text() != cert.ball_radius_text:
        return report(False, False, "working ball radius mismatch")

    n = cert.gram_size
    gram = cert.gram
    if len(gram) != n or any(len(row) != n for row in gram):
        return report(False, False, "gram matrix shape mismatch")
    for i in range(n):
        for j in range(i + 1, n):
            if gram[i][j] != gram[j][i]:
                return report(False, False, f"gram not symmetric at ({i},{j})")

    expansion = expand_gram(ctx.ball, basis, gram)
    target = target_matrix(ctx, cert.epsilon)
    m = ctx.module_rank
    for i in range(m):
        for j in range(m):
            got = expansion.entries[i][j]
            want = target.entries[i][j]
            if got != want:
                keys = set(got.coeffs) | set(want.coeffs)
                g = min(k for k in keys
                        if got.coeffs.get(k, ZERO) != want.coeffs.get(k, ZERO))
                return report(
                    False, False,
                    f"identity fails at block ({i},{j}), element g[{g}]")

    ldl = ldl_decompose(gram)
    if not ldl.ok:
        return report(True, False, f"pivot {ldl.failure_index}")
    return report(True, True)


def extract_factors(cert: Certificate, c: ChainComplexData):
    """Exact (pivot, row) pairs with sum pivot_i y_i* y_i equal to the target.

    Each y_i is a 1 x m row over the group ring; the pivot carries the
    square of the eliminated scale so everything stays rational.
    """
    ctx = prepare_encoding(c, cert.mode, cert.half_radius,
                           assert_resolution=True)
    basis = build_support_basis(ctx.ball, cert.mode, ctx.module_rank,
                                cert.half_radius)
    ldl = ldl_decompose(cert.gram)
    if not ldl.ok:
        raise ValueError("certificate gram matrix is not PSD")
    ball = ctx.ball
    m = ctx.module_rank
    factors = []
    n = cert.gram_size
    for i in range(n):
        if ldl.pivots[i] == 0:
            continue
        row_elems = []
        for j in range(m):
            coeffs: dict[int, Fraction] = {}
            for p in range(n):
                weight = ldl.lower[p][i]
                if weight == 0 or basis.entries[p].module_row != j:
                    continue
                w = basis.element(ball, p)
                for g, v in w.coeffs.items():
                    nv = coeffs.get(g, ZERO) + weight * v
                    if nv:
                        coeffs[g] = nv
                    else:
                        del coeffs[g]
            row_elems.append(GroupRingElement(ball, coeffs))
        factors.append((ldl.pivots[i],
                        GroupRingMatrix(ball, [row_elems], 1, m)))
    return factors


def retreat_certificate(cert: Certificate, new_epsilon: Fraction,
                        c: ChainComplexData) -> Certificate:
    """Retreat a bracket-mode certificate to a smaller gap.

    The difference is absorbed by the identity-basis diagonal, which is the
    order unit of the plain-ball Gram ansatz.
    """
    if cert.mode.kind != "bracket":
        raise ValueError("constructive retreat is implemented for bracket mode")
    if not 0 < new_epsilon < cert.epsilon:
        raise ValueError("retreat target must lie strictly between 0 and epsilon")
    delta = cert.epsilon - new_epsilon
    gram = [row[:] for row in cert.gram]
    hits = 0
    for p, (ball_index, _row) in enumerate(cert.basis_entries):
        if ball_index == 0:
            gram[p][p] += delta
            hits += 1
    if hits != cert.module_rank:
        raise ValueError("identity basis entries missing from the basis")
    return Certificate(
        mode=cert.mode, epsilon=new_epsilon, gram=gram,
        gram_size=cert.gram_size, module_rank=cert.module_rank,
        half_radius=cert.half_radius, ball_radius_text=cert.ball_radius_text,
        basis_entries=list(cert.basis_entries),
        complex_fingerprint=cert.complex_fingerprint,
        convention=cert.convention)


# ---------------------------------------------------------------------------
# Certificate files: canonical key-value header, gram rows, basis block.
# ---------------------------------------------------------------------------


def serialize_certificate(cert: Certificate) -> str:
    lines = ["tcert-certificate 1"]
    lines.append(f"mode: {cert.mode.kind}")
    lines.append(f"degree: {cert.mode.degree}")
    lines.append(f"gram-size: {cert.gram_size}")
    lines.append(f"module-rank: {cert.module_rank}")
    lines.append(f"half-radius: {cert.half_radius}")
    lines.append(f"ball-radius: {cert.ball_radius_text}")
    lines.append(f"epsilon: {cert.epsilon}")
    lines.append(f"convention: {cert.convention}")
    lines.append(f"complex-fingerprint: {cert.complex_fingerprint}")
    lines.append("gram:")
    for i in range(cert.gram_size):
        lines.append(" ".join(str(cert.gram[i][j]) for j in range(i + 1)))
    lines.append("basis:")
    for ball_index, row in cert.basis_entries:
        lines.append(f"{ball_index} {row}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> Certificate:
    lines = text.splitlines()
    if not lines or lines[0] != "tcert-certificate 1":
        raise ValueError("not a certificate file")
    fields = {}
    i = 1
    while i < len(lines) and lines[i] != "gram:":
        key, _, value = lines[i].partition(":")
        fields[key.strip()] = value.strip()
        i += 1
    if i == len(lines):
        raise ValueError("missing gram block")
    i += 1
    n = int(fields["gram-size"])
    gram = [[ZERO] * n for _ in range(n)]
    for r in range(n):
        parts = lines[i].split()
        if len(parts) != r + 1:
            raise ValueError(f"gram row {r} has {len(parts)} entries")
        for j, part in enumerate(parts):
            value = Fraction(part)
            gram[r][j] = value
            gram[j][r] = value
        i += 1
    if lines[i] != "basis:":
        raise ValueError("missing basis block")
    i += 1
    basis_entries = []
    while i < len(lines) and lines[i] != "end":
        a, b = lines[i].split()
        basis_entries.append((int(a), int(b)))
        i += 1
    if i == len(lines):
        raise ValueError("missing end marker")
    mode = SOSMode(fields["mode"], int(fields["degree"]))
    return Certificate(
        mode=mode,
        epsilon=Fraction(fields["epsilon"]),
        gram=gram,
        gram_size=n,
        module_rank=int(fields["module-rank"]),
        half_radius=int(fields["half-radius"]),
        ball_radius_text=fields["ball-radius"],
        basis_entries=basis_entries,
        complex_fingerprint=fields["complex-fingerprint"],
        convention=fields["convention"],
    )


def write_certificate_file(cert: Certificate, path: str):
    data = serialize_certificate(cert)
    if str(path).endswith(".gz"):
        with gzip.open(path, "wt") as fh:
            fh.write(data)
    else:
        with open(path, "w") as fh:
            fh.write(data)


def read_certificate_file(path: str) -> Certificate:
    if str(path).endswith(".gz"):
        with gzip.open(path, "rt") as fh:
            return parse_certificate(fh.read())
    with open(path) as fh:
        return parse_certificate(fh.read())
