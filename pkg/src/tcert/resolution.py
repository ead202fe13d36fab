"""Truncated free resolutions over the group ring and their Laplace operators.

Degree-2 truncations come from Fox calculus on a finite presentation;
cyclic groups get the standard periodic resolution to any depth; higher
differentials can be attached explicitly (they are validated against
d.d = 0).  The Laplacian in degree k is d_k* d_k + d_{k+1} d_{k+1}*, a
self-adjoint matrix over the group ring.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import NotAComplex, RadiusTooSmall, ShapeMismatch
from .groups import Ball, FreeWord, Presentation, enumerate_ball, parse_presentation
from .ring import (
    GroupRingElement,
    GroupRingMatrix,
    augmentation,
    gr_add,
    gr_mul,
    gr_star,
    mat_add,
    mat_mul,
    mat_reindex,
    mat_star,
    parse_element,
    serialize_element,
)

ORIGIN_PRESENTATION = "PresentationComplex"
ORIGIN_CYCLIC = "CyclicPeriodic"
ORIGIN_USER = "UserSupplied"


@dataclass
class ChainComplexData:
    """Ranks and differentials of a truncated based free resolution.

    ``differentials[k]`` is the m_{k-1} x m_k matrix of d_k for 1 <= k <= K.
    Composition uses the column convention of :mod:`tcert.ring`, under which
    d_k . d_{k+1} = 0 holds exactly.
    """

    presentation: Presentation
    ball: Ball
    ranks: list[int]
    differentials: dict[int, GroupRingMatrix]
    origin: str

    def __post_init__(self):
        if not self.ranks or self.ranks[0] != 1:
            raise ShapeMismatch("ranks must start with m_0 = 1")
        for k, d in sorted(self.differentials.items()):
            if k < 1 or k >= len(self.ranks):
                raise ShapeMismatch(f"differential d_{k} outside rank range")
            if (d.rows, d.cols) != (self.ranks[k - 1], self.ranks[k]):
                raise ShapeMismatch(
                    f"d_{k} has shape {d.rows}x{d.cols}, expected "
                    f"{self.ranks[k - 1]}x{self.ranks[k]}"
                )
        _check_d1_convention(self)
        _check_compositions(self)

    @property
    def top_degree(self) -> int:
        return len(self.ranks) - 1

    def has_differential(self, k: int) -> bool:
        return k in self.differentials

    def fingerprint(self) -> str:
        return hashlib.sha256(serialize_complex(self).encode()).hexdigest()


def _check_d1_convention(c: ChainComplexData):
    if 1 not in c.differentials:
        return
    d1 = c.differentials[1]
    ball = c.ball
    for i in range(c.presentation.n_gens):
        s = ball.index_of(c.presentation.backend.generator(i))
        if s is None:
            raise RadiusTooSmall("complex ball does not contain the generators", minimal=1)
        expect = GroupRingElement.from_pairs(ball, [(s, Fraction(1)), (0, Fraction(-1))])
        if d1.entries[0][i] != expect:
            raise NotAComplex(
                f"d_1 column {i} is not (s - 1) for generator "
                f"{c.presentation.generators[i]!r}"
            )
        if augmentation(d1.entries[0][i]) != 0:
            raise NotAComplex("d_1 entry has nonzero augmentation")


def _scratch_ball(c: ChainComplexData, radius: int) -> Ball:
    if c.ball.is_full or c.ball.radius >= radius:
        return c.ball
    return enumerate_ball(c.presentation, radius)


def _check_compositions(c: ChainComplexData):
    for k in sorted(c.differentials):
        if k + 1 not in c.differentials:
            continue
        a, b = c.differentials[k], c.differentials[k + 1]
        scratch = _scratch_ball(c, a.support_radius() + b.support_radius())
        prod = mat_mul(a, b, scratch)
        witness = _first_nonzero(prod)
        if witness is not None:
            i, j, g = witness
            raise NotAComplex(
                f"d_{k}.d_{k + 1} is nonzero at entry ({i},{j}), "
                f"group element index {g}"
            )


def _first_nonzero(m: GroupRingMatrix):
    for i in range(m.rows):
        for j in range(m.cols):
            e = m.entries[i][j]
            if not e.is_zero():
                return i, j, min(e.coeffs)
    return None


# ---------------------------------------------------------------------------
# Fox calculus and the presentation complex.
# ---------------------------------------------------------------------------


def fox_derivative(w: FreeWord, s: int, ball: Ball,
                   p: Presentation) -> GroupRingElement:
    """Free derivative of w with respect to generator s, evaluated in the group.

    Satisfies ds/ds = 1, ds^-1/ds = -s^-1, dt/ds = 0 for t != s, and the
    product rule d(uv)/ds = du/ds + u.dv/ds; letters are evaluated through
    the backend, so the result lives on the given ball.
    """
    backend = p.backend
    prefix = backend.identity()
    coeffs: dict[int, Fraction] = {}

    def add(handle, q):
        idx = ball.index_of(handle)
        if idx is None:
            raise RadiusTooSmall(
                f"Fox derivative prefix needs radius >= {len(w)}", minimal=len(w)
            )
        total = coeffs.get(idx, Fraction(0)) + q
        if total:
            coeffs[idx] = total
        else:
            del coeffs[idx]

    for g, sign in w.letters:
        img = backend.generator(g)
        if sign > 0:
            if g == s:
                add(prefix, Fraction(1))
            prefix = backend.multiply(prefix, img)
        else:
            inv = backend.invert(img)
            prefix = backend.multiply(prefix, inv)
            if g == s:
                add(prefix, Fraction(-1))
    return GroupRingElement(ball, coeffs)


def build_presentation_complex(p: Presentation, ball: Ball) -> ChainComplexData:
    """Degree-2 truncation from a presentation: d_1 = (s - 1), d_2 = Fox rows.

    Exact at degrees 0 and 1, so degree <= 1 cohomology computed from it is
    the true group cohomology; degree 2 is a truncation unless the
    presentation is aspherical and a d_3 is attached.
    """
    max_len = max((len(r) for r in p.relators), default=0)
    if not ball.is_full and ball.radius < max(max_len, 1 if p.n_gens else 0):
        raise RadiusTooSmall(
            f"presentation complex needs ball radius >= {max_len}",
            minimal=max(max_len, 1),
        )
    d1_row = []
    for i in range(p.n_gens):
        s = ball.index_of(p.backend.generator(i))
        d1_row.append(GroupRingElement.from_pairs(
            ball, [(s, Fraction(1)), (0, Fraction(-1))]))
    differentials = {1: GroupRingMatrix(ball, [d1_row], 1, p.n_gens)}
    ranks = [1, p.n_gens]
    if p.relators:
        ranks.append(len(p.relators))
        entries = [
            [fox_derivative(r, i, ball, p) for r in p.relators]
            for i in range(p.n_gens)
        ]
        differentials[2] = GroupRingMatrix(ball, entries, p.n_gens, len(p.relators))
    return ChainComplexData(p, ball, ranks, differentials, ORIGIN_PRESENTATION)


def cyclic_resolution(n: int, top: int, ball: Ball) -> ChainComplexData:
    """Periodic resolution of the cyclic group of order n up to degree ``top``.

    d_k = (t - 1) for k odd, d_k = 1 + t + ... + t^{n-1} for k even, which
    composes to zero since (t - 1) annihilates the norm element.
    """
    p = ball.presentation
    if not ball.is_full:
        raise RadiusTooSmall("cyclic resolution needs the full group ball")
    if getattr(p.backend, "name", "") != "cyclic" or p.backend.n != n:
        raise ValueError("ball does not belong to a cyclic presentation of that order")
    t = ball.index_of(p.backend.generator(0)) if p.n_gens else 0
    minus_one = Fraction(-1)
    tm1 = GroupRingElement.from_pairs(ball, [(t, Fraction(1)), (0, minus_one)])
    norm = GroupRingElement.from_pairs(
        ball, [(ball.index_of(i % n if n > 1 else 0), Fraction(1)) for i in range(n)]
    ) if n > 1 else GroupRingElement.unit(ball)
    differentials = {}
    for k in range(1, top + 1):
        e = tm1 if k % 2 == 1 else norm
        differentials[k] = GroupRingMatrix(ball, [[e]], 1, 1)
    return ChainComplexData(p, ball, [1] * (top + 1), differentials, ORIGIN_CYCLIC)


def attach_user_differential(c: ChainComplexData, k: int,
                             d_k: GroupRingMatrix) -> ChainComplexData:
    """Extend the complex with an explicit d_k; composition is re-validated."""
    if k != c.top_degree + 1:
        raise ShapeMismatch(
            f"can only attach at degree {c.top_degree + 1}, got {k}")
    if d_k.rows != c.ranks[k - 1]:
        raise ShapeMismatch(
            f"d_{k} has {d_k.rows} rows, expected {c.ranks[k - 1]}")
    d_k = mat_reindex(d_k, c.ball)
    ranks = c.ranks + [d_k.cols]
    differentials = dict(c.differentials)
    differentials[k] = d_k
    return ChainComplexData(c.presentation, c.ball, ranks, differentials, c.origin)


# ---------------------------------------------------------------------------
# Laplace operators.
# ---------------------------------------------------------------------------


@dataclass
class LaplacianMatrix:
    """Self-adjoint degree-k Laplacian; ``truncated`` marks a missing d_{k+1}."""

    degree: int
    matrix: GroupRingMatrix
    support_radius: int
    truncated: bool


def laplacian(c: ChainComplexData, k: int,
              out_ball: Optional[Ball] = None) -> LaplacianMatrix:
    """d_k* d_k + d_{k+1} d_{k+1}* on the target ball (0 for a missing d_{k+1})."""
    if k < 0 or k > c.top_degree:
        raise ShapeMismatch(f"degree {k} outside complex of top degree {c.top_degree}")
    if k >= 1 and not c.has_differential(k):
        raise ShapeMismatch(f"complex has no differential d_{k}")
    out = out_ball if out_ball is not None else c.ball
    m_k = c.ranks[k]
    total = None
    if k >= 1:
        d_k = c.differentials[k]
        total = mat_mul(mat_star(d_k), d_k, out)
    truncated = False
    if c.has_differential(k + 1):
        d_next = c.differentials[k + 1]
        term = mat_mul(d_next, mat_star(d_next), out)
        total = term if total is None else mat_add(term, total)
    else:
        if total is None:
            total = GroupRingMatrix.zero(out, m_k, m_k)
        if k > 0:
            warnings.warn(
                f"d_{k + 1} missing: degree-{k} Laplacian is truncated",
                stacklevel=2,
            )
            truncated = True
    assert total is not None
    assert mat_star(total) == total, "Laplacian must be self-adjoint"
    return LaplacianMatrix(k, total, total.support_radius(), truncated)


# ---------------------------------------------------------------------------
# Structural report.
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    ok: bool
    witness: str = ""


@dataclass
class ComplexReport:
    checks: list[CheckResult]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def render(self) -> str:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.ok else "FAIL"
            suffix = f"  [{c.witness}]" if c.witness else ""
            lines.append(f"{mark}  {c.name}{suffix}")
        return "\n".join(lines)


def check_complex(c: ChainComplexData) -> ComplexReport:
    """Verify d.d = 0, the d_1 conventions, and the Fox fundamental identity."""
    checks = []
    for k in sorted(c.differentials):
        if k + 1 not in c.differentials:
            continue
        a, b = c.differentials[k], c.differentials[k + 1]
        scratch = _scratch_ball(c, a.support_radius() + b.support_radius())
        prod = mat_mul(a, b, scratch)
        witness = _first_nonzero(prod)
        if witness is None:
            checks.append(CheckResult(f"d_{k}.d_{k + 1} = 0", True))
        else:
            i, j, g = witness
            checks.append(CheckResult(
                f"d_{k}.d_{k + 1} = 0", False,
                f"entry ({i},{j}) has group element g[{g}]"))

    if 1 in c.differentials:
        d1 = c.differentials[1]
        bad = [j for j in range(d1.cols) if augmentation(d1.entries[0][j]) != 0]
        checks.append(CheckResult(
            "augmentation(d_1) = 0", not bad,
            f"column {bad[0]}" if bad else ""))

    if c.origin == ORIGIN_PRESENTATION and c.presentation.relators:
        ok, witness = _fox_fundamental_identity(c.presentation)
        checks.append(CheckResult(
            "fox identity sum_s (dr/ds)(s-1) = r-1", ok, witness))
    return ComplexReport(checks)


def _fox_fundamental_identity(p: Presentation) -> tuple[bool, str]:
    # Evaluated in the free group ring on the same letters, where r - 1 != 0.
    free = parse_presentation(
        "gens " + " ".join(p.generators) + "\nbackend free")
    max_len = max(len(r) for r in p.relators)
    ball = enumerate_ball(free, max_len + 1)
    for idx, rel in enumerate(p.relators):
        total = GroupRingElement.zero(ball)
        for i in range(free.n_gens):
            df = fox_derivative(rel, i, ball, free)
            s = ball.index_of(free.backend.generator(i))
            s_minus_1 = GroupRingElement.from_pairs(
                ball, [(s, Fraction(1)), (0, Fraction(-1))])
            total = gr_add(total, gr_mul(df, s_minus_1, ball))
        r_handle = free.backend.identity()
        for g, sign in rel.letters:
            img = free.backend.generator(g)
            r_handle = free.backend.multiply(
                r_handle, img if sign > 0 else free.backend.invert(img))
        expect = GroupRingElement.from_pairs(
            ball, [(ball.index_of(r_handle), Fraction(1)), (0, Fraction(-1))])
        if total != expect:
            return False, f"relator {idx}"
    return True, ""


# ---------------------------------------------------------------------------
# Complex files: embed the presentation so a file is self-contained.
# ---------------------------------------------------------------------------


def serialize_complex(c: ChainComplexData) -> str:
    lines = ["complex-format 1", "presentation-begin"]
    lines.extend(c.presentation.canonical_text().splitlines())
    lines.append("presentation-end")
    lines.append(f"ball-radius: {c.ball.radius_text()}")
    lines.append(f"origin: {c.origin}")
    lines.append("ranks: " + " ".join(str(r) for r in c.ranks))
    for k in sorted(c.differentials):
        d = c.differentials[k]
        for i in range(d.rows):
            for j in range(d.cols):
                e = d.entries[i][j]
                if not e.is_zero():
                    lines.append(f"d {k} {i} {j} {serialize_element(e)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_complex(text: str, ball_cap: int = 200_000) -> ChainComplexData:
    lines = [ln.rstrip() for ln in text.splitlines()]
    if not lines or lines[0] != "complex-format 1":
        raise ValueError("not a complex file (missing header)")
    i = 1
    if lines[i] != "presentation-begin":
        raise ValueError("missing presentation block")
    i += 1
    pres_lines = []
    while lines[i] != "presentation-end":
        pres_lines.append(lines[i])
        i += 1
    i += 1
    p = parse_presentation("\n".join(pres_lines), ball_cap)

    def take(prefix):
        nonlocal i
        if not lines[i].startswith(prefix):
            raise ValueError(f"expected {prefix!r} line")
        value = lines[i][len(prefix):].strip()
        i += 1
        return value

    radius_text = take("ball-radius:")
    origin = take("origin:")
    ranks = [int(v) for v in take("ranks:").split()]
    radius = "full" if radius_text == "full" else int(radius_text)
    ball = enumerate_ball(p, radius, ball_cap)

    diff_entries: dict[int, list[tuple[int, int, str]]] = {}
    while i < len(lines) and lines[i] != "end":
        if not lines[i]:
            i += 1
            continue
        head, k, row, col, rest = lines[i].split(" ", 4)
        if head != "d":
            raise ValueError(f"bad line {lines[i]!r}")
        diff_entries.setdefault(int(k), []).append((int(row), int(col), rest))
        i += 1

    differentials = {}
    for k in range(1, len(ranks)):
        m = GroupRingMatrix.zero(ball, ranks[k - 1], ranks[k])
        for row, col, body in diff_entries.get(k, []):
            m.entries[row][col] = parse_element(body, ball)
        differentials[k] = m
    return ChainComplexData(p, ball, ranks, differentials, origin)
