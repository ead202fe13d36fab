"""Encode spectral-gap certificate equations as Gram-matrix feasibility problems.

Three target shapes are supported, all with a scalar gap variable eps:

  ozawa      lap0 (lap0 - eps)           over the augmentation-ideal basis
  bracket k  lap_k - eps . Id            over the plain ball basis
  paren k    lap0 (lap_k - eps) lap0     over the augmentation-ideal basis

A sum of hermitian squares with factors supported in the half-radius ball
is exactly the image of a positive semidefinite Gram matrix indexed by
(ball element, module row); the encoder emits one exact rational linear
constraint per (block row, block col, group element).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import EncodingIncomplete, RadiusTooSmall, TruncatedDegree
from .groups import Ball, enumerate_ball
from .resolution import ChainComplexData, ORIGIN_PRESENTATION, laplacian
from .ring import (
    GroupRingElement,
    GroupRingMatrix,
    gr_mul,
    gr_star,
    mat_l1_norm,
    mat_reindex,
    mat_scalar_mul,
    mat_scale,
    reindex,
)

CONVENTION = ("delta0=2|S|-sum_{s in S}(s+s^-1); d1=(s-1) row; "
              "matrices compose in the left-module column convention")

MODE_KINDS = ("ozawa", "bracket", "paren")


@dataclass(frozen=True)
class SOSMode:
    """Certificate equation shape; degree 0 is only legal for ozawa/paren."""

    kind: str
    degree: int = 0

    def __post_init__(self):
        if self.kind not in MODE_KINDS:
            raise ValueError(f"unknown mode {self.kind!r}")
        if self.kind == "ozawa" and self.degree != 0:
            raise ValueError("ozawa mode is a degree-0 criterion")
        if self.kind == "bracket" and self.degree < 1:
            raise ValueError("bracket mode needs degree >= 1")
        if self.kind == "paren" and self.degree < 0:
            raise ValueError("paren degree must be >= 0")

    @property
    def uses_ideal_basis(self) -> bool:
        return self.kind in ("ozawa", "paren")

    def describe(self, epsilon) -> str:
        """The certified identity in display notation."""
        k = self.degree
        if self.kind == "ozawa":
            return f"Δ₀(Δ₀ - {epsilon}) = Σᵢ xᵢ*xᵢ"
        if self.kind == "bracket":
            return (f"Δ_{k} - {epsilon} = Σᵢ xᵢ*xᵢ")
        return (f"Δ₀(Δ_{k} - {epsilon})Δ₀ "
                f"= Σᵢ xᵢ*xᵢ")


@dataclass(frozen=True)
class BasisEntry:
    ball_index: int
    module_row: int


@dataclass
class SupportBasis:
    """Ordered factor basis: ring element w_p placed in one module row."""

    entries: list[BasisEntry]
    half_radius: int
    ideal: bool
    module_rank: int

    def __len__(self):
        return len(self.entries)

    def element(self, ball: Ball, p: int) -> GroupRingElement:
        entry = self.entries[p]
        if self.ideal:
            return GroupRingElement.from_pairs(
                ball, [(entry.ball_index, Fraction(1)), (0, Fraction(-1))])
        return GroupRingElement.from_pairs(
            ball, [(entry.ball_index, Fraction(1))])


def build_support_basis(ball: Ball, mode: SOSMode, m: int,
                        half_radius: int) -> SupportBasis:
    """Deterministic basis over the half-radius sub-ball, per module row.

    Ideal modes span the augmentation ideal with {g - e : g != e}, so every
    certificate factor automatically has augmentation zero.
    """
    indices = [i for i in range(len(ball)) if ball.word_length[i] <= half_radius]
    if mode.uses_ideal_basis:
        indices = [i for i in indices if i != 0]
    entries = [BasisEntry(i, j) for j in range(m) for i in indices]
    return SupportBasis(entries, half_radius, mode.uses_ideal_basis, m)


@dataclass
class Constraint:
    """sum over stored (p, q, coeff) of coeff * Q[p][q]  ==  c0 + eps*c1.

    Variable pairs are unordered (p <= q); the coefficient already includes
    both ordered contributions.
    """

    block_row: int
    block_col: int
    element: int
    coeffs: list[tuple[int, int, Fraction]]
    c0: Fraction
    c1: Fraction

    @property
    def key(self):
        return (self.block_row, self.block_col, self.element)


@dataclass
class SOSProblem:
    mode: SOSMode
    gram_size: int
    module_rank: int
    half_radius: int
    ball_radius_text: str
    basis: SupportBasis
    constraints: list[Constraint]
    epsilon_cap: Fraction
    degenerate: bool
    complex_fingerprint: str
    convention: str = CONVENTION
    ball: Optional[Ball] = field(default=None, compare=False, repr=False)

    def data_key(self):
        return (
            self.mode, self.gram_size, self.module_rank, self.half_radius,
            self.ball_radius_text,
            tuple((e.ball_index, e.module_row) for e in self.basis.entries),
            tuple(
                (c.key, tuple(c.coeffs), c.c0, c.c1) for c in self.constraints
            ),
            self.epsilon_cap, self.degenerate, self.complex_fingerprint,
            self.convention,
        )

    def __eq__(self, other):
        return isinstance(other, SOSProblem) and self.data_key() == other.data_key()


@dataclass
class EncodingContext:
    """Exact target data shared by the encoder and the certificate verifier."""

    ball: Ball
    target_const: GroupRingMatrix   # epsilon-free part
    target_eps: GroupRingMatrix     # multiplied by epsilon
    module_rank: int
    half_radius: int
    lap_l1: Fraction


def _degree_gate(c: ChainComplexData, mode: SOSMode, assert_resolution: bool):
    k = mode.degree
    if k > c.top_degree or (k >= 1 and not c.has_differential(k)):
        raise TruncatedDegree(f"complex has no differential d_{k}")
    if k >= 1 and not c.has_differential(k + 1) and not assert_resolution:
        raise TruncatedDegree(
            f"d_{k + 1} is missing, so the degree-{k} Laplacian is truncated; "
            "pass assert-resolution to certify the truncated statement")
    if (c.origin == ORIGIN_PRESENTATION and k >= 2 and not assert_resolution):
        raise TruncatedDegree(
            "presentation complexes are only exact through degree 1; "
            "degree >= 2 certification needs assert-resolution")


def prepare_encoding(c: ChainComplexData, mode: SOSMode,
                     half_radius: Optional[int] = None,
                     assert_resolution: bool = False) -> EncodingContext:
    """Compute the exact rational target and the working ball."""
    import warnings

    _degree_gate(c, mode, assert_resolution)
    k = mode.degree
    p = c.presentation

    d_support = max(
        (c.differentials[j].support_radius()
         for j in (k, k + 1) if c.has_differential(j)), default=0)
    d1_support = (c.differentials[1].support_radius()
                  if c.has_differential(1) else 0)
    scratch_radius = 2 * max(d_support, d1_support, 1)
    if mode.kind != "bracket":
        scratch_radius = 2 * scratch_radius + 2
    scratch = c.ball if c.ball.is_full else enumerate_ball(p, scratch_radius)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lap_k = laplacian(c, k, scratch)
        m = lap_k.matrix.rows
        if mode.kind == "bracket":
            t0 = lap_k.matrix
            t1 = mat_scale(GroupRingMatrix.identity(scratch, m), -1)
        else:
            lap0 = laplacian(c, 0, scratch).matrix.entries[0][0]
            if mode.kind == "ozawa":
                t0 = GroupRingMatrix(
                    scratch, [[gr_mul(lap0, lap0, scratch)]], 1, 1)
                t1 = mat_scale(GroupRingMatrix(scratch, [[lap0]], 1, 1), -1)
                m = 1
            else:
                # paren: lap0 . lap_k . lap0, entrywise scalar products
                left = mat_scalar_mul(lap0, lap_k.matrix, "left", scratch)
                t0 = mat_scalar_mul(lap0, left, "right", scratch)
                lap0_sq = gr_mul(lap0, lap0, scratch)
                t1 = mat_scale(
                    mat_scalar_mul(lap0_sq, GroupRingMatrix.identity(scratch, m),
                                   "left", scratch), -1)

    r_target = max(t0.support_radius(), t1.support_radius())
    minimal_d = max(1, -(-r_target // 2))  # ceil
    if half_radius is None:
        half_radius = minimal_d
    elif 2 * half_radius < r_target:
        raise RadiusTooSmall(
            f"target support radius {r_target} exceeds 2*d = {2 * half_radius}; "
            f"minimal sufficient half radius is {minimal_d}",
            minimal=minimal_d)

    if scratch.is_full:
        work = scratch
    else:
        radius = max(2 * half_radius, r_target)
        work = scratch if scratch.radius >= radius else enumerate_ball(p, radius)
    t0 = mat_reindex(t0, work)
    t1 = mat_reindex(t1, work)
    return EncodingContext(work, t0, t1, m, half_radius,
                           mat_l1_norm(lap_k.matrix))


def encode(c: ChainComplexData, mode: SOSMode,
           half_radius: Optional[int] = None,
           epsilon_cap: Optional[Fraction] = None,
           assert_resolution: bool = False) -> SOSProblem:
    """Assemble the exact constraint system tying the Gram matrix to the target."""
    ctx = prepare_encoding(c, mode, half_radius, assert_resolution)
    ball = ctx.ball
    m = ctx.module_rank
    basis = build_support_basis(ball, mode, m, ctx.half_radius)
    n = len(basis)

    elements = [basis.element(ball, p) for p in range(n)]
    raw: dict[tuple[int, int, int], dict[tuple[int, int], Fraction]] = {}
    for p in range(n):
        wp_star = gr_star(elements[p])
        row_p = basis.entries[p].module_row
        for q in range(n):
            row_q = basis.entries[q].module_row
            u = gr_mul(wp_star, elements[q], ball)
            var = (p, q) if p <= q else (q, p)
            for g, coeff in u.coeffs.items():
                table = raw.setdefault((row_p, row_q, g), {})
                table[var] = table.get(var, Fraction(0)) + coeff

    degenerate = ctx.target_const.is_zero() and ctx.target_eps.is_zero()

    tables = {}
    for (i, j, g), table in raw.items():
        if i > j:
            continue
        coeffs = [(p, q, v) for (p, q), v in sorted(table.items()) if v != 0]
        if coeffs:
            tables[(i, j, g)] = coeffs
    for mat in (ctx.target_const, ctx.target_eps):
        for i in range(m):
            for j in range(m):
                for g in mat.entries[i][j].coeffs:
                    key = (i, j, g) if i <= j else (j, i, ball.inverse_index[g])
                    if key not in tables:
                        raise EncodingIncomplete(
                            f"target element g[{key[2]}] in block "
                            f"({key[0]},{key[1]}) admits no factorization "
                            f"over the half-radius-{ctx.half_radius} basis")

    constraints = []
    for (i, j, g) in sorted(tables):
        constraints.append(Constraint(
            i, j, g, tables[(i, j, g)],
            ctx.target_const.entries[i][j].coeffs.get(g, Fraction(0)),
            ctx.target_eps.entries[i][j].coeffs.get(g, Fraction(0)),
        ))

    cap = epsilon_cap if epsilon_cap is not None else 2 * ctx.lap_l1
    if cap <= 0:
        cap = Fraction(1)
    return SOSProblem(
        mode=mode,
        gram_size=n,
        module_rank=m,
        half_radius=ctx.half_radius,
        ball_radius_text=ball.radius_text(),
        basis=basis,
        constraints=constraints,
        epsilon_cap=Fraction(cap),
        degenerate=degenerate,
        complex_fingerprint=c.fingerprint(),
        ball=ball,
    )


def gram_expansion(problem: SOSProblem,
                   gram: list[list[Fraction]]) -> GroupRingMatrix:
    """Exact sum over (p, q) of Q[p][q] w_p* w_q, as an m x m matrix."""
    if problem.ball is None:
        raise ValueError("problem has no live ball (imported without a complex)")
    return expand_gram(problem.ball, problem.basis, gram)


def expand_gram(ball: Ball, basis: SupportBasis,
                gram: list[list[Fraction]]) -> GroupRingMatrix:
    m = basis.module_rank
    n = len(basis)
    elements = [basis.element(ball, p) for p in range(n)]
    acc = [[{} for _ in range(m)] for _ in range(m)]
    for p in range(n):
        wp_star = gr_star(elements[p])
        i = basis.entries[p].module_row
        for q in range(n):
            coeff = gram[p][q]
            if coeff == 0:
                continue
            j = basis.entries[q].module_row
            u = gr_mul(wp_star, elements[q], ball)
            bucket = acc[i][j]
            for g, v in u.coeffs.items():
                bucket[g] = bucket.get(g, Fraction(0)) + coeff * v
    entries = [[GroupRingElement(ball, acc[i][j]) for j in range(m)]
               for i in range(m)]
    return GroupRingMatrix(ball, entries, m, m)


def target_matrix(ctx: EncodingContext, epsilon: Fraction) -> GroupRingMatrix:
    """target_const + epsilon * target_eps over the working ball."""
    from .ring import mat_add
    return mat_add(ctx.target_const, mat_scale(ctx.target_eps, epsilon))
