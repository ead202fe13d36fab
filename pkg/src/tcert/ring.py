"""Exact rational group-ring arithmetic on ball supports.

Elements are finitely supported rational combinations of ball elements;
coefficients are ``fractions.Fraction`` throughout, so every identity the
certifier checks is exact.  Products must be given an explicit target ball
big enough for the support growth; nothing grows implicitly.

Matrices over the group ring represent maps of free left modules written
in the column convention: a map P_a -> P_b of ranks (a, b) is a b x a
matrix, and composition A.B (apply B first) has entries

    (A.B)[i][j] = sum_k B[k][j] * A[i][k],

with the ring product taken in that order.  Over noncommutative groups
this is what makes d_k . d_{k+1} = 0 hold for Fox presentation complexes;
over abelian groups it coincides with the familiar formula.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .errors import BallMismatch, RadiusTooSmall, ShapeMismatch
from .groups import Ball


def _same_group(b1: Ball, b2: Ball) -> bool:
    if b1 is b2:
        return True
    return b1.presentation.canonical_text() == b2.presentation.canonical_text()


class GroupRingElement:
    """Sparse map from ball element index to nonzero rational coefficient."""

    __slots__ = ("ball", "coeffs")

    def __init__(self, ball: Ball, coeffs: dict[int, Fraction]):
        self.ball = ball
        self.coeffs = {i: q for i, q in coeffs.items() if q != 0}
        for i in self.coeffs:
            if not 0 <= i < len(ball):
                raise IndexError(f"coefficient index {i} outside ball")

    @classmethod
    def zero(cls, ball: Ball) -> "GroupRingElement":
        return cls(ball, {})

    @classmethod
    def unit(cls, ball: Ball) -> "GroupRingElement":
        return cls(ball, {0: Fraction(1)})

    @classmethod
    def from_pairs(cls, ball: Ball, pairs: Iterable[tuple[int, Fraction]]):
        acc: dict[int, Fraction] = {}
        for i, q in pairs:
            acc[i] = acc.get(i, Fraction(0)) + Fraction(q)
        return cls(ball, acc)

    def is_zero(self) -> bool:
        return not self.coeffs

    def support_radius(self) -> int:
        return max((self.ball.word_length[i] for i in self.coeffs), default=0)

    def __eq__(self, other):
        return (isinstance(other, GroupRingElement)
                and _same_group(self.ball, other.ball)
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __neg__(self):
        return GroupRingElement(self.ball, {i: -q for i, q in self.coeffs.items()})

    def __repr__(self):
        return f"<GroupRingElement {serialize_element(self)}>"


def gr_add(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    if a.ball is not b.ball:
        raise BallMismatch("gr_add operands must share one ambient ball")
    out = dict(a.coeffs)
    for i, q in b.coeffs.items():
        s = out.get(i, Fraction(0)) + q
        if s:
            out[i] = s
        else:
            out.pop(i, None)
    return GroupRingElement(a.ball, out)


def gr_scale(a: GroupRingElement, q) -> GroupRingElement:
    q = Fraction(q)
    if q == 0:
        return GroupRingElement.zero(a.ball)
    return GroupRingElement(a.ball, {i: c * q for i, c in a.coeffs.items()})


def gr_mul(a: GroupRingElement, b: GroupRingElement,
           out_ball: Optional[Ball] = None) -> GroupRingElement:
    """Exact convolution sum a(x) b(y) (xy) on the target ball."""
    out = out_ball if out_ball is not None else a.ball
    if not (_same_group(a.ball, b.ball) and _same_group(a.ball, out)):
        raise BallMismatch("gr_mul operands must live over the same group")
    if not out.is_full:
        need = a.support_radius() + b.support_radius()
        if need > out.radius:
            raise RadiusTooSmall(
                f"product support radius {need} exceeds target ball radius {out.radius}",
                minimal=need,
            )
    backend = out.presentation.backend
    ea, eb = a.ball.elements, b.ball.elements
    acc: dict[int, Fraction] = {}
    for i, ci in a.coeffs.items():
        xi = ea[i]
        for j, cj in b.coeffs.items():
            k = out.index_of(backend.multiply(xi, eb[j]))
            assert k is not None
            s = acc.get(k, Fraction(0)) + ci * cj
            if s:
                acc[k] = s
            else:
                del acc[k]
    return GroupRingElement(out, acc)


def gr_star(a: GroupRingElement) -> GroupRingElement:
    """Involution: the coefficient of g moves to g^{-1} (rational conjugation is trivial)."""
    inv = a.ball.inverse_index
    return GroupRingElement(a.ball, {inv[i]: q for i, q in a.coeffs.items()})


def augmentation(a: GroupRingElement) -> Fraction:
    return sum(a.coeffs.values(), Fraction(0))


def l1_norm(a: GroupRingElement) -> Fraction:
    return sum((abs(q) for q in a.coeffs.values()), Fraction(0))


def reindex(a: GroupRingElement, ball: Ball) -> GroupRingElement:
    """Move an element to another ball of the same group (support must fit)."""
    if a.ball is ball:
        return a
    if not _same_group(a.ball, ball):
        raise BallMismatch("reindex target is a ball of a different group")
    out: dict[int, Fraction] = {}
    for i, q in a.coeffs.items():
        j = ball.index_of(a.ball.elements[i])
        if j is None:
            raise RadiusTooSmall(
                f"support element of word length {a.ball.word_length[i]} "
                f"does not fit in radius {ball.radius}",
                minimal=a.ball.word_length[i],
            )
        out[j] = q
    return GroupRingElement(ball, out)


# ---------------------------------------------------------------------------
# Serialization: "q1*g[i1] + q2*g[i2] + ..." with rationals as p/q.
# ---------------------------------------------------------------------------


def serialize_element(a: GroupRingElement) -> str:
    if not a.coeffs:
        return "0"
    parts = [f"{a.coeffs[i]}*g[{i}]" for i in sorted(a.coeffs)]
    return " + ".join(parts)


def parse_element(text: str, ball: Ball) -> GroupRingElement:
    text = text.strip()
    if text == "0":
        return GroupRingElement.zero(ball)
    pairs = []
    for part in text.split("+"):
        part = part.strip()
        coeff_text, _, idx_text = part.partition("*")
        if not idx_text.startswith("g[") or not idx_text.endswith("]"):
            raise ValueError(f"bad element term {part!r}")
        pairs.append((int(idx_text[2:-1]), Fraction(coeff_text)))
    return GroupRingElement.from_pairs(ball, pairs)


# ---------------------------------------------------------------------------
# Matrices.
# ---------------------------------------------------------------------------


class GroupRingMatrix:
    """Dense rectangular grid of group-ring elements over one shared ball."""

    __slots__ = ("ball", "rows", "cols", "entries")

    def __init__(self, ball: Ball, entries: list[list[GroupRingElement]],
                 rows: Optional[int] = None, cols: Optional[int] = None):
        self.ball = ball
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries) if rows is None else rows
        self.cols = (len(self.entries[0]) if self.entries else 0) if cols is None else cols
        for row in self.entries:
            if len(row) != self.cols:
                raise ShapeMismatch("ragged matrix rows")
            for e in row:
                if e.ball is not ball:
                    raise BallMismatch("matrix entries must share the ambient ball")

    @classmethod
    def zero(cls, ball: Ball, rows: int, cols: int) -> "GroupRingMatrix":
        z = GroupRingElement.zero(ball)
        return cls(ball, [[z for _ in range(cols)] for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, ball: Ball, n: int) -> "GroupRingMatrix":
        m = cls.zero(ball, n, n)
        for i in range(n):
            m.entries[i][i] = GroupRingElement.unit(ball)
        return m

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def __eq__(self, other):
        return (isinstance(other, GroupRingMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and all(self.entries[i][j] == other.entries[i][j]
                        for i in range(self.rows) for j in range(self.cols)))

    def __hash__(self):
        return hash((self.rows, self.cols))

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def support_radius(self) -> int:
        return max((e.support_radius() for row in self.entries for e in row), default=0)

    def __repr__(self):
        return f"<GroupRingMatrix {self.rows}x{self.cols}>"


def mat_reindex(a: GroupRingMatrix, ball: Ball) -> GroupRingMatrix:
    if a.ball is ball:
        return a
    return GroupRingMatrix(
        ball, [[reindex(e, ball) for e in row] for row in a.entries], a.rows, a.cols
    )


def mat_add(a: GroupRingMatrix, b: GroupRingMatrix) -> GroupRingMatrix:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ShapeMismatch(f"mat_add shapes {a.rows}x{a.cols} vs {b.rows}x{b.cols}")
    if a.ball is not b.ball:
        raise BallMismatch("mat_add operands must share one ambient ball")
    return GroupRingMatrix(
        a.ball,
        [[gr_add(a.entries[i][j], b.entries[i][j]) for j in range(a.cols)]
         for i in range(a.rows)],
        a.rows, a.cols,
    )


def mat_scale(a: GroupRingMatrix, q) -> GroupRingMatrix:
    return GroupRingMatrix(
        a.ball, [[gr_scale(e, q) for e in row] for row in a.entries], a.rows, a.cols
    )


def mat_mul(a: GroupRingMatrix, b: GroupRingMatrix,
            out_ball: Optional[Ball] = None) -> GroupRingMatrix:
    """Matrix of the composed module map a o b (see module docstring)."""
    if a.cols != b.rows:
        raise ShapeMismatch(f"mat_mul shapes {a.rows}x{a.cols} . {b.rows}x{b.cols}")
    out = out_ball if out_ball is not None else a.ball
    aa = mat_reindex(a, out)
    bb = mat_reindex(b, out)
    entries = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = GroupRingElement.zero(out)
            for k in range(a.cols):
                acc = gr_add(acc, gr_mul(bb.entries[k][j], aa.entries[i][k], out))
            row.append(acc)
        entries.append(row)
    return GroupRingMatrix(out, entries, a.rows, b.cols)


def mat_star(a: GroupRingMatrix) -> GroupRingMatrix:
    """Formal adjoint: transpose, then the involution entrywise."""
    return GroupRingMatrix(
        a.ball,
        [[gr_star(a.entries[i][j]) for i in range(a.rows)] for j in range(a.cols)],
        a.cols, a.rows,
    )


def mat_scalar_mul(s: GroupRingElement, a: GroupRingMatrix, side: str,
                   out_ball: Optional[Ball] = None) -> GroupRingMatrix:
    """Multiply every entry by a ring scalar on the given side ("left"/"right")."""
    out = out_ball if out_ball is not None else a.ball
    ss = reindex(s, out)
    aa = mat_reindex(a, out)
    if side == "left":
        rows = [[gr_mul(ss, e, out) for e in row] for row in aa.entries]
    elif side == "right":
        rows = [[gr_mul(e, ss, out) for e in row] for row in aa.entries]
    else:
        raise ValueError("side must be 'left' or 'right'")
    return GroupRingMatrix(out, rows, a.rows, a.cols)


def mat_l1_norm(a: GroupRingMatrix) -> Fraction:
    """Max over rows of the summed entry l1 norms."""
    best = Fraction(0)
    for row in a.entries:
        total = sum((l1_norm(e) for e in row), Fraction(0))
        best = max(best, total)
    return best
