"""Sparse SDPA (".dat-s" dialect) export/import of encoded problems.

Layout: one PSD block for the Gram matrix and one diagonal block holding
(eps+, eps-, cap slack), so the free gap scalar is the usual split pair
and the problem stays bounded standalone.  Values are written as exact
rationals ("p/q" when the denominator is not 1), which standard SDPA
readers accept for integer data and this module round-trips exactly.
All metadata lives in leading "*" comment lines, where the standard
places comments.
"""

from __future__ import annotations

from fractions import Fraction

from .encoder import BasisEntry, Constraint, SOSMode, SOSProblem, SupportBasis
from .errors import SolutionParseError

_HEADER = "* tcert-sdpa 1"


def export_sdpa(problem: SOSProblem) -> str:
    n = problem.gram_size
    lines = [_HEADER]
    lines.append(
        "* meta mode={} degree={} gram={} module-rank={} half-radius={} "
        "ball-radius={} cap={} degenerate={}".format(
            problem.mode.kind, problem.mode.degree, n, problem.module_rank,
            problem.half_radius, problem.ball_radius_text,
            problem.epsilon_cap, int(problem.degenerate)))
    lines.append(f"* meta fingerprint={problem.complex_fingerprint}")
    lines.append(f"* meta convention={problem.convention}")
    for e in problem.basis.entries:
        lines.append(f"* basis {e.ball_index} {e.module_row}")
    for r, con in enumerate(problem.constraints, start=1):
        lines.append(
            f"* constraint {r} {con.block_row} {con.block_col} {con.element}")

    write_entries = bool(problem.constraints)
    m = len(problem.constraints) + (1 if write_entries else 0)
    lines.append(str(m))
    eps_block = 2 if n > 0 else 1
    blocks = ([str(n)] if n > 0 else []) + ["-3"]
    lines.append(str(len(blocks)))
    lines.append(" ".join(blocks))
    rhs = [str(c.c0) for c in problem.constraints]
    if write_entries:
        rhs.append(str(problem.epsilon_cap))
    lines.append(" ".join(rhs))

    if write_entries:
        lines.append(f"0 {eps_block} 1 1 1")
        lines.append(f"0 {eps_block} 2 2 -1")
        for r, con in enumerate(problem.constraints, start=1):
            for p, q, coeff in con.coeffs:
                value = coeff if p == q else coeff / 2
                lines.append(f"{r} 1 {p + 1} {q + 1} {value}")
            if con.c1 != 0:
                lines.append(f"{r} {eps_block} 1 1 {-con.c1}")
                lines.append(f"{r} {eps_block} 2 2 {con.c1}")
        cap_row = len(problem.constraints) + 1
        lines.append(f"{cap_row} {eps_block} 1 1 1")
        lines.append(f"{cap_row} {eps_block} 2 2 -1")
        lines.append(f"{cap_row} {eps_block} 3 3 1")
    return "\n".join(lines) + "\n"


def import_sdpa(text: str) -> SOSProblem:
    """Rebuild the problem (without a live ball) from its export."""
    meta: dict[str, str] = {}
    basis_entries: list[BasisEntry] = []
    keys: dict[int, tuple[int, int, int]] = {}
    body: list[str] = []
    saw_header = False
    for line in text.splitlines():
        if line.startswith("*") or line.startswith('"'):
            if line.strip() == _HEADER.strip():
                saw_header = True
            elif line.startswith("* meta "):
                payload = line[len("* meta "):]
                if payload.startswith(("fingerprint=", "convention=")):
                    key, _, value = payload.partition("=")
                    meta[key] = value
                else:
                    for token in payload.split():
                        key, _, value = token.partition("=")
                        meta[key] = value
            elif line.startswith("* basis "):
                _, _, rest = line.partition("* basis ")
                a, b = rest.split()
                basis_entries.append(BasisEntry(int(a), int(b)))
            elif line.startswith("* constraint "):
                _, _, rest = line.partition("* constraint ")
                r, i, j, g = rest.split()
                keys[int(r)] = (int(i), int(j), int(g))
            continue
        if line.strip():
            body.append(line.strip())
    if not saw_header:
        raise SolutionParseError("missing tcert-sdpa header comment")
    try:
        mode = SOSMode(meta["mode"], int(meta["degree"]))
        n = int(meta["gram"])
        module_rank = int(meta["module-rank"])
        half_radius = int(meta["half-radius"])
        cap = Fraction(meta["cap"])
        degenerate = bool(int(meta["degenerate"]))
    except KeyError as missing:
        raise SolutionParseError(f"missing meta field {missing}")

    if len(body) < 3:
        raise SolutionParseError("truncated SDPA body")
    m = int(body[0])
    if m == 0 and len(body) == 3:
        body.append("")  # the RHS line is legitimately empty
    if len(body) < 4:
        raise SolutionParseError("truncated SDPA body")
    rhs = body[3].split()
    eps_block = 2 if n > 0 else 1
    n_constraints = max(m - 1, 0)

    coeff_of: dict[int, list[tuple[int, int, Fraction]]] = {r: [] for r in keys}
    c1_of: dict[int, Fraction] = {}
    for line in body[4:]:
        parts = line.split()
        if len(parts) != 5:
            raise SolutionParseError(f"bad entry line {line!r}")
        r, blk, i, j, value = (int(parts[0]), int(parts[1]), int(parts[2]),
                               int(parts[3]), Fraction(parts[4]))
        if r == 0 or r > n_constraints:
            continue
        if blk == 1 and n > 0:
            p, q = i - 1, j - 1
            coeff_of[r].append((p, q, value if p == q else value * 2))
        elif blk == eps_block and (i, j) == (1, 1):
            c1_of[r] = -value

    constraints = []
    for r in range(1, n_constraints + 1):
        if r not in keys:
            raise SolutionParseError(f"constraint {r} lacks a key comment")
        i, j, g = keys[r]
        constraints.append(Constraint(
            i, j, g, sorted(coeff_of.get(r, [])),
            Fraction(rhs[r - 1]), c1_of.get(r, Fraction(0))))

    basis = SupportBasis(basis_entries, half_radius, mode.uses_ideal_basis,
                         module_rank)
    return SOSProblem(
        mode=mode,
        gram_size=n,
        module_rank=module_rank,
        half_radius=half_radius,
        ball_radius_text=meta.get("ball-radius", "?"),
        basis=basis,
        constraints=constraints,
        epsilon_cap=cap,
        degenerate=degenerate,
        complex_fingerprint=meta.get("fingerprint", ""),
        convention=meta.get("convention", ""),
        ball=None,
    )
