"""Brute-force finite-group (co)homology against Laplacian spectra.

For a finite backend the bar complex gives group cohomology directly, the
specialized Laplacians give spectra and harmonic kernels, and the two are
compared degree by degree: the kernel dimension must equal the cohomology
dimension, and a spectral gap must force vanishing.  In finite dimensions
reduced and ordinary cohomology agree, so these are exactly the statements
the certificates rest on, at the scale where they can be checked by brute
force.

Complexes over finite groups are extended to genuine resolutions on
demand: the kernel of the top differential is computed exactly over the
rationals and a minimal set of module generators becomes the next
differential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import CapExceeded, NotUnitary, TruncatedDegree
from .exactla import rational_kernel, rational_rank
from .groups import Ball, Presentation
from .resolution import ChainComplexData, attach_user_differential, laplacian
from .ring import GroupRingElement, GroupRingMatrix

KERNEL_EPS = 1e-10
RANK_TOL = 1e-8
EXACT_CELL_CAP = 40_000
DEFAULT_BAR_CAP = 1_000_000


@dataclass
class FiniteModule:
    """Finite-dimensional module given by one matrix per generator.

    ``action`` is floating point (orthogonal/unitary when ``is_unitary``);
    ``rational_action`` optionally carries an exact model of the same
    module in a possibly different basis, used for exact rank computations.
    """

    name: str
    dimension: int
    action: list[np.ndarray]
    is_unitary: bool
    rational_action: Optional[list[list[list[Fraction]]]] = None

    def validate(self, p: Presentation):
        for g, mat in zip(p.generators, self.action):
            if mat.shape != (self.dimension, self.dimension):
                raise ValueError(f"action for {g!r} has wrong shape")
            if self.is_unitary:
                err = np.abs(mat @ mat.T.conj() - np.eye(self.dimension)).max()
                if err > 1e-12:
                    raise NotUnitary(
                        f"action for {g!r} is not orthogonal/unitary "
                        f"(defect {err:.2e})")
        for rel in p.relators:
            img = np.eye(self.dimension)
            for g, sign in rel.letters:
                m = self.action[g]
                img = img @ (m if sign > 0 else np.linalg.inv(m))
            if np.abs(img - np.eye(self.dimension)).max() > 1e-9:
                raise ValueError(f"module action violates a relator")
        if self.rational_action is not None:
            for rel in p.relators:
                img = _frac_eye(self.dimension)
                for g, sign in rel.letters:
                    m = self.rational_action[g]
                    img = _frac_mul(img, m if sign > 0 else _frac_inv(m))
                if img != _frac_eye(self.dimension):
                    raise ValueError("exact module action violates a relator")


def _frac_eye(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _frac_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][l] * b[l][j] for l in range(k)), Fraction(0))
             for j in range(m)] for i in range(n)]


def _frac_inv(m):
    n = len(m)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(m)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------------------
# Built-in modules.
# ---------------------------------------------------------------------------


def trivial_module(p: Presentation) -> FiniteModule:
    mats = [np.eye(1) for _ in p.generators]
    mod = FiniteModule("trivial", 1, mats, True,
                       [[[Fraction(1)]] for _ in p.generators])
    mod.validate(p)
    return mod


def _left_mult_table(ball: Ball):
    backend = ball.presentation.backend
    n = len(ball)
    table = []
    for g in range(n):
        row = [ball.index_of(backend.multiply(ball.elements[g], ball.elements[x]))
               for x in range(n)]
        table.append(row)
    return table


def regular_module(ball: Ball) -> FiniteModule:
    """Left regular representation on the full group ball."""
    if not ball.is_full:
        raise ValueError("regular module needs the full group")
    p = ball.presentation
    n = len(ball)
    table = _left_mult_table(ball)
    mats = []
    exact = []
    for i in range(p.n_gens):
        g = ball.index_of(p.backend.generator(i))
        mat = np.zeros((n, n))
        for x in range(n):
            mat[table[g][x], x] = 1.0
        mats.append(mat)
        exact.append([[Fraction(int(table[g][x] == y))
                       for x in range(n)] for y in range(n)])
    mod = FiniteModule("reg", n, mats, True, exact)
    mod.validate(p)
    return mod


def augmentation_kernel_module(ball: Ball) -> FiniteModule:
    """Sum-zero subrepresentation of the regular module.

    The floating action uses an orthonormal basis of the sum-zero subspace
    (so it is orthogonal); the exact action uses the basis e_g - e_id.
    """
    if not ball.is_full:
        raise ValueError("augmentation kernel module needs the full group")
    p = ball.presentation
    n = len(ball)
    reg = regular_module(ball)
    ones = np.ones((n, 1)) / np.sqrt(n)
    # orthonormal basis of the complement of the all-ones vector
    basis = np.linalg.qr(np.eye(n) - ones @ ones.T)[0][:, : n - 1]
    # make the sign convention deterministic
    for col in range(n - 1):
        lead = next(i for i in range(n) if abs(basis[i, col]) > 1e-12)
        if basis[lead, col] < 0:
            basis[:, col] = -basis[:, col]
    mats = [basis.T @ m @ basis for m in reg.action]

    table = _left_mult_table(ball)
    exact = []
    for i in range(p.n_gens):
        g = ball.index_of(p.backend.generator(i))
        # column j (for v_j = e_{g_j} - e_{g_0}): image v_{idx(g g_j)} - v_{idx(g g_0)}
        mat = [[Fraction(0)] * (n - 1) for _ in range(n - 1)]
        home = table[g][0]
        for j in range(1, n):
            target = table[g][j]
            if target != 0:
                mat[target - 1][j - 1] += 1
            if home != 0:
                mat[home - 1][j - 1] -= 1
        exact.append(mat)
    mod = FiniteModule("reg0", n - 1, mats, True, exact)
    mod.validate(p)
    return mod


def sign_module(p: Presentation) -> FiniteModule:
    """Sign character (permutation parity, or -1 for an even cyclic group)."""
    signs = []
    backend = p.backend
    if backend.name == "perm":
        for i in range(p.n_gens):
            perm = backend.generator(i)
            visited = [False] * len(perm)
            parity = 1
            for start in range(len(perm)):
                if visited[start]:
                    continue
                length = 0
                x = start
                while not visited[x]:
                    visited[x] = True
                    x = perm[x]
                    length += 1
                if length % 2 == 0:
                    parity = -parity
            signs.append(parity)
    elif backend.name == "cyclic" and backend.n % 2 == 0:
        signs = [-1] * p.n_gens
    else:
        raise ValueError("sign module needs a permutation or even cyclic backend")
    mats = [np.array([[float(s)]]) for s in signs]
    mod = FiniteModule("sign", 1, mats, True,
                       [[[Fraction(s)]] for s in signs])
    mod.validate(p)
    return mod


def builtin_module(name: str, ball: Ball) -> FiniteModule:
    p = ball.presentation
    if name == "trivial":
        return trivial_module(p)
    if name == "reg":
        return regular_module(ball)
    if name == "reg0":
        return augmentation_kernel_module(ball)
    if name == "sign":
        return sign_module(p)
    raise ValueError(f"unknown module preset {name!r}")


# ---------------------------------------------------------------------------
# Specialization of group-ring matrices through a module.
# ---------------------------------------------------------------------------


class ModuleAction:
    """Per-group-element matrices for a module over a full ball."""

    def __init__(self, ball: Ball, module: FiniteModule):
        if not ball.is_full:
            raise ValueError("oracle computations need the full group ball")
        self.ball = ball
        self.module = module
        n = len(ball)
        d = module.dimension
        mats = [None] * n
        mats[0] = np.eye(d)
        exact: Optional[list] = None
        if module.rational_action is not None:
            exact = [None] * n
            exact[0] = _frac_eye(d)
        p = ball.presentation
        alphabet = [module.action[i] for i in range(p.n_gens)]
        alphabet += [np.linalg.inv(m) for m in alphabet]
        exact_alpha = None
        if exact is not None:
            exact_alpha = [module.rational_action[i] for i in range(p.n_gens)]
            exact_alpha += [_frac_inv(m) for m in exact_alpha[:p.n_gens]]
        for x in range(n):
            for a, edge in enumerate(ball.generator_edges[x]):
                if edge is None or mats[edge] is not None:
                    continue
                mats[edge] = mats[x] @ alphabet[a]
                if exact is not None:
                    exact[edge] = _frac_mul(exact[x], exact_alpha[a])
        self.matrices = mats
        self.exact_matrices = exact

    def of_element(self, e: GroupRingElement) -> np.ndarray:
        d = self.module.dimension
        out = np.zeros((d, d), dtype=self.matrices[0].dtype)
        for g, q in e.coeffs.items():
            out = out + float(q) * self.matrices[g]
        return out

    def of_element_exact(self, e: GroupRingElement):
        d = self.module.dimension
        out = [[Fraction(0)] * d for _ in range(d)]
        for g, q in e.coeffs.items():
            mat = self.exact_matrices[g]
            for i in range(d):
                row = mat[i]
                for j in range(d):
                    if row[j]:
                        out[i][j] += q * row[j]
        return out

    def cochain_map(self, m: GroupRingMatrix) -> np.ndarray:
        """Map V^{rows} -> V^{cols} induced on Hom(P_., V) coordinates."""
        d = self.module.dimension
        out = np.zeros((m.cols * d, m.rows * d))
        for i in range(m.rows):
            for j in range(m.cols):
                e = m.entries[i][j]
                if not e.is_zero():
                    out[j * d:(j + 1) * d, i * d:(i + 1) * d] = self.of_element(e)
        return out

    def chain_map(self, m: GroupRingMatrix) -> np.ndarray:
        """Map V^{cols} -> V^{rows} induced on V (x) P_. coordinates."""
        from .ring import gr_star

        d = self.module.dimension
        out = np.zeros((m.rows * d, m.cols * d))
        for i in range(m.rows):
            for j in range(m.cols):
                e = m.entries[i][j]
                if not e.is_zero():
                    out[i * d:(i + 1) * d, j * d:(j + 1) * d] = \
                        self.of_element(gr_star(e))
        return out

    def laplacian_matrix(self, lap: GroupRingMatrix) -> np.ndarray:
        """Specialized Laplacian in cochain coordinates (block transpose)."""
        d = self.module.dimension
        m = lap.rows
        out = np.zeros((m * d, m * d))
        for i in range(m):
            for j in range(m):
                e = lap.entries[j][i]
                if not e.is_zero():
                    out[i * d:(i + 1) * d, j * d:(j + 1) * d] = self.of_element(e)
        return out


def _float_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if len(s) == 0:
        return 0
    # absolute floor keeps numerically-zero maps at rank 0
    cutoff = RANK_TOL * max(mat.shape) * max(float(s[0]), 1.0)
    return int(np.sum(s > cutoff))


# ---------------------------------------------------------------------------
# Bar-complex cohomology.
# ---------------------------------------------------------------------------


def bar_cohomology(ball: Ball, module: FiniteModule, k: int,
                   cap: int = DEFAULT_BAR_CAP) -> int:
    """dim H^k from the inhomogeneous bar complex of a finite group, k <= 2."""
    if k < 0 or k > 2:
        raise ValueError("bar complex is implemented for degrees 0..2")
    n = len(ball)
    d = module.dimension
    if n ** k * d > cap:
        raise CapExceeded(f"bar complex size {n ** k * d} exceeds cap {cap}")
    action = ModuleAction(ball, module)
    delta_out = _bar_differential(ball, action, k)
    delta_in = _bar_differential(ball, action, k - 1) if k >= 1 else None
    dim_ck = d * n ** k
    rank_out = _float_rank(delta_out)
    rank_in = _float_rank(delta_in) if delta_in is not None else 0
    return dim_ck - rank_out - rank_in


def _bar_differential(ball: Ball, action: ModuleAction, k: int) -> np.ndarray:
    """delta^k : C^k -> C^{k+1} for k in {0, 1, 2}."""
    n = len(ball)
    d = action.module.dimension
    table = _left_mult_table(ball)
    rho = action.matrices
    eye = np.eye(d)
    if k == 0:
        out = np.zeros((n * d, d))
        for g in range(n):
            out[g * d:(g + 1) * d, :] = rho[g] - eye
        return out
    if k == 1:
        out = np.zeros((n * n * d, n * d))

        def cell(gh):
            return slice(gh * d, (gh + 1) * d)

        for g in range(n):
            for h in range(n):
                row = (g * n + h) * d
                block = slice(row, row + d)
                out[block, cell(h)] += rho[g]
                out[block, cell(table[g][h])] -= eye
                out[block, cell(g)] += eye
        return out
    if k == 2:
        out = np.zeros((n ** 3 * d, n * n * d))

        def cell(g, h):
            base = (g * n + h) * d
            return slice(base, base + d)

        for g in range(n):
            for h in range(n):
                for l in range(n):
                    row = ((g * n + h) * n + l) * d
                    block = slice(row, row + d)
                    out[block, cell(h, l)] += rho[g]
                    out[block, cell(table[g][h], l)] -= eye
                    out[block, cell(g, table[h][l])] += eye
                    out[block, cell(g, h)] -= eye
        return out
    raise ValueError(k)


def invariants_dimension(ball: Ball, module: FiniteModule) -> int:
    """dim V^Gamma, exactly when an exact action is available."""
    p = ball.presentation
    d = module.dimension
    if p.n_gens == 0:
        return d
    if module.rational_action is not None:
        rows = []
        for mat in module.rational_action:
            for i in range(d):
                rows.append([mat[i][j] - Fraction(int(i == j)) for j in range(d)])
        return d - rational_rank(rows)
    stacked = np.vstack([m - np.eye(d) for m in module.action])
    return d - _float_rank(stacked)


# ---------------------------------------------------------------------------
# Laplacian spectra and (co)homology from the resolution.
# ---------------------------------------------------------------------------


def laplacian_spectrum(c: ChainComplexData, module: FiniteModule,
                       k: int) -> list[float]:
    """Sorted eigenvalues of the degree-k Laplacian specialized through V."""
    if not module.is_unitary:
        raise NotUnitary("spectra are only meaningful for unitary modules")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lap = laplacian(c, k, c.ball)
    action = ModuleAction(c.ball, module)
    big = action.laplacian_matrix(lap.matrix)
    assert np.abs(big - big.T).max() <= 1e-12, "specialized Laplacian must be symmetric"
    vals = np.linalg.eigvalsh(big) if big.size else np.zeros(0)
    assert vals.size == 0 or vals.min() >= -KERNEL_EPS
    return sorted(float(v) for v in vals)


def resolution_cohomology_dims(c: ChainComplexData, module: FiniteModule,
                               k: int) -> tuple[int, int]:
    """(dim H^k, dim H_k) from the specialized resolution."""
    action = ModuleAction(c.ball, module)
    d = module.dimension
    m_k = c.ranks[k] * d
    if k + 1 > c.top_degree:
        raise TruncatedDegree(f"complex does not cover degree {k + 1}")
    rank_out_co = _float_rank(action.cochain_map(c.differentials[k + 1]))
    rank_in_co = _float_rank(action.cochain_map(c.differentials[k])) if k >= 1 else 0
    dim_h_co = m_k - rank_out_co - rank_in_co
    rank_in_ho = _float_rank(action.chain_map(c.differentials[k + 1]))
    rank_out_ho = _float_rank(action.chain_map(c.differentials[k])) if k >= 1 else 0
    dim_h_ho = m_k - rank_in_ho - rank_out_ho
    return dim_h_co, dim_h_ho


# ---------------------------------------------------------------------------
# Resolution extension over finite groups (exact).
# ---------------------------------------------------------------------------


def extend_resolution(c: ChainComplexData, top: int) -> ChainComplexData:
    """Extend a finite-group complex to a genuine resolution through ``top``.

    Each new differential's columns are a minimal generating set of the
    exact kernel of the previous one, so exactness holds by construction.
    """
    if not c.ball.is_full:
        raise ValueError("resolution extension needs a finite group")
    ball = c.ball
    n = len(ball)
    table = _left_mult_table(ball)
    while c.top_degree < top:
        K = c.top_degree
        d_top = c.differentials[K]
        m_prev, m_top = d_top.rows, d_top.cols
        rows = []
        for i in range(m_prev):
            # right multiplication by D[i][j] on each slot j
            for x in range(n):
                row = [Fraction(0)] * (m_top * n)
                for j in range(m_top):
                    e = d_top.entries[i][j]
                    for g, q in e.coeffs.items():
                        # coefficient of y with y * g = x, i.e. y = x g^{-1}
                        y = table[x][ball.inverse_index[g]]
                        row[j * n + y] += q
                rows.append(row)
        kernel = rational_kernel(rows, m_top * n)
        generators = _module_generators(kernel, m_top, n, table)
        entries = [[GroupRingElement.from_pairs(
            ball, [(x, vec[j * n + x]) for x in range(n) if vec[j * n + x]])
            for vec in generators] for j in range(m_top)]
        new_d = GroupRingMatrix(ball, entries, m_top, len(generators))
        c = attach_user_differential(c, K + 1, new_d)
    return c


def _module_generators(kernel, m, n, table):
    """Greedy minimal generating set of a Q-span closed under left translation."""
    span: list[list[Fraction]] = []
    pivots: list[int] = []

    def insert(vec):
        v = list(vec)
        for piv, basis_vec in zip(pivots, span):
            if v[piv]:
                f = v[piv]
                v = [a - f * b for a, b in zip(v, basis_vec)]
        lead = next((i for i, a in enumerate(v) if a), None)
        if lead is None:
            return False
        inv = 1 / v[lead]
        v = [a * inv for a in v]
        span.append(v)
        pivots.append(lead)
        return True

    generators = []
    for vec in kernel:
        if not insert(vec):
            continue
        generators.append(vec)
        # close under all left translations
        frontier = [vec]
        while frontier:
            w = frontier.pop()
            for g in range(1, n):
                translated = [Fraction(0)] * (m * n)
                for j in range(m):
                    base = j * n
                    for x in range(n):
                        val = w[base + x]
                        if val:
                            translated[base + table[g][x]] = val
                if insert(translated):
                    frontier.append(translated)
    return generators


# ---------------------------------------------------------------------------
# Cross-checks.
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class DegreeReport:
    degree: int
    dim_cohomology: int        # independent value (bar complex or known)
    independent_source: str
    dim_resolution_cohomology: int
    dim_resolution_homology: int
    kernel_dim: int
    min_spectrum: float
    spectrum: list[float]
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)


@dataclass
class OracleReport:
    group: str
    module: str
    degrees: list[DegreeReport]

    @property
    def all_pass(self) -> bool:
        return all(d.ok for d in self.degrees)

    def render(self) -> str:
        lines = [f"oracle report: group [{self.group}], module {self.module}"]
        for d in self.degrees:
            mark = "PASS" if d.ok else "FAIL"
            spec_head = ", ".join(f"{v:.6g}" for v in d.spectrum[:6])
            if len(d.spectrum) > 6:
                spec_head += ", ..."
            lines.append(
                f"  degree {d.degree}: {mark}  dim H^k = {d.dim_cohomology} "
                f"({d.independent_source}), dim ker = {d.kernel_dim}, "
                f"min spec = {d.min_spectrum:.6g}, spectrum [{spec_head}]")
            for v in d.verdicts:
                if not v.ok:
                    lines.append(f"    FAIL {v.name}: {v.detail}")
        return "\n".join(lines)

    def to_summary(self) -> dict:
        return {
            "group": self.group,
            "module": self.module,
            "all_pass": self.all_pass,
            "degrees": [
                {
                    "degree": d.degree,
                    "dim_cohomology": d.dim_cohomology,
                    "independent_source": d.independent_source,
                    "dim_resolution_cohomology": d.dim_resolution_cohomology,
                    "dim_resolution_homology": d.dim_resolution_homology,
                    "kernel_dim": d.kernel_dim,
                    "min_spectrum": d.min_spectrum,
                    "spectrum": d.spectrum,
                    "verdicts": [
                        {"name": v.name, "ok": v.ok, "detail": v.detail}
                        for v in d.verdicts
                    ],
                    "ok": d.ok,
                }
                for d in self.degrees
            ],
        }


def cross_check(c: ChainComplexData, module: FiniteModule,
                degrees: list[int], bar_cap: int = DEFAULT_BAR_CAP) -> OracleReport:
    """Compare kernel dimensions and spectra against brute-force cohomology.

    The complex is extended (exactly) as far as the requested degrees need;
    in finite dimensions reduced and ordinary cohomology coincide, so the
    comparisons below are exactly the finite shadow of the vanishing
    criteria the certificates rely on.
    """
    module.validate(c.presentation)
    needed = max(degrees) + 1
    if c.top_degree < needed:
        c = extend_resolution(c, needed)
    reports = []
    for k in sorted(degrees):
        spectrum = laplacian_spectrum(c, module, k)
        kernel_dim = sum(1 for v in spectrum if abs(v) <= KERNEL_EPS)
        min_abs = min((abs(v) for v in spectrum), default=0.0)
        dim_co_res, dim_ho_res = resolution_cohomology_dims(c, module, k)
        if k == 0:
            independent = invariants_dimension(c.ball, module)
            source = "invariants"
        elif k <= 2:
            independent = bar_cohomology(c.ball, module, k, bar_cap)
            source = "bar complex"
        else:
            independent = 0  # finite group, characteristic zero
            source = "semisimplicity"
        verdicts = [
            Verdict("kernel dim equals cohomology dim",
                    kernel_dim == independent,
                    f"ker {kernel_dim} vs H^{k} {independent}"),
            Verdict("resolution cohomology agrees",
                    dim_co_res == independent,
                    f"resolution {dim_co_res} vs independent {independent}"),
            Verdict("homology dim agrees",
                    dim_ho_res == independent,
                    f"homology {dim_ho_res} vs cohomology {independent}"),
            Verdict("gap implies vanishing",
                    not (min_abs > KERNEL_EPS) or independent == 0,
                    f"min |spec| {min_abs:.3e} but H^{k} = {independent}"),
            Verdict("vanishing implies gap",
                    not (independent == 0) or min_abs > KERNEL_EPS,
                    f"H^{k} = 0 but min |spec| = {min_abs:.3e}"),
        ]
        reports.append(DegreeReport(
            degree=k,
            dim_cohomology=independent,
            independent_source=source,
            dim_resolution_cohomology=dim_co_res,
            dim_resolution_homology=dim_ho_res,
            kernel_dim=kernel_dim,
            min_spectrum=min(spectrum, default=0.0),
            spectrum=spectrum,
            verdicts=verdicts,
        ))
    group_name = c.presentation.canonical_text().replace("\n", "; ")
    return OracleReport(group_name, module.name, reports)
