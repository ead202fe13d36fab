"""First-order splitting solver for the encoded Gram problems.

The problem is  maximize eps  subject to  A [svec(Q); eps] = b,  Q PSD,
eps <= cap.  ADMM alternates an affine projection (cached normal-equation
pseudoinverse, so duplicate constraint rows are harmless) with a PSD-cone
projection by dense symmetric eigendecomposition; the linear objective
enters through a constant shift in the affine step.  No randomness is
used anywhere, so runs are bit-reproducible; the seed is only recorded.

Residuals in the emitted solution are recomputed from the returned
(Q, eps) pair, never trusted from loop bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import SOSProblem
from .errors import DimensionMismatch, SolutionParseError

STATUS_CONVERGED = "Converged"
STATUS_MAXITER = "MaxIter"
STATUS_DIVERGED = "Diverged"
STATUS_DEGENERATE = "Degenerate"

_SQRT2 = float(np.sqrt(2.0))


@dataclass
class SolverConfig:
    max_iterations: int = 50_000
    tolerance: float = 1e-9
    rho: float = 1.0
    alpha: float = 1.6          # over-relaxation, in [1, 2)
    seed: int = 0
    adapt_every: int = 50
    max_gram_size: int = 4_000

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 1.0 <= self.alpha < 2.0:
            raise ValueError("alpha must lie in [1, 2)")


@dataclass
class ResidualReport:
    constraint_infnorm: float
    psd_violation: float
    loop_claimed: float


@dataclass
class GramSolution:
    gram: np.ndarray
    epsilon: float
    residuals: ResidualReport
    iterations: int
    status: str
    seed: int = 0

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


def _svec_indices(n):
    pairs = [(p, q) for p in range(n) for q in range(p, n)]
    return pairs, {pq: i for i, pq in enumerate(pairs)}


def _svec(mat, pairs):
    out = np.empty(len(pairs))
    for i, (p, q) in enumerate(pairs):
        out[i] = mat[p, p] if p == q else mat[p, q] * _SQRT2
    return out


def _smat(vec, pairs, n):
    out = np.zeros((n, n))
    for i, (p, q) in enumerate(pairs):
        if p == q:
            out[p, p] = vec[i]
        else:
            v = vec[i] / _SQRT2
            out[p, q] = v
            out[q, p] = v
    return out


def _build_system(problem: SOSProblem):
    n = problem.gram_size
    pairs, pair_id = _svec_indices(n)
    d = len(pairs)
    m = len(problem.constraints)
    a = np.zeros((m, d + 1))
    b = np.zeros(m)
    for r, con in enumerate(problem.constraints):
        for p, q, coeff in con.coeffs:
            col = pair_id[(p, q)]
            value = float(coeff)
            a[r, col] = value if p == q else value / _SQRT2
        a[r, d] = -float(con.c1)
        b[r] = float(con.c0)
    return a, b, pairs, d


def _project_psd(mat):
    sym = (mat + mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    clipped = np.clip(vals, 0.0, None)
    return (vecs * clipped) @ vecs.T


def solve(problem: SOSProblem, cfg: SolverConfig | None = None) -> GramSolution:
    """Maximize eps over the PSD-feasible set; eps is a lower estimate."""
    cfg = cfg or SolverConfig()
    n = problem.gram_size
    if n > cfg.max_gram_size:
        raise DimensionMismatch(
            f"gram size {n} exceeds the configured cap {cfg.max_gram_size}")
    if problem.degenerate or n == 0 or not problem.constraints:
        return GramSolution(
            gram=np.zeros((n, n)), epsilon=0.0,
            residuals=ResidualReport(0.0, 0.0, 0.0),
            iterations=0, status=STATUS_DEGENERATE, seed=cfg.seed)

    a, b, pairs, d = _build_system(problem)
    cap = float(problem.epsilon_cap)
    gram_inv = np.linalg.pinv(a @ a.T)
    at = a.T

    def project_affine(w):
        return w - at @ (gram_inv @ (a @ w - b))

    rho = cfg.rho
    x = np.zeros(d + 1)
    z = np.zeros(d + 1)
    u = np.zeros(d + 1)
    shift = np.zeros(d + 1)
    shift[d] = 1.0

    b_scale = 1.0 + float(np.max(np.abs(b)))
    status = STATUS_MAXITER
    it = 0
    claimed = np.inf
    for it in range(1, cfg.max_iterations + 1):
        x = project_affine(z - u + shift / rho)
        x_relaxed = cfg.alpha * x + (1.0 - cfg.alpha) * z
        z_prev = z
        y = x_relaxed + u
        z = np.empty_like(y)
        z[:d] = _svec(_project_psd(_smat(y[:d], pairs, n)), pairs)
        z[d] = min(y[d], cap)
        u = u + x_relaxed - z

        if not np.all(np.isfinite(x)):
            status = STATUS_DIVERGED
            break
        if it % cfg.adapt_every == 0 or it == cfg.max_iterations:
            gap = float(np.max(np.abs(x - z)))
            dual = rho * float(np.max(np.abs(z - z_prev)))
            mixed = np.concatenate([z[:d], x[d:]])
            constr = float(np.max(np.abs(a @ mixed - b)))
            x_scale = 1.0 + float(np.max(np.abs(z)))
            claimed = constr
            if (constr <= cfg.tolerance * b_scale
                    and gap <= 1e3 * cfg.tolerance * x_scale
                    and dual <= 1e3 * cfg.tolerance * x_scale):
                status = STATUS_CONVERGED
                break
            if gap > 10.0 * dual and rho < 1e6:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * gap and rho > 1e-6:
                rho /= 2.0
                u *= 2.0

    gram = _project_psd(_smat(z[:d], pairs, n))
    epsilon = float(x[d])
    mixed = np.concatenate([_svec(gram, pairs), [epsilon]])
    constraint = float(np.max(np.abs(a @ mixed - b))) if len(b) else 0.0
    eigs = np.linalg.eigvalsh((gram + gram.T) / 2.0)
    psd_violation = float(max(0.0, -eigs.min())) if n else 0.0
    if status == STATUS_CONVERGED and not np.isfinite(constraint):
        status = STATUS_DIVERGED
    return GramSolution(
        gram=gram, epsilon=epsilon,
        residuals=ResidualReport(constraint, psd_violation,
                                 claimed if np.isfinite(claimed) else constraint),
        iterations=it, status=status, seed=cfg.seed)


# ---------------------------------------------------------------------------
# Plain-text solution interchange: "epsilon <float>" then the row-major
# lower triangle of Q, one entry per line.
# ---------------------------------------------------------------------------


def write_solution(sol: GramSolution) -> str:
    n = sol.gram.shape[0]
    lines = [f"epsilon {sol.epsilon!r}"]
    for i in range(n):
        for j in range(i + 1):
            lines.append(repr(float(sol.gram[i, j])))
    return "\n".join(lines) + "\n"


def import_solution(problem: SOSProblem, text: str,
                    tolerance: float = 1e-6) -> GramSolution:
    """Parse an external solution and recompute all residuals internally."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("epsilon"):
        raise SolutionParseError("solution must start with 'epsilon <value>'")
    try:
        epsilon = float(lines[0].split()[1])
    except (IndexError, ValueError):
        raise SolutionParseError("bad epsilon line")
    n = problem.gram_size
    expected = n * (n + 1) // 2
    values = []
    for ln in lines[1:]:
        try:
            values.append(float(ln))
        except ValueError:
            raise SolutionParseError(f"bad matrix entry {ln!r}")
    if len(values) != expected:
        raise DimensionMismatch(
            f"expected {expected} lower-triangle entries, got {len(values)}")
    gram = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1):
            gram[i, j] = values[k]
            gram[j, i] = values[k]
            k += 1

    a, b, pairs, d = _build_system(problem)
    mixed = np.concatenate([_svec(gram, pairs), [epsilon]])
    constraint = float(np.max(np.abs(a @ mixed - b))) if len(b) else 0.0
    eigs = np.linalg.eigvalsh(gram) if n else np.zeros(0)
    psd_violation = float(max(0.0, -eigs.min())) if n else 0.0
    ok = constraint <= tolerance and psd_violation <= tolerance
    return GramSolution(
        gram=gram, epsilon=epsilon,
        residuals=ResidualReport(constraint, psd_violation, constraint),
        iterations=0,
        status=STATUS_CONVERGED if ok else STATUS_DIVERGED)
