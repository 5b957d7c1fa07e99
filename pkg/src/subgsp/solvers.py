"""Fitting a subset shift operator jointly with an ambient-graph filter.

Three problems are covered: a least-squares fit over a curated set of
eigenvector pairs, spectral-norm minimization of the operator difference
by projected subgradient descent, and data-driven filter learning with
the least-squares term as a regularizer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from . import rng
from .embedding import Embedding, SubsetTuple, project
from .errors import (
    EmptyProjection,
    InfeasibleConstraint,
    InvalidParams,
    NotSingleSet,
    RankWarning,
)
from .filters import SemiFilter, assemble
from .graphs import Graph, eigendecompose, induced_subgraph, shift_matrix
from .operators import (
    ANY_LAPLACIAN,
    EXTENSION,
    FREE,
    SYM_ZERO_ROW,
    SubgraphOperator,
    from_params,
    project_psd,
    project_zero_row_sum,
)

_PROJ_EPS = 1e-10  # eigenvector projections below this norm are skipped


@dataclass(frozen=True)
class OmegaSet:
    """Eigenvector pairs retained as fitting targets.

    ``pairs[k] = (x, y)`` with ``x`` the subset restriction of the
    eigenvector ``y``.  The first pair is the constant-eigenvector pair
    whenever the shift has a constant eigenvector; subsequent pairs pass
    the cosine-similarity cut against everything already retained.
    """

    pairs: tuple
    delta: float
    indices: tuple = ()
    eigenvalues: tuple = ()

    def __len__(self) -> int:
        return len(self.pairs)


def _constant_index(vecs: np.ndarray) -> int | None:
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nrm = np.linalg.norm(col)
        if nrm > 0 and np.max(np.abs(col - col.mean())) <= 1e-8 * nrm:
            return j
    return None


def build_omega(g: Graph, e: Embedding, delta: float) -> OmegaSet:
    """Scan eigenpairs in eigenvalue-magnitude order, keeping dissimilar ones.

    A pair is kept when its projected eigenvector has nonnegligible norm
    and its cosine similarity to every retained projection stays at or
    below ``delta``.  The constant-eigenvector pair is always kept first.
    """
    if not 0 <= delta <= 1:
        raise InvalidParams("delta must lie in [0, 1]")
    spec = eigendecompose(g)
    lam, vecs = spec.eigenvalues, spec.eigenvectors
    order = list(np.lexsort((np.arange(lam.size), np.abs(lam).round(12))))
    const = _constant_index(vecs)
    if const is not None:
        order.remove(const)
        order.insert(0, const)
    first = order[0]
    x0 = project(e, vecs[:, first])
    if np.linalg.norm(x0) <= _PROJ_EPS:
        raise EmptyProjection("lead eigenvector projects to zero on the subset")
    pairs = [(x0, vecs[:, first])]
    kept_idx = [first]
    normalized = [x0 / np.linalg.norm(x0)]
    for i in order[1:]:
        x = project(e, vecs[:, i])
        nrm = np.linalg.norm(x)
        if nrm <= _PROJ_EPS:
            continue
        xn = x / nrm
        # small absolute slack so delta = 0 admits numerically orthogonal pairs
        if all(abs(np.vdot(xn, other)) <= delta + 1e-12 for other in normalized):
            pairs.append((x, vecs[:, i]))
            kept_idx.append(i)
            normalized.append(xn)
    return OmegaSet(tuple(pairs), float(delta), tuple(int(i) for i in kept_idx),
                    tuple(lam[i] for i in kept_idx))


@dataclass(frozen=True)
class SolverInfo:
    iterations: int
    residual: float
    converged: bool
    rank: int | None = None
    restarts: int = 1


@dataclass(frozen=True)
class FitResult:
    """Solved (filter, operator) pair with its objective value."""

    filter: SemiFilter | None
    operator: SubgraphOperator
    loss_value: float
    solver_info: SolverInfo


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the projected-subgradient operator-difference solver."""

    max_iters: int = 5000
    step_c: float = 1.0
    tol: float = 1e-8
    restarts: int = 5
    seed: int = 0
    inner_iters: int = 50
    warm_start: bool = True
    warm_delta: float = 1.0


def default_pins(t: SubsetTuple) -> dict:
    """Pin the degree-1 coefficient of the first set to one."""
    return {(0, 1): 1.0}


def _coeff_slots(t: SubsetTuple) -> list:
    return [(i, j) for i, d in enumerate(t.degrees) for j in range(d + 1)]


def _check_pins(t: SubsetTuple, fixed: dict) -> dict:
    slots = set(_coeff_slots(t))
    out = {}
    for key, val in fixed.items():
        key = (int(key[0]), int(key[1]))
        if key not in slots:
            raise InfeasibleConstraint(f"no coefficient slot {key} in the tuple")
        out[key] = float(val)
    return out


def _filter_vectors(g: Graph, e: Embedding, t: SubsetTuple, y: np.ndarray) -> dict:
    """Subset restriction of each masked shift power applied to ``y``."""
    m = shift_matrix(g)
    max_d = max(t.degrees)
    powers = [np.asarray(y)]
    for _ in range(max_d):
        powers.append(m @ powers[-1])
    v0 = list(e.v0)
    masks = []
    for s in t.sets:
        masks.append(np.array([1.0 if v in s else 0.0 for v in v0]))
    out = {}
    for i, d in enumerate(t.degrees):
        for j in range(d + 1):
            out[(i, j)] = masks[i] * powers[j][v0]
    return out


def _operator_columns(family: str, h0: Graph, support=None) -> tuple:
    """Free-parameter slots of the operator family and its constant part."""
    n = h0.n
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    const = np.zeros((n, n))
    if family == EXTENSION:
        present = {(min(s, d), max(s, d)) for s, d, _ in h0.edges}
        slots = [p for p in pairs if p not in present]
        adj = h0.adjacency()
        adj = (adj + adj.T) / 2 if h0.directed else adj
        const = np.diag(adj.sum(axis=1)) - adj
    elif family in (ANY_LAPLACIAN, SYM_ZERO_ROW):
        slots = pairs
    elif family == FREE:
        slots = [(i, j) for i in range(n) for j in range(n)]
    else:
        raise InvalidParams(f"unknown family {family!r}")
    if support is not None:
        keep = {(min(u, v), max(u, v)) for u, v in support}
        if family == FREE:
            raise InvalidParams("support restriction applies to symmetric families")
        slots = [p for p in slots if p in keep]
    return slots, const


def _operator_block(family: str, slots, x: np.ndarray) -> np.ndarray:
    """Columns of d(F0 x)/d(param) for one subset signal ``x``."""
    n = x.shape[0]
    cols = np.zeros((n, len(slots)), dtype=x.dtype)
    if family == FREE:
        for c, (i, j) in enumerate(slots):
            cols[i, c] = x[j]
    else:
        for c, (u, v) in enumerate(slots):
            d = x[u] - x[v]
            cols[u, c] = d
            cols[v, c] = -d
    return cols


def _stack_real(a: np.ndarray, b: np.ndarray) -> tuple:
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        return (np.vstack([a.real, a.imag]), np.concatenate([b.real, b.imag]))
    return a, b


def _operator_from_solution(family: str, h0: Graph, slots, values) -> SubgraphOperator:
    full_slots, _ = _operator_columns(family, h0, None)
    lookup = dict(zip(slots, values))
    params = np.array([lookup.get(p, 0.0) for p in full_slots])
    if family == FREE:
        return from_params(FREE, h0, params)
    if family in (ANY_LAPLACIAN, EXTENSION):
        params = np.maximum(params, 0.0)
    return from_params(family, h0, params)


def _filter_from_solution(t: SubsetTuple, fixed: dict, free_slots, values) -> SemiFilter:
    lookup = dict(zip(free_slots, values))
    coeffs, mask = [], []
    for i, d in enumerate(t.degrees):
        row, mrow = [], []
        for j in range(d + 1):
            if (i, j) in fixed:
                row.append(fixed[(i, j)])
                mrow.append(True)
            else:
                row.append(lookup.get((i, j), 0.0))
                mrow.append(False)
        coeffs.append(tuple(row))
        mask.append(tuple(mrow))
    return SemiFilter(t, tuple(coeffs), tuple(mask))


def _assemble_system(g, e, t, family, pairs, fixed, support, data=(), beta=1.0):
    """Stacked linear system for the quadratic objectives.

    ``pairs`` contributes sqrt(beta)-weighted consistency rows, ``data``
    contributes plain regression rows (operator block only).
    """
    h0, _ = induced_subgraph(g, e.v0)
    slots, const = _operator_columns(family, h0, support)
    coeff_slots = [s for s in _coeff_slots(t) if s not in fixed]
    blocks_a, blocks_b = [], []
    w = np.sqrt(beta)
    for x, y in pairs:
        vecs = _filter_vectors(g, e, t, y)
        op_cols = _operator_block(family, slots, x)
        f_cols = np.column_stack([-vecs[s] for s in coeff_slots]) if coeff_slots \
            else np.zeros((len(x), 0), dtype=op_cols.dtype)
        rhs = sum(fixed[s] * vecs[s] for s in fixed) if fixed else np.zeros_like(x)
        rhs = rhs - const @ x
        blocks_a.append(w * np.hstack([op_cols, f_cols]))
        blocks_b.append(w * rhs)
    for x, xp in data:
        op_cols = _operator_block(family, slots, np.asarray(x))
        f_cols = np.zeros((len(x), len(coeff_slots)), dtype=op_cols.dtype)
        blocks_a.append(np.hstack([op_cols, f_cols]))
        blocks_b.append(np.asarray(xp) - const @ np.asarray(x))
    a = np.vstack(blocks_a)
    b = np.concatenate(blocks_b)
    a, b = _stack_real(a, b)
    return a, b, slots, coeff_slots, h0


def _solve_linear_system(a, b, family, n_op):
    """Minimum-norm or nonnegativity-bounded least squares on the stack."""
    if family in (SYM_ZERO_ROW, FREE):
        sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
        if rank < a.shape[1]:
            warnings.warn("rank-deficient design matrix; minimum-norm solution returned",
                          RankWarning, stacklevel=3)
        iters = 1
        converged = True
    else:
        lb = np.concatenate([np.zeros(n_op), np.full(a.shape[1] - n_op, -np.inf)])
        ub = np.full(a.shape[1], np.inf)
        res = lsq_linear(a, b, bounds=(lb, ub), tol=1e-12)
        sol = res.x
        rank = None
        iters = int(getattr(res, "nit", 1) or 1)
        converged = res.status > 0
    resid = a @ sol - b
    return sol, float(resid @ resid), rank, iters, converged


def solve_least_squares(g: Graph, e: Embedding, t: SubsetTuple, family: str,
                        omega: OmegaSet, fixed_coeffs: dict | None = None,
                        support=None) -> FitResult:
    """Joint least-squares fit of operator parameters and filter coefficients.

    The objective sums, over the retained eigenvector pairs, the squared
    mismatch between the operator acting on the projected signal and the
    projection of the filtered signal.  Symmetric zero-row-sum and free
    families solve one exact linear system with minimum-norm tie-breaking;
    Laplacian families use a bounded least-squares solve to keep weights
    nonnegative.  At least one filter coefficient must be pinned (default:
    the degree-1 coefficient of the first set equals 1).
    """
    fixed = _check_pins(t, default_pins(t) if fixed_coeffs is None else fixed_coeffs)
    if not fixed:
        raise InfeasibleConstraint("at least one filter coefficient must be pinned")
    a, b, slots, coeff_slots, h0 = _assemble_system(
        g, e, t, family, omega.pairs, fixed, support)
    sol, s2, rank, iters, converged = _solve_linear_system(a, b, family, len(slots))
    op = _operator_from_solution(family, h0, slots, sol[:len(slots)])
    filt = _filter_from_solution(t, fixed, coeff_slots, sol[len(slots):])
    info = SolverInfo(iterations=iters, residual=float(np.sqrt(s2)),
                      converged=converged, rank=rank)
    return FitResult(filt, op, float(s2), info)


def least_squares_objective(g: Graph, e: Embedding, filt: SemiFilter,
                            f0: SubgraphOperator, omega: OmegaSet) -> float:
    """Recompute the least-squares sum from an explicit pair."""
    m = assemble(filt, g)
    total = 0.0
    for x, y in omega.pairs:
        r = f0.matrix @ x - project(e, m @ y)
        total += float(np.real(np.vdot(r, r)))
    return total


def solve_filter_learning(g: Graph, e: Embedding, t: SubsetTuple, family: str,
                          data, beta: float, omega: OmegaSet,
                          fixed_coeffs: dict | None = None,
                          support=None) -> FitResult:
    """Fit the operator to observed input/output pairs with consistency weight.

    Minimizes the sum of squared regression residuals over ``data`` plus
    ``beta`` times the least-squares consistency sum over ``omega``.  With
    ``beta = 0`` the filter drops out entirely and the result carries no
    filter.
    """
    if beta < 0:
        raise InvalidParams("beta must be nonnegative")
    if beta == 0:
        fixed = {}
        pairs = ()
    else:
        fixed = _check_pins(t, default_pins(t) if fixed_coeffs is None else fixed_coeffs)
        pairs = omega.pairs
    a, b, slots, coeff_slots, h0 = _assemble_system(
        g, e, t, family, pairs, fixed, support, data=data, beta=beta)
    if beta == 0 and coeff_slots:
        keep = len(slots)
        a = a[:, :keep]
        coeff_slots = []
    sol, obj, rank, iters, converged = _solve_linear_system(a, b, family, len(slots))
    op = _operator_from_solution(family, h0, slots, sol[:len(slots)])
    filt = None if beta == 0 else _filter_from_solution(t, fixed, coeff_slots, sol[len(slots):])
    info = SolverInfo(iterations=iters, residual=float(np.sqrt(obj)),
                      converged=converged, rank=rank)
    return FitResult(filt, op, float(obj), info)


def filter_learning_objective(g: Graph, e: Embedding, filt, f0, data, beta,
                              omega) -> float:
    total = 0.0
    for x, xp in data:
        r = f0.matrix @ np.asarray(x) - np.asarray(xp)
        total += float(np.real(np.vdot(r, r)))
    if beta > 0 and filt is not None:
        total += beta * least_squares_objective(g, e, filt, f0, omega)
    return total


def recovery_error(f0: SubgraphOperator, eval_pairs) -> float:
    """Mean regression error of an operator on held-out subset pairs."""
    errs = [float(np.linalg.norm(np.asarray(xp) - f0.matrix @ np.asarray(x)))
            for x, xp in eval_pairs]
    return float(np.mean(errs))


# ---------------------------------------------------------------------------
# Operator-difference (spectral norm) minimization

def operator_difference_matrix(g: Graph, e: Embedding, filt_matrix: np.ndarray,
                               f0: SubgraphOperator) -> np.ndarray:
    """The |V0| x |V| mismatch operator of a candidate pair."""
    v0 = list(e.v0)
    z = np.zeros((len(v0), g.n), dtype=np.result_type(filt_matrix, f0.matrix))
    z[:, v0] = f0.matrix.astype(z.dtype)
    z -= filt_matrix[v0, :]
    return z


def operator_difference_norm(g: Graph, e: Embedding, filt: SemiFilter | np.ndarray,
                             f0: SubgraphOperator) -> float:
    """Spectral norm of the commutation mismatch of a pair."""
    m = assemble(filt, g) if isinstance(filt, SemiFilter) else np.asarray(filt)
    return float(np.linalg.norm(operator_difference_matrix(g, e, m, f0), 2))


def lower_bound(g: Graph, e: Embedding, f: SemiFilter, f0: SubgraphOperator) -> float:
    """Spectral mismatch floor for a single-set filter and a fixed operator.

    For every shift eigenvalue, the operator spectrum must come within the
    filter polynomial's value there, weighted by how much of the
    eigenvector survives projection.  The max of those gaps lower-bounds
    the operator-difference norm of the pair.
    """
    if f.tuple.k != 1 or f.tuple.sets[0] != frozenset(e.v0):
        raise NotSingleSet("bound requires a single set equal to the observed subset")
    spec = eigendecompose(g)
    mu = np.linalg.eigvalsh((f0.matrix + f0.matrix.T) / 2)
    coeffs = f.coeffs[0]
    best = 0.0
    for i, lam in enumerate(spec.eigenvalues):
        q = 0.0
        power = 1.0
        for a in coeffs:
            q = q + a * power
            power = power * lam
        gap = np.min(np.abs(mu - q))
        weight = float(np.linalg.norm(project(e, spec.eigenvectors[:, i])))
        best = max(best, float(gap * weight))
    return best


class _PatternProjector:
    """Orthogonal projection onto symmetric zero-row-sum matrices with a
    fixed off-diagonal support pattern (prefactored normal equations)."""

    def __init__(self, n: int, pattern):
        from scipy.linalg import cho_factor, cho_solve

        self.n = n
        self.pattern = list(pattern)
        k = len(self.pattern)
        gram = 4.0 * np.eye(k)
        for a in range(k):
            ua, va = self.pattern[a]
            sa = {ua, va}
            for b in range(a + 1, k):
                ub, vb = self.pattern[b]
                shared = len(sa & {ub, vb})
                if shared == 1:
                    gram[a, b] = gram[b, a] = 1.0
        self._cho = cho_factor(gram)
        self._solve = cho_solve

    def __call__(self, m: np.ndarray) -> np.ndarray:
        sym = (m + m.T) / 2
        rhs = np.array([sym[u, u] + sym[v, v] - sym[u, v] - sym[v, u]
                        for u, v in self.pattern])
        w = self._solve(self._cho, rhs)
        out = np.zeros_like(sym)
        for (u, v), val in zip(self.pattern, w):
            out[u, v] -= val
            out[v, u] -= val
            out[u, u] += val
            out[v, v] += val
        return out


def _project_feasible(m, projector, inner_iters, gap=1e-9):
    x = (m + m.T) / 2
    for _ in range(inner_iters):
        x = projector(project_psd(x))
        ok_psd = np.linalg.eigvalsh(x).min() >= -gap
        ok_row = np.abs(x.sum(axis=1)).max() <= gap
        if ok_psd and ok_row:
            break
    return x


def solve_operator_difference(g: Graph, e: Embedding, t: SubsetTuple,
                              fixed_coeffs: dict | None = None,
                              opts: SolverOptions = SolverOptions(),
                              family: str = SYM_ZERO_ROW,
                              support=None) -> FitResult:
    """Minimize the spectral norm of the commutation mismatch.

    Projected subgradient descent with diminishing step c/sqrt(t): the
    subgradient comes from the top singular pair of the mismatch operator,
    and after each step the operator iterate is projected back onto its
    feasible set (positive semidefinite with zero row sums for the
    symmetric family, nonnegative weights for the Laplacian families).
    Multi-start keeps the best feasible iterate; the first start is warm
    from the least-squares fit.
    """
    fixed = _check_pins(t, default_pins(t) if fixed_coeffs is None else fixed_coeffs)
    if not fixed:
        raise InfeasibleConstraint("at least one filter coefficient must be pinned")
    h0, _ = induced_subgraph(g, e.v0)
    n0 = h0.n
    v0 = list(e.v0)
    slots, const = _operator_columns(family, h0, support)
    coeff_slots = [s for s in _coeff_slots(t) if s not in fixed]

    # fixed |V0| x |V| basis for the filter side
    m_shift = shift_matrix(g)
    max_d = max(t.degrees)
    powers = [np.eye(g.n)]
    for _ in range(max_d):
        powers.append(m_shift @ powers[-1])
    basis = {}
    for i, s in enumerate(t.sets):
        mask = np.array([1.0 if v in s else 0.0 for v in v0])
        for j in range(t.degrees[i] + 1):
            basis[(i, j)] = mask[:, None] * powers[j][v0, :]
    pf_fixed = sum(val * basis[slot] for slot, val in fixed.items())

    if family == SYM_ZERO_ROW:
        if support is None:
            projector = project_zero_row_sum
        else:
            projector = _PatternProjector(n0, [(min(u, v), max(u, v)) for u, v in support])
    elif family in (ANY_LAPLACIAN, EXTENSION):
        projector = None
    else:
        raise InvalidParams("operator-difference solver supports symmetric families only")

    def op_matrix(params):
        if family == SYM_ZERO_ROW:
            return params  # matrix iterate
        mat = const.copy()
        for (u, v), w in zip(slots, params):
            mat[u, v] -= w
            mat[v, u] -= w
            mat[u, u] += w
            mat[v, v] += w
        return mat

    def loss_and_grad(f0_mat, coeffs):
        pf = pf_fixed + sum(c * basis[slot] for slot, c in zip(coeff_slots, coeffs)) \
            if coeff_slots else pf_fixed
        z = np.zeros((n0, g.n))
        z[:, v0] = f0_mat
        z -= pf
        u_svd, s_svd, vt_svd = np.linalg.svd(z)
        u1, v1 = u_svd[:, 0], vt_svd[0]
        g_f0 = np.outer(u1, v1[v0])
        g_coeff = np.array([-u1 @ (basis[slot] @ v1) for slot in coeff_slots])
        return float(s_svd[0]), g_f0, g_coeff

    warm = None
    if opts.warm_start:
        omega = build_omega(g, e, opts.warm_delta)
        ls = solve_least_squares(g, e, t, family, omega, fixed, support=support)
        warm_coeffs = np.array([ls.filter.coeffs[i][j] for i, j in coeff_slots])
        warm = (ls.operator.matrix, warm_coeffs)

    best = None
    best_track = []
    for restart in range(max(1, opts.restarts)):
        gen = rng.stream(opts.seed, restart)
        if restart == 0 and warm is not None:
            f0_init, coeffs = warm[0].copy(), warm[1].copy()
        elif restart <= 1:
            f0_init = np.zeros((n0, n0))
            coeffs = np.zeros(len(coeff_slots))
        else:
            f0_init = 0.1 * gen.standard_normal((n0, n0))
            f0_init = (f0_init + f0_init.T) / 2
            coeffs = 0.1 * gen.standard_normal(len(coeff_slots))
        if family == SYM_ZERO_ROW:
            f0_mat = _project_feasible(f0_init, projector, opts.inner_iters)
            params = None
        else:
            params = np.maximum(_extract_weights(f0_init, const, slots), 0.0)
        track = []
        for it in range(1, opts.max_iters + 1):
            mat = f0_mat if family == SYM_ZERO_ROW else op_matrix(params)
            loss, g_f0, g_coeff = loss_and_grad(mat, coeffs)
            track.append(loss)
            if best is None or loss < best[0]:
                best = (loss, mat.copy(), coeffs.copy())
                best_track = track
            step = opts.step_c / np.sqrt(it)
            coeffs = coeffs - step * g_coeff
            if family == SYM_ZERO_ROW:
                f0_mat = _project_feasible(
                    f0_mat - step * (g_f0 + g_f0.T) / 2, projector, opts.inner_iters)
            else:
                grad_p = np.array([
                    -g_f0[u, v] - g_f0[v, u] + g_f0[u, u] + g_f0[v, v]
                    for u, v in slots])
                params = np.maximum(params - step * grad_p, 0.0)
            if loss <= opts.tol:
                break

    loss, mat, coeffs = best
    window = best_track[-101:] if len(best_track) > 100 else best_track
    decrease = (window[0] - min(window)) if window else 0.0
    converged = decrease <= 1e-6 * max(1.0, loss) or loss <= opts.tol
    if family == SYM_ZERO_ROW:
        op = SubgraphOperator(SYM_ZERO_ROW, mat,
                              tuple((u, v) for u in range(n0) for v in range(u + 1, n0)))
    else:
        op = _operator_from_solution(family, h0, slots,
                                     _extract_weights(mat, const, slots))
    filt = _filter_from_solution(t, fixed, coeff_slots, coeffs)
    info = SolverInfo(iterations=opts.max_iters, residual=loss,
                      converged=converged, restarts=max(1, opts.restarts))
    return FitResult(filt, op, float(loss), info)


def _extract_weights(mat, const, slots):
    diff = mat - const
    return np.array([-diff[u, v] for u, v in slots])
