"""Shift-operator candidates on the observed subset.

Four parametrized families: extensions of the induced subgraph Laplacian,
arbitrary Laplacians, symmetric zero-row-sum matrices, and unconstrained
matrices (used for directed fits).  Also the Schur-complement reduction of
the ambient Laplacian onto the subset, which serves as a baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParamCount, FamilyUnsupported, InvalidParams, SingularInterior
from .graphs import Graph, LAPLACIAN, shift_matrix

EXTENSION = "extension"
ANY_LAPLACIAN = "any_laplacian"
SYM_ZERO_ROW = "sym_zero_row"
FREE = "free"

FAMILIES = (EXTENSION, ANY_LAPLACIAN, SYM_ZERO_ROW, FREE)


def _pairs(n: int) -> list:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


@dataclass(frozen=True, eq=False)
class SubgraphOperator:
    """A |V0| x |V0| shift operator with its family tag.

    ``param_index`` maps each free parameter position to the matrix slot
    it controls ((u, v) pairs for the symmetric families, (row, col) for
    the free family).
    """

    family: str
    matrix: np.ndarray
    param_index: tuple = ()
    _eig: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FamilyUnsupported(f"unknown family {self.family!r}")
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParams("operator matrix must be square")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _laplacian_from_weights(n: int, pairs, weights) -> np.ndarray:
    m = np.zeros((n, n))
    for (u, v), w in zip(pairs, weights):
        m[u, v] -= w
        m[v, u] -= w
        m[u, u] += w
        m[v, v] += w
    return m


def from_params(family: str, h0: Graph, params) -> SubgraphOperator:
    """Operator from its free-parameter vector.

    Parameter counts: ``extension`` has one weight per vertex pair absent
    from the induced subgraph, the other symmetric families one per pair.
    Laplacian families clamp weights at zero; the free family takes all
    n*n entries row-major.
    """
    params = np.asarray(params, dtype=float)
    n = h0.n
    pairs = _pairs(n)
    if family == EXTENSION:
        present = {(min(s, d), max(s, d)) for s, d, _ in h0.edges}
        free_pairs = [p for p in pairs if p not in present]
        if params.shape != (len(free_pairs),):
            raise BadParamCount(f"extension family needs {len(free_pairs)} parameters")
        m = _laplacian_from_weights(n, free_pairs, np.maximum(params, 0.0))
        m += shift_matrix(Graph(n, False, h0.edges, LAPLACIAN))
        return SubgraphOperator(EXTENSION, m, tuple(free_pairs))
    if family == ANY_LAPLACIAN:
        if params.shape != (len(pairs),):
            raise BadParamCount(f"any_laplacian family needs {len(pairs)} parameters")
        m = _laplacian_from_weights(n, pairs, np.maximum(params, 0.0))
        return SubgraphOperator(ANY_LAPLACIAN, m, tuple(pairs))
    if family == SYM_ZERO_ROW:
        if params.shape != (len(pairs),):
            raise BadParamCount(f"sym_zero_row family needs {len(pairs)} parameters")
        m = _laplacian_from_weights(n, pairs, params)
        return SubgraphOperator(SYM_ZERO_ROW, m, tuple(pairs))
    if family == FREE:
        if params.shape != (n * n,):
            raise BadParamCount(f"free family needs {n * n} parameters")
        slots = tuple((i, j) for i in range(n) for j in range(n))
        return SubgraphOperator(FREE, params.reshape(n, n), slots)
    raise FamilyUnsupported(f"unknown family {family!r}")


def to_params(f0: SubgraphOperator) -> np.ndarray:
    """Free-parameter vector of an operator (inverse of ``from_params``)."""
    if f0.family == FREE:
        return f0.matrix.ravel().copy()
    return np.array([-f0.matrix[u, v] for u, v in f0.param_index])


def validate(f0: SubgraphOperator, tol: float = 1e-10) -> None:
    """Check the family's structural invariants, raising on violation."""
    m = f0.matrix
    if f0.family == FREE:
        return
    if np.abs(m - m.T).max() > 1e-12 * max(1.0, np.abs(m).max()):
        raise InvalidParams("operator matrix must be symmetric")
    if np.abs(m.sum(axis=1)).max() > tol * max(1.0, np.abs(m).max()):
        raise InvalidParams("rows must sum to zero")
    if f0.family in (EXTENSION, ANY_LAPLACIAN):
        off = m - np.diag(np.diag(m))
        if off.max() > 1e-10:
            raise InvalidParams("Laplacian off-diagonals must be nonpositive")


def kron_reduce(g: Graph, v0) -> SubgraphOperator:
    """Schur complement of the Laplacian onto ``v0``.

    Eliminates the interior block; valid whenever the graph is undirected
    and connected with a proper nonempty subset retained.
    """
    if g.directed:
        raise InvalidParams("reduction requires an undirected graph")
    ids = sorted(set(int(v) for v in v0))
    if not ids or len(ids) >= g.n:
        raise InvalidParams("subset must be proper and nonempty")
    lap = np.diag(g.adjacency().sum(axis=1)) - g.adjacency()
    rest = [v for v in range(g.n) if v not in set(ids)]
    lvv = lap[np.ix_(ids, ids)]
    lvi = lap[np.ix_(ids, rest)]
    lii = lap[np.ix_(rest, rest)]
    cond = np.linalg.cond(lii)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularInterior(f"interior block condition number {cond:.3e}")
    k = lvv - lvi @ np.linalg.solve(lii, lvi.T)
    k = (k + k.T) / 2
    return SubgraphOperator(ANY_LAPLACIAN, k, tuple(_pairs(len(ids))))


def _pattern_blocks(m: np.ndarray, tol: float) -> list:
    """Index sets of the irreducible blocks of a symmetric matrix."""
    n = m.shape[0]
    seen = [False] * n
    blocks = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        block = []
        while stack:
            i = stack.pop()
            block.append(i)
            for j in range(n):
                if not seen[j] and abs(m[i, j]) > tol:
                    seen[j] = True
                    stack.append(j)
        blocks.append(sorted(block))
    return blocks


def eigenbasis_magnitude_ordered(f0: SubgraphOperator) -> tuple:
    """Orthonormal eigenpairs sorted by |eigenvalue|, then signed value.

    Reducible operators are decomposed block by block so eigenvectors stay
    supported on irreducible blocks (otherwise repeated eigenvalues across
    blocks would come back arbitrarily mixed).  Signs follow the
    first-nonzero-positive convention.  Results are cached.
    """
    if f0._eig is not None:
        return f0._eig
    m = f0.matrix
    if np.abs(m - m.T).max() > 1e-10 * max(1.0, np.abs(m).max()):
        raise InvalidParams("eigenbasis requires a symmetric operator")
    sym = (m + m.T) / 2
    n = sym.shape[0]
    vals = np.empty(n)
    vecs = np.zeros((n, n))
    pos = 0
    for block in _pattern_blocks(sym, 1e-14):
        sub = sym[np.ix_(block, block)]
        bv, bu = np.linalg.eigh(sub)
        vals[pos:pos + len(block)] = bv
        vecs[np.ix_(block, range(pos, pos + len(block)))] = bu
        pos += len(block)
    order = np.lexsort((vals, np.abs(vals)))
    vals = vals[order]
    vecs = vecs[:, order]
    for j in range(n):
        col = vecs[:, j]
        big = np.abs(col).max()
        if big == 0:
            continue
        k = int(np.argmax(np.abs(col) > 1e-9 * big))
        if col[k] < 0:
            vecs[:, j] = -col
    out = (vals, vecs)
    object.__setattr__(f0, "_eig", out)
    return out


def project_psd(m: np.ndarray) -> np.ndarray:
    """Nearest positive-semidefinite matrix (negative eigenvalues clipped)."""
    sym = (m + m.T) / 2
    vals, vecs = np.linalg.eigh(sym)
    clipped = np.maximum(vals, 0.0)
    out = (vecs * clipped) @ vecs.T
    return (out + out.T) / 2


def project_zero_row_sum(m: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto symmetric matrices with zero row sums."""
    sym = (m + m.T) / 2
    n = sym.shape[0]
    r = sym.sum(axis=1)
    sigma = r.sum() / (2 * n)
    mu = r / n - sigma / n
    return sym - np.outer(mu, np.ones(n)) - np.outer(np.ones(n), mu)


def project_psd_zero_row_sum(m: np.ndarray, max_iters: int = 50,
                             gap: float = 1e-9) -> np.ndarray:
    """Alternate PSD and zero-row-sum projections until both nearly hold."""
    x = (m + m.T) / 2
    for _ in range(max_iters):
        x = project_zero_row_sum(project_psd(x))
        vals = np.linalg.eigvalsh(x)
        if vals.min() >= -gap and np.abs(x.sum(axis=1)).max() <= gap:
            break
    return x
