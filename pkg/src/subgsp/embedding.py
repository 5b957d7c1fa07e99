"""The observed vertex subset inside the ambient graph.

Holds the projection/zero-extension maps, the hop-based subset tuple
construction used to shape filter families, refinement/essentiality
predicates, and the numerical dimension of a filter family.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DisconnectedGraph, InvalidParams
from .graphs import Graph, diameter, hop_distances, shift_matrix


@dataclass(frozen=True)
class Embedding:
    """Ordered vertex subset ``v0`` of a graph plus its hop structure.

    ``hop_class[j]`` is the smallest i >= 1 such that ``v0[j]`` has another
    subset vertex at hop distance exactly i (inf when none is reachable).
    """

    graph: Graph
    v0: tuple
    hop_class: tuple = field(default=(), compare=False)

    def __post_init__(self):
        ids = list(self.v0)
        if not ids:
            raise InvalidParams("v0 must be nonempty")
        if any(ids[i] >= ids[i + 1] for i in range(len(ids) - 1)):
            raise InvalidParams("v0 ids must be strictly increasing")
        if ids[0] < 0 or ids[-1] >= self.graph.n:
            raise InvalidParams(f"v0 ids must lie in [0,{self.graph.n})")
        if not self.hop_class:
            object.__setattr__(self, "hop_class", self._compute_hop_class())

    def _compute_hop_class(self) -> tuple:
        members = set(self.v0)
        out = []
        for v in self.v0:
            dist = hop_distances(self.graph, [v])
            others = [dist[u] for u in members if u != v and np.isfinite(dist[u])]
            out.append(min(others) if others else np.inf)
        return tuple(out)

    @property
    def size(self) -> int:
        return len(self.v0)

    def positions(self) -> dict:
        return {v: j for j, v in enumerate(self.v0)}


def project(e: Embedding, y: np.ndarray) -> np.ndarray:
    """Restrict a full-graph signal to the observed subset."""
    y = np.asarray(y)
    if y.shape[-1] != e.graph.n:
        raise DimensionMismatch(f"expected length {e.graph.n}, got {y.shape[-1]}")
    return y[..., list(e.v0)]


def extend_by_zero(e: Embedding, x: np.ndarray) -> np.ndarray:
    """Extend a subset signal to the full graph, zero off the subset."""
    x = np.asarray(x)
    if x.shape[-1] != e.size:
        raise DimensionMismatch(f"expected length {e.size}, got {x.shape[-1]}")
    y = np.zeros(x.shape[:-1] + (e.graph.n,), dtype=x.dtype)
    y[..., list(e.v0)] = x
    return y


@dataclass(frozen=True)
class SubsetTuple:
    """Tuple of vertex sets with one polynomial degree per set."""

    sets: tuple  # (frozenset, ...)
    degrees: tuple

    def __post_init__(self):
        if len(self.sets) != len(self.degrees):
            raise InvalidParams("sets and degrees must have equal length")
        object.__setattr__(self, "sets", tuple(frozenset(int(v) for v in s) for s in self.sets))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        for s, d in zip(self.sets, self.degrees):
            if not s:
                raise InvalidParams("subset tuple sets must be nonempty")
            if d < 0:
                raise InvalidParams("degrees must be nonnegative")

    @property
    def k(self) -> int:
        return len(self.sets)

    def union(self) -> frozenset:
        u = frozenset()
        for s in self.sets:
            u |= s
        return u


def build_cvd(e: Embedding, r: int = 0) -> SubsetTuple:
    """Hop-layered subset tuple for the filter family on the subset.

    Layer 1 holds subset vertices with a 1-hop subset neighbor together
    with those neighbors; layer i >= 2 holds vertices whose nearest subset
    neighbor is exactly i hops away plus their i-hop subset neighbors.
    Nonempty layers are emitted in ascending i with degree i + r, degrees
    capped at |V| - 1.  Subset vertices unreachable from the rest of the
    subset are excluded (possible only on disconnected graphs, where this
    raises anyway).
    """
    if r < 0:
        raise InvalidParams("r must be nonnegative")
    g = e.graph
    delta = diameter(g)  # raises DisconnectedGraph when infinite
    members = set(e.v0)
    dist_from = {v: hop_distances(g, [v]) for v in e.v0}
    layers = {}
    for j, v in enumerate(e.v0):
        i = e.hop_class[j]
        if not np.isfinite(i):
            continue
        i = int(i)
        layer = layers.setdefault(i, set())
        layer.add(v)
        # i-hop subset neighbors of v
        for u in e.v0:
            if u != v and dist_from[v][u] == i:
                layer.add(u)
    sets, degrees = [], []
    cap = g.n - 1
    for i in range(1, delta + 1):
        if i in layers and layers[i]:
            sets.append(frozenset(layers[i]))
            degrees.append(min(i + r, cap))
    if not sets:
        raise DisconnectedGraph("no subset vertex can reach another subset vertex")
    return SubsetTuple(tuple(sets), tuple(degrees))


def isolated_in_subset(e: Embedding) -> tuple:
    """Subset vertices with no other subset vertex reachable (flagged, not tupled)."""
    return tuple(v for v, h in zip(e.v0, e.hop_class) if not np.isfinite(h))


def refine_default(t: SubsetTuple) -> SubsetTuple:
    """Append set differences of consecutive layers, degrees inherited.

    For each layer ``V_i`` the difference ``U_i = V_i \\ V_{i+1}`` is added
    with the same degree as ``V_i``; empty or duplicate (set, degree)
    entries are skipped and the original sets are retained.
    """
    sets = list(t.sets)
    degrees = list(t.degrees)
    present = set(zip(sets, degrees))
    for i, (s, d) in enumerate(zip(t.sets, t.degrees)):
        nxt = t.sets[i + 1] if i + 1 < t.k else frozenset()
        u = s - nxt
        if u and (u, d) not in present:
            sets.append(u)
            degrees.append(d)
            present.add((u, d))
    return SubsetTuple(tuple(sets), tuple(degrees))


def is_essential(t: SubsetTuple) -> bool:
    """True iff every set owns a vertex outside all other sets."""
    for i, s in enumerate(t.sets):
        rest = frozenset()
        for j, o in enumerate(t.sets):
            if j != i:
                rest |= o
        if not (s - rest):
            return False
    return True


def is_refinement(c_prime: SubsetTuple, c: SubsetTuple) -> bool:
    """True iff ``c_prime`` refines ``c``.

    Requires equal unions, every refined set inside some coarse set, and
    disjointness of distinct refined sets sharing a coarse parent.
    """
    if c_prime.union() != c.union():
        return False
    for sp in c_prime.sets:
        if not any(sp <= s for s in c.sets):
            return False
    for s in c.sets:
        inside = [sp for sp in set(c_prime.sets) if sp <= s]
        for a in range(len(inside)):
            for b in range(a + 1, len(inside)):
                if inside[a] & inside[b]:
                    return False
    return True


def family_dimension(g: Graph, t: SubsetTuple) -> int:
    """Dimension of the filter family spanned by masked shift powers.

    Computed as the numerical rank of the matrix whose columns are the
    vectorized masked powers; the shift is rescaled by its largest
    singular value first (span-invariant) to keep high powers conditioned.
    """
    m = shift_matrix(g).astype(float)
    scale = np.linalg.norm(m, 2)
    if scale > 0:
        # affine rescale to spectrum in [-1, 1]: span-preserving and far
        # better conditioned for high powers than raw shift powers
        m = 2.0 * m / scale - np.eye(g.n)
    rows = sorted(t.union())
    max_d = max(t.degrees)
    if max_d >= g.n:
        raise InvalidParams("degrees must be smaller than the vertex count")
    powers = [np.eye(g.n, dtype=m.dtype)]
    for _ in range(max_d):
        powers.append(m @ powers[-1])
    cols = []
    for s, d in zip(t.sets, t.degrees):
        mask = np.array([v in s for v in rows])
        for j in range(d + 1):
            block = powers[j][rows, :]
            cols.append((block * mask[:, None]).ravel())
    a = np.column_stack(cols)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int((sv > 1e-8 * sv[0]).sum())


def check_generic(g: Graph) -> tuple:
    """(ok, min eigenvalue gap, min |eigenvector component|) of the shift.

    The dimension formulas assume simple eigenvalues and nowhere-zero
    eigenvectors; a warning is emitted when either margin degenerates.
    """
    from .graphs import eigendecompose

    spec = eigendecompose(g)
    vals = np.sort(spec.eigenvalues.real) if not spec.is_complex else spec.eigenvalues
    if spec.is_complex:
        gaps = [abs(a - b) for i, a in enumerate(vals) for b in vals[i + 1:]]
        min_gap = min(gaps) if gaps else np.inf
    else:
        diffs = np.diff(vals)
        min_gap = float(diffs.min()) if diffs.size else np.inf
    min_comp = float(np.abs(spec.eigenvectors).min())
    ok = min_gap >= 1e-6 and min_comp >= 1e-8
    if not ok:
        warnings.warn(
            f"shift spectrum near-degenerate: min gap {min_gap:.2e}, "
            f"min eigenvector component {min_comp:.2e}", stacklevel=2)
    return ok, min_gap, min_comp
