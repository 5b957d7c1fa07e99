"""Weighted graphs, shift operators, spectra, hop metrics and generators.

Graphs are stored as immutable edge lists with a chosen shift operator
(Laplacian or adjacency).  Everything downstream works with the dense
shift matrix; graphs here are a few hundred vertices at most.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import rng
from .errors import (
    DisconnectedGraph,
    EmptySources,
    InvalidGraph,
    InvalidParams,
    NonNormalShift,
)

LAPLACIAN = "laplacian"
ADJACENCY = "adjacency"

_NORMALITY_RTOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """Weighted graph with a fixed shift-operator convention.

    Undirected graphs store each edge once with ``src < dst``.  Vertex ids
    are 0-based and self-loops are rejected.  Instances are immutable and
    safe to share across threads; the shift matrix and spectrum are cached
    lazily.
    """

    n: int
    directed: bool
    edges: tuple  # ((src, dst, weight), ...)
    shift_kind: str = LAPLACIAN
    _shift: object = field(default=None, init=False, repr=False, compare=False)
    _spectrum: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidGraph("vertex count must be nonnegative")
        if self.shift_kind not in (LAPLACIAN, ADJACENCY):
            raise InvalidGraph(f"unknown shift kind {self.shift_kind!r}")
        seen = set()
        for src, dst, w in self.edges:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise InvalidGraph(f"edge ({src},{dst}) outside [0,{self.n})")
            if src == dst:
                raise InvalidGraph(f"self-loop at vertex {src}")
            if not w > 0:
                raise InvalidGraph(f"edge ({src},{dst}) has nonpositive weight {w}")
            if not self.directed and src > dst:
                raise InvalidGraph("undirected edges must be stored with src < dst")
            key = (src, dst)
            if key in seen:
                raise InvalidGraph(f"duplicate edge ({src},{dst})")
            seen.add(key)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense weighted adjacency matrix (symmetric iff undirected)."""
        a = np.zeros((self.n, self.n))
        for src, dst, w in self.edges:
            a[src, dst] += w
            if not self.directed:
                a[dst, src] += w
        return a

    def neighbors_out(self) -> list:
        """Forward adjacency lists (both directions when undirected)."""
        nbrs = [[] for _ in range(self.n)]
        for src, dst, _ in self.edges:
            nbrs[src].append(dst)
            if not self.directed:
                nbrs[dst].append(src)
        return nbrs


def graph_from_edges(n: int, edges: Iterable, directed: bool = False,
                     shift_kind: str = LAPLACIAN) -> Graph:
    """Build a Graph, normalizing undirected edges to src < dst order."""
    norm = []
    for src, dst, w in edges:
        src, dst = int(src), int(dst)
        if not directed and src > dst:
            src, dst = dst, src
        norm.append((src, dst, float(w)))
    norm.sort()
    return Graph(n=int(n), directed=bool(directed), edges=tuple(norm), shift_kind=shift_kind)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Unitary eigendecomposition of a shift matrix.

    Eigenvalues are sorted non-decreasing (by real part, then imaginary
    part in the complex case) and each eigenvector's first nonzero
    component is made real positive, so the decomposition is reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.eigenvectors)


def shift_matrix(g: Graph) -> np.ndarray:
    """Dense shift matrix of ``g``: Laplacian or adjacency per shift_kind.

    The Laplacian is degree-matrix minus weighted adjacency (out-degrees
    for directed graphs), so its rows sum to zero.
    """
    if g._shift is not None:
        return g._shift
    a = g.adjacency()
    if g.shift_kind == ADJACENCY:
        m = a
    else:
        m = np.diag(a.sum(axis=1)) - a
    object.__setattr__(g, "_shift", m)
    return m


def _fix_vector_signs(u: np.ndarray) -> np.ndarray:
    """Rotate each column so its first nonzero component is real positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        mags = np.abs(col)
        big = mags.max()
        if big == 0:
            continue
        k = int(np.argmax(mags > 1e-9 * big))
        pivot = col[k]
        if np.iscomplexobj(col):
            u[:, j] = col * (abs(pivot) / pivot)
        elif pivot < 0:
            u[:, j] = -col
    return u


def eigendecompose(g: Graph) -> Spectrum:
    """Spectrum of the shift matrix of ``g``.

    Symmetric matrices go through ``eigh`` and stay real.  Non-symmetric
    shifts must be normal (checked) and are decomposed over the complex
    numbers; the eigenvector matrix is re-orthonormalized per eigenvalue
    cluster only implicitly through ``eig`` (fine for the simple spectra
    used here).
    """
    if g._spectrum is not None:
        return g._spectrum
    m = shift_matrix(g)
    if np.allclose(m, m.T, atol=1e-12):
        vals, vecs = np.linalg.eigh(m)
        order = np.argsort(vals, kind="stable")
        vals = vals[order]
        vecs = vecs[:, order]
    else:
        mh = m.conj().T
        defect = np.linalg.norm(m @ mh - mh @ m, "fro")
        if defect > _NORMALITY_RTOL * np.linalg.norm(m, "fro") ** 2:
            raise NonNormalShift(
                f"shift matrix is not normal (defect {defect:.3e})")
        vals, vecs = np.linalg.eig(m.astype(complex))
        # round the sort keys so 1e-16 noise cannot scramble exact ties
        order = np.lexsort((vals.imag.round(12), vals.real.round(12)))
        vals = vals[order]
        vecs = vecs[:, order]
        vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    spec = Spectrum(eigenvalues=vals, eigenvectors=_fix_vector_signs(vecs))
    object.__setattr__(g, "_spectrum", spec)
    return spec


def hop_distances(g: Graph, sources) -> np.ndarray:
    """Minimum hop count from each vertex to the nearest source.

    Edges are treated as unweighted; directed edges are followed forward
    from the sources.  Unreachable vertices get ``inf``.
    """
    src = sorted(set(int(v) for v in sources))
    if not src:
        raise EmptySources("hop distances need at least one source")
    for v in src:
        if not 0 <= v < g.n:
            raise InvalidParams(f"source {v} outside [0,{g.n})")
    dist = np.full(g.n, np.inf)
    nbrs = g.neighbors_out()
    frontier = src
    for v in src:
        dist[v] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for u in nbrs[v]:
                if dist[u] == np.inf:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def induced_subgraph(g: Graph, v0) -> tuple:
    """Subgraph on ``v0`` keeping edges with both ends inside.

    Vertices are relabeled 0..len(v0)-1 in ascending original-id order.
    Returns ``(subgraph, ids)`` where ``ids[new] = original``.
    """
    ids = sorted(set(int(v) for v in v0))
    for v in ids:
        if not 0 <= v < g.n:
            raise InvalidParams(f"vertex {v} outside [0,{g.n})")
    pos = {v: i for i, v in enumerate(ids)}
    edges = [(pos[s], pos[d], w) for s, d, w in g.edges if s in pos and d in pos]
    sub = graph_from_edges(len(ids), edges, directed=g.directed, shift_kind=g.shift_kind)
    return sub, ids


def connected_components(g: Graph) -> list:
    """Vertex sets of the connected components (edge direction ignored)."""
    nbrs = [[] for _ in range(g.n)]
    for s, d, _ in g.edges:
        nbrs[s].append(d)
        nbrs[d].append(s)
    seen = [False] * g.n
    comps = []
    for v in range(g.n):
        if seen[v]:
            continue
        stack = [v]
        seen[v] = True
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in nbrs[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(connected_components(g)) == 1


def diameter(g: Graph) -> int:
    """Hop diameter; raises DisconnectedGraph if infinite."""
    worst = 0
    for v in range(g.n):
        dist = hop_distances(g, [v])
        top = dist.max()
        if not math.isfinite(top):
            raise DisconnectedGraph("graph has unreachable vertex pairs")
        worst = max(worst, int(top))
    return worst


# ---------------------------------------------------------------------------
# Generators

def _cycle(n: int, directed: bool) -> list:
    return [(i, (i + 1) % n, 1.0) for i in range(n)]


def _lattice(rows: int, cols: int) -> list:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return edges


def _planted_partition(n: int, communities: int, p_in: float, p_out: float,
                       gen: np.random.Generator) -> list:
    block = [n // communities + (1 if i < n % communities else 0) for i in range(communities)]
    label = np.repeat(np.arange(communities), block)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            p = p_in if label[u] == label[v] else p_out
            if gen.random() < p:
                edges.append((u, v, 1.0))
    return edges


def _er(n: int, q: float, gen: np.random.Generator) -> list:
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if gen.random() < q:
                edges.append((u, v, 1.0))
    return edges


def _knn(coords: np.ndarray, k: int) -> list:
    pts = np.asarray(coords, dtype=float)
    n = len(pts)
    pairs = set()
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    for v in range(n):
        for u in np.argsort(d2[v], kind="stable")[:k]:
            pairs.add((min(v, int(u)), max(v, int(u))))
    return [(u, v, 1.0) for u, v in sorted(pairs)]


def generate(kind: str, params: dict, seed: int = 0) -> Graph:
    """Deterministic graph generator.

    Kinds: ``cycle(n, directed)``, ``lattice(rows, cols)``,
    ``gm_community(n, communities, p_in, p_out)``, ``er(n, q)``,
    ``knn(coords, k)``.  Community and ER graphs draw from the stream
    identified by ``seed``; knn coordinates are given explicitly.
    """
    gen = rng.stream(seed, 0)
    directed = False
    if kind == "cycle":
        n = int(params["n"])
        if n < 3:
            raise InvalidParams("cycle needs n >= 3")
        directed = bool(params.get("directed", False))
        edges = _cycle(n, directed)
    elif kind == "lattice":
        rows, cols = int(params["rows"]), int(params["cols"])
        if rows < 1 or cols < 1:
            raise InvalidParams("lattice needs positive dimensions")
        n = rows * cols
        edges = _lattice(rows, cols)
    elif kind == "gm_community":
        n = int(params["n"])
        communities = int(params.get("communities", 3))
        p_in = float(params.get("p_in", 0.125))
        p_out = float(params.get("p_out", 0.009))
        if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
            raise InvalidParams("probabilities must lie in [0,1]")
        if communities < 1 or communities > n:
            raise InvalidParams("community count must lie in [1,n]")
        edges = _planted_partition(n, communities, p_in, p_out, gen)
    elif kind == "er":
        n = int(params["n"])
        q = float(params["q"])
        if not 0 <= q <= 1:
            raise InvalidParams("edge probability must lie in [0,1]")
        edges = _er(n, q, gen)
    elif kind == "knn":
        coords = np.asarray(params["coords"], dtype=float)
        k = int(params["k"])
        if k < 1 or k >= len(coords):
            raise InvalidParams("k must lie in [1, n-1]")
        n = len(coords)
        edges = _knn(coords, k)
    else:
        raise InvalidParams(f"unknown generator kind {kind!r}")
    default_shift = ADJACENCY if directed else LAPLACIAN
    shift_kind = params.get("shift_kind", default_shift)
    return graph_from_edges(n, edges, directed=directed, shift_kind=shift_kind)


def random_connected(kind: str, params: dict, seed: int, max_tries: int = 200) -> Graph:
    """First connected draw of a random generator, scanning sub-seeds."""
    for t in range(max_tries):
        g = generate(kind, params, seed=seed + t)
        if is_connected(g):
            return g
    raise DisconnectedGraph(f"no connected {kind} graph in {max_tries} draws")
