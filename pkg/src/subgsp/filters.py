"""Mixtures of masked polynomial shift filters.

A filter is a sum over subset layers of "restrict to the layer" composed
with a polynomial in the graph shift.  Assembly never eigendecomposes, so
it works unchanged for directed shifts; the local evaluation path exploits
the fact that a degree-d polynomial of a Laplacian only looks d hops out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import SubsetTuple
from .errors import DegreeOverflow, InvalidParams
from .graphs import Graph, LAPLACIAN, Spectrum, hop_distances, induced_subgraph, shift_matrix


@dataclass(frozen=True, eq=False)
class SemiFilter:
    """Per-layer polynomial coefficients over a subset tuple.

    ``coeffs[i][j]`` multiplies the j-th shift power masked to set i, so
    ``len(coeffs[i]) == degrees[i] + 1``.  ``fixed_mask`` marks
    coefficients held constant during fitting.
    """

    tuple: SubsetTuple
    coeffs: tuple  # ((a_i0, ..., a_id_i), ...)
    fixed_mask: tuple = field(default=())

    def __post_init__(self):
        coeffs = tuple(tuple(float(a) for a in row) for row in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != self.tuple.k:
            raise InvalidParams("one coefficient row per subset required")
        for row, d in zip(coeffs, self.tuple.degrees):
            if len(row) != d + 1:
                raise InvalidParams(f"coefficient row length {len(row)} != degree+1 {d + 1}")
        if not self.fixed_mask:
            mask = tuple(tuple(False for _ in row) for row in coeffs)
            object.__setattr__(self, "fixed_mask", mask)
        else:
            mask = tuple(tuple(bool(b) for b in row) for row in self.fixed_mask)
            object.__setattr__(self, "fixed_mask", mask)
            if any(len(m) != len(c) for m, c in zip(mask, coeffs)):
                raise InvalidParams("fixed_mask shape must match coeffs")


def zero_filter(t: SubsetTuple) -> SemiFilter:
    return SemiFilter(t, tuple(tuple(0.0 for _ in range(d + 1)) for d in t.degrees))


def assemble(f: SemiFilter, g: Graph) -> np.ndarray:
    """Dense matrix of the filter: sum of row-masked shift polynomials."""
    t = f.tuple
    if max(t.degrees) >= g.n:
        raise DegreeOverflow("polynomial degree must be smaller than |V|")
    if any(v >= g.n or v < 0 for v in t.union()):
        raise InvalidParams("tuple sets must be subsets of the vertex set")
    m = shift_matrix(g)
    max_d = max(t.degrees)
    powers = [np.eye(g.n)]
    for _ in range(max_d):
        powers.append(m @ powers[-1])
    out = np.zeros((g.n, g.n))
    for s, row in zip(t.sets, f.coeffs):
        rows = sorted(s)
        block = np.zeros((len(rows), g.n))
        for j, a in enumerate(row):
            if a != 0.0:
                block += a * powers[j][rows, :]
        out[rows, :] += block
    return out


def apply_local(f: SemiFilter, g: Graph, x: np.ndarray) -> np.ndarray:
    """Apply the filter through per-layer hop neighborhoods.

    Every layer only needs the Laplacian of the subgraph induced on its
    d-hop ball, so signals never touch the full shift matrix.  Requires a
    Laplacian shift.
    """
    if g.shift_kind != LAPLACIAN:
        raise InvalidParams("local evaluation is only valid for the Laplacian shift")
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise InvalidParams(f"signal must have length {g.n}")
    out = np.zeros(g.n)
    for s, row in zip(f.tuple.sets, f.coeffs):
        d = len(row) - 1
        dist = hop_distances(g, sorted(s))
        ball = [v for v in range(g.n) if dist[v] <= d]
        sub, ids = induced_subgraph(g, ball)
        lb = shift_matrix(sub)
        xb = x[ids]
        acc = row[0] * xb
        power = xb
        for j in range(1, d + 1):
            power = lb @ power
            acc = acc + row[j] * power
        pos = {v: i for i, v in enumerate(ids)}
        for v in s:
            out[v] += acc[pos[v]]
    return out


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Per-vertex action of a filter on each shift eigenvector.

    ``values[r, i]`` is the multiplier applied at vertex ``vertices[r]`` to
    the i-th eigenvector component; vertices outside every layer are
    omitted (the filter is zero there).
    """

    vertices: tuple
    values: np.ndarray  # len(vertices) x |V|


def spectral_profile(f: SemiFilter, s: Spectrum) -> SpectralProfile:
    """Evaluate each layer polynomial on the eigenvalues and sum per vertex."""
    lam = s.eigenvalues
    vertices = sorted(f.tuple.union())
    values = np.zeros((len(vertices), lam.size), dtype=lam.dtype)
    index = {v: r for r, v in enumerate(vertices)}
    for subset, row in zip(f.tuple.sets, f.coeffs):
        poly = np.zeros(lam.size, dtype=lam.dtype)
        power = np.ones(lam.size, dtype=lam.dtype)
        for a in row:
            poly = poly + a * power
            power = power * lam
        for v in subset:
            values[index[v]] += poly
    return SpectralProfile(tuple(vertices), values)


def main_spectral_set(p: SpectralProfile, tol: float = None) -> tuple:
    """Largest group of vertices sharing one action tuple, and that tuple.

    Vertices group together when their action tuples agree entrywise
    within ``tol`` (default 1e-6 of the largest magnitude).  Ties go to the
    group containing the smallest vertex id.
    """
    if tol is None:
        top = float(np.abs(p.values).max()) if p.values.size else 0.0
        tol = 1e-6 * top
    if tol < 0:
        raise InvalidParams("tolerance must be nonnegative")
    n = len(p.vertices)
    groups = []  # (representative row, member indices)
    for r in range(n):
        placed = False
        for rep, members in groups:
            if np.max(np.abs(p.values[r] - p.values[rep])) <= tol:
                members.append(r)
                placed = True
                break
        if not placed:
            groups.append((r, [r]))
    best = max(groups, key=lambda g: (len(g[1]), -min(g[1])))
    members = tuple(p.vertices[r] for r in best[1])
    return members, p.values[best[0]].copy()
