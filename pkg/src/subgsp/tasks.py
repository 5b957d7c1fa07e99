"""Signal-processing tasks on the observed subset.

Everything here works in the magnitude-ordered eigenbasis of a fitted
subset operator: transform, band-truncation compression, high-band
anomaly scoring, high-band shrinkage denoising, plus the synthetic signal
generators the experiments use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import (
    DegenerateReference,
    DimensionMismatch,
    DisconnectedGraph,
    InvalidBandwidth,
    InvalidParams,
    ZeroNoise,
    ZeroSignal,
)
from .graphs import Graph, eigendecompose
from .operators import SubgraphOperator, eigenbasis_magnitude_ordered

_DEGENERATE = 1e-12


@dataclass(frozen=True)
class TaskConfig:
    """Task parameters shared by the experiment pipelines."""

    theta_c: float = 0.4
    theta_a: float = 0.35
    theta_d: float = 0.2
    s_d: float = 0.3
    tau: float = 1.1
    p: float = 1.0
    snr_db: float = 8.0

    def __post_init__(self):
        for name in ("theta_c", "theta_a", "theta_d"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidParams(f"{name} must lie in (0,1)")
        if not 0 <= self.s_d < 1:
            raise InvalidParams("s_d must lie in [0,1)")
        if not self.tau > 1:
            raise InvalidParams("tau must exceed 1")


@dataclass(frozen=True, eq=False)
class GftCoefficients:
    """Coordinates of a subset signal in the operator's ordered eigenbasis."""

    values: np.ndarray
    basis_ref: SubgraphOperator


def gft(f0: SubgraphOperator, x: np.ndarray) -> GftCoefficients:
    """Analysis transform: inner products against the ordered eigenbasis."""
    x = np.asarray(x, dtype=float)
    if x.shape != (f0.size,):
        raise DimensionMismatch(f"signal must have length {f0.size}")
    _, vecs = eigenbasis_magnitude_ordered(f0)
    return GftCoefficients(vecs.T @ x, f0)


def igft(c: GftCoefficients) -> np.ndarray:
    """Synthesis transform, exact inverse of ``gft`` for orthonormal bases."""
    _, vecs = eigenbasis_magnitude_ordered(c.basis_ref)
    return vecs @ c.values


def compress(c: GftCoefficients, theta_c: float) -> tuple:
    """Keep the first ``theta_c`` fraction of coefficients.

    Returns the reconstruction and its relative L2 error against the full
    signal.
    """
    if not 0 < theta_c <= 1:
        raise InvalidParams("theta_c must lie in (0,1]")
    n0 = c.values.shape[0]
    keep = int(math.floor(theta_c * n0))
    full = igft(c)
    nrm = np.linalg.norm(full)
    if nrm <= _DEGENERATE:
        raise ZeroSignal("cannot compress the zero signal")
    truncated = c.values.copy()
    truncated[keep:] = 0.0
    _, vecs = eigenbasis_magnitude_ordered(c.basis_ref)
    xc = vecs @ truncated
    return xc, float(np.linalg.norm(full - xc) / nrm)


def high_band_start(n0: int, theta_a: float) -> int:
    return int(math.ceil(theta_a * n0))


def anomaly_score(c: GftCoefficients, theta_a: float) -> float:
    """Largest coefficient magnitude in the upper spectral band."""
    if not 0 < theta_a < 1:
        raise InvalidParams("theta_a must lie in (0,1)")
    start = high_band_start(c.values.shape[0], theta_a)
    band = c.values[start:]
    if band.size == 0:
        return 0.0
    return float(np.abs(band).max())


def detect(m_ref: float, m_test: float, tau: float) -> bool:
    """Flag the test signal when its high-band score ratio exceeds ``tau``."""
    if not tau > 1:
        raise InvalidParams("tau must exceed 1")
    if m_ref < _DEGENERATE:
        raise DegenerateReference("reference high-band score is numerically zero")
    return m_test / m_ref > tau


def detect_consecutive(scores, tau: float) -> list:
    """Pairwise detector for a time series of high-band scores.

    Element t is declared anomalous when its score exceeds ``tau`` times
    the previous element's score.
    """
    out = []
    for prev, cur in zip(scores, scores[1:]):
        out.append(detect(prev, cur, tau))
    return out


def denoise(c: GftCoefficients, theta_d: float, s_d: float) -> np.ndarray:
    """Scale the upper band by ``s_d`` and resynthesize."""
    if not 0 < theta_d <= 1:
        raise InvalidParams("theta_d must lie in (0,1]")
    if not 0 <= s_d <= 1:
        raise InvalidParams("s_d must lie in [0,1]")
    n0 = c.values.shape[0]
    cut = int(math.floor(theta_d * n0))
    vals = c.values.copy()
    vals[cut:] *= s_d
    _, vecs = eigenbasis_magnitude_ordered(c.basis_ref)
    return vecs @ vals


def error_ratio(x: np.ndarray, x_noisy: np.ndarray, x_denoised: np.ndarray) -> float:
    """Recovered-over-noisy error ratio; below one means denoising helped."""
    denom = np.linalg.norm(np.asarray(x) - np.asarray(x_noisy))
    if denom <= _DEGENERATE:
        raise ZeroNoise("noisy signal equals the clean signal")
    return float(np.linalg.norm(np.asarray(x) - np.asarray(x_denoised)) / denom)


# ---------------------------------------------------------------------------
# Signal generators

def bandlimited(g: Graph, bandwidth: int, seed: int) -> np.ndarray:
    """Random smooth signal: uniform coefficients on the lowest eigenvectors."""
    if not 1 <= bandwidth <= g.n:
        raise InvalidBandwidth(f"bandwidth must lie in [1,{g.n}]")
    spec = eigendecompose(g)
    gen = rng.stream(seed, 0)
    coeffs = gen.uniform(0.0, 1.0, size=bandwidth)
    return np.real(spec.eigenvectors[:, :bandwidth]) @ coeffs


def si_timestamps(g: Graph, seed: int, rate: float = 0.3) -> np.ndarray:
    """Infection times of a discrete susceptible-infected cascade.

    A uniformly random source starts infected; each step, every infected
    vertex independently infects each susceptible neighbor with
    probability ``rate``.  Requires every vertex reachable from the source
    (undirected connectivity in practice).
    """
    if not 0 < rate <= 1:
        raise InvalidParams("rate must lie in (0,1]")
    gen = rng.stream(seed, 0)
    times = np.full(g.n, -1.0)
    source = int(gen.integers(g.n))
    times[source] = 0.0
    nbrs = [set() for _ in range(g.n)]
    for s, d, _ in g.edges:
        nbrs[s].add(d)
        nbrs[d].add(s)
    t = 0
    infected = {source}
    while len(infected) < g.n:
        exposed = sorted(u for u in range(g.n)
                         if times[u] < 0 and nbrs[u] & infected)
        if not exposed:
            raise DisconnectedGraph("cascade cannot reach every vertex")
        t += 1
        for u in exposed:
            # one independent transmission chance per infected neighbor
            tries = sum(1 for v in nbrs[u] if v in infected)
            if any(gen.random() < rate for _ in range(tries)):
                times[u] = t
                infected.add(u)
    return times


def add_noise_snr(x: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """White Gaussian noise scaled to hit the target SNR exactly."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm <= _DEGENERATE:
        raise ZeroSignal("SNR is undefined for the zero signal")
    gen = rng.stream(seed, 0)
    noise = gen.standard_normal(x.shape)
    noise *= nrm / (np.linalg.norm(noise) * 10 ** (snr_db / 20.0))
    return x + noise


def perturb_one(x: np.ndarray, p: float, seed: int) -> np.ndarray:
    """Add +-p (random sign) at one uniformly chosen position."""
    x = np.asarray(x, dtype=float).copy()
    gen = rng.stream(seed, 0)
    v = int(gen.integers(x.shape[0]))
    sign = 1.0 if gen.random() < 0.5 else -1.0
    x[v] += sign * p
    return x
