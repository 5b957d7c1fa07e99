"""End-to-end experiment pipelines shared by the CLI and the test suite.

Each experiment fits a subset operator on randomly observed vertices and
pits its eigenbasis against two baselines: the induced-subgraph Laplacian
and the Schur-complement reduction.  Pipelines return flat per-trial
records; aggregation into mean/stderr summaries happens in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .embedding import Embedding, SubsetTuple, build_cvd, project, refine_default
from .errors import InvalidParams
from .filters import main_spectral_set, spectral_profile
from .graphs import Graph, eigendecompose, graph_from_edges, induced_subgraph, is_connected
from .operators import ANY_LAPLACIAN, SYM_ZERO_ROW, SubgraphOperator, kron_reduce
from .randlab import component_stats
from .solvers import (
    FitResult,
    OmegaSet,
    build_omega,
    recovery_error,
    solve_filter_learning,
    solve_least_squares,
)
from .tasks import (
    add_noise_snr,
    anomaly_score,
    bandlimited,
    compress,
    denoise,
    detect,
    error_ratio,
    gft,
    perturb_one,
    si_timestamps,
)

FIT = "fit"
INDUCED = "induced"
KRON = "kron"


@dataclass(frozen=True)
class FitSpec:
    """How the per-trial operator fit is set up.

    The default fits the operator against the plain Laplacian action on
    the whole observed subset (single-set tuple of degree one, both
    coefficients pinned): free filter coefficients admit a near-zero
    cancellation optimum that wrecks the operator's eigenbasis, so the
    experiments anchor the filter completely and let the operator carry
    all the freedom.  Set ``single_set=False`` for the hop-layered tuple
    (with ``r``/``refine``) and supply pins explicitly.
    """

    single_set: bool = True
    degree: int = 1
    r: int = 0
    refine: bool = False
    delta: float = 0.6
    family: str = SYM_ZERO_ROW
    fixed_coeffs: tuple = ((0, 0, 0.0), (0, 1, 1.0))

    def pins(self) -> dict:
        return {(i, j): v for i, j, v in self.fixed_coeffs}


def sample_subset(g: Graph, p: float, gen: np.random.Generator) -> tuple:
    """i.i.d. vertex sample, redrawn until proper with at least two members."""
    if not 0 < p < 1:
        raise InvalidParams("subset probability must lie in (0,1)")
    while True:
        ids = tuple(v for v in range(g.n) if gen.random() < p)
        if 2 <= len(ids) < g.n:
            return ids


def spec_tuple(emb: Embedding, spec: FitSpec):
    if spec.single_set:
        return SubsetTuple((frozenset(emb.v0),), (spec.degree,))
    tup = build_cvd(emb, r=spec.r)
    if spec.refine:
        tup = refine_default(tup)
    return tup


def standard_fit(g: Graph, v0, spec: FitSpec = FitSpec()):
    """Fit the subset operator with the default pipeline.

    Returns ``(embedding, omega, fit_result)``.
    """
    emb = Embedding(g, tuple(sorted(v0)))
    tup = spec_tuple(emb, spec)
    omega = build_omega(g, emb, spec.delta)
    fit = solve_least_squares(g, emb, tup, spec.family, omega, spec.pins())
    return emb, omega, fit


def operator_suite(g: Graph, emb: Embedding, fitted: SubgraphOperator) -> dict:
    """Fitted operator plus the two baselines on the same subset."""
    h0, _ = induced_subgraph(g, emb.v0)
    adj = h0.adjacency()
    lap = np.diag(adj.sum(axis=1)) - adj
    pairs = tuple((u, v) for u in range(h0.n) for v in range(u + 1, h0.n))
    return {
        FIT: fitted,
        INDUCED: SubgraphOperator(ANY_LAPLACIAN, lap, pairs),
        KRON: kron_reduce(g, emb.v0),
    }


def summarize(records, value_key: str = "value") -> list:
    """Collapse per-trial records into operator x param mean/stderr rows."""
    groups = {}
    for rec in records:
        groups.setdefault((rec["operator"], rec["param"]), []).append(rec[value_key])
    rows = []
    for (op, param), vals in sorted(groups.items()):
        arr = np.asarray(vals, dtype=float)
        stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        rows.append({"operator": op, "param": param, "mean": float(arr.mean()),
                     "stderr": stderr, "trials": len(arr)})
    return rows


# ---------------------------------------------------------------------------
# Spectral distribution report

def spectrum_report(g: Graph, v0, spec: FitSpec = FitSpec()) -> dict:
    """Fitted-operator eigenvalues next to the filter's main spectral set,
    plus subset statistics (component count, main-component share)."""
    emb, omega, fit = standard_fit(g, v0, spec)
    vals = np.sort(np.linalg.eigvalsh(fit.operator.matrix))
    profile = spectral_profile(fit.filter, eigendecompose(g))
    members, spectral_set = main_spectral_set(profile)
    h0, _ = induced_subgraph(g, emb.v0)
    stats = component_stats(h0)
    return {
        "operator_eigenvalues": vals,
        "main_spectral_set": np.sort(np.real(spectral_set)),
        "main_component": members,
        "main_component_share": len(members) / emb.size,
        "subset_size": emb.size,
        "subset_components": stats.num_components,
        "loss": fit.loss_value,
    }


# ---------------------------------------------------------------------------
# Compression

def run_compression(g: Graph, *, subset_p: float, thetas, bandwidth: int,
                    n_signals: int, trials: int, seed: int,
                    spec: FitSpec = FitSpec(), first_trial: int = 0) -> list:
    """Per-trial mean compression error for each operator and theta."""
    records = []
    for trial in range(first_trial, first_trial + trials):
        gen = rng.stream(seed, trial, 0)
        v0 = sample_subset(g, subset_p, gen)
        emb, _, fit = standard_fit(g, v0, spec)
        suite = operator_suite(g, emb, fit.operator)
        signals = [project(emb, bandlimited(g, bandwidth, rng.child_seed(seed, trial, 1, i)))
                   for i in range(n_signals)]
        for name, op in suite.items():
            coeff_sets = [gft(op, x) for x in signals]
            for theta in thetas:
                errs = [compress(c, theta)[1] for c in coeff_sets]
                records.append({"trial": trial, "operator": name,
                                "param": float(theta),
                                "value": float(np.mean(errs))})
    return records


# ---------------------------------------------------------------------------
# Anomaly detection

def run_anomaly(g: Graph, *, subset_p: float, bandwidth: int, theta_a: float,
                tau: float, perturbations, trials: int, seed: int,
                spec: FitSpec = FitSpec(), consecutive: bool = False,
                first_trial: int = 0) -> list:
    """Per-trial detection outcomes for each operator and perturbation.

    In consecutive mode the reference score comes from an independent
    earlier signal rather than the unperturbed signal itself.
    """
    records = []
    for trial in range(first_trial, first_trial + trials):
        gen = rng.stream(seed, trial, 0)
        v0 = sample_subset(g, subset_p, gen)
        emb, _, fit = standard_fit(g, v0, spec)
        suite = operator_suite(g, emb, fit.operator)
        x_cur = project(emb, bandlimited(g, bandwidth, rng.child_seed(seed, trial, 1)))
        if consecutive:
            x_ref = project(emb, bandlimited(g, bandwidth, rng.child_seed(seed, trial, 2)))
        else:
            x_ref = x_cur
        ref_scores = {name: anomaly_score(gft(op, x_ref), theta_a)
                      for name, op in suite.items()}
        # one perturbation site and sign per trial, shared across p values
        perturb_seed = rng.child_seed(seed, trial, 3)
        for k, p in enumerate(perturbations):
            x_a = perturb_one(x_cur, p, perturb_seed)
            for name, op in suite.items():
                m_ref = ref_scores[name]
                m_test = anomaly_score(gft(op, x_a), theta_a)
                if m_ref < 1e-12:
                    # degenerate reference: flag as detected iff any test energy
                    hit = m_test > 1e-12
                else:
                    hit = detect(m_ref, m_test, tau)
                records.append({"trial": trial, "operator": name,
                                "param": float(p), "value": float(hit)})
    return records


# ---------------------------------------------------------------------------
# Denoising

def run_denoise(g: Graph, *, subset_p: float, snrs, theta_d: float, s_d: float,
                si_rate: float, trials: int, seed: int,
                spec: FitSpec = FitSpec(), first_trial: int = 0) -> list:
    """Per-trial denoising error ratios for each operator and SNR."""
    records = []
    for trial in range(first_trial, first_trial + trials):
        gen = rng.stream(seed, trial, 0)
        v0 = sample_subset(g, subset_p, gen)
        emb, _, fit = standard_fit(g, v0, spec)
        suite = operator_suite(g, emb, fit.operator)
        y = si_timestamps(g, rng.child_seed(seed, trial, 1), rate=si_rate)
        x = project(emb, y)
        for k, snr in enumerate(snrs):
            x_noisy = add_noise_snr(x, snr, rng.child_seed(seed, trial, 2, k))
            for name, op in suite.items():
                x_hat = denoise(gft(op, x_noisy), theta_d, s_d)
                records.append({"trial": trial, "operator": name,
                                "param": float(snr),
                                "value": error_ratio(x, x_noisy, x_hat)})
    return records


# ---------------------------------------------------------------------------
# Filter learning

def _polynomial_regression(base: np.ndarray, data, degree: int = 2) -> np.ndarray:
    """Least-squares fit of a polynomial in a fixed base operator."""
    powers = [np.eye(base.shape[0])]
    for _ in range(degree):
        powers.append(base @ powers[-1])
    cols, rhs = [], []
    for x, xp in data:
        cols.append(np.column_stack([pw @ x for pw in powers]))
        rhs.append(xp)
    a = np.vstack(cols)
    b = np.concatenate(rhs)
    coef, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return sum(c * pw for c, pw in zip(coef, powers))


def run_learning(g: Graph, *, subset_p: float, betas, n_train: int,
                 n_eval: int, trials: int, seed: int,
                 spec: FitSpec = FitSpec(), true_degree: int = 2,
                 first_trial: int = 0) -> list:
    """Per-trial held-out recovery error of the learned operator per beta.

    Training and evaluation pairs come from a random polynomial filter of
    the ambient Laplacian applied to full-band random signals, observed
    only on the subset.  Baselines learn a polynomial in the induced or
    reduced Laplacian from the same pairs.
    """
    spec_full = eigendecompose(g)
    basis = np.real(spec_full.eigenvectors)
    records = []
    for trial in range(first_trial, first_trial + trials):
        gen = rng.stream(seed, trial, 0)
        v0 = sample_subset(g, subset_p, gen)
        emb = Embedding(g, tuple(sorted(v0)))
        tup = spec_tuple(emb, spec)
        omega = build_omega(g, emb, spec.delta)

        fgen = rng.stream(seed, trial, 1)
        coeffs = fgen.uniform(0.0, 1.0, size=true_degree + 1)
        lam = np.real(spec_full.eigenvalues)
        filt_diag = sum(c * lam ** j for j, c in enumerate(coeffs))

        def draw_pairs(count, stream_key):
            pgen = rng.stream(seed, trial, stream_key)
            pairs = []
            for _ in range(count):
                yhat = pgen.uniform(0.0, 1.0, size=g.n)
                y = basis @ yhat
                z = basis @ (filt_diag * yhat)
                pairs.append((project(emb, y), project(emb, z)))
            return pairs

        train = draw_pairs(n_train, 2)
        evals = draw_pairs(n_eval, 3)
        h0, _ = induced_subgraph(g, emb.v0)
        adj = h0.adjacency()
        lap = np.diag(adj.sum(axis=1)) - adj
        base_errs = {
            INDUCED: recovery_error_matrix(
                _polynomial_regression(lap, train), evals),
            KRON: recovery_error_matrix(
                _polynomial_regression(kron_reduce(g, emb.v0).matrix, train), evals),
        }
        for beta in betas:
            fit = solve_filter_learning(g, emb, tup, spec.family, train,
                                        float(beta), omega, spec.pins())
            records.append({"trial": trial, "operator": FIT,
                            "param": float(beta),
                            "value": recovery_error(fit.operator, evals)})
            for name, err in base_errs.items():
                records.append({"trial": trial, "operator": name,
                                "param": float(beta), "value": err})
    return records


def recovery_error_matrix(m: np.ndarray, eval_pairs) -> float:
    errs = [float(np.linalg.norm(np.asarray(xp) - m @ np.asarray(x)))
            for x, xp in eval_pairs]
    return float(np.mean(errs))


# ---------------------------------------------------------------------------
# Fixture graphs beyond the plain generators

def ring_with_shortcuts(n: int, k: int, shortcuts: int, seed: int) -> Graph:
    """Small-world fixture: ring lattice (k nearest each side) plus random
    chords, redrawn until connected."""
    if k < 1 or n <= 2 * k:
        raise InvalidParams("need n > 2k and k >= 1")
    base = set()
    for v in range(n):
        for step in range(1, k + 1):
            u = (v + step) % n
            base.add((min(v, u), max(v, u)))
    gen = rng.stream(seed, 0)
    added = 0
    attempts = 0
    edges = set(base)
    while added < shortcuts and attempts < 50 * shortcuts:
        attempts += 1
        u, v = int(gen.integers(n)), int(gen.integers(n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key not in edges:
            edges.add(key)
            added += 1
    g = graph_from_edges(n, [(u, v, 1.0) for u, v in sorted(edges)])
    if not is_connected(g):
        raise InvalidParams("ring fixture unexpectedly disconnected")
    return g
