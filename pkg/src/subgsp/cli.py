"""Command-line surface for fits, tasks, reductions and simulations.

Every run writes a manifest (resolved config, hash, seed, versions) next
to its outputs; rerunning with the same config and seed reproduces every
output file byte for byte.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure (error class printed to stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import experiments, io, randlab, rng, sparsify
from .embedding import Embedding, SubsetTuple, build_cvd, family_dimension, is_essential, refine_default
from .errors import ConfigError, SubgspError
from .experiments import FitSpec
from .graphs import generate, is_connected, random_connected
from .operators import kron_reduce
from .solvers import SolverOptions, build_omega, solve_least_squares, solve_operator_difference

log = logging.getLogger("subgsp")

_SUBCOMMANDS = ("fit", "spectrum", "compress", "detect", "denoise", "learn",
                "kron", "sparsify", "simulate", "dim")


def _setup_logging() -> None:
    level = os.environ.get("SUBGSP_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _resolve_graph(cfg: dict):
    spec = cfg.get("graph")
    if not spec:
        raise ConfigError("config needs a 'graph' section")
    if "file" in spec:
        return io.read_edge_csv(spec["file"])
    if "generator" in spec:
        gen = dict(spec["generator"])
        kind = gen.pop("kind", None)
        if kind is None:
            raise ConfigError("generator spec needs a 'kind'")
        seed = int(gen.pop("seed", 0))
        if "coords_file" in gen:
            gen["coords"] = io.read_coords_csv(gen.pop("coords_file"))
        if spec.get("connected"):
            return random_connected(kind, gen, seed)
        return generate(kind, gen, seed)
    raise ConfigError("graph section needs 'file' or 'generator'")


def _resolve_v0(cfg: dict, g, seed: int):
    spec = cfg.get("v0")
    if not spec:
        raise ConfigError("config needs a 'v0' section")
    if "file" in spec:
        return io.read_subset(spec["file"])
    if "ids" in spec:
        return tuple(sorted(int(v) for v in spec["ids"]))
    if "random_p" in spec:
        gen = rng.stream(seed, 0, 0)
        return experiments.sample_subset(g, float(spec["random_p"]), gen)
    raise ConfigError("v0 section needs 'file', 'ids' or 'random_p'")


def _fit_spec(cfg: dict) -> FitSpec:
    tup = cfg.get("tuple", {})
    solver = cfg.get("solver", {})
    pins = solver.get("fixed_coeffs")
    kwargs = dict(single_set=bool(tup.get("single_set", True)),
                  degree=int(tup.get("degree", 1)),
                  r=int(tup.get("r", 0)), refine=bool(tup.get("refine", False)),
                  delta=float(solver.get("delta", 0.6)),
                  family=solver.get("family", cfg.get("family", "sym_zero_row")))
    if pins is not None:
        kwargs["fixed_coeffs"] = tuple((int(i), int(j), float(v)) for i, j, v in pins)
    return FitSpec(**kwargs)


def _resolve_tuple(cfg: dict, g, v0) -> SubsetTuple:
    tup = cfg.get("tuple", {})
    if "sets" in tup:
        return SubsetTuple(tuple(frozenset(s) for s in tup["sets"]),
                           tuple(tup["degrees"]))
    emb = Embedding(g, tuple(sorted(v0)))
    built = build_cvd(emb, r=int(tup.get("r", 2)))
    if tup.get("refine", True):
        built = refine_default(built)
    return built


def _solver_options(cfg: dict, seed: int) -> SolverOptions:
    opts = cfg.get("solver", {}).get("options", {})
    return SolverOptions(
        max_iters=int(opts.get("max_iters", 5000)),
        step_c=float(opts.get("step_c", 1.0)),
        tol=float(opts.get("tol", 1e-8)),
        restarts=int(opts.get("restarts", 5)),
        seed=seed,
        inner_iters=int(opts.get("inner_iters", 50)),
        warm_start=bool(opts.get("warm_start", True)),
    )


def _parallel_records(fn, trials: int, jobs: int):
    """Split trials over worker threads; records are re-sorted afterwards,
    so the output is identical for any job count."""
    if jobs <= 1 or trials <= 1:
        return fn(0, trials)
    chunk = (trials + jobs - 1) // jobs
    futures = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        start = 0
        while start < trials:
            width = min(chunk, trials - start)
            futures.append(pool.submit(fn, start, width))
            start += width
    records = []
    for fut in futures:
        records.extend(fut.result())
    records.sort(key=lambda r: (r["trial"], r["operator"], r["param"]))
    return records


def _task_params(cfg: dict) -> dict:
    return dict(cfg.get("task", {}))


def _write_common(outdir: Path, cfg: dict, seed: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    io.write_manifest(cfg, seed, outdir / "manifest.json")


# ---------------------------------------------------------------------------
# Subcommand bodies

def _cmd_fit(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    v0 = _resolve_v0(cfg, g, seed)
    solver = cfg.get("solver", {})
    problem = solver.get("problem", "least_squares")
    spec = _fit_spec(cfg)
    emb = Embedding(g, tuple(sorted(v0)))
    tup = _resolve_tuple(cfg, g, v0)
    if problem == "least_squares":
        omega = build_omega(g, emb, spec.delta)
        fit = solve_least_squares(g, emb, tup, spec.family, omega, spec.pins())
    elif problem == "operator_difference":
        fit = solve_operator_difference(g, emb, tup, spec.pins(),
                                        _solver_options(cfg, seed))
    else:
        raise ConfigError(f"unknown problem {problem!r}")
    io.write_operator(fit.operator, outdir / "operator.csv", v0_ids=v0)
    io.write_fit_result(fit, outdir / "fit.json", outdir / "operator.csv")
    print(f"loss {fit.loss_value!r}")
    return 0


def _cmd_spectrum(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    v0 = _resolve_v0(cfg, g, seed)
    report = experiments.spectrum_report(g, v0, _fit_spec(cfg))
    ops = report["operator_eigenvalues"]
    mss = report["main_spectral_set"]
    rows = max(len(ops), len(mss))
    with (outdir / "spectrum.csv").open("w") as fh:
        fh.write("index,operator_eigenvalue,main_spectral_value\n")
        for i in range(rows):
            a = repr(float(ops[i])) if i < len(ops) else ""
            b = repr(float(mss[i])) if i < len(mss) else ""
            fh.write(f"{i},{a},{b}\n")
    stats = {k: report[k] for k in
             ("main_component_share", "subset_size", "subset_components", "loss")}
    stats["main_component"] = [int(v) for v in report["main_component"]]
    (outdir / "stats.json").write_text(json.dumps(stats, sort_keys=True, indent=1) + "\n")
    return 0


def _cmd_compress(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    task = _task_params(cfg)
    kwargs = dict(
        subset_p=float(task.get("subset_p", 0.4)),
        thetas=[float(t) for t in task.get("thetas", [task.get("theta_c", 0.4)])],
        bandwidth=int(task.get("bandwidth", max(3, round(0.1 * g.n)))),
        n_signals=int(task.get("n_signals", 20)),
        seed=seed, spec=_fit_spec(cfg))
    records = _parallel_records(
        lambda first, count: experiments.run_compression(
            g, trials=count, first_trial=first, **kwargs), trials, jobs)
    io.write_records_csv(records, outdir / "trials.csv")
    io.write_summary_csv(experiments.summarize(records), outdir / "summary.csv")
    return 0


def _cmd_detect(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    task = _task_params(cfg)
    kwargs = dict(
        subset_p=float(task.get("subset_p", 0.5)),
        bandwidth=int(task.get("bandwidth", max(3, round(0.1 * g.n)))),
        theta_a=float(task.get("theta_a", 0.35)),
        tau=float(task.get("tau", 1.1)),
        perturbations=[float(p) for p in task.get("perturbations",
                                                  [0.2, 0.4, 0.6, 0.8, 1.0])],
        consecutive=bool(task.get("consecutive", False)),
        seed=seed, spec=_fit_spec(cfg))
    records = _parallel_records(
        lambda first, count: experiments.run_anomaly(
            g, trials=count, first_trial=first, **kwargs), trials, jobs)
    io.write_records_csv(records, outdir / "trials.csv")
    io.write_summary_csv(experiments.summarize(records), outdir / "summary.csv")
    return 0


def _cmd_denoise(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    task = _task_params(cfg)
    kwargs = dict(
        subset_p=float(task.get("subset_p", 0.2)),
        snrs=[float(s) for s in task.get("snrs", [task.get("snr_db", 8.0)])],
        theta_d=float(task.get("theta_d", 0.2)),
        s_d=float(task.get("s_d", 0.3)),
        si_rate=float(task.get("si_rate", 0.3)),
        seed=seed, spec=_fit_spec(cfg))
    records = _parallel_records(
        lambda first, count: experiments.run_denoise(
            g, trials=count, first_trial=first, **kwargs), trials, jobs)
    io.write_records_csv(records, outdir / "trials.csv")
    io.write_summary_csv(experiments.summarize(records), outdir / "summary.csv")
    return 0


def _cmd_learn(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    task = _task_params(cfg)
    kwargs = dict(
        subset_p=float(task.get("subset_p", 0.4)),
        betas=[float(b) for b in task.get("betas", [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])],
        n_train=int(task.get("n_train", 10)),
        n_eval=int(task.get("n_eval", 30)),
        seed=seed, spec=_fit_spec(cfg))
    records = _parallel_records(
        lambda first, count: experiments.run_learning(
            g, trials=count, first_trial=first, **kwargs), trials, jobs)
    io.write_records_csv(records, outdir / "trials.csv")
    io.write_summary_csv(experiments.summarize(records), outdir / "summary.csv")
    return 0


def _cmd_kron(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    v0 = _resolve_v0(cfg, g, seed)
    op = kron_reduce(g, v0)
    io.write_operator(op, outdir / "operator.csv", v0_ids=v0)
    return 0


def _cmd_sparsify(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    v0 = _resolve_v0(cfg, g, seed)
    eps = float(cfg.get("sparsify", {}).get("epsilon", 0.5))
    spec = _fit_spec(cfg)
    emb, _, fit = experiments.standard_fit(g, v0, spec)
    from .graphs import induced_subgraph

    h0, _ = induced_subgraph(g, emb.v0)
    thin, report = sparsify.sparsify_report(fit.operator, h0, eps, seed)
    io.write_operator(thin, outdir / "operator.csv", v0_ids=v0)
    (outdir / "report.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
    return 0


def _cmd_simulate(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    sim = cfg.get("simulate", {})
    model = sim.get("model", "vertex")
    qs = [float(q) for q in sim.get("q", [0.5])] if isinstance(sim.get("q", [0.5]), list) \
        else [float(sim["q"])]
    exact = bool(sim.get("exact", False))
    lines = ["model,q,k,value"]
    summary = {}
    for q in qs:
        if exact:
            dist = randlab.exact_component_distribution(g, model, q)
            for k, p in dist.items():
                lines.append(f"{model},{q!r},{k},{p!r}")
            summary[repr(q)] = {"mean_largest": sum(k * p for k, p in dist.items())}
        else:
            mc = randlab.monte_carlo_stats(g, model, q, trials, seed)
            for k, c in mc.largest_histogram.items():
                lines.append(f"{model},{q!r},{k},{c}")
            summary[repr(q)] = {
                "mean_largest": mc.mean_largest,
                "mean_components": mc.mean_components,
                "mean_survivors": mc.mean_survivors,
            }
    (outdir / "histogram.csv").write_text("\n".join(lines) + "\n")
    (outdir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    return 0


def _cmd_dim(cfg, outdir, seed, jobs, trials):
    g = _resolve_graph(cfg)
    v0 = _resolve_v0(cfg, g, seed)
    tup = _resolve_tuple(cfg, g, v0)
    rank = family_dimension(g, tup)
    essential = is_essential(tup)
    obj = {
        "rank": rank,
        "essential": essential,
        "degree_sum_plus_k": int(sum(tup.degrees) + tup.k),
        "sets": [sorted(s) for s in tup.sets],
        "degrees": list(tup.degrees),
    }
    (outdir / "dim.json").write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    print(f"dimension {rank}")
    return 0


_HANDLERS = {
    "fit": _cmd_fit,
    "spectrum": _cmd_spectrum,
    "compress": _cmd_compress,
    "detect": _cmd_detect,
    "denoise": _cmd_denoise,
    "learn": _cmd_learn,
    "kron": _cmd_kron,
    "sparsify": _cmd_sparsify,
    "simulate": _cmd_simulate,
    "dim": _cmd_dim,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="subgsp",
        description="Fit subset shift operators and run subset signal tasks.")
    parser.add_argument("subcommand", choices=_SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--jobs", type=int, default=1, help="concurrent trial workers")
    parser.add_argument("--trials", type=int, default=None, help="override config trials")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
        if "seed" not in cfg and args.seed is None:
            raise ConfigError("a seed is mandatory (config 'seed' or --seed)")
        trials = int(args.trials if args.trials is not None else cfg.get("trials", 1))
        resolved = dict(cfg)
        resolved["seed"] = seed
        resolved["trials"] = trials
        outdir = Path(args.out)
        _write_common(outdir, resolved, seed)
        log.info("running %s -> %s", args.subcommand, outdir)
        return _HANDLERS[args.subcommand](cfg, outdir, seed, max(1, args.jobs), trials)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return 2
    except SubgspError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
