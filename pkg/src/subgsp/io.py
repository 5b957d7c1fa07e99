"""File formats: edge lists, subsets, operators, filters, fits, signals.

All text output uses ``repr`` floats so replaying a run reproduces every
file byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from .embedding import SubsetTuple
from .errors import ConfigError
from .filters import SemiFilter
from .graphs import Graph, graph_from_edges
from .operators import SubgraphOperator
from .solvers import FitResult


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Graphs

def write_edge_csv(g: Graph, path) -> None:
    """Edge list with a JSON sidecar for directedness and shift kind."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst", "weight"])
        for s, d, wt in g.edges:
            w.writerow([s, d, _fmt(wt)])
    sidecar = {"n": g.n, "directed": g.directed, "shift_kind": g.shift_kind}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, sort_keys=True) + "\n")


def read_edge_csv(path) -> Graph:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"edge file {path} does not exist")
    sidecar_path = path.with_suffix(path.suffix + ".json")
    meta = {}
    if sidecar_path.exists():
        meta = json.loads(sidecar_path.read_text())
    edges = []
    max_id = -1
    with path.open() as fh:
        for row in csv.DictReader(fh):
            s, d, wt = int(row["src"]), int(row["dst"]), float(row["weight"])
            edges.append((s, d, wt))
            max_id = max(max_id, s, d)
    n = int(meta.get("n", max_id + 1))
    return graph_from_edges(n, edges, directed=bool(meta.get("directed", False)),
                            shift_kind=meta.get("shift_kind", "laplacian"))


def read_coords_csv(path) -> np.ndarray:
    """Coordinates file ``id,x,y`` sorted by id."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"coordinates file {path} does not exist")
    rows = []
    with path.open() as fh:
        for row in csv.DictReader(fh):
            rows.append((int(row["id"]), float(row["x"]), float(row["y"])))
    rows.sort()
    return np.array([[x, y] for _, x, y in rows])


# ---------------------------------------------------------------------------
# Subsets / tuples / filters

def read_subset(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"subset file {path} does not exist")
    ids = [int(line) for line in path.read_text().split() if line.strip()]
    return tuple(sorted(set(ids)))


def write_subset(ids, path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in sorted(ids)))


def tuple_to_json(t: SubsetTuple) -> dict:
    return {"sets": [sorted(s) for s in t.sets], "degrees": list(t.degrees)}


def tuple_from_json(obj: dict) -> SubsetTuple:
    return SubsetTuple(tuple(frozenset(s) for s in obj["sets"]),
                       tuple(obj["degrees"]))


def filter_to_json(f: SemiFilter) -> dict:
    return {"tuple_ref": tuple_to_json(f.tuple),
            "coeffs": [list(row) for row in f.coeffs],
            "fixed_mask": [list(row) for row in f.fixed_mask]}


def filter_from_json(obj: dict) -> SemiFilter:
    return SemiFilter(tuple_from_json(obj["tuple_ref"]),
                      tuple(tuple(row) for row in obj["coeffs"]),
                      tuple(tuple(row) for row in obj["fixed_mask"]))


# ---------------------------------------------------------------------------
# Operators

def write_operator(f0: SubgraphOperator, path, v0_ids=None) -> None:
    """Matrix CSV plus a JSON header with the family tag."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        for row in f0.matrix:
            w.writerow([_fmt(x) for x in row])
    header = {"family": f0.family,
              "v0_ids": [int(v) for v in (v0_ids or range(f0.size))]}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(header, sort_keys=True) + "\n")


def read_operator(path) -> SubgraphOperator:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"operator file {path} does not exist")
    rows = []
    with path.open() as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([float(x) for x in row])
    header = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    return SubgraphOperator(header["family"], np.array(rows))


# ---------------------------------------------------------------------------
# Fit results / signals / summaries

def write_fit_result(fit: FitResult, path, operator_path) -> None:
    info = fit.solver_info
    obj = {
        "loss": float(fit.loss_value),
        "operator_path": str(operator_path),
        "filter": None if fit.filter is None else filter_to_json(fit.filter),
        "solver_info": {
            "iterations": int(info.iterations),
            "residual": float(info.residual),
            "converged": bool(info.converged),
            "rank": None if info.rank is None else int(info.rank),
            "restarts": int(info.restarts),
        },
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def write_signals_csv(signals, path, labels=None) -> None:
    """Rows = vertices, columns = trials/time steps."""
    arr = np.atleast_2d(np.asarray(signals, dtype=float))
    if labels is None:
        labels = [f"s{j}" for j in range(arr.shape[0])]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(labels))
        for row in arr.T:
            w.writerow([_fmt(x) for x in row])


def read_signals_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"signal file {path} does not exist")
    with path.open() as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return data.T


def write_records_csv(records, path, fields=("trial", "operator", "param", "value")) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(fields))
        for rec in records:
            w.writerow([_fmt(rec[f]) if isinstance(rec[f], float) else rec[f]
                        for f in fields])


def write_summary_csv(rows, path) -> None:
    """Schema: operator,param,mean,stderr,trials."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["operator", "param", "mean", "stderr", "trials"])
        for r in rows:
            w.writerow([r["operator"], _fmt(r["param"]), _fmt(r["mean"]),
                        _fmt(r["stderr"]), r["trials"]])


def config_hash(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()).hexdigest()


def write_manifest(config: dict, seed: int, path) -> None:
    """Reproducibility record: resolved config, hash, seed, versions."""
    import scipy

    import subgsp

    obj = {
        "config": config,
        "config_hash": config_hash(config),
        "seed": int(seed),
        "versions": {
            "subgsp": subgsp.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def read_manifest(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"manifest {path} does not exist")
    return json.loads(path.read_text())
