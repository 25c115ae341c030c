"""Monte Carlo drivers for the coupled constructions.

Every trial draws a fresh oracle from ``derive_seed(master_seed, kind, n, i)``
and computes all of its distances under that one oracle, so quantities such
as D, D', D_1, D_2 of a trial are coupled exactly (same edge, same weight).
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable

from .geodesic import DEFAULT_BUDGET, BudgetExceeded, path_weight, shortest_path
from .topology import EdgeKey, EdgeKind, Topology, Vertex, tree_path
from .weights import WeightOracle, WeightSpec, derive_seed

KINDS = ("zline", "coupled_pair", "pruned_b", "treeline")
GRAPHS = ("full", "dary")
TOL = 1e-9

# Children of the root used for the two disjoint subtree copies, and for the
# excised vertex v0 (child 0) in the pruned construction.
PAIR_CHILDREN = ("0", "1")
PRUNED_CHILDREN = ("0", "1", "2")


class ConfigError(ValueError):
    pass


class CouplingViolation(AssertionError):
    def __init__(self, message: str, record: "TrialRecord"):
        super().__init__(message)
        self.record = record


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "zline"
    d: int = 3
    graph: str = "full"
    weights: WeightSpec = field(default_factory=lambda: WeightSpec.shifted_exp(0.5, 1.0))
    n_schedule: tuple = (8, 12, 16, 24, 32)
    replicas: int = 400
    master_seed: int = 0
    alpha: float = 1.0
    k_override: int | None = None
    budget: int = DEFAULT_BUDGET
    pruned_pairs: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_schedule", tuple(int(n) for n in self.n_schedule))
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind: must be one of {', '.join(KINDS)} (got {self.kind!r})")
        if self.d < 3:
            raise ConfigError("d must be ≥ 3")
        if self.d > 36:
            raise ConfigError("d must be ≤ 36")
        if self.graph not in GRAPHS:
            raise ConfigError(f"graph: must be one of {', '.join(GRAPHS)} (got {self.graph!r})")
        if self.kind == "pruned_b" and self.graph != "full":
            raise ConfigError("graph: the pruned experiment runs on the full tree T_d")
        if self.replicas < 2:
            raise ConfigError("replicas must be ≥ 2")
        if not self.n_schedule:
            raise ConfigError("n: schedule is empty")
        if any(n < 0 for n in self.n_schedule):
            raise ConfigError("n: values must be ≥ 0")
        if any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise ConfigError("n: schedule must be strictly increasing")
        if not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if self.k_override is not None and self.k_override < 1:
            raise ConfigError("k must be ≥ 1")
        if self.budget < 1:
            raise ConfigError("budget must be ≥ 1")

    def family(self) -> Topology:
        return Topology(self.graph, self.d)

    def depth_k(self, n: int) -> int:
        if self.k_override is not None:
            return self.k_override
        if n <= 1:
            return 1
        return max(1, math.ceil(self.alpha * math.log(n) / math.log(self.d - 1)))

    def trial_seed(self, n: int, trial_index: int) -> int:
        return derive_seed(self.master_seed, self.kind, n, trial_index)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["weights"] = str(self.weights)
        out["n_schedule"] = list(self.n_schedule)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if isinstance(data.get("weights"), str):
            data["weights"] = WeightSpec.parse(data["weights"])
        return cls(**data)


@dataclass
class TrialRecord:
    kind: str
    n: int
    trial_index: int
    seed: int
    d: int
    graph: str
    status: str = "ok"
    D: float | None = None
    D1: float | None = None
    D2: float | None = None
    D_prime: float | None = None
    D1_prime: float | None = None
    D2_prime: float | None = None
    connectors: list | None = None
    edge_count: int | None = None
    tree_projection: int | None = None
    event_b: bool | None = None
    k: int | None = None
    explored: int = 0
    error: str | None = None
    runtime_ms: float | None = None

    @property
    def key(self) -> tuple:
        return (self.kind, self.n, self.trial_index)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self, timing: bool = False) -> dict:
        out = asdict(self)
        if not timing:
            del out["runtime_ms"]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrialRecord":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        return cls(**data)


def _new_record(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    if n < 0:
        raise ValueError("n must be >= 0")
    return TrialRecord(cfg.kind, n, trial_index, cfg.trial_seed(n, trial_index), cfg.d, cfg.graph)


def _oracle(cfg: ExperimentConfig, rec: TrialRecord) -> WeightOracle:
    return WeightOracle(rec.seed, cfg.weights)


def run_zline_trial(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    rec = _new_record(cfg, n, trial_index)
    t0 = time.perf_counter()
    res = shortest_path(cfg.family(), _oracle(cfg, rec), Vertex("", 0), Vertex("", n), cfg.budget)
    rec.D = res.distance
    rec.edge_count = res.stats.edge_count
    rec.tree_projection = res.stats.tree_projection_size
    rec.explored = res.explored
    rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return rec


def run_coupled_pair_trial(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    """D on the family graph, D_i on the subtree of root child i, one oracle.

    Checks D <= min(D_1, D_2) + X(e_{1,0}) + X(e_{1,n}) + X(e_{2,0}) + X(e_{2,n}).
    """
    rec = _new_record(cfg, n, trial_index)
    oracle = _oracle(cfg, rec)
    t0 = time.perf_counter()
    full = shortest_path(cfg.family(), oracle, Vertex("", 0), Vertex("", n), cfg.budget)
    explored = full.explored
    sub = []
    for child in PAIR_CHILDREN:
        r = shortest_path(Topology.restricted(cfg.d, child), oracle,
                          Vertex(child, 0), Vertex(child, n), cfg.budget)
        sub.append(r.distance)
        explored += r.explored
    rec.D, (rec.D1, rec.D2) = full.distance, sub
    rec.connectors = [oracle.weight(EdgeKey(EdgeKind.TREE, Vertex(child, j)))
                      for child in PAIR_CHILDREN for j in (0, n)]
    rec.edge_count = full.stats.edge_count
    rec.tree_projection = full.stats.tree_projection_size
    rec.explored = explored
    rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
    rhs = min(rec.D1, rec.D2) + sum(rec.connectors)
    if rec.D > rhs + TOL:
        rec.status = "coupling_violation"
        raise CouplingViolation(f"D={rec.D!r} > min(D1,D2)+connectors={rhs!r}", rec)
    return rec


def _descendant(child: str, k: int) -> str:
    return child + "0" * (k - 1)


def run_pruned_trial(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    """D on T_d x Z and D' on (T_d minus the subtree of v0) x Z under one oracle.

    v0 is the depth-k all-zero word.  Event B is read off the realized
    geodesic; D <= D' always and D == D' off B are enforced.
    """
    if cfg.graph != "full":
        raise ConfigError("graph: the pruned experiment runs on the full tree T_d")
    rec = _new_record(cfg, n, trial_index)
    oracle = _oracle(cfg, rec)
    k = cfg.depth_k(n)
    v0 = _descendant(PRUNED_CHILDREN[0], k)
    source, target = Vertex("", 0), Vertex("", n)
    t0 = time.perf_counter()
    full = shortest_path(Topology.full(cfg.d), oracle, source, target, cfg.budget, watch=[v0])
    pruned = shortest_path(Topology.pruned(cfg.d, v0), oracle, source, target, cfg.budget)
    rec.k = k
    rec.D, rec.D_prime = full.distance, pruned.distance
    rec.event_b = full.stats.visits_word[v0]
    rec.edge_count = full.stats.edge_count
    rec.tree_projection = full.stats.tree_projection_size
    rec.explored = full.explored + pruned.explored
    problems = []
    if rec.D > rec.D_prime + TOL:
        problems.append(f"D={rec.D!r} > D'={rec.D_prime!r}")
    if not rec.event_b and abs(rec.D - rec.D_prime) > TOL:
        problems.append(f"B is false but D={rec.D!r} != D'={rec.D_prime!r}")
    if cfg.pruned_pairs:
        sub = []
        for child in PRUNED_CHILDREN[1:]:
            vi = _descendant(child, k)
            r = shortest_path(Topology.restricted(cfg.d, child), oracle,
                              Vertex(vi, 0), Vertex(vi, n), cfg.budget)
            sub.append(r.distance)
            rec.explored += r.explored
        rec.D1_prime, rec.D2_prime = sub
        rec.connectors = [path_weight(oracle, tree_path(j, _descendant(child, k)))
                          for child in PRUNED_CHILDREN[1:] for j in (0, n)]
        rhs = min(sub) + sum(rec.connectors)
        if rec.D_prime > rhs + TOL:
            problems.append(f"D'={rec.D_prime!r} > min(D1',D2')+|gamma|={rhs!r}")
    rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
    if problems:
        rec.status = "coupling_violation"
        raise CouplingViolation("; ".join(problems), rec)
    return rec


def run_treeline_trial(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    """Distance from (root, 0) to (v_n, 0), v_n the depth-n all-zero word."""
    rec = _new_record(cfg, n, trial_index)
    t0 = time.perf_counter()
    res = shortest_path(cfg.family(), _oracle(cfg, rec), Vertex("", 0), Vertex("0" * n, 0),
                        cfg.budget)
    rec.D = res.distance
    rec.edge_count = res.stats.edge_count
    rec.tree_projection = res.stats.tree_projection_size
    rec.explored = res.explored
    rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return rec


RUNNERS = {
    "zline": run_zline_trial,
    "coupled_pair": run_coupled_pair_trial,
    "pruned_b": run_pruned_trial,
    "treeline": run_treeline_trial,
}


def run_trial(cfg: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    """Run one trial; search and coupling failures come back as flagged records."""
    try:
        return RUNNERS[cfg.kind](cfg, n, trial_index)
    except BudgetExceeded as exc:
        rec = _new_record(cfg, n, trial_index)
        rec.status, rec.explored, rec.error = "budget_exceeded", exc.settled, str(exc)
        return rec
    except CouplingViolation as exc:
        exc.record.error = str(exc)
        return exc.record


def _run_chunk(args):
    cfg, jobs = args
    return [run_trial(cfg, n, i) for n, i in jobs]


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[TrialRecord]:
    """All (n, trial) pairs of the schedule; output sorted by (kind, n, trial_index)."""
    work = [(n, i) for n in cfg.n_schedule for i in range(cfg.replicas)]
    if jobs <= 1 or len(work) < 2:
        records = [run_trial(cfg, n, i) for n, i in work]
    else:
        chunks = [work[j::jobs * 4] for j in range(jobs * 4)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = [r for part in pool.map(_run_chunk, [(cfg, c) for c in chunks if c])
                       for r in part]
    records.sort(key=lambda r: r.key)
    return records


def dataset_filename(cfg: ExperimentConfig) -> str:
    return f"{cfg.kind}_{cfg.d}_{cfg.weights.slug()}_{cfg.master_seed}.jsonl"


def write_jsonl(records: Iterable[TrialRecord], path, timing: bool = False) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(timing), sort_keys=True) + "\n")
    os.replace(tmp, path)


class SchemaError(ValueError):
    def __init__(self, path, problems: list[tuple[int, str]]):
        self.path = path
        self.problems = problems
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in problems[:10])
        super().__init__(f"{path}: {len(problems)} malformed line(s): {lines}")


def read_jsonl(path) -> tuple[list[TrialRecord], list[tuple[int, str]]]:
    """Parse a dataset; malformed lines are skipped and returned with line numbers."""
    records, problems = [], []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                if not isinstance(data, dict):
                    raise ValueError("not a JSON object")
                rec = TrialRecord.from_dict(data)
                if rec.kind not in KINDS:
                    raise ValueError(f"unknown kind {rec.kind!r}")
            except (ValueError, TypeError) as exc:
                problems.append((ln, str(exc)))
                continue
            records.append(rec)
    return records, problems


CSV_COLUMNS = ("kind", "n", "trial_index", "seed", "d", "graph", "status", "D", "D1", "D2",
               "D_prime", "D1_prime", "D2_prime", "edge_count", "tree_projection", "event_b",
               "k", "explored")


def write_csv(records: Iterable[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            row = rec.to_dict()
            w.writerow(["" if row[c] is None else row[c] for c in CSV_COLUMNS])


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
