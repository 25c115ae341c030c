"""Command line entry point: ``fpplab simulate | analyze | verify``.

Config files are TOML with one flat table of fields::

    kind = "coupled_pair"        # zline | coupled_pair | pruned_b | treeline
    d = 3                        # tree degree, >= 3
    graph = "dary"               # full | dary
    weights = "shifted_exp(c=0.5,rate=1.0)"
    n = [8, 16, 32]              # strictly increasing
    replicas = 400
    seed = 7                     # master seed
    alpha = 1.0                  # pruned depth k = ceil(alpha ln n / ln(d-1))
    k = 3                        # fixed pruned depth (overrides alpha)
    budget = 5000000             # settled-vertex cap per search
    pruned_pairs = false         # also run the restricted pair inside pruned_b

Weight grammar: ``family(name=value, ...)`` with families ``constant(c)``,
``uniform(a,b)``, ``exp(rate)``, ``shifted_exp(c,rate)``, ``pareto(scale,shape)``;
values may also be given positionally.  Every field can be overridden by the
flag of the same name.  The master seed falls back to ``$FPP_LAB_SEED``.

Exit codes: 0 success, 1 invariant failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import analyze_records, write_summary_csv
from .experiments import (
    ConfigError,
    ExperimentConfig,
    dataset_filename,
    read_jsonl,
    run_sweep,
    write_csv,
    write_jsonl,
)
from .geodesic import ball_oracle_distance, path_edges, path_weight, shortest_path
from .topology import (
    EdgeKind,
    Topology,
    Vertex,
    canonical_edge_key,
    tree_distance,
)
from .weights import WeightOracle, WeightSpec, derive_seed

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "FPP_LAB_SEED"

# config key -> ExperimentConfig field
FIELDS = {
    "kind": "kind", "d": "d", "graph": "graph", "weights": "weights", "n": "n_schedule",
    "replicas": "replicas", "seed": "master_seed", "alpha": "alpha", "k": "k_override",
    "budget": "budget", "pruned_pairs": "pruned_pairs",
}
_TYPES = {"kind": str, "d": int, "graph": str, "weights": str, "n": list, "replicas": int,
          "seed": int, "alpha": (int, float), "k": int, "budget": int, "pruned_pairs": bool}


def _version() -> str:
    try:
        return metadata.version("fpplab")
    except metadata.PackageNotFoundError:
        return "unknown"


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*{re.escape(key)}\s*=", line):
            return i
    return None


def load_config_file(path) -> dict:
    """Parse a TOML config into raw field values; errors carry line numbers."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out = {}
    for key, value in data.items():
        where = f"{path}:{_line_of(text, key) or '?'}"
        if key not in FIELDS:
            raise ConfigError(f"{where}: unknown field {key!r}")
        want = _TYPES[key]
        if isinstance(value, bool) and want is not bool:
            raise ConfigError(f"{where}: {key} has the wrong type")
        if not isinstance(value, want):
            raise ConfigError(f"{where}: {key} has the wrong type")
        out[key] = value
    return out


def _parse_n(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"n: expected comma-separated integers, got {text!r}") from None


def build_config(args, env=None) -> ExperimentConfig:
    env = os.environ if env is None else env
    if getattr(args, "manifest", None):
        try:
            data = json.loads(Path(args.manifest).read_text())["config"]
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{args.manifest}: not a run manifest ({exc})") from None
        try:
            return ExperimentConfig.from_dict(data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{args.manifest}: {exc}") from None
    raw = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if "seed" not in raw and env.get(SEED_ENV):
        try:
            raw["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    if isinstance(raw.get("n"), str):
        raw["n"] = _parse_n(raw["n"])
    if "weights" in raw:
        try:
            raw["weights"] = WeightSpec.parse(raw["weights"])
        except ValueError as exc:
            raise ConfigError(f"weights: {exc}") from None
    kwargs = {FIELDS[k]: v for k, v in raw.items()}
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _atomic_json(obj, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def manifest_path(dataset: Path) -> Path:
    return dataset.with_name(dataset.stem + ".manifest.json")


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    t0 = time.time()
    records = run_sweep(cfg, jobs=jobs)
    dataset = out / dataset_filename(cfg)
    write_jsonl(records, dataset)
    outputs = [str(dataset)]
    if args.csv:
        csv_path = dataset.with_suffix(".csv")
        write_csv(records, csv_path)
        outputs.append(str(csv_path))
    tally = {}
    for r in records:
        tally[r.status] = tally.get(r.status, 0) + 1
    manifest = {
        "config": cfg.to_dict(),
        "version": _version(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_seconds": round(time.time() - t0, 3),
        "outputs": outputs,
        "status_tally": tally,
    }
    _atomic_json(manifest, manifest_path(dataset))
    failed = len(records) - tally.get("ok", 0)
    print(f"{len(records)} records -> {dataset}")
    if failed:
        print(f"{failed} trial(s) not ok: " + ", ".join(f"{k}={v}" for k, v in sorted(tally.items())
                                                        if k != "ok"))
        return EXIT_FAIL
    return EXIT_OK


def _weights_for(path: Path, override: str | None) -> WeightSpec | None:
    if override:
        try:
            return WeightSpec.parse(override)
        except ValueError as exc:
            raise ConfigError(f"weights: {exc}") from None
    m = manifest_path(path)
    if m.exists():
        try:
            return WeightSpec.parse(json.loads(m.read_text())["config"]["weights"])
        except (KeyError, ValueError):
            return None
    return None


def cmd_analyze(args) -> int:
    records, weights = [], None
    for p in map(Path, args.datasets):
        recs, problems = read_jsonl(p)
        for ln, msg in problems:
            print(f"{p}:{ln}: skipped malformed record: {msg}", file=sys.stderr)
        records.extend(recs)
        w = _weights_for(p, args.weights)
        if weights is None:
            weights = w
        elif w is not None and w != weights:
            print(f"warning: {p} uses {w}, bound checks use {weights}", file=sys.stderr)
    if not records:
        print("no valid records", file=sys.stderr)
        return EXIT_IO
    report = analyze_records(records, weights, seed=args.seed)
    report["weights"] = str(weights) if weights else None
    report["inputs"] = list(args.datasets)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_json(report, out / "report.json")
    write_summary_csv(report, out / "summary.csv")
    for kind, sec in report["kinds"].items():
        fit = sec["fits"].get("mad", {})
        print(f"{kind}: {sec['records']} records, mad model: {fit.get('chosen', 'n/a')}")
    print(f"report -> {out / 'report.json'}, {out / 'summary.csv'}")
    return EXIT_OK


# verify suites: each yields (name, passed, detail)

def _verify_unit(args):
    rng = random.Random(args.seed)
    for d in (3, 4, 7):
        for kind in ("full", "dary"):
            topo = Topology(kind, d)
            for _ in range(50):
                word = "".join(str(rng.randrange(d - 1)) for _ in range(rng.randrange(5)))
                v = Vertex(word, rng.randrange(-5, 6))
                deg = len(topo.neighbors(v))
                want = (topo.root_children() if not word else d) + 2
                if deg != want:
                    yield f"degree {kind} d={d}", False, f"{v} has {deg}, expected {want}"
                    break
            else:
                yield f"degree {kind} d={d}", True, "50 vertices"
    bad = 0
    for _ in range(500):
        d = rng.randrange(3, 10)
        word = "".join(str(rng.randrange(d - 1)) for _ in range(rng.randrange(8)))
        v = Vertex(word, rng.randrange(-100, 100))
        if Vertex.decode(v.encode()) != v:
            bad += 1
    yield "vertex codec round trip", bad == 0, f"{500 - bad}/500"
    bad = 0
    topo = Topology.full(3)
    for _ in range(200):
        word = "".join(str(rng.randrange(2)) for _ in range(rng.randrange(4)))
        v = Vertex(word, rng.randrange(-3, 4))
        for u, key in topo.neighbors(v):
            if canonical_edge_key(u, v) != key or canonical_edge_key(v, u) != key:
                bad += 1
            if key.kind is EdgeKind.Z and key.anchor.z != min(u.z, v.z):
                bad += 1
    yield "edge key symmetry", bad == 0, f"{bad} mismatches"
    oracle = WeightOracle(args.seed, WeightSpec.shifted_exp(0.5, 1.0))
    bad = 0
    for _ in range(30):
        a = Vertex("".join(str(rng.randrange(2)) for _ in range(rng.randrange(3))), rng.randrange(3))
        b = Vertex("".join(str(rng.randrange(2)) for _ in range(rng.randrange(3))), rng.randrange(3))
        x = shortest_path(topo, oracle, a, b).distance
        y = shortest_path(topo, oracle, b, a).distance
        if abs(x - y) > 1e-12 * max(1.0, x):
            bad += 1
    yield "distance symmetry", bad == 0, f"{30 - bad}/30"


def random_oracle_instance(rng: random.Random, d: int = 3, max_n: int = 4, max_hops: int = 5):
    """(topology, source, target) for the brute-force comparison.

    The Z-offset is at most ``max_n`` and tree distance plus Z-offset at most
    ``max_hops``, which keeps the oracle ball to a few thousand vertices.
    """
    kind = rng.choice(("full", "dary", "pruned", "restricted"))
    if kind in ("full", "dary"):
        topo, base = Topology(kind, d), ""
    elif kind == "pruned":
        topo, base = Topology.pruned(d, "0" * rng.randrange(1, 3)), ""
    else:
        base = str(rng.randrange(d))
        topo = Topology.restricted(d, base)
    while True:
        s_word = base + "".join(str(rng.randrange(d - 1)) for _ in range(rng.randrange(2)))
        t_word = base + "".join(str(rng.randrange(d - 1)) for _ in range(rng.randrange(2)))
        n = rng.randrange(0, max_n + 1)
        if (topo.contains_word(s_word) and topo.contains_word(t_word)
                and tree_distance(s_word, t_word) + n <= max_hops):
            break
    z0 = rng.randrange(-2, 3)
    return topo, Vertex(s_word, z0), Vertex(t_word, z0 + n)


def _verify_oracle(args):
    rng = random.Random(args.seed)
    spec = WeightSpec.uniform(0.5, 1.5)
    worst, bad = 0.0, 0
    for i in range(args.instances):
        topo, s, t = random_oracle_instance(rng)
        oracle = WeightOracle(derive_seed(args.seed, "oracle", i), spec)
        res = shortest_path(topo, oracle, s, t)
        ref = ball_oracle_distance(topo, oracle, s, t)
        err = abs(res.distance - ref)
        worst = max(worst, err)
        if err > 1e-12 or abs(path_weight(oracle, path_edges(res.path)) - res.distance) > 1e-12:
            bad += 1
    yield "engine vs brute force", bad == 0, \
        f"{args.instances - bad}/{args.instances} matches, max error {worst:.3g}"


def _verify_coupling(args):
    from .experiments import run_sweep as sweep
    n = _parse_n(args.n) if isinstance(args.n, str) else [16]
    for kind, graph in (("coupled_pair", "dary"), ("pruned_b", "full")):
        cfg = ExperimentConfig(kind=kind, graph=graph, n_schedule=tuple(n), replicas=args.replicas,
                               master_seed=args.seed, pruned_pairs=True)
        recs = sweep(cfg, jobs=args.jobs or 1)
        ok = sum(r.ok for r in recs)
        other = {r.status for r in recs if not r.ok}
        yield f"{kind} per-sample inequalities", ok == len(recs), \
            f"{ok}/{len(recs)} hold" + (f" ({', '.join(sorted(other))})" if other else "")


SUITES = {"unit": _verify_unit, "oracle": _verify_oracle, "coupling": _verify_coupling}


def cmd_verify(args) -> int:
    failed = 0
    rows = list(SUITES[args.scope](args))
    width = max(len(name) for name, _, _ in rows)
    for name, passed, detail in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {name:<{width}}  {detail}")
        failed += not passed
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpplab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a sweep and write a JSON-lines dataset")
    s.add_argument("--config", help="TOML config file")
    s.add_argument("--manifest", help="rerun the exact config recorded in a manifest")
    s.add_argument("--kind")
    s.add_argument("--d", type=int)
    s.add_argument("--graph")
    s.add_argument("--weights")
    s.add_argument("--n", help="comma-separated n schedule")
    s.add_argument("--replicas", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--budget", type=int)
    s.add_argument("--pruned-pairs", dest="pruned_pairs", action="store_const", const=True)
    s.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    s.add_argument("--out", default="runs")
    s.add_argument("--csv", action="store_true", help="also write a per-trial CSV")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="summarize datasets into report.json and summary.csv")
    a.add_argument("datasets", nargs="+")
    a.add_argument("--weights", help="weight law for bound checks (default: from manifest)")
    a.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    a.add_argument("--out", default="report")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("scope", choices=sorted(SUITES))
    v.add_argument("--instances", type=int, default=200)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--n", default="16")
    v.add_argument("--replicas", type=int, default=100)
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
