"""Estimators, bound checks and scaling fits over trial datasets.

The dispersion statistic throughout is ``mad``, the mean absolute deviation
about the sample mean, i.e. the empirical E|D - E D|.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .experiments import TrialRecord
from .weights import WeightSpec, derive_seed

BOOTSTRAP_RESAMPLES = 2000
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class TooFewSamples(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


def mad(values) -> float:
    x = np.asarray(values, dtype=float)
    return float(np.mean(np.abs(x - x.mean())))


def _mad_rows(samples: np.ndarray) -> np.ndarray:
    return np.mean(np.abs(samples - samples.mean(axis=1, keepdims=True)), axis=1)


def bootstrap_ci(values, stat, seed: int, resamples: int = BOOTSTRAP_RESAMPLES,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile interval; ``stat`` maps a (resamples, n) array to one value per row.

    The interval is widened, if needed, to contain the plug-in estimate.
    """
    x = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(x), size=(resamples, len(x)))
    boot = stat(x[idx])
    lo, hi = np.quantile(boot, [(1 - level) / 2, (1 + level) / 2])
    est = float(stat(x[None, :])[0])
    return min(float(lo), est), max(float(hi), est)


@dataclass
class SummaryStats:
    n: int
    count: int
    mean: float
    std: float
    mad: float
    iqr: float
    quantiles: dict
    mad_ci: tuple


def summarize(values, n: int = 0, seed: int = 0) -> SummaryStats:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(x)}")
    q = np.quantile(x, QUANTILES)
    return SummaryStats(
        n=n,
        count=len(x),
        mean=float(x.mean()),
        std=float(x.std(ddof=1)),
        mad=mad(x),
        iqr=float(q[3] - q[1]),
        quantiles={f"q{int(p * 100):02d}": float(v) for p, v in zip(QUANTILES, q)},
        mad_ci=bootstrap_ci(x, _mad_rows, seed),
    )


@dataclass
class PairedDispersion:
    mean_abs_diff: float
    ci: tuple
    bound: float
    satisfied_within_ci: bool


def paired_dispersion(first, second, mean_weight: float, k: int = 1,
                      seed: int = 0) -> PairedDispersion:
    """E|D_1 - D_2| against the analytic bound 8 E[X] k (k = 1 for the plain pair)."""
    a = np.asarray(first, dtype=float)
    b = np.asarray(second, dtype=float)
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    if len(a) < 2:
        raise TooFewSamples(f"need at least 2 pairs, got {len(a)}")
    diff = np.abs(a - b)
    ci = bootstrap_ci(diff, lambda s: s.mean(axis=1), seed)
    bound = 8.0 * mean_weight * k
    return PairedDispersion(float(diff.mean()), ci, bound, ci[1] < bound)


@dataclass
class EventBReport:
    k: int
    count: int
    p_b_hat: float
    ci: tuple
    mean_V_gamma: float
    bound: float
    consistent: bool


def vertices_at_depth(d: int, k: int) -> int:
    """Number of vertices at distance k from the root of T_d."""
    return d * (d - 1) ** (k - 1)


def event_b_report(event_b, v_gamma, d: int, k: int, seed: int = 0) -> EventBReport:
    """Empirical P(B) against the plug-in bound E|V_gamma| / (d (d-1)^(k-1))."""
    b = np.asarray(event_b, dtype=float)
    v = np.asarray(v_gamma, dtype=float)
    if len(b) < 2 or len(b) != len(v):
        raise TooFewSamples("need at least 2 records carrying event_b and |V_gamma|")
    ci = bootstrap_ci(b, lambda s: s.mean(axis=1), seed)
    bound = float(v.mean()) / vertices_at_depth(d, k)
    return EventBReport(k, len(b), float(b.mean()), ci, float(v.mean()), bound, ci[0] <= bound)


def tightness_statistic(values) -> float:
    """Mean |D_(2i) - D_(2i+1)| over consecutive independent pairs."""
    x = np.asarray(values, dtype=float)
    if len(x) < 4 or len(x) % 2:
        raise TooFewSamples("need an even number (>= 4) of samples")
    return float(np.mean(np.abs(x[0::2] - x[1::2])))


MODELS = ("constant", "log", "power")
_N_PARAMS = {"constant": 1, "log": 2, "power": 2}


@dataclass
class ScalingFit:
    """Least-squares fits of y = a, y = a + b ln n and y = a n^beta.

    ``scores`` are small-sample corrected AIC values computed from residuals
    in the original y scale; residuals below 1e-9 of the data scale count
    as exact, so among exact fits the one with fewer parameters wins.
    """

    params: dict
    rss: dict
    scores: dict
    chosen: str
    points: list = field(default_factory=list)

    @property
    def beta(self) -> float | None:
        p = self.params.get("power")
        return None if p is None else p["beta"]


def fit_scaling(points) -> ScalingFit:
    pts = sorted((float(n), float(y)) for n, y in points)
    if len(pts) < 4:
        raise DegenerateInput("need at least 4 (n, dispersion) points")
    n = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(np.diff(n) <= 0) or n[0] <= 0:
        raise DegenerateInput("n values must be positive and distinct")
    if not np.all(np.isfinite(y)):
        raise DegenerateInput("dispersion values must be finite")
    m = len(y)
    ln = np.log(n)
    params, pred = {}, {}

    params["constant"] = {"a": float(y.mean())}
    pred["constant"] = np.full(m, y.mean())

    X = np.column_stack([np.ones(m), ln])
    (a, b), *_ = np.linalg.lstsq(X, y, rcond=None)
    params["log"] = {"a": float(a), "b": float(b)}
    pred["log"] = a + b * ln

    if np.all(y > 0):
        (la, beta), *_ = np.linalg.lstsq(X, np.log(y), rcond=None)
        params["power"] = {"a": float(math.exp(la)), "beta": float(beta)}
        pred["power"] = math.exp(la) * n ** beta

    scale = max(float(np.max(np.abs(y))), 1e-12)
    rss_floor = m * (1e-9 * scale) ** 2
    rss, scores = {}, {}
    for name, yhat in pred.items():
        r = float(np.sum((y - yhat) ** 2))
        rss[name] = r
        k = _N_PARAMS[name]
        scores[name] = m * math.log(max(r, rss_floor) / m) + 2 * k + 2 * k * (k + 1) / (m - k - 1)
    chosen = min(scores, key=lambda name: (scores[name], _N_PARAMS[name], MODELS.index(name)))
    return ScalingFit(params, rss, scores, chosen, [list(p) for p in pts])


def _values(records, attr):
    return [getattr(r, attr) for r in records]


def analyze_records(records: list[TrialRecord], weights: WeightSpec | None = None,
                    seed: int = 0) -> dict:
    """Per-kind report: per-n summaries, kind-specific bound checks, scaling fits."""
    by_kind = defaultdict(list)
    for r in records:
        by_kind[r.kind].append(r)
    report = {"kinds": {}}
    for kind in sorted(by_kind):
        recs = by_kind[kind]
        ok = [r for r in recs if r.ok]
        section = {
            "records": len(recs),
            "failures": {s: sum(r.status == s for r in recs) for s in sorted({r.status for r in recs})
                         if s != "ok"},
            "per_n": [],
        }
        by_n = defaultdict(list)
        for r in ok:
            by_n[r.n].append(r)
        for n in sorted(by_n):
            rs = by_n[n]
            bseed = derive_seed(seed, "bootstrap", kind, n)
            entry = {"n": n, "count": len(rs)}
            if len(rs) >= 2:
                entry["D"] = asdict(summarize(_values(rs, "D"), n, bseed))
                entry["edge_count_mean"] = float(np.mean(_values(rs, "edge_count")))
                entry["tree_projection_mean"] = float(np.mean(_values(rs, "tree_projection")))
                if len(rs) >= 4:
                    even = len(rs) - len(rs) % 2
                    entry["tightness_statistic"] = tightness_statistic(_values(rs, "D")[:even])
            if kind == "coupled_pair" and len(rs) >= 2 and weights is not None:
                entry["paired_dispersion"] = asdict(paired_dispersion(
                    _values(rs, "D1"), _values(rs, "D2"), weights.mean(), 1, bseed))
            if kind == "pruned_b" and len(rs) >= 2:
                entry["D_prime"] = asdict(summarize(_values(rs, "D_prime"), n, bseed))
                entry["event_b"] = [asdict(event_b_report(
                    [r.event_b for r in group], _values(group, "tree_projection"),
                    rs[0].d, k, bseed)) for k, group in _group(rs, "k")]
                paired = [r for r in rs if r.D1_prime is not None]
                if len(paired) >= 2 and weights is not None:
                    entry["pruned_pair_dispersion"] = [asdict(paired_dispersion(
                        _values(g, "D1_prime"), _values(g, "D2_prime"), weights.mean(), k, bseed))
                        for k, g in _group(paired, "k") if len(g) >= 2]
            section["per_n"].append(entry)
        section["fits"] = _fits(section["per_n"])
        report["kinds"][kind] = section
    return report


def _group(records, attr):
    groups = defaultdict(list)
    for r in records:
        groups[getattr(r, attr)].append(r)
    return sorted(groups.items())


def _fits(per_n: list[dict]) -> dict:
    fits = {}
    series = {
        "mad": [(e["n"], e["D"]["mad"]) for e in per_n if "D" in e and e["n"] > 0],
        "edge_count": [(e["n"], e["edge_count_mean"]) for e in per_n
                       if "edge_count_mean" in e and e["n"] > 0],
    }
    for name, pts in series.items():
        if len(pts) < 4:
            continue
        try:
            fits[name] = asdict(fit_scaling(pts))
        except DegenerateInput as exc:
            fits[name] = {"error": str(exc)}
    return fits


SUMMARY_COLUMNS = ("kind", "n", "count", "mean", "mad", "ci_lo", "ci_hi")


def write_summary_csv(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for kind, section in report["kinds"].items():
            for e in section["per_n"]:
                if "D" not in e:
                    continue
                s = e["D"]
                w.writerow([kind, e["n"], s["count"], repr(s["mean"]), repr(s["mad"]),
                            repr(s["mad_ci"][0]), repr(s["mad_ci"][1])])
