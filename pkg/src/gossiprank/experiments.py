"""Experiment orchestration: seeded multi-trial gossip runs with metric
traces and theoretical envelopes, plus the centralized robustness study
under contamination.

Outputs are plain CSV: one ``trial_<k>.csv`` per trial with columns
(trial, t, graph, method, metric, value) and an aggregate ``summary.csv``
with per-(t, graph, method, metric) mean and standard deviation over
trials.  Reruns with the same master seed are byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import csv
import functools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gossip
from .consensus import (
    ConsensusResult,
    borda_consensus,
    borda_scores,
    check_transitivity,
    copeland_consensus,
    footrule_consensus,
    kemeny_bruteforce,
    local_kemenize,
    median_scores,
    ranking_from_scores,
)
from .datasets import (
    ContaminationSpec,
    MallowsModel,
    PreferenceProfile,
    contaminate,
    mallows_sample,
    preflib_parse,
    uniform_permutation,
)
from .graphs import (
    Topology,
    edge_distribution,
    gen_complete,
    gen_geometric,
    gen_grid,
    gen_watts_strogatz,
    geometric_default_radius,
    spectral_info,
    ws_default_k,
)
from .metrics import (
    bound_constants,
    kendall_error,
    pairwise_mse,
    prop1_curve,
    prop2_curve,
    score_mse,
)
from .rankings import Permutation, kendall_tau, profile_pairwise, total_kendall_loss

__all__ = [
    "MallowsSpec",
    "PreflibSpec",
    "GraphSpec",
    "ExperimentConfig",
    "ExperimentResult",
    "RobustnessRow",
    "default_checkpoints",
    "build_topology",
    "run_experiment",
    "robustness_study",
    "load_config",
    "load_summary",
    "write_robustness_csv",
]

GRAPH_KINDS = ("complete", "watts-strogatz", "geometric", "grid")
_RESAMPLE_BUDGET = 100


@dataclass(frozen=True)
class MallowsSpec:
    n: int
    m: int
    phi: float


@dataclass(frozen=True)
class PreflibSpec:
    path: str


@dataclass(frozen=True)
class GraphSpec:
    """Graph kind plus its parameters; unset parameters fall back to the
    synthetic-experiment defaults for the profile size."""

    kind: str
    k: int | None = None  # watts-strogatz neighbors per side
    beta: float = 0.3  # watts-strogatz rewiring probability
    radius: float | None = None  # geometric connectivity radius
    rows: int | None = None  # grid shape
    cols: int | None = None

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; expected one of {GRAPH_KINDS}")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...]
    data: MallowsSpec | PreflibSpec
    graphs: tuple[GraphSpec, ...]
    iterations: int
    trials: int
    seed: int
    out_dir: Path
    checkpoints: tuple[int, ...] | None = None  # None: log-spaced
    checkpoint_count: int = 50
    contamination: ContaminationSpec | None = None
    out_format: str = "csv"
    threads: int = 1
    scheme: str = "average-impute"
    lk_base: str = "copeland"
    require_strict_transitivity: bool = False
    debug_snapshots: bool = False

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError("iteration count must be >= 1")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if not self.methods:
            raise ValueError("at least one method required")
        for m in self.methods:
            if m not in gossip.METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {gossip.METHODS}")
        if not self.graphs:
            raise ValueError("at least one graph required")
        if self.out_format not in ("csv", "json"):
            raise ValueError("output format must be 'csv' or 'json'")
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")
        cps = self.resolved_checkpoints()
        if list(cps) != sorted(set(cps)) or (cps and (cps[0] < 1 or cps[-1] > self.iterations)):
            raise ValueError("checkpoints must be sorted, unique and within 1..iterations")

    def resolved_checkpoints(self) -> tuple[int, ...]:
        if self.checkpoints is not None:
            return tuple(int(c) for c in self.checkpoints)
        return default_checkpoints(self.iterations, self.checkpoint_count)


def default_checkpoints(iterations: int, count: int = 50) -> tuple[int, ...]:
    """Log-spaced checkpoints in 1..iterations (dense early sampling)."""
    if iterations < 1:
        raise ValueError("iteration count must be >= 1")
    pts = np.logspace(0, math.log10(iterations), num=count)
    return tuple(int(t) for t in np.unique(np.clip(np.round(pts), 1, iterations).astype(int)))


def build_topology(spec: GraphSpec, n: int, rng: np.random.Generator) -> Topology:
    if spec.kind == "complete":
        return gen_complete(n)
    if spec.kind == "watts-strogatz":
        k = spec.k if spec.k is not None else ws_default_k(n)
        return gen_watts_strogatz(n, k, spec.beta, rng)
    if spec.kind == "geometric":
        r = spec.radius if spec.radius is not None else geometric_default_radius(n)
        return gen_geometric(n, r, rng)
    rows, cols = spec.rows, spec.cols
    if rows is None or cols is None:
        rows, cols = _grid_shape(n)
    if rows * cols != n:
        raise ValueError(f"grid {rows}x{cols} does not hold {n} nodes")
    return gen_grid(rows, cols)


def _grid_shape(n: int) -> tuple[int, int]:
    """Most-square factorization of n."""
    for rows in range(int(math.isqrt(n)), 0, -1):
        if n % rows == 0:
            return rows, n // rows
    raise ValueError(f"cannot factor {n} into a grid")


@functools.lru_cache(maxsize=8)
def _load_preflib_cached(path: str) -> PreferenceProfile:
    return preflib_parse(path)


def _profile_ok(profile: PreferenceProfile) -> bool:
    p = profile_pairwise(profile.voters)
    report = check_transitivity(p)
    if report.level == "none" or report.has_half_ties:
        return False
    scores = borda_scores(profile.voters).values
    return float(np.min(np.diff(np.sort(scores)))) > 0


def _make_profile(
    config: ExperimentConfig, center: Permutation | None, rng: np.random.Generator
) -> PreferenceProfile:
    if isinstance(config.data, PreflibSpec):
        base = _load_preflib_cached(config.data.path)
        order = rng.permutation(base.n)
        return PreferenceProfile(
            base.m, tuple(base.voters[i] for i in order), base.source, base.labels
        )
    model = MallowsModel(center=center, phi=config.data.phi)
    for _ in range(_RESAMPLE_BUDGET):
        profile = mallows_sample(model, config.data.n, rng)
        if config.contamination is not None:
            profile = contaminate(profile, config.contamination, model, rng)
        if not config.require_strict_transitivity or _profile_ok(profile):
            return profile
    raise RuntimeError(
        f"no profile satisfying the strict-transitivity preconditions in {_RESAMPLE_BUDGET} draws"
    )


def _central_truths(config: ExperimentConfig, profile: PreferenceProfile):
    """Per-method centralized references: (score target or None, ranking)."""
    p = profile_pairwise(profile.voters)
    truths: dict[str, tuple[np.ndarray | None, Permutation]] = {}
    for method in config.methods:
        if method == "borda":
            scores = borda_scores(profile.voters, config.scheme).values
            truths[method] = (scores, ranking_from_scores(scores))
        elif method == "copeland":
            truths[method] = (None, copeland_consensus(p, profile.n).ranking)
        elif method == "footrule":
            scores = median_scores(profile.voters).values
            truths[method] = (scores, ranking_from_scores(scores))
        elif method == "lk":
            if config.lk_base == "copeland":
                base = copeland_consensus(p, profile.n).ranking
            else:
                base = borda_consensus(profile.voters, config.scheme).ranking
            refined = local_kemenize(base.to_ordering(), p).to_permutation()
            truths[method] = (None, refined)
    return p, truths


def _run_trial(
    config: ExperimentConfig,
    trial: int,
    center: Permutation | None,
    trial_seed: np.random.SeedSequence,
) -> list[tuple]:
    """One trial: draw data, then run every (graph, method) pair on it."""
    children = trial_seed.spawn(1 + len(config.graphs))
    profile = _make_profile(config, center, np.random.default_rng(children[0]))
    p_hat, truths = _central_truths(config, profile)
    checkpoints = config.resolved_checkpoints()
    records: list[tuple] = []
    for g_idx, gspec in enumerate(config.graphs):
        g_children = children[1 + g_idx].spawn(1 + len(config.methods))
        topo = build_topology(gspec, profile.n, np.random.default_rng(g_children[0]))
        spect = spectral_info(topo, edge_distribution(topo))
        bc = bound_constants(profile.voters, spect, config.scheme)
        ts = np.array((0,) + checkpoints, dtype=float)
        if "borda" in config.methods and bc.C1 is not None:
            for t, val in zip(ts, prop1_curve(bc, ts)):
                records.append((trial, int(t), gspec.kind, "borda", "bound-prop1", float(val)))
        if "copeland" in config.methods and bc.K1 is not None:
            for t, val in zip(ts, prop2_curve(bc, ts)):
                records.append((trial, int(t), gspec.kind, "copeland", "bound-prop2", float(val)))
        for m_idx, method in enumerate(config.methods):
            sim = gossip.init(
                method,
                profile.voters,
                topo,
                g_children[1 + m_idx],
                scheme=config.scheme,
                lk_base=config.lk_base,
            )
            snapshots = gossip.run(sim, config.iterations, checkpoints)
            score_target, rank_target = truths[method]
            for snap in snapshots:
                if method == "borda":
                    records.append(
                        (trial, snap.t, gspec.kind, method, "score-mse", score_mse(snap, score_target))
                    )
                elif method == "footrule":
                    records.append(
                        (
                            trial,
                            snap.t,
                            gspec.kind,
                            method,
                            "score-mse",
                            score_mse(gossip.local_scores(snap), score_target),
                        )
                    )
                else:
                    records.append(
                        (trial, snap.t, gspec.kind, method, "pairwise-mse", pairwise_mse(snap, p_hat))
                    )
                records.append(
                    (trial, snap.t, gspec.kind, method, "kendall-error", kendall_error(snap, rank_target))
                )
            if config.debug_snapshots:
                dump = Path(config.out_dir) / f"snapshots_trial{trial}_{gspec.kind}_{method}.csv"
                gossip.write_snapshot_csv(dump, snapshots, trial)
    return records


@dataclass(frozen=True)
class ExperimentResult:
    out_dir: Path
    trial_files: tuple[Path, ...]
    summary_file: Path
    summary: dict[tuple[str, str, str], list[tuple[int, float, float]]]

    def curve(self, graph: str, method: str, metric: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(t, mean, std) arrays for one summary curve."""
        rows = self.summary[(graph, method, metric)]
        arr = np.array(rows, dtype=float)
        return arr[:, 0], arr[:, 1], arr[:, 2]


def _write_rows_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_rows_json(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    payload = [dict(zip(header, [v if not isinstance(v, np.floating) else float(v) for v in row])) for row in rows]
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all trials, write per-trial traces and the aggregate summary."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    master = np.random.SeedSequence(config.seed)
    seeds = master.spawn(1 + config.trials)
    center: Permutation | None = None
    if isinstance(config.data, MallowsSpec):
        center = uniform_permutation(config.data.m, np.random.default_rng(seeds[0]))

    per_trial: list[list[tuple]] = [[] for _ in range(config.trials)]
    if config.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.threads) as pool:
            futures = {
                pool.submit(_run_trial, config, k, center, seeds[1 + k]): k
                for k in range(config.trials)
            }
            for fut in concurrent.futures.as_completed(futures):
                per_trial[futures[fut]] = fut.result()
    else:
        for k in range(config.trials):
            per_trial[k] = _run_trial(config, k, center, seeds[1 + k])

    header = ("trial", "t", "graph", "method", "metric", "value")
    trial_files = []
    for k, records in enumerate(per_trial):
        path = out_dir / f"trial_{k}.csv"
        _write_rows_csv(path, header, records)
        if config.out_format == "json":
            _write_rows_json(path.with_suffix(".json"), header, records)
        trial_files.append(path)

    grouped: dict[tuple[str, str, str, int], list[float]] = {}
    for records in per_trial:
        for trial, t, graph, method, metric, value in records:
            grouped.setdefault((graph, method, metric, int(t)), []).append(float(value))
    summary_rows = []
    summary: dict[tuple[str, str, str], list[tuple[int, float, float]]] = {}
    for graph, method, metric, t in sorted(grouped):
        values = np.array(grouped[(graph, method, metric, t)])
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        summary_rows.append((t, graph, method, metric, mean, std))
        summary.setdefault((graph, method, metric), []).append((t, mean, std))
    summary_path = out_dir / "summary.csv"
    _write_rows_csv(summary_path, ("t", "graph", "method", "metric", "mean", "std"), summary_rows)
    if config.out_format == "json":
        _write_rows_json(
            summary_path.with_suffix(".json"),
            ("t", "graph", "method", "metric", "mean", "std"),
            summary_rows,
        )
    return ExperimentResult(out_dir, tuple(trial_files), summary_path, summary)


def load_summary(path: str | Path) -> dict[tuple[str, str, str], list[tuple[int, float, float]]]:
    summary: dict[tuple[str, str, str], list[tuple[int, float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["graph"], row["method"], row["metric"])
            summary.setdefault(key, []).append((int(row["t"]), float(row["mean"]), float(row["std"])))
    for rows in summary.values():
        rows.sort()
    return summary


@dataclass(frozen=True)
class RobustnessRow:
    method: str
    dtau_mean: float
    dtau_std: float
    excess_mean: float
    excess_std: float
    excess_lk_mean: float
    excess_lk_std: float


_ROBUSTNESS_METHODS = ("borda", "copeland", "footrule", "kemeny")


def robustness_study(config: ExperimentConfig) -> list[RobustnessRow]:
    """Centralized contamination study.

    Per trial and consensus rule: Kendall distance of the consensus to the
    clean model's center, mean excess Kendall loss over the exhaustive
    Kemeny optimum, and the same excess after local Kemenization.
    """
    if not isinstance(config.data, MallowsSpec):
        raise ValueError("the robustness study runs on Mallows data")
    if config.contamination is None:
        raise ValueError("the robustness study needs a contamination spec")
    if config.data.m > 10:
        raise ValueError("brute-force Kemeny caps the study at m = 10")
    master = np.random.SeedSequence(config.seed)
    seeds = master.spawn(1 + config.trials)
    center = uniform_permutation(config.data.m, np.random.default_rng(seeds[0]))
    model = MallowsModel(center=center, phi=config.data.phi)

    stats: dict[str, dict[str, list[float]]] = {
        m: {"dtau": [], "excess": [], "excess_lk": []} for m in _ROBUSTNESS_METHODS
    }
    for k in range(config.trials):
        rng = np.random.default_rng(seeds[1 + k])
        profile = contaminate(mallows_sample(model, config.data.n, rng), config.contamination, model, rng)
        p = profile_pairwise(profile.voters)
        n = profile.n
        kem = kemeny_bruteforce(p, n)
        results: dict[str, ConsensusResult] = {
            "borda": borda_consensus(profile.voters),
            "copeland": copeland_consensus(p, n),
            "footrule": footrule_consensus(profile.voters),
            "kemeny": kem,
        }
        for name, res in results.items():
            refined = local_kemenize(res.ranking.to_ordering(), p).to_permutation()
            stats[name]["dtau"].append(kendall_tau(res.ranking, center))
            stats[name]["excess"].append((res.objective - kem.objective) / n)
            stats[name]["excess_lk"].append(
                (total_kendall_loss(refined, p, n) - kem.objective) / n
            )

    rows = []
    for name in _ROBUSTNESS_METHODS:
        s = stats[name]
        rows.append(
            RobustnessRow(
                method=name,
                dtau_mean=float(np.mean(s["dtau"])),
                dtau_std=float(np.std(s["dtau"], ddof=1)) if config.trials > 1 else 0.0,
                excess_mean=float(np.mean(s["excess"])),
                excess_std=float(np.std(s["excess"], ddof=1)) if config.trials > 1 else 0.0,
                excess_lk_mean=float(np.mean(s["excess_lk"])),
                excess_lk_std=float(np.std(s["excess_lk"], ddof=1)) if config.trials > 1 else 0.0,
            )
        )
    return rows


def write_robustness_csv(rows: Sequence[RobustnessRow], path: str | Path) -> None:
    header = (
        "method",
        "dtau_mean",
        "dtau_std",
        "excess_loss_mean",
        "excess_loss_std",
        "excess_loss_lk_mean",
        "excess_loss_lk_std",
    )
    _write_rows_csv(
        Path(path),
        header,
        [
            (
                r.method,
                r.dtau_mean,
                r.dtau_std,
                r.excess_mean,
                r.excess_std,
                r.excess_lk_mean,
                r.excess_lk_std,
            )
            for r in rows
        ],
    )


def _get(section, key, default=None):
    if section is None:
        return default
    return section.get(key, default)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read the INI-style experiment config (see README for the schema)."""
    import configparser

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} not found")
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)

    exp = parser["experiment"] if parser.has_section("experiment") else {}
    data_sec = parser["data"] if parser.has_section("data") else None
    if data_sec is None:
        raise ValueError(f"{path}: missing [data] section")
    source = data_sec.get("source", "mallows")
    if source == "mallows":
        data: MallowsSpec | PreflibSpec = MallowsSpec(
            n=int(data_sec["n"]), m=int(data_sec["m"]), phi=float(data_sec["phi"])
        )
    elif source == "preflib":
        raw = data_sec["path"]
        data = PreflibSpec(path=str((path.parent / raw).resolve()) if not Path(raw).is_absolute() else raw)
    else:
        raise ValueError(f"{path}: unknown data source {source!r}")

    contamination = None
    if parser.has_section("contamination"):
        c = parser["contamination"]
        contamination = ContaminationSpec(
            epsilon=float(c["epsilon"]),
            kind=c.get("kind", "uniform-random"),
            phi=float(c["phi"]) if "phi" in c else None,
        )

    graph_sec = parser["graph"] if parser.has_section("graph") else {}
    kinds = [s.strip() for s in _get(graph_sec, "kinds", "complete").split(",") if s.strip()]
    graphs = tuple(
        GraphSpec(
            kind=kind,
            k=int(graph_sec["ws-k"]) if "ws-k" in graph_sec else None,
            beta=float(_get(graph_sec, "ws-beta", 0.3)),
            radius=float(graph_sec["radius"]) if "radius" in graph_sec else None,
            rows=int(graph_sec["rows"]) if "rows" in graph_sec else None,
            cols=int(graph_sec["cols"]) if "cols" in graph_sec else None,
        )
        for kind in kinds
    )

    out_sec = parser["output"] if parser.has_section("output") else {}
    checkpoints = None
    raw_cp = _get(exp, "checkpoints")
    checkpoint_count = 50
    if raw_cp:
        if "," in raw_cp:
            checkpoints = tuple(int(tok) for tok in raw_cp.split(",") if tok.strip())
        else:
            checkpoint_count = int(raw_cp)

    return ExperimentConfig(
        methods=tuple(s.strip() for s in _get(exp, "methods", "borda").split(",") if s.strip()),
        data=data,
        graphs=graphs,
        iterations=int(_get(exp, "iterations", 2000)),
        trials=int(_get(exp, "trials", 100)),
        seed=int(_get(exp, "seed", 0)),
        out_dir=Path(_get(out_sec, "directory", "results")),
        checkpoints=checkpoints,
        checkpoint_count=checkpoint_count,
        contamination=contamination,
        out_format=_get(out_sec, "format", "csv"),
        threads=int(_get(exp, "threads", 1)),
        scheme=_get(exp, "scheme", "average-impute"),
        lk_base=_get(exp, "lk-base", "copeland"),
        require_strict_transitivity=str(_get(exp, "require-strict-transitivity", "false")).lower()
        in ("1", "true", "yes"),
        debug_snapshots=str(_get(out_sec, "debug-snapshots", "false")).lower() in ("1", "true", "yes"),
    )
