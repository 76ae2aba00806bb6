"""Asynchronous randomized-gossip simulator.

One iteration = one edge activation: the sampled edge's endpoints replace
their state vectors by the coordinate-wise mean.  Node states carry Borda
score estimates, pairwise duel estimates, or rank histograms; every method
reduces to the same averaging primitive, so the node-sum of every
coordinate is conserved and the spectral contraction bound applies
coordinate by coordinate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .consensus import _local_kemenize_order  # shared sweep core
from .graphs import EdgeDistribution, Topology, edge_distribution
from .rankings import (
    Ordering,
    PartialRanking,
    Permutation,
    Ranking,
    ScoreVector,
    complete_partial,
    pairwise_of,
)

__all__ = [
    "METHODS",
    "Simulation",
    "Snapshot",
    "LocalEstimate",
    "init",
    "from_states",
    "step",
    "run",
    "extract",
    "local_ranks",
    "local_scores",
    "write_snapshot_csv",
]

METHODS = ("borda", "copeland", "footrule", "lk")
_PAIRWISE_METHODS = ("copeland", "lk")
_CDF_TOL = 1e-9


@dataclass
class Simulation:
    """Mutable gossip state: one row of ``states`` per node."""

    topology: Topology
    distribution: EdgeDistribution
    method: str
    m: int
    states: np.ndarray
    rng: np.random.Generator
    t: int = 0
    lk_base: str = "copeland"
    _edge_u: np.ndarray = field(init=False, repr=False)
    _edge_v: np.ndarray = field(init=False, repr=False)
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._edge_u = np.array([e[0] for e in self.distribution.edges], dtype=np.int64)
        self._edge_v = np.array([e[1] for e in self.distribution.edges], dtype=np.int64)
        cdf = np.cumsum(self.distribution.probs)
        cdf[-1] = 1.0
        self._cdf = cdf

    @property
    def n(self) -> int:
        return self.topology.n

    def node_state(self, node: int) -> np.ndarray:
        return self.states[node].copy()


@dataclass(frozen=True)
class Snapshot:
    """Read-only copy of all node states at one checkpoint."""

    t: int
    states: np.ndarray
    method: str
    m: int
    lk_base: str


@dataclass(frozen=True)
class LocalEstimate:
    node: int
    ranking: Permutation
    scores: ScoreVector


def _initial_state(method: str, voter: Ranking, m: int, scheme: str) -> np.ndarray:
    if method == "borda":
        if isinstance(voter, Permutation):
            return voter.as_array().astype(float)
        return complete_partial(voter, scheme).values.copy()
    if method in _PAIRWISE_METHODS:
        return pairwise_of(voter).values.ravel().copy()
    if method == "footrule":
        if not isinstance(voter, Permutation):
            raise ValueError("rank-histogram gossip needs complete rankings")
        h = np.zeros((m, m))
        for item, rank in enumerate(voter.ranks):
            h[item, rank - 1] = 1.0
        return h.ravel()
    raise ValueError(f"unknown gossip method {method!r}; expected one of {METHODS}")


def init(
    method: str,
    voters: Sequence[Ranking],
    topology: Topology,
    seed,
    *,
    scheme: str = "average-impute",
    lk_base: str = "copeland",
) -> Simulation:
    """Place one voter at each node and set up its initial estimate.

    Borda nodes hold their own rank vector (completed scores for partial
    rankings); Copeland and local-Kemenization nodes hold 0/1/half duel
    indicators; footrule nodes hold a one-hot rank histogram.
    """
    if method not in METHODS:
        raise ValueError(f"unknown gossip method {method!r}; expected one of {METHODS}")
    if lk_base not in ("copeland", "borda"):
        raise ValueError(f"lk base must be 'copeland' or 'borda', got {lk_base!r}")
    if len(voters) != topology.n:
        raise ValueError(f"profile size {len(voters)} != node count {topology.n}")
    m = voters[0].m
    if any(v.m != m for v in voters):
        raise ValueError("profile mixes item counts")
    states = np.stack([_initial_state(method, v, m, scheme) for v in voters])
    return Simulation(
        topology=topology,
        distribution=edge_distribution(topology),
        method=method,
        m=m,
        states=states,
        rng=np.random.default_rng(seed),
        lk_base=lk_base,
    )


def from_states(states: np.ndarray, topology: Topology, seed) -> Simulation:
    """Raw averaging simulation over arbitrary initial vectors."""
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.shape[0] != topology.n:
        raise ValueError(f"state rows {states.shape[0]} != node count {topology.n}")
    return Simulation(
        topology=topology,
        distribution=edge_distribution(topology),
        method="raw",
        m=states.shape[1],
        states=states.copy(),
        rng=np.random.default_rng(seed),
    )


def step(sim: Simulation) -> tuple[int, int]:
    """Activate one random edge and average its endpoints' states."""
    idx = int(np.searchsorted(sim._cdf, sim.rng.random(), side="right"))
    u = int(sim._edge_u[idx])
    v = int(sim._edge_v[idx])
    su = sim.states[u]
    sv = sim.states[v]
    np.add(su, sv, out=su)
    su *= 0.5
    sv[:] = su
    sim.t += 1
    return (u, v)


def _advance(sim: Simulation, count: int) -> None:
    if count <= 0:
        return
    idx = np.searchsorted(sim._cdf, sim.rng.random(count), side="right")
    states = sim.states
    for u, v in zip(sim._edge_u[idx].tolist(), sim._edge_v[idx].tolist()):
        su = states[u]
        sv = states[v]
        np.add(su, sv, out=su)
        su *= 0.5
        sv[:] = su
    sim.t += count


def _snapshot(sim: Simulation) -> Snapshot:
    states = sim.states.copy()
    states.setflags(write=False)
    return Snapshot(t=sim.t, states=states, method=sim.method, m=sim.m, lk_base=sim.lk_base)


def run(sim: Simulation, iterations: int, checkpoints: Sequence[int] = ()) -> list[Snapshot]:
    """Execute ``iterations`` edge activations, recording a snapshot at each
    checkpoint (offsets in 1..iterations from the current position).  The
    state at entry is always returned as the first snapshot."""
    if iterations < 0:
        raise ValueError("iteration count must be nonnegative")
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if checkpoints and (checkpoints[0] < 1 or checkpoints[-1] > iterations):
        raise ValueError("checkpoints must lie in 1..iterations")
    snapshots = [_snapshot(sim)]
    done = 0
    for mark in checkpoints:
        _advance(sim, mark - done)
        done = mark
        snapshots.append(_snapshot(sim))
    _advance(sim, iterations - done)
    return snapshots


def _copeland_score_rows(mats: np.ndarray) -> np.ndarray:
    """Wins minus losses per node; duels exactly at 1/2 lose for both sides.
    ``mats`` has shape (n, m, m) with zero diagonals."""
    m = mats.shape[1]
    wins = (mats > 0.5).sum(axis=2)
    losses = (mats <= 0.5).sum(axis=2) - 1  # diagonal zeros land in <=
    return (wins - losses).astype(float)


def _borda_rows_from_pairwise(mats: np.ndarray) -> np.ndarray:
    """Average-rank estimates implied by duel fractions: rank of i is one
    more than the mass of items beating it."""
    return 1.0 + mats.sum(axis=1)


def _median_score_rows(hists: np.ndarray) -> np.ndarray:
    """Median rank read from each node's histogram rows: midpoint of the
    smallest rank with cumulative mass >= 1/2 and the smallest with
    cumulative mass > 1/2."""
    cdf = np.cumsum(hists, axis=2)
    lower = (cdf >= 0.5 - _CDF_TOL).argmax(axis=2) + 1
    upper = (cdf > 0.5 + _CDF_TOL).argmax(axis=2) + 1
    return (lower + upper) / 2.0


def _ranks_ascending(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, scores.shape[1] + 1)[None, :], axis=1)
    return ranks


def local_scores(obj: Simulation | Snapshot) -> np.ndarray:
    """(n, m) matrix of per-node score estimates under the object's method."""
    m = obj.m
    if obj.method == "borda":
        return obj.states.copy()
    if obj.method in _PAIRWISE_METHODS:
        mats = obj.states.reshape(-1, m, m)
        if obj.method == "lk" and obj.lk_base == "borda":
            return _borda_rows_from_pairwise(mats)
        return _copeland_score_rows(mats)
    if obj.method == "footrule":
        return _median_score_rows(obj.states.reshape(-1, m, m))
    raise ValueError(f"no score extraction for method {obj.method!r}")


def local_ranks(obj: Simulation | Snapshot) -> np.ndarray:
    """(n, m) matrix of per-node consensus estimates (1-based rank rows)."""
    m = obj.m
    scores = local_scores(obj)
    if obj.method == "copeland" or (obj.method == "lk" and obj.lk_base == "copeland"):
        ranks = _ranks_ascending(-scores)
    else:
        ranks = _ranks_ascending(scores)
    if obj.method == "lk":
        mats = obj.states.reshape(-1, m, m)
        for v in range(ranks.shape[0]):
            order = np.argsort(ranks[v], kind="stable").tolist()
            refined = _local_kemenize_order(order, mats[v])
            for pos, item in enumerate(refined):
                ranks[v, item] = pos + 1
    return ranks


def extract(sim: Simulation | Snapshot, node: int, method: str | None = None) -> LocalEstimate:
    """One node's current consensus estimate.

    Borda sorts its score estimates ascending; Copeland computes
    wins-minus-losses from its duel estimates and sorts descending;
    footrule sorts the medians read from its histogram; local
    Kemenization refines the base ranking by adjacent swaps against the
    node's own duel estimates.
    """
    target = method or sim.method
    if target != sim.method:
        compatible = set(_PAIRWISE_METHODS)
        if not (target in compatible and sim.method in compatible):
            raise ValueError(f"simulation carries {sim.method!r} state, cannot extract {target!r}")
        obj: Simulation | Snapshot = Snapshot(
            t=sim.t, states=sim.states, method=target, m=sim.m, lk_base=sim.lk_base
        )
    else:
        obj = sim
    scores = local_scores(obj)[node]
    ranks = local_ranks(obj)[node]
    return LocalEstimate(node=node, ranking=Permutation.from_array(ranks), scores=ScoreVector(scores))


def write_snapshot_csv(
    path: str | Path, snapshots: Sequence[Snapshot], trial: int = 0
) -> None:
    """Debug dump: one row per (trial, t, node, method, coordinate, value)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "t", "node", "method", "coordinate", "value"])
        for snap in snapshots:
            for node in range(snap.states.shape[0]):
                for coord, value in enumerate(snap.states[node]):
                    writer.writerow([trial, snap.t, node, snap.method, coord, repr(float(value))])
