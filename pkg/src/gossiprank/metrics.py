"""Convergence metrics and the theoretical decay envelopes for the score
and duel-fraction gossip estimators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .consensus import borda_scores, check_transitivity, copeland_scores
from .gossip import Snapshot, local_ranks
from .graphs import SpectralInfo
from .rankings import (
    PairwiseMatrix,
    PartialRanking,
    Permutation,
    Ranking,
    ScoreVector,
    complete_partial,
    kendall_tau_many,
    pairwise_of,
    profile_pairwise,
)

__all__ = [
    "BoundConstants",
    "score_mse",
    "pairwise_mse",
    "kendall_error",
    "kendall_error_curve",
    "bound_constants",
    "prop1_curve",
    "prop2_curve",
]


def _states_of(obj) -> np.ndarray:
    return obj.states if hasattr(obj, "states") else np.asarray(obj, dtype=float)


def score_mse(snapshot, truth: ScoreVector | np.ndarray) -> float:
    """Mean squared deviation per node and coordinate."""
    states = _states_of(snapshot)
    target = truth.values if isinstance(truth, ScoreVector) else np.asarray(truth, dtype=float)
    if states.shape[1] != target.shape[0]:
        raise ValueError(f"dimension mismatch: {states.shape[1]} vs {target.shape[0]}")
    return float(((states - target[None, :]) ** 2).mean())


def pairwise_mse(snapshot, p: PairwiseMatrix) -> float:
    """score_mse over the m(m-1) off-diagonal duel coordinates."""
    states = _states_of(snapshot)
    m = p.m
    if states.shape[1] != m * m:
        raise ValueError("snapshot does not carry pairwise state")
    off = ~np.eye(m, dtype=bool)
    return score_mse(states.reshape(-1, m, m)[:, off], p.values[off])


def kendall_error(obj, truth: Permutation) -> float:
    """Average Kendall distance of the nodes' local estimates to a
    reference ranking."""
    return float(kendall_tau_many(local_ranks(obj), truth).mean())


def kendall_error_curve(snapshots: Sequence[Snapshot], truth: Permutation) -> np.ndarray:
    return np.array([kendall_error(s, truth) for s in snapshots])


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the two decay envelopes.

    The score-gossip envelope is min{C1 e^(-c1 t), C2 e^(-c2 t)}; the
    duel-gossip envelope is (m-1)/deltaC * min{K1 e^(-c1 t), K2 e^(-c2 t)}.
    Constants that require distinct scores or strict transitivity are None
    when the profile does not provide them.
    """

    gammaB: float
    deltaB: float
    deltaC: float | None
    C1: float | None
    C2: float | None
    K1: float | None
    K2: float | None
    c1: float
    c2: float
    m: int
    n: int


def _min_gap(values: np.ndarray) -> float:
    s = np.sort(values)
    return float(np.min(np.diff(s))) if s.size > 1 else 0.0


def bound_constants(
    voters: Sequence[Ranking],
    spectral: SpectralInfo,
    scheme: str = "average-impute",
) -> BoundConstants:
    """Evaluate the envelope constants on a profile and a graph.

    gammaB is the total initial squared deviation of the per-node score
    vectors from the true averages; deltaB/deltaC are minimum score gaps.
    The duel-side constants weight each pair's initial deviation by the
    inverse (squared) margin of its duel fraction from 1/2.
    """
    n = len(voters)
    if n == 0:
        raise ValueError("empty profile")
    m = voters[0].m
    rows = np.empty((n, m))
    for row, v in zip(rows, voters):
        row[:] = v.as_array() if isinstance(v, Permutation) else complete_partial(v, scheme).values
    s = rows.mean(axis=0)
    gammaB = float(((rows - s) ** 2).sum())
    deltaB = _min_gap(s)
    if deltaB > 0:
        C1 = 2.0 * (m - 1) * gammaB / (n * deltaB**2)
        C2 = (m - 1) * np.sqrt(m * gammaB) / (np.sqrt(n) * deltaB)
    else:
        C1 = C2 = None

    p = profile_pairwise(voters)
    report = check_transitivity(p)
    deltaC: float | None = None
    K1 = K2 = None
    if report.level in ("weak", "strong") and not report.has_half_ties:
        deltaC = _min_gap(copeland_scores(p).values)
        entries = np.stack([pairwise_of(v).values for v in voters])  # (n, m, m)
        dev = entries - p.values[None, :, :]
        sq = (dev**2).sum(axis=0)  # ||p0_ij - p_ij 1||^2 per pair
        l2 = np.sqrt(sq)
        delta = np.abs(p.values - 0.5)
        off = ~np.eye(m, dtype=bool)
        K1 = float((sq[off] / (np.sqrt(n) * delta[off] ** 2)).sum())
        K2 = float((l2[off] / (n * delta[off])).sum())
        if deltaC == 0:
            deltaC = None
            K1 = K2 = None
    return BoundConstants(
        gammaB=gammaB,
        deltaB=deltaB,
        deltaC=deltaC,
        C1=None if C1 is None else float(C1),
        C2=None if C2 is None else float(C2),
        K1=K1,
        K2=K2,
        c1=spectral.c / 2.0,
        c2=spectral.c / 4.0,
        m=m,
        n=n,
    )


def prop1_curve(bc: BoundConstants, ts) -> np.ndarray:
    """Score-gossip Kendall-error envelope at the given iterations."""
    if bc.C1 is None or bc.C2 is None:
        raise ValueError("envelope undefined: score gaps are not distinct")
    ts = np.asarray(ts, dtype=float)
    return np.minimum(bc.C1 * np.exp(-bc.c1 * ts), bc.C2 * np.exp(-bc.c2 * ts))


def prop2_curve(bc: BoundConstants, ts) -> np.ndarray:
    """Duel-gossip Kendall-error envelope at the given iterations."""
    if bc.K1 is None or bc.K2 is None or bc.deltaC is None:
        raise ValueError("envelope undefined: profile fails strict transitivity")
    ts = np.asarray(ts, dtype=float)
    inner = np.minimum(bc.K1 * np.exp(-bc.c1 * ts), bc.K2 * np.exp(-bc.c2 * ts))
    return (bc.m - 1) / bc.deltaC * inner
