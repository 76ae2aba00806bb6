"""Centralized consensus rules: Borda, Copeland, median-rank (footrule),
brute-force Kemeny, and local Kemenization.

These serve as ground truth for the gossip algorithms and as the engine of
the robustness study.  All tie-breaks are deterministic: lower item index
first.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .rankings import (
    Ordering,
    PairwiseMatrix,
    PartialRanking,
    Permutation,
    Ranking,
    ScoreVector,
    complete_partial,
    profile_pairwise,
    total_kendall_loss,
)

__all__ = [
    "ConsensusResult",
    "TransitivityReport",
    "borda_consensus",
    "copeland_consensus",
    "footrule_consensus",
    "kemeny_bruteforce",
    "local_kemenize",
    "check_transitivity",
    "ranking_from_scores",
    "copeland_scores",
    "borda_scores",
    "median_scores",
    "all_rank_vectors",
    "KEMENY_MAX_ITEMS",
]

KEMENY_MAX_ITEMS = 10


@dataclass(frozen=True)
class ConsensusResult:
    method: str
    scores: ScoreVector | None
    ranking: Permutation
    objective: float


class TransitivityReport(NamedTuple):
    level: str  # "none" | "weak" | "strong"
    has_half_ties: bool


def ranking_from_scores(scores: np.ndarray, descending: bool = False) -> Permutation:
    """Rank items by score; equal scores go to the lower item index."""
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s if descending else s, kind="stable")
    ranks = np.empty(s.shape[0], dtype=np.int64)
    ranks[order] = np.arange(1, s.shape[0] + 1)
    return Permutation.from_array(ranks)


def _voter_scores(voters: Sequence[Ranking], scheme: str) -> np.ndarray:
    """Per-voter score rows: plain ranks for complete rankings, completed
    scores for partial ones."""
    if not voters:
        raise ValueError("empty profile")
    m = voters[0].m
    if any(v.m != m for v in voters):
        raise ValueError("profile mixes item counts")
    rows = np.empty((len(voters), m))
    for row, v in zip(rows, voters):
        if isinstance(v, Permutation):
            row[:] = v.as_array()
        else:
            row[:] = complete_partial(v, scheme).values
    return rows


def borda_scores(voters: Sequence[Ranking], scheme: str = "average-impute") -> ScoreVector:
    """Average rank of each item (average completed score for partials)."""
    return ScoreVector(_voter_scores(voters, scheme).mean(axis=0))


def borda_consensus(voters: Sequence[Ranking], scheme: str = "average-impute") -> ConsensusResult:
    """Rank items by ascending average rank."""
    scores = borda_scores(voters, scheme)
    ranking = ranking_from_scores(scores.values)
    p = profile_pairwise(voters)
    return ConsensusResult("borda", scores, ranking, total_kendall_loss(ranking, p, len(voters)))


def copeland_scores(p: PairwiseMatrix) -> ScoreVector:
    """Pairwise wins minus losses; duels tied at 1/2 count as a loss for both."""
    off = ~np.eye(p.m, dtype=bool)
    wins = ((p.values > 0.5) & off).sum(axis=1)
    losses = ((p.values <= 0.5) & off).sum(axis=1)
    return ScoreVector((wins - losses).astype(float))


def copeland_consensus(p: PairwiseMatrix, n_voters: float = 1.0) -> ConsensusResult:
    """Rank items by descending Copeland score.

    ``n_voters`` only scales the reported objective; pass the profile size
    when it is known.
    """
    scores = copeland_scores(p)
    ranking = ranking_from_scores(scores.values, descending=True)
    return ConsensusResult("copeland", scores, ranking, total_kendall_loss(ranking, p, n_voters))


def median_scores(voters: Sequence[Permutation]) -> ScoreVector:
    """Coordinate-wise median rank (midpoint of the two central order
    statistics for even profiles)."""
    if not voters:
        raise ValueError("empty profile")
    if any(not isinstance(v, Permutation) for v in voters):
        raise ValueError("median-rank consensus needs complete rankings")
    ranks = np.stack([v.as_array() for v in voters])
    n = ranks.shape[0]
    ordered = np.sort(ranks, axis=0)
    lower = ordered[(n + 1) // 2 - 1].astype(float)
    upper = ordered[n // 2].astype(float)
    return ScoreVector((lower + upper) / 2.0)


def footrule_consensus(voters: Sequence[Permutation]) -> ConsensusResult:
    """Rank items by ascending median rank.

    When the medians form a permutation this minimizes the total footrule
    distance to the profile.
    """
    scores = median_scores(voters)
    ranking = ranking_from_scores(scores.values)
    p = profile_pairwise(voters)
    return ConsensusResult("footrule", scores, ranking, total_kendall_loss(ranking, p, len(voters)))


@functools.lru_cache(maxsize=4)
def all_rank_vectors(m: int) -> np.ndarray:
    """All m! rank vectors (1-based) in lexicographic order, as an
    (m!, m) int8 array.  Read-only; cached."""
    if not 1 <= m <= KEMENY_MAX_ITEMS:
        raise ValueError(f"m={m} outside supported range 1..{KEMENY_MAX_ITEMS}")
    table = np.zeros((1, 1), dtype=np.int8)
    for k in range(2, m + 1):
        block = table.shape[0]
        out = np.empty((math.factorial(k), k), dtype=np.int8)
        symbols = np.arange(k, dtype=np.int8)
        for first in range(k):
            rest = np.delete(symbols, first)
            out[first * block : (first + 1) * block, 0] = first
            out[first * block : (first + 1) * block, 1:] = rest[table]
        table = out
    table = table + 1
    table.setflags(write=False)
    return table


def kemeny_bruteforce(p: PairwiseMatrix, n_voters: float) -> ConsensusResult:
    """Exhaustive Kemeny median: the permutation minimizing the total
    Kendall loss.  Ties go to the lexicographically smallest rank vector.
    """
    m = p.m
    if m > KEMENY_MAX_ITEMS:
        raise ValueError(f"brute-force Kemeny capped at m={KEMENY_MAX_ITEMS}, got {m}")
    table = all_rank_vectors(m)
    loss = np.zeros(table.shape[0])
    for i in range(m):
        for j in range(i + 1, m):
            i_above_j = table[:, i] < table[:, j]
            loss += np.where(i_above_j, p.values[j, i], p.values[i, j])
    best = int(np.argmin(loss))
    ranking = Permutation.from_array(table[best])
    return ConsensusResult("kemeny", None, ranking, float(n_voters * loss[best]))


def _local_kemenize_order(items: list[int], values: np.ndarray) -> list[int]:
    """Sweep core shared with the gossip engine: ``values`` is a raw duel
    matrix, ``items`` a best-to-worst order."""
    items = list(items)
    m = len(items)
    max_sweeps = max(m * m, 1)
    for _ in range(max_sweeps):
        swapped = False
        for pos in range(m - 1):
            i, j = items[pos], items[pos + 1]
            if values[i, j] < 0.5:
                items[pos], items[pos + 1] = j, i
                swapped = True
        if not swapped:
            return items
    raise RuntimeError(f"local Kemenization did not stabilize within {max_sweeps} sweeps")


def local_kemenize(start: Ordering, p: PairwiseMatrix) -> Ordering:
    """Adjacent-swap refinement: sweep top to bottom, swapping any adjacent
    pair that a strict majority orders the other way, until a sweep makes
    no swap.  The result is locally Kemeny optimal."""
    if start.m != p.m:
        raise ValueError(f"dimension mismatch: {start.m} vs {p.m}")
    return Ordering(tuple(_local_kemenize_order(list(start.items), p.values)))


def check_transitivity(p: PairwiseMatrix) -> TransitivityReport:
    """Classify the duel matrix as not / weakly / strongly stochastically
    transitive, and flag exact half ties."""
    v = p.values
    m = p.m
    off = ~np.eye(m, dtype=bool)
    has_half_ties = bool(np.any(v[off] == 0.5))
    ge = (v >= 0.5) & off
    weak = True
    strong = True
    for j in range(m):
        starts = np.flatnonzero(ge[:, j])
        ends = np.flatnonzero(ge[j, :])
        for i in starts:
            for k in ends:
                if i == k:
                    continue
                if not ge[i, k]:
                    weak = False
                    strong = False
                elif v[i, k] < max(v[i, j], v[j, k]):
                    strong = False
        if not weak:
            break
    level = "strong" if strong else ("weak" if weak else "none")
    return TransitivityReport(level, has_half_ties)
