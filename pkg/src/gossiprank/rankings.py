"""Permutation types, rank distances and pairwise-preference extraction.

Items are indexed 0..m-1 throughout; ranks are 1-based (1 = best), so a
ranking over m items is a bijection onto {1..m}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Permutation",
    "Ordering",
    "PartialRanking",
    "PairwiseMatrix",
    "ScoreVector",
    "RankHistogram",
    "Ranking",
    "kendall_tau",
    "spearman_footrule",
    "spearman_rho_sq",
    "pairwise_of",
    "complete_partial",
    "total_kendall_loss",
    "profile_pairwise",
    "ranks_matrix",
    "kendall_tau_many",
]

COMPLETION_SCHEMES = ("average-impute", "normalize")


@dataclass(frozen=True)
class Permutation:
    """A full ranking: ``ranks[i]`` is the rank of item i, 1 = best."""

    ranks: tuple[int, ...]

    def __post_init__(self):
        m = len(self.ranks)
        if m < 1:
            raise ValueError("a permutation needs at least one item")
        if sorted(self.ranks) != list(range(1, m + 1)):
            raise ValueError(f"ranks {self.ranks} are not a bijection onto 1..{m}")
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))

    @property
    def m(self) -> int:
        return len(self.ranks)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def from_array(cls, ranks: Sequence[int]) -> "Permutation":
        return cls(tuple(int(r) for r in ranks))

    def to_ordering(self) -> "Ordering":
        """Items listed best to worst."""
        items = sorted(range(self.m), key=self.ranks.__getitem__)
        return Ordering(tuple(items))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.ranks, dtype=np.int64)


@dataclass(frozen=True)
class Ordering:
    """A full ranking as a list: ``items[j]`` is the item placed (j+1)-th best."""

    items: tuple[int, ...]

    def __post_init__(self):
        m = len(self.items)
        if m < 1:
            raise ValueError("an ordering needs at least one item")
        if sorted(self.items) != list(range(m)):
            raise ValueError(f"items {self.items} are not a bijection onto 0..{m - 1}")
        object.__setattr__(self, "items", tuple(int(i) for i in self.items))

    @property
    def m(self) -> int:
        return len(self.items)

    def to_permutation(self) -> Permutation:
        ranks = [0] * self.m
        for pos, item in enumerate(self.items):
            ranks[item] = pos + 1
        return Permutation(tuple(ranks))


@dataclass(frozen=True)
class PartialRanking:
    """A top-k ranking: only the best k < m items carry explicit ranks.

    ``ranked`` maps item index -> rank; unranked items are implicitly tied
    at the bottom.
    """

    m: int
    ranked: Mapping[int, int]

    def __post_init__(self):
        k = len(self.ranked)
        if not 1 <= k < self.m:
            raise ValueError(f"prefix length {k} must satisfy 1 <= k < m={self.m}")
        if any(not 0 <= i < self.m for i in self.ranked):
            raise ValueError("ranked item out of range")
        if sorted(self.ranked.values()) != list(range(1, k + 1)):
            raise ValueError("ranks of the ranked items must be a bijection onto 1..k")
        object.__setattr__(self, "ranked", dict(self.ranked))

    @property
    def k(self) -> int:
        return len(self.ranked)

    def unranked(self) -> list[int]:
        return [i for i in range(self.m) if i not in self.ranked]


Ranking = Union[Permutation, PartialRanking]


@dataclass(frozen=True)
class PairwiseMatrix:
    """Duel fractions: ``values[i, j]`` is the fraction of voters preferring
    item i to item j.  Off-diagonal entries satisfy p_ij + p_ji = 1 for
    complete rankings and for weak preferences with half-credit ties.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("pairwise matrix must be square")
        if not np.allclose(np.diag(v), 0.0):
            raise ValueError("pairwise matrix diagonal must be zero")
        off = ~np.eye(v.shape[0], dtype=bool)
        if np.any(v[off] < -1e-12) or np.any(v[off] > 1 + 1e-12):
            raise ValueError("pairwise fractions must lie in [0, 1]")
        if not np.allclose(v + v.T + np.eye(v.shape[0]), 1.0, atol=1e-9):
            raise ValueError("pairwise complementarity p_ij + p_ji = 1 violated")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ScoreVector:
    """Per-item real scores (Borda averages, Copeland scores, median ranks)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("score vector must be one-dimensional and nonempty")
        if not np.all(np.isfinite(v)):
            raise ValueError("scores must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class RankHistogram:
    """Row-stochastic rank frequencies: ``values[i, r-1]`` is the fraction of
    voters assigning rank r to item i."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("rank histogram must be m x m")
        if np.any(v < -1e-12):
            raise ValueError("rank histogram entries must be nonnegative")
        if not np.allclose(v.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("rank histogram rows must sum to 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def _check_same_m(a: Permutation, b: Permutation) -> int:
    if a.m != b.m:
        raise ValueError(f"dimension mismatch: {a.m} vs {b.m}")
    return a.m


def kendall_tau(a: Permutation, b: Permutation) -> int:
    """Number of item pairs the two rankings order oppositely.

    Quadratic pair enumeration for small m, merge-sort inversion counting
    beyond; the two paths agree (see tests).
    """
    m = _check_same_m(a, b)
    if m <= 64:
        return _kendall_pairs(a.as_array(), b.as_array())
    return _kendall_inversions(a, b)


def _kendall_pairs(ra: np.ndarray, rb: np.ndarray) -> int:
    da = ra[:, None] - ra[None, :]
    db = rb[:, None] - rb[None, :]
    return int((da * db < 0).sum() // 2)


def _kendall_inversions(a: Permutation, b: Permutation) -> int:
    # b-ranks visited in a's preference order; discordant pairs = inversions
    order = np.argsort(a.as_array(), kind="stable")
    seq = b.as_array()[order].tolist()
    _, inv = _merge_count(seq)
    return inv


def _merge_count(seq: list[int]) -> tuple[list[int], int]:
    if len(seq) <= 1:
        return seq, 0
    mid = len(seq) // 2
    left, nl = _merge_count(seq[:mid])
    right, nr = _merge_count(seq[mid:])
    merged: list[int] = []
    count = nl + nr
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def spearman_footrule(a: Permutation, b: Permutation) -> int:
    """L1 distance between rank vectors."""
    _check_same_m(a, b)
    return int(np.abs(a.as_array() - b.as_array()).sum())


def spearman_rho_sq(a: Permutation, b: Permutation) -> int:
    """Squared L2 distance between rank vectors."""
    _check_same_m(a, b)
    d = a.as_array() - b.as_array()
    return int((d * d).sum())


def _effective_ranks(r: Ranking) -> np.ndarray:
    """Rank vector with all unranked items tied at rank k+1."""
    if isinstance(r, Permutation):
        return r.as_array()
    eff = np.full(r.m, r.k + 1, dtype=np.int64)
    for item, rank in r.ranked.items():
        eff[item] = rank
    return eff


def pairwise_of(r: Ranking) -> PairwiseMatrix:
    """One voter's duel indicators: 1 if i beats j, 1/2 if tied, 0 otherwise.

    For partial rankings the unranked items share the implicit worst
    position, so ranked always beats unranked and unranked pairs tie.
    """
    eff = _effective_ranks(r)
    strict = (eff[:, None] < eff[None, :]).astype(float)
    tied = (eff[:, None] == eff[None, :]).astype(float)
    p = strict + 0.5 * tied
    np.fill_diagonal(p, 0.0)
    return PairwiseMatrix(p)


def complete_partial(r: PartialRanking, scheme: str) -> ScoreVector:
    """Turn a top-k ranking into a full score vector.

    average-impute: ranked items keep their rank, unranked get (k+1+m)/2.
    normalize: ranked items get (rank-1)/k, unranked get 1.
    """
    if scheme not in COMPLETION_SCHEMES:
        raise ValueError(f"unknown completion scheme {scheme!r}; expected one of {COMPLETION_SCHEMES}")
    m, k = r.m, r.k
    if scheme == "average-impute":
        scores = np.full(m, (k + 1 + m) / 2.0)
        for item, rank in r.ranked.items():
            scores[item] = float(rank)
    else:
        scores = np.ones(m)
        for item, rank in r.ranked.items():
            scores[item] = (rank - 1) / k
    return ScoreVector(scores)


def total_kendall_loss(candidate: Permutation, p: PairwiseMatrix, n_voters: float) -> float:
    """Sum over voters of the Kendall distance between candidate and voter.

    Equals n * sum_{i<j} of the duel fraction against the candidate's
    ordering of the pair; exact for complete strict profiles.
    """
    if candidate.m != p.m:
        raise ValueError(f"dimension mismatch: {candidate.m} vs {p.m}")
    ranks = candidate.as_array()
    above = ranks[:, None] < ranks[None, :]  # candidate puts i above j
    iu = np.triu_indices(p.m, k=1)
    terms = np.where(above[iu], p.values.T[iu], p.values[iu])
    return float(n_voters * terms.sum())


def profile_pairwise(voters: Sequence[Ranking]) -> PairwiseMatrix:
    """Empirical duel fractions across a profile of (possibly partial) rankings."""
    if not voters:
        raise ValueError("empty profile")
    m = voters[0].m
    if any(v.m != m for v in voters):
        raise ValueError("profile mixes item counts")
    eff = np.stack([_effective_ranks(v) for v in voters])
    strict = (eff[:, :, None] < eff[:, None, :]).mean(axis=0)
    tied = (eff[:, :, None] == eff[:, None, :]).mean(axis=0)
    p = strict + 0.5 * tied
    np.fill_diagonal(p, 0.0)
    return PairwiseMatrix(p)


def ranks_matrix(voters: Sequence[Permutation]) -> np.ndarray:
    """Stack complete rankings into an (n, m) integer rank matrix."""
    if not voters:
        raise ValueError("empty profile")
    if any(not isinstance(v, Permutation) for v in voters):
        raise ValueError("ranks_matrix needs complete rankings")
    return np.stack([v.as_array() for v in voters])


def kendall_tau_many(ranks: np.ndarray, truth: Permutation) -> np.ndarray:
    """Kendall distance of every row of an (n, m) rank matrix to one ranking."""
    m = truth.m
    if ranks.shape[1] != m:
        raise ValueError("dimension mismatch")
    iu, ju = np.triu_indices(m, k=1)
    d = ranks[:, iu] - ranks[:, ju]
    dt = truth.as_array()[iu] - truth.as_array()[ju]
    return (d * dt[None, :] < 0).sum(axis=1)
