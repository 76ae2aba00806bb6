"""Profile generation and ingestion: Mallows sampling via repeated
insertion, contamination models for the robustness study, and PrefLib
strict-order file parsing (.soc complete / .soi top-k).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .rankings import PartialRanking, Permutation, Ranking

__all__ = [
    "FileFormatError",
    "MallowsModel",
    "ContaminationSpec",
    "PreferenceProfile",
    "mallows_sample",
    "contaminate",
    "reversed_center",
    "uniform_permutation",
    "preflib_parse",
    "preflib_write",
    "profile_to_csv",
    "profile_from_csv",
]

CONTAMINATION_KINDS = ("uniform-random", "adversarial-reversed")


class FileFormatError(ValueError):
    """Malformed input file (as opposed to invalid parameter values)."""


@dataclass(frozen=True)
class MallowsModel:
    """Distribution over rankings proportional to phi**d_tau(pi, center).

    phi = 0 is a point mass at the center, phi = 1 the uniform
    distribution.
    """

    center: Permutation
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"dispersion phi={self.phi} outside [0, 1]")


@dataclass(frozen=True)
class ContaminationSpec:
    """Replace an epsilon-fraction of voters with uniform-random rankings or
    with draws from a Mallows model centered at the reversed center."""

    epsilon: float
    kind: str
    phi: float | None = None  # dispersion of the adversarial model; None = reuse the clean phi

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"contamination fraction {self.epsilon} outside [0, 1)")
        if self.kind not in CONTAMINATION_KINDS:
            raise ValueError(f"unknown contamination kind {self.kind!r}; expected one of {CONTAMINATION_KINDS}")


@dataclass(frozen=True)
class PreferenceProfile:
    m: int
    voters: tuple[Ranking, ...]
    source: str = ""
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.voters:
            raise ValueError("empty profile")
        if any(v.m != self.m for v in self.voters):
            raise ValueError("profile mixes item counts")
        if self.labels is not None and len(self.labels) != self.m:
            raise ValueError("one label per item required")
        object.__setattr__(self, "voters", tuple(self.voters))

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def all_complete(self) -> bool:
        return all(isinstance(v, Permutation) for v in self.voters)


def uniform_permutation(m: int, rng: np.random.Generator) -> Permutation:
    return Permutation.from_array(rng.permutation(m) + 1)


def reversed_center(center: Permutation) -> Permutation:
    """Order reversal: rank r becomes m + 1 - r."""
    m = center.m
    return Permutation(tuple(m + 1 - r for r in center.ranks))


def _rim_orderings(center: Permutation, phi: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Repeated insertion: the i-th best item of the center is inserted at
    position j in 1..i with weight phi**(i-j), which realizes the Mallows
    distribution exactly for every phi in [0, 1]."""
    m = center.m
    center_order = np.array(center.to_ordering().items)
    positions = np.empty((size, m), dtype=np.int64)
    for i in range(1, m + 1):
        weights = phi ** (i - np.arange(1, i + 1, dtype=float))
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]
        positions[:, i - 1] = np.searchsorted(cdf, rng.random(size), side="right")
    out = np.empty((size, m), dtype=np.int64)
    for s in range(size):
        placed: list[int] = []
        pos_row = positions[s]
        for i in range(m):
            placed.insert(pos_row[i], center_order[i])
        out[s] = placed
    return out


def mallows_sample(model: MallowsModel, n: int, rng: np.random.Generator) -> PreferenceProfile:
    """Draw n independent rankings from the model."""
    if n < 1:
        raise ValueError("need at least one sample")
    orderings = _rim_orderings(model.center, model.phi, n, rng)
    m = model.center.m
    ranks = np.empty_like(orderings)
    np.put_along_axis(ranks, orderings, np.broadcast_to(np.arange(1, m + 1), (n, m)), axis=1)
    voters = tuple(Permutation.from_array(row) for row in ranks)
    return PreferenceProfile(m=m, voters=voters, source=f"mallows(phi={model.phi})")


def contaminate(
    profile: PreferenceProfile,
    spec: ContaminationSpec,
    model: MallowsModel,
    rng: np.random.Generator,
) -> PreferenceProfile:
    """Replace floor(epsilon * n) uniformly chosen voters.

    ``model`` is the clean-data model; the adversarial variant draws from a
    Mallows model centered at its reversed center.
    """
    n = profile.n
    count = int(spec.epsilon * n)
    if count == 0:
        return profile
    chosen = rng.choice(n, size=count, replace=False)
    voters = list(profile.voters)
    if spec.kind == "uniform-random":
        for v in chosen:
            voters[v] = uniform_permutation(profile.m, rng)
    else:
        phi = model.phi if spec.phi is None else spec.phi
        adversary = MallowsModel(center=reversed_center(model.center), phi=phi)
        replacements = mallows_sample(adversary, count, rng)
        for v, repl in zip(chosen, replacements.voters):
            voters[v] = repl
    return PreferenceProfile(
        m=profile.m, voters=tuple(voters), source=profile.source, labels=profile.labels
    )


_META_RE = re.compile(r"^#\s*([A-Z ]+?)\s*:\s*(.*)$")
_ALT_NAME_RE = re.compile(r"^ALTERNATIVE NAME (\d+)$")


def preflib_parse(path: str | Path) -> PreferenceProfile:
    """Parse a PrefLib strict-order file.

    Metadata lines start with '#'; body lines read ``count: a,b,c,...``
    and are expanded count times.  Lines listing fewer than m items yield
    top-k partial rankings.  Tie groups ({a,b}) are rejected.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    declared_m: int | None = None
    declared_n: int | None = None
    names: dict[int, str] = {}
    body: list[tuple[int, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _META_RE.match(line)
            if not match:
                continue
            key, value = match.group(1), match.group(2).strip()
            if key == "NUMBER ALTERNATIVES":
                declared_m = int(value)
            elif key == "NUMBER VOTERS":
                declared_n = int(value)
            elif key == "DATA TYPE" and value.lower() in ("toc", "toi"):
                raise FileFormatError(f"{path}: data type {value!r} contains tie groups, which are not supported")
            else:
                alt = _ALT_NAME_RE.match(key)
                if alt:
                    names[int(alt.group(1))] = value
            continue
        if "{" in line or "}" in line:
            raise FileFormatError(f"{path}:{lineno}: tie groups like '{{a,b}}' are not supported")
        if ":" not in line:
            raise FileFormatError(f"{path}:{lineno}: malformed order line {raw!r}")
        count_part, order_part = line.split(":", 1)
        try:
            count = int(count_part.strip())
            items = [int(tok) for tok in order_part.split(",") if tok.strip()]
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: malformed order line {raw!r}") from exc
        if count < 1 or not items:
            raise FileFormatError(f"{path}:{lineno}: malformed order line {raw!r}")
        if len(set(items)) != len(items):
            raise FileFormatError(f"{path}:{lineno}: repeated item in order {raw!r}")
        body.append((count, items))
    if not body:
        raise FileFormatError(f"{path}: no order lines found")

    ids = sorted(names) if names else sorted({i for _, items in body for i in items})
    if declared_m is not None and names and len(ids) != declared_m:
        raise FileFormatError(f"{path}: {len(ids)} alternative names for declared {declared_m} alternatives")
    m = declared_m if declared_m is not None else len(ids)
    if not names and len(ids) < m:
        ids = list(range(1, m + 1))  # ids are conventional 1..m when unnamed
    index = {item_id: pos for pos, item_id in enumerate(ids)}
    if len(index) != m:
        raise FileFormatError(f"{path}: saw {len(index)} distinct items for declared m={m}")

    voters: list[Ranking] = []
    for count, items in body:
        try:
            positions = [index[i] for i in items]
        except KeyError as exc:
            raise FileFormatError(f"{path}: unknown item id {exc.args[0]}") from exc
        if len(items) == m:
            ranks = [0] * m
            for rank, item in enumerate(positions, start=1):
                ranks[item] = rank
            voter: Ranking = Permutation(tuple(ranks))
        else:
            voter = PartialRanking(m, {item: rank for rank, item in enumerate(positions, start=1)})
        voters.extend([voter] * count)
    if declared_n is not None and len(voters) != declared_n:
        raise FileFormatError(f"{path}: {len(voters)} voters parsed, {declared_n} declared")
    labels = tuple(names.get(i, f"Item {i}") for i in ids) if names else None
    return PreferenceProfile(m=m, voters=tuple(voters), source=path.name, labels=labels)


def _voter_order_ids(v: Ranking) -> list[int]:
    if isinstance(v, Permutation):
        return [item + 1 for item in v.to_ordering().items]
    by_rank = sorted(v.ranked.items(), key=lambda kv: kv[1])
    return [item + 1 for item, _ in by_rank]


def preflib_write(profile: PreferenceProfile, path: str | Path, title: str = "") -> None:
    """Write a profile in PrefLib strict-order format, grouping consecutive
    identical orders so a parse round-trips to the same voter sequence."""
    path = Path(path)
    complete = profile.all_complete
    orders = [_voter_order_ids(v) for v in profile.voters]
    runs: list[tuple[int, list[int]]] = []
    for order in orders:
        if runs and runs[-1][1] == order:
            runs[-1] = (runs[-1][0] + 1, order)
        else:
            runs.append((1, order))
    lines = [
        f"# FILE NAME: {path.name}",
        f"# TITLE: {title or profile.source or path.stem}",
        f"# DATA TYPE: {'soc' if complete else 'soi'}",
        f"# NUMBER ALTERNATIVES: {profile.m}",
        f"# NUMBER VOTERS: {profile.n}",
        f"# NUMBER UNIQUE ORDERS: {len({tuple(o) for o in orders})}",
    ]
    for i in range(profile.m):
        label = profile.labels[i] if profile.labels else f"Item {i + 1}"
        lines.append(f"# ALTERNATIVE NAME {i + 1}: {label}")
    for count, order in runs:
        lines.append(f"{count}: {','.join(str(i) for i in order)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def profile_to_csv(profile: PreferenceProfile, path: str | Path) -> None:
    """Flat (voter, item, rank) dump; partial voters emit only ranked items."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# m {profile.m}\n")
        writer = csv.writer(fh)
        writer.writerow(["voter", "item", "rank"])
        for voter_id, v in enumerate(profile.voters):
            if isinstance(v, Permutation):
                for item, rank in enumerate(v.ranks):
                    writer.writerow([voter_id, item, rank])
            else:
                for item, rank in sorted(v.ranked.items()):
                    writer.writerow([voter_id, item, rank])


def profile_from_csv(path: str | Path) -> PreferenceProfile:
    path = Path(path)
    m: int | None = None
    rows: dict[int, dict[int, int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "m":
                    m = int(parts[1])
                continue
            if line.startswith("voter,"):
                continue
            voter_s, item_s, rank_s = line.split(",")
            rows.setdefault(int(voter_s), {})[int(item_s)] = int(rank_s)
    if m is None:
        raise FileFormatError(f"{path}: missing '# m <count>' header")
    voters: list[Ranking] = []
    for voter_id in sorted(rows):
        ranked = rows[voter_id]
        if len(ranked) == m:
            ranks = [0] * m
            for item, rank in ranked.items():
                ranks[item] = rank
            voters.append(Permutation(tuple(ranks)))
        else:
            voters.append(PartialRanking(m, ranked))
    return PreferenceProfile(m=m, voters=tuple(voters), source=path.name)
