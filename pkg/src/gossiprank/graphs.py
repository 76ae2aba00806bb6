"""Communication graphs: generators, asynchronous edge-activation
probabilities, and the spectral gap of the weighted Laplacian.

Under the asynchronous model a random node wakes and contacts a uniform
neighbor, so edge (u, v) fires with probability (1/n)(1/d_u + 1/d_v);
these probabilities sum to exactly 1 over the edge set.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Topology",
    "EdgeDistribution",
    "SpectralInfo",
    "gen_complete",
    "gen_watts_strogatz",
    "gen_geometric",
    "gen_grid",
    "edge_distribution",
    "spectral_info",
    "is_bipartite",
    "save_topology",
    "load_topology",
    "ws_default_k",
    "geometric_default_radius",
]

GEOMETRIC_RETRY_BUDGET = 100
_DENSE_EIG_LIMIT = 2000


@dataclass(frozen=True)
class Topology:
    """Undirected connected graph on nodes 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]
    degrees: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if u > v:
                raise ValueError(f"edge ({u}, {v}) not in canonical (u < v) form")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        if not np.array_equal(deg, self.degrees):
            raise ValueError("degree array inconsistent with edge set")
        if not _connected(self.n, self.edges):
            raise ValueError("graph is not connected")
        d = np.asarray(self.degrees, dtype=np.int64).copy()
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Topology":
        canon = tuple(sorted((min(u, v), max(u, v)) for u, v in edges))
        deg = np.zeros(n, dtype=np.int64)
        for u, v in canon:
            deg[u] += 1
            deg[v] += 1
        return cls(n, canon, deg)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True)
class EdgeDistribution:
    """Activation probability p_e for every edge, in edge-set order."""

    edges: tuple[tuple[int, int], ...]
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.edges),):
            raise ValueError("one probability per edge required")
        if np.any(p <= 0) or np.any(p > 1):
            raise ValueError("edge probabilities must lie in (0, 1]")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"edge probabilities sum to {p.sum()!r}, expected 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(self.edges, self.probs.tolist()))


@dataclass(frozen=True)
class SpectralInfo:
    c: float  # second-smallest eigenvalue of the weighted Laplacian
    lambda2: float  # 1 - c/2, the contraction factor per activation
    bipartite: bool


def _connected(n: int, edges) -> bool:
    if n == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == n


def is_bipartite(t: Topology) -> bool:
    """BFS 2-coloring."""
    color = [-1] * t.n
    adj = t.neighbors()
    color[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if color[w] == -1:
                color[w] = 1 - color[u]
                queue.append(w)
            elif color[w] == color[u]:
                return False
    return True


def gen_complete(n: int) -> Topology:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    edges = tuple((u, v) for u in range(n) for v in range(u + 1, n))
    return Topology.from_edges(n, edges)


def gen_watts_strogatz(n: int, k: int, beta: float, rng: np.random.Generator) -> Topology:
    """Ring lattice with k neighbors on each side, each lattice edge rewired
    with probability beta (avoiding self-loops and duplicates); regenerated
    until connected.  Edge count is always n*k."""
    if k < 1 or k >= n / 2:
        raise ValueError(f"ring lattice with k={k} neighbors per side infeasible for n={n}")
    if not 0 <= beta <= 1:
        raise ValueError("rewiring probability must lie in [0, 1]")
    for _ in range(GEOMETRIC_RETRY_BUDGET):
        edges = set()
        for u in range(n):
            for d in range(1, k + 1):
                v = (u + d) % n
                edges.add((min(u, v), max(u, v)))
        for e in sorted(edges):
            if rng.random() >= beta:
                continue
            u = e[0]
            edges.discard(e)
            while True:
                w = int(rng.integers(n))
                cand = (min(u, w), max(u, w))
                if w != u and cand not in edges:
                    edges.add(cand)
                    break
        if _connected(n, edges):
            return Topology.from_edges(n, edges)
    raise ValueError(
        f"failed to draw a connected Watts-Strogatz graph in {GEOMETRIC_RETRY_BUDGET} attempts"
    )


def gen_geometric(n: int, r: float, rng: np.random.Generator) -> Topology:
    """Random geometric graph: n points uniform in the unit square, an edge
    whenever two points lie within distance r.  Regenerated until connected,
    bounded retries."""
    if n < 2:
        raise ValueError("geometric graph needs n >= 2")
    if r <= 0:
        raise ValueError("connectivity radius must be positive")
    for _ in range(GEOMETRIC_RETRY_BUDGET):
        pts = rng.random((n, 2))
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        iu = np.triu_indices(n, k=1)
        hits = d2[iu] <= r * r
        edges = [(int(a), int(b)) for a, b, h in zip(iu[0], iu[1], hits) if h]
        if _connected(n, edges):
            return Topology.from_edges(n, edges)
    raise ValueError(
        f"no connected geometric graph with radius {r} in {GEOMETRIC_RETRY_BUDGET} attempts"
    )


def gen_grid(rows: int, cols: int) -> Topology:
    """Two-dimensional 4-neighbor lattice."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least two nodes")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return Topology.from_edges(rows * cols, edges)


def edge_distribution(t: Topology) -> EdgeDistribution:
    """p_e = (1/n)(1/d_u + 1/d_v); sums to 1 over the edge set."""
    deg = t.degrees
    probs = np.array([(1.0 / t.n) * (1.0 / deg[u] + 1.0 / deg[v]) for u, v in t.edges])
    return EdgeDistribution(t.edges, probs)


def _weighted_laplacian(t: Topology, d: EdgeDistribution) -> np.ndarray:
    L = np.zeros((t.n, t.n))
    for (u, v), p in zip(d.edges, d.probs):
        L[u, u] += p
        L[v, v] += p
        L[u, v] -= p
        L[v, u] -= p
    return L


def spectral_info(t: Topology, d: EdgeDistribution) -> SpectralInfo:
    """Second-smallest eigenvalue c of the weighted Laplacian sum_e p_e L_e,
    plus the per-step contraction factor 1 - c/2 and a bipartiteness flag.

    Bipartite graphs are accepted (pairwise averaging only needs
    connectivity); the flag lets callers warn about them.
    """
    if t.edges != d.edges:
        raise ValueError("edge distribution does not match the topology")
    if t.n <= _DENSE_EIG_LIMIT:
        eig = np.linalg.eigvalsh(_weighted_laplacian(t, d))
        smallest, c = float(eig[0]), float(eig[1])
    else:
        import scipy.sparse as sp
        import scipy.sparse.linalg as spla

        rows, cols, vals = [], [], []
        for (u, v), p in zip(d.edges, d.probs):
            rows += [u, v, u, v]
            cols += [u, v, v, u]
            vals += [p, p, -p, -p]
        L = sp.coo_matrix((vals, (rows, cols)), shape=(t.n, t.n)).tocsc()
        eig = spla.eigsh(L, k=2, sigma=-1e-6, which="LM", return_eigenvectors=False, tol=1e-10)
        eig = np.sort(eig)
        smallest, c = float(eig[0]), float(eig[1])
    if abs(smallest) > 1e-8:
        raise ValueError(f"smallest Laplacian eigenvalue {smallest} is not ~0")
    return SpectralInfo(c=c, lambda2=1.0 - c / 2.0, bipartite=is_bipartite(t))


def save_topology(t: Topology, path: str | Path) -> None:
    """Edge-list text format: first line ``n <count>``, then ``u v`` lines."""
    lines = [f"n {t.n}"]
    lines += [f"{u} {v}" for u, v in t.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_topology(path: str | Path) -> Topology:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise ValueError(f"{path}: expected first line 'n <count>'")
    n = int(lines[0].split()[1])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Topology.from_edges(n, edges)


def ws_default_k(n: int) -> int:
    """Lattice half-width used in the synthetic experiments: max(n//500, 5)."""
    return max(n // 500, 5)


def geometric_default_radius(n: int) -> float:
    """Connectivity radius used in the synthetic experiments."""
    return math.sqrt((math.log(n) + 16.0) / (n * math.pi))
