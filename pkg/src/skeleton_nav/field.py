"""Random sensor fields and the radio-range communication graph on top of them.

A field of n sensors is dropped uniformly into a sqrt(n) x sqrt(n) square, so
the expected node density is one sensor per unit area regardless of n.  Two
sensors can talk iff their Euclidean distance is at most the radio range.  All
randomness goes through numpy's seeded PCG64 generator, so a (n, r, seed)
triple regenerates the identical field bit for bit.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Collection, Iterable
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

INF = math.inf

NodeId = int


@dataclass(frozen=True, eq=False)
class SensorField:
    """Sensor positions in a side x side square, density ~1 per unit area."""

    n: int
    side: float
    radio_range: float
    seed: int
    positions: np.ndarray  # (n, 2) float64, read-only

    def __post_init__(self) -> None:
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        if pos.shape != (self.n, 2):
            raise ValueError(f"positions must be ({self.n}, 2), got {pos.shape}")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def position(self, node: NodeId) -> tuple[float, float]:
        x, y = self.positions[node]
        return float(x), float(y)

    def distance(self, u: NodeId, v: NodeId) -> float:
        return float(np.hypot(*(self.positions[u] - self.positions[v])))


def generate_field(n: int, radio_range: float, seed: int) -> SensorField:
    """Drop n sensors uniformly into a sqrt(n)-sided square.

    Rejects degenerate inputs (fewer than 4 nodes, non-positive range).
    """
    if n < 4:
        raise ValueError(f"need at least 4 sensors, got {n}")
    if radio_range <= 0:
        raise ValueError(f"radio range must be positive, got {radio_range}")
    side = math.sqrt(n)
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, side, size=(n, 2))
    return SensorField(n=n, side=side, radio_range=radio_range, seed=seed,
                       positions=positions)


@dataclass(frozen=True, eq=False)
class CommGraph:
    """Undirected communication graph: edge iff distance <= radio range.

    Adjacency lists are sorted ascending and contain no self loops.
    """

    field: SensorField
    adj: tuple[tuple[NodeId, ...], ...]

    @property
    def n(self) -> int:
        return self.field.n

    def neighbors(self, node: NodeId) -> tuple[NodeId, ...]:
        return self.adj[node]

    def degree(self, node: NodeId) -> int:
        return len(self.adj[node])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2


def build_comm_graph(field: SensorField) -> CommGraph:
    """Connect every pair of sensors within radio range (inclusive).

    Uses a k-d tree for the pair query; the result is identical to the
    quadratic all-pairs check.
    """
    pairs = cKDTree(field.positions).query_pairs(field.radio_range,
                                                output_type="ndarray")
    lists: list[list[NodeId]] = [[] for _ in range(field.n)]
    for i, j in pairs:
        lists[i].append(int(j))
        lists[j].append(int(i))
    adj = tuple(tuple(sorted(a)) for a in lists)
    return CommGraph(field=field, adj=adj)


BlockedSpec = Callable[[NodeId], bool] | Collection[NodeId] | None


def hop_bfs(graph: CommGraph, source: NodeId,
            blocked: BlockedSpec = None) -> tuple[list[float], list[NodeId]]:
    """Hop distances and parents from source, skipping blocked nodes.

    Unreachable nodes get distance inf and parent -1.  Among equally close
    predecessors the lowest node id becomes the parent, which keeps reruns
    byte-identical.
    """
    if blocked is None:
        is_blocked = lambda _v: False  # noqa: E731
    elif callable(blocked):
        is_blocked = blocked
    else:
        members = blocked if isinstance(blocked, (set, frozenset)) else set(blocked)
        is_blocked = members.__contains__

    if source < 0 or source >= graph.n:
        raise ValueError(f"source {source} out of range")
    if is_blocked(source):
        raise ValueError(f"source {source} is blocked")

    dist: list[float] = [INF] * graph.n
    parent: list[NodeId] = [-1] * graph.n
    dist[source] = 0
    level = [source]
    d = 0
    while level:
        nxt: list[NodeId] = []
        for u in level:  # ascending ids: first discoverer is the lowest parent
            for v in graph.adj[u]:
                if dist[v] == INF and not is_blocked(v):
                    dist[v] = d + 1
                    parent[v] = u
                    nxt.append(v)
        nxt.sort()
        level = nxt
        d += 1
    return dist, parent


def nearest_node(field: SensorField, point: tuple[float, float],
                 candidates: Iterable[NodeId] | None = None) -> NodeId:
    """Closest sensor to an arbitrary point; ties go to the lowest id."""
    if candidates is None:
        ids = np.arange(field.n)
    else:
        ids = np.asarray(sorted(candidates), dtype=np.int64)
    if ids.size == 0:
        raise ValueError("no candidate nodes")
    diff = field.positions[ids] - np.asarray(point, dtype=np.float64)
    d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
    # argmin takes the first minimum, which is the lowest id on a tie
    return int(ids[int(np.argmin(d2))])


def is_connected(graph: CommGraph) -> bool:
    dist, _ = hop_bfs(graph, 0)
    return all(d != INF for d in dist)


def connectivity_census(n: int, radio_range: float, seeds: Iterable[int]) -> float:
    """Fraction of seeds for which the comm graph comes out connected.

    Diagnostic: with density 1 the graph is almost always disconnected below
    r ~ 1.5 and solidly connected by r = 3.
    """
    seeds = list(seeds)
    hits = 0
    for s in seeds:
        g = build_comm_graph(generate_field(n, radio_range, s))
        if is_connected(g):
            hits += 1
    return hits / len(seeds)


def save_field(field: SensorField, path) -> None:
    """Write a field as text: one header line, then one `id x y` line per node."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(field_text(field))


def field_text(field: SensorField) -> str:
    lines = [f"{field.n} {field.side:.17g} {field.radio_range:.17g} {field.seed}"]
    for i in range(field.n):
        x, y = field.positions[i]
        lines.append(f"{i} {x:.17g} {y:.17g}")
    return "\n".join(lines) + "\n"


def load_field(path) -> SensorField:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        n = int(header[0])
        side = float(header[1])
        radio_range = float(header[2])
        seed = int(header[3])
        positions = np.empty((n, 2), dtype=np.float64)
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            i = int(parts[0])
            positions[i, 0] = float(parts[1])
            positions[i, 1] = float(parts[2])
    return SensorField(n=n, side=side, radio_range=radio_range, seed=seed,
                       positions=positions)


def adjacency_text(graph: CommGraph) -> str:
    """Canonical text dump of the adjacency, for byte-level comparisons."""
    return "\n".join(
        f"{i}:" + ",".join(str(v) for v in nbrs)
        for i, nbrs in enumerate(graph.adj)
    ) + "\n"
