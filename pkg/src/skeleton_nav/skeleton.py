"""The skeleton graph: the sparse awake subset used for path search.

A skeleton is a set of awake nodes plus the communication edges induced among
them.  Nodes inside a danger region are never awake.  Each awake node carries
a provenance tag saying which construction step put it there; query endpoints
that start off-street get attached on the fly and are tagged as endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

from .field import CommGraph, NodeId


class Provenance(Enum):
    GRID_STREET = "grid"
    PERIMETER_STREET = "perimeter"
    QUADTREE_EDGE = "quadtree"
    VORONOI_EDGE = "voronoi"
    ENDPOINT = "endpoint"


def default_street_width(radio_range: float) -> float:
    """Default street width 2/r, keeping strip density times range at 2."""
    return 2.0 / radio_range


@dataclass(eq=False)
class SkeletonGraph:
    """Awake node set with induced adjacency and per-node provenance."""

    graph: CommGraph
    awake: frozenset[NodeId]
    provenance: dict[NodeId, Provenance]
    construction: str                      # "uniform" | "adaptive"
    blocked: frozenset[NodeId] = frozenset()  # nodes inside the danger region
    geometry: object | None = None         # supports enclosing_cell(x, y)
    _adj: dict[NodeId, tuple[NodeId, ...]] | None = dc_field(
        default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.awake & self.blocked:
            raise ValueError("awake set overlaps the danger region")

    @property
    def size(self) -> int:
        return len(self.awake)

    @property
    def fraction(self) -> float:
        return len(self.awake) / self.graph.n

    def neighbors(self, node: NodeId) -> list[NodeId]:
        awake = self.awake
        return [v for v in self.graph.adj[node] if v in awake]

    @property
    def adjacency(self) -> dict[NodeId, tuple[NodeId, ...]]:
        """Induced adjacency over the awake set, built on first use."""
        if self._adj is None:
            awake = self.awake
            self._adj = {
                u: tuple(v for v in self.graph.adj[u] if v in awake)
                for u in sorted(awake)
            }
        return self._adj

    def with_connectors(self, nodes, tag: Provenance = Provenance.ENDPOINT
                        ) -> "SkeletonGraph":
        """A copy with extra awake nodes (never waking blocked ones)."""
        extra = frozenset(nodes) - self.awake - self.blocked
        if not extra:
            return self
        prov = dict(self.provenance)
        for v in extra:
            prov[v] = tag
        return SkeletonGraph(graph=self.graph, awake=self.awake | extra,
                             provenance=prov, construction=self.construction,
                             blocked=self.blocked, geometry=self.geometry)


def skeleton_text(sk: SkeletonGraph) -> str:
    """Dump: one `id provenance` line per awake node, ascending ids."""
    return "\n".join(f"{i} {sk.provenance[i].value}" for i in sorted(sk.awake)) + "\n"


def save_skeleton(sk: SkeletonGraph, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(skeleton_text(sk))


def load_awake_set(path) -> dict[NodeId, Provenance]:
    out: dict[NodeId, Provenance] = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                out[int(parts[0])] = Provenance(parts[1])
    return out


@dataclass(frozen=True)
class AttachResult:
    skeleton: SkeletonGraph
    packets: int          # wake-up transmissions spent on attachment
    src_attached: bool
    dst_attached: bool


def _ring_flood(graph: CommGraph, blocked: frozenset[NodeId], source: NodeId,
                ttl: int) -> tuple[list[float], list[NodeId], int]:
    """Depth-capped BFS; every reached node (source included) forwards once."""
    INF = math.inf
    dist: list[float] = [INF] * graph.n
    parent: list[NodeId] = [-1] * graph.n
    dist[source] = 0
    level = [source]
    reached = 1
    d = 0
    while level and d < ttl:
        nxt: list[NodeId] = []
        for u in level:
            for v in graph.adj[u]:
                if dist[v] == INF and v not in blocked:
                    dist[v] = d + 1
                    parent[v] = u
                    nxt.append(v)
        nxt.sort()
        reached += len(nxt)
        level = nxt
        d += 1
    return dist, parent, reached


def attach_offstreet_endpoints(graph: CommGraph, sk: SkeletonGraph,
                               src: NodeId, dst: NodeId) -> AttachResult:
    """Wire query endpoints into the skeleton, counting wake-up packets.

    The source runs an expanding-ring flood (doubling lifetime) until the ring
    contains an awake node, then the hop path to the nearest one joins as
    connectors.  An off-street destination is served by flooding its enclosing
    street cell, so every node of that cell joins.  On-street endpoints cost
    nothing.
    """
    packets = 0
    connectors: set[NodeId] = set()
    src_ok = True
    dst_ok = True

    if src not in sk.awake:
        src_ok = False
        ttl = 1
        prev_reached = 0
        while True:
            dist, parent, reached = _ring_flood(graph, sk.blocked, src, ttl)
            packets += reached
            hits = [(dist[v], v) for v in sk.awake if dist[v] != math.inf]
            if hits:
                _, best = min(hits)  # nearest street node, lowest id on ties
                node = parent[best]
                while node != -1:  # chain from src up to (excluding) the hit
                    connectors.add(node)
                    node = parent[node]
                src_ok = True
                break
            if reached == prev_reached:
                break  # ball stopped growing: component has no street node
            prev_reached = reached
            ttl *= 2

    if dst not in sk.awake and dst not in connectors:
        cell_nodes = _enclosing_cell_nodes(graph, sk, dst)
        packets += len(cell_nodes)
        connectors.update(cell_nodes)
        dst_ok = dst in cell_nodes

    attached = sk.with_connectors(connectors)
    return AttachResult(skeleton=attached, packets=packets,
                        src_attached=src_ok, dst_attached=dst_ok)


def _enclosing_cell_nodes(graph: CommGraph, sk: SkeletonGraph,
                          dst: NodeId) -> set[NodeId]:
    """Active nodes inside the street cell that encloses the destination."""
    geom = sk.geometry
    if geom is None:
        return {dst} - sk.blocked
    x, y = graph.field.position(dst)
    x0, y0, x1, y1 = geom.enclosing_cell(x, y)
    pos = graph.field.positions
    out = {
        i for i in range(graph.n)
        if x0 <= pos[i, 0] <= x1 and y0 <= pos[i, 1] <= y1
        and i not in sk.blocked
    }
    return out
