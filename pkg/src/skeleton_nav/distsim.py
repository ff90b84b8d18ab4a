"""Message-granular simulation of the distributed search algorithms.

Everything runs in synchronous rounds over an active subgraph (a node set of
a communication graph).  Within a round, transmissions happen in ascending
sender id and are heard in ascending receiver id, so a rerun is byte
identical; a seeded shuffle of the sender order is available for sensitivity
checks.  Per-node transmission counters make packet costs exact rather than
estimated.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .danger import PotentialModel, potential_of_distance
from .field import CommGraph, NodeId, nearest_node

INF = math.inf

TraceFn = Callable[[str], None]


class PacketKind(Enum):
    SEARCH = "search"            # plain hop-count flood
    EXPOSURE_SEARCH = "exposure" # accumulated-exposure flood
    POTENTIAL_FLOOD = "potential"
    WAKE_UP = "wakeup"


@dataclass(eq=False)
class SimRun:
    """Outcome of one distributed run: per-node state plus packet accounting."""

    kind: PacketKind
    source: NodeId
    value: list[float]           # hop distance or accumulated exposure
    parent: list[NodeId]
    transmissions: list[int]
    rounds: int
    converged: bool = True

    @property
    def total_packets(self) -> int:
        return sum(self.transmissions)


@dataclass(frozen=True)
class PathResult:
    """A recovered route with its measures."""

    nodes: tuple[NodeId, ...]
    hops: int
    length: float                # geometric length of the hop sequence
    exposure: float | None
    reachable: bool
    packets: int                 # transmissions spent by the search


def _active_set(graph: CommGraph, active) -> frozenset[NodeId]:
    if active is None:
        return frozenset(range(graph.n))
    return active if isinstance(active, frozenset) else frozenset(active)


def run_bfs_flood(graph: CommGraph, active, source: NodeId,
                  trace: TraceFn | None = None) -> SimRun:
    """Synchronous flood: every node that hears the packet forwards it once.

    Receivers keep the smallest hop count and take the lowest-id sender as
    parent, so the result equals a centralized BFS.
    """
    members = _active_set(graph, active)
    if source not in members:
        raise ValueError(f"source {source} is not active")
    n = graph.n
    value = [INF] * n
    parent = [-1] * n
    tx = [0] * n
    value[source] = 0.0
    frontier = [source]
    rounds = 0
    while frontier:
        nxt: list[NodeId] = []
        for u in frontier:
            tx[u] += 1
            for v in graph.adj[u]:
                if v in members and value[v] == INF:
                    value[v] = value[u] + 1
                    parent[v] = u
                    nxt.append(v)
                    if trace is not None:
                        trace(f"{rounds} {u} {v} {PacketKind.SEARCH.value} "
                              f"{int(value[v])}")
        nxt.sort()
        frontier = nxt
        rounds += 1
    return SimRun(kind=PacketKind.SEARCH, source=source, value=value,
                  parent=parent, transmissions=tx, rounds=rounds)


def run_min_exposure(graph: CommGraph, active, source: NodeId,
                     potentials: Sequence[float],
                     trace: TraceFn | None = None,
                     order_seed: int | None = None) -> SimRun:
    """Flood where packets accumulate node potentials and only improvements
    propagate.

    Each node remembers the least exposure seen to reach it; a packet that
    does not strictly improve on that is dropped.  A node forwards at most
    once per round, carrying its current best, so transmissions are bounded
    by the number of strict improvements.  The fixed point equals a
    centralized node-weighted shortest path search.
    """
    members = _active_set(graph, active)
    if source not in members:
        raise ValueError(f"source {source} is not active")
    n = graph.n
    value = [INF] * n
    parent = [-1] * n
    tx = [0] * n
    value[source] = float(potentials[source])
    scheduled = {source}
    rng = np.random.default_rng(order_seed) if order_seed is not None else None
    rounds = 0
    while scheduled:
        senders = sorted(scheduled)
        if rng is not None:
            rng.shuffle(senders)
        scheduled = set()
        for u in senders:
            tx[u] += 1
            base = value[u]
            for v in graph.adj[u]:
                if v not in members:
                    continue
                cand = base + potentials[v]
                if cand < value[v]:
                    value[v] = cand
                    parent[v] = u
                    scheduled.add(v)
                    if trace is not None:
                        trace(f"{rounds} {u} {v} "
                              f"{PacketKind.EXPOSURE_SEARCH.value} {cand:.17g}")
        rounds += 1
    return SimRun(kind=PacketKind.EXPOSURE_SEARCH, source=source, value=value,
                  parent=parent, transmissions=tx, rounds=rounds)


@dataclass(eq=False)
class PotentialPhase:
    """Network-wide result of flooding once from every danger source."""

    source_nodes: tuple[NodeId, ...]
    distance_tables: list[list[float]]   # per source, hop distances
    potentials: list[float]              # summed over sources at each node
    packets: int


def run_potential_phase(graph: CommGraph, active, model: PotentialModel,
                        trace: TraceFn | None = None) -> PotentialPhase:
    """One BFS flood per danger source; hop distance feeds the potential law.

    Every active node ends up knowing its hop distance to each source and its
    summed potential.  Unreached nodes contribute nothing (infinite range).
    """
    members = _active_set(graph, active)
    if not members:
        raise ValueError("no active nodes to flood")
    candidates = sorted(members)
    source_nodes = []
    tables = []
    packets = 0
    for sx, sy in model.sources:
        src = nearest_node(graph.field, (float(sx), float(sy)), candidates)
        source_nodes.append(src)
        run = run_bfs_flood(graph, members, src, trace=None if trace is None
                            else _tagged(trace, PacketKind.POTENTIAL_FLOOD))
        tables.append(run.value)
        packets += run.total_packets
    potentials = [0.0] * graph.n
    for table in tables:
        for v in candidates:
            d = table[v]
            if d != INF:
                potentials[v] += potential_of_distance(model, d)
    return PotentialPhase(source_nodes=tuple(source_nodes),
                          distance_tables=tables, potentials=potentials,
                          packets=packets)


def _tagged(trace: TraceFn, kind: PacketKind) -> TraceFn:
    def wrapped(line: str) -> None:
        parts = line.split()
        parts[3] = kind.value
        trace(" ".join(parts))
    return wrapped


def extract_path(run: SimRun, destination: NodeId, graph: CommGraph,
                 potentials: Sequence[float] | None = None) -> PathResult:
    """Walk parents back from the destination and measure the route."""
    if run.value[destination] == INF:
        return PathResult(nodes=(), hops=0, length=0.0, exposure=None,
                          reachable=False, packets=run.total_packets)
    chain = [destination]
    node = destination
    for _ in range(graph.n + 1):
        if node == run.source:
            break
        node = run.parent[node]
        if node == -1:
            raise RuntimeError("broken parent chain")
        chain.append(node)
    else:
        raise RuntimeError("parent chain has a cycle")
    chain.reverse()
    pos = graph.field.positions
    length = 0.0
    for a, b in zip(chain, chain[1:]):
        length += float(np.hypot(*(pos[a] - pos[b])))
    exposure = None
    if potentials is not None:
        exposure = float(sum(potentials[v] for v in chain))
    elif run.kind is PacketKind.EXPOSURE_SEARCH:
        exposure = float(run.value[destination])
    return PathResult(nodes=tuple(chain), hops=len(chain) - 1, length=length,
                      exposure=exposure, reachable=True,
                      packets=run.total_packets)


def centralized_bfs(graph: CommGraph, active, source: NodeId) -> list[float]:
    """Reference hop distances, oracle for the flood (plain queue BFS)."""
    from collections import deque

    members = _active_set(graph, active)
    dist = [INF] * graph.n
    dist[source] = 0.0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in graph.adj[u]:
            if v in members and dist[v] == INF:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def centralized_min_exposure(graph: CommGraph, active, source: NodeId,
                             potentials: Sequence[float]) -> list[float]:
    """Node-weighted Dijkstra, oracle for the exposure flood."""
    import heapq

    members = _active_set(graph, active)
    best = [INF] * graph.n
    best[source] = float(potentials[source])
    heap = [(best[source], source)]
    done = [False] * graph.n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in graph.adj[u]:
            if v not in members or done[v]:
                continue
            cand = d + potentials[v]
            if cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, (cand, v))
    return best
