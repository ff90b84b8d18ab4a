"""Uniform skeletons: a square grid of streets plus perimeter streets.

Streets are vertical and horizontal lines spaced n^(1/2 - epsilon) apart
(field borders always count as streets).  A sensor joins a street when its
perpendicular distance to the nearest line is at most half the street width.
Around a danger region, in-zone boundary sensors wake their out-of-zone
neighbourhood for a few hops, forming perimeter streets that let traffic
round the region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .danger import DangerZone, boundary_nodes, zone_node_mask
from .field import CommGraph, NodeId
from .skeleton import Provenance, SkeletonGraph, default_street_width


@dataclass(frozen=True)
class UniformStreetConfig:
    """Knobs for the grid-street construction."""

    epsilon: float               # street density exponent, 0 < epsilon < 1/2
    width: float | None = None   # full street width; None = 2/r at build time
    shift: float = 0.0           # diagonal offset of the grid, 0 <= shift < s
    prune: bool = False          # thin each street to one shortest path

    def separation(self, n: int) -> float:
        """Street spacing s = n^(1/2 - epsilon)."""
        return n ** (0.5 - self.epsilon)

    def validate(self, n: int, radio_range: float) -> tuple[float, float]:
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        s = self.separation(n)
        if not 1.0 < s < math.sqrt(n):
            raise ValueError(f"street separation {s:.3g} out of range for n={n}")
        w = self.width if self.width is not None else default_street_width(radio_range)
        if w <= 0:
            raise ValueError("street width must be positive")
        if w * radio_range <= 1.0:
            raise ValueError(
                f"width*range = {w * radio_range:.3g} <= 1: streets would shred")
        if not 0.0 <= self.shift < s:
            raise ValueError(f"shift {self.shift} outside [0, {s:.3g})")
        return s, w


def shift_streets(cfg: UniformStreetConfig, delta: float,
                  n: int | None = None) -> UniformStreetConfig:
    """Same grid, slid diagonally by delta along both axes."""
    if delta < 0:
        raise ValueError("shift must be non-negative")
    if n is not None and delta >= cfg.separation(n):
        raise ValueError("shift must stay below the street separation")
    return replace(cfg, shift=delta)


def street_line_positions(side: float, separation: float,
                          shift: float) -> list[float]:
    """Grid line coordinates for one axis; borders are always streets."""
    lines = {0.0, side}
    k = 0
    while True:
        pos = shift + k * separation
        if pos > side:
            break
        lines.add(pos)
        k += 1
    out = sorted(lines)
    # collapse lines that rounding placed on top of each other
    dedup = [out[0]]
    for p in out[1:]:
        if p - dedup[-1] > 1e-9:
            dedup.append(p)
    return dedup


@dataclass(frozen=True)
class UniformGeometry:
    """Street lines of a built uniform skeleton; answers cell lookups."""

    lines_x: tuple[float, ...]
    lines_y: tuple[float, ...]
    width: float

    def enclosing_cell(self, x: float, y: float) -> tuple[float, float, float, float]:
        x0, x1 = _bracket(self.lines_x, x)
        y0, y1 = _bracket(self.lines_y, y)
        return x0, y0, x1, y1


def _bracket(lines: tuple[float, ...], v: float) -> tuple[float, float]:
    lo, hi = lines[0], lines[-1]
    for p in lines:
        if p <= v:
            lo = p
        else:
            hi = p
            break
    else:
        hi = lines[-1]
    return lo, hi


def build_perimeter_streets(graph: CommGraph, zone: DangerZone,
                            width: float) -> frozenset[NodeId]:
    """Boundary nodes plus out-of-zone nodes within ceil(width) hops of them.

    The in-zone boundary nodes are returned too (callers exclude the zone when
    assembling a skeleton); with width 0 the result is exactly the boundary.
    """
    base = boundary_nodes(graph, zone)
    if not base:
        return frozenset()
    hops = math.ceil(width)
    if hops <= 0:
        return base
    mask = zone_node_mask(zone, graph.field.positions)
    seen = set(base)
    frontier = sorted(base)
    for _ in range(hops):
        nxt = []
        for u in frontier:
            for v in graph.adj[u]:
                if v not in seen and not mask[v]:
                    seen.add(v)
                    nxt.append(v)
        frontier = sorted(nxt)
    return frozenset(seen)


def prune_street(graph: CommGraph, street: frozenset[NodeId],
                 endpoints: tuple[NodeId, NodeId]
                 ) -> tuple[frozenset[NodeId], bool]:
    """Thin a street to the hop-shortest path between its endpoints.

    If the street is internally disconnected it is returned unchanged with a
    False flag so callers can keep the redundant embedding.
    """
    a, b = endpoints
    if a not in street or b not in street:
        raise ValueError("endpoints must belong to the street")
    INF = math.inf
    dist = {a: 0}
    parent: dict[NodeId, NodeId] = {}
    level = [a]
    while level and b not in dist:
        nxt = []
        for u in level:
            for v in graph.adj[u]:
                if v in street and v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    nxt.append(v)
        level = sorted(nxt)
    if b not in dist:
        return street, False
    path = {b}
    node = b
    while node != a:
        node = parent[node]
        path.add(node)
    return frozenset(path), True


def build_uniform_skeleton(graph: CommGraph, zone: DangerZone | None,
                           cfg: UniformStreetConfig) -> SkeletonGraph:
    """Wake the grid-street strips and perimeter streets, minus the zone."""
    fld = graph.field
    s, w = cfg.validate(fld.n, fld.radio_range)
    half = w / 2.0
    # the shift is diagonal, so both axes share one set of line positions
    lines_x = street_line_positions(fld.side, s, cfg.shift)
    lines_y = lines_x

    pos = fld.positions
    lx = np.asarray(lines_x)
    ly = np.asarray(lines_y)
    near_x = np.min(np.abs(pos[:, 0][:, None] - lx[None, :]), axis=1) <= half
    near_y = np.min(np.abs(pos[:, 1][:, None] - ly[None, :]), axis=1) <= half
    on_street = near_x | near_y

    in_zone = zone_node_mask(zone, pos)
    blocked = frozenset(np.flatnonzero(in_zone).tolist())

    grid_nodes = set(np.flatnonzero(on_street & ~in_zone).tolist())
    if cfg.prune:
        grid_nodes = _pruned_grid(graph, pos, lines_x, lines_y, half,
                                  grid_nodes)

    provenance = {v: Provenance.GRID_STREET for v in grid_nodes}
    awake = set(grid_nodes)

    if zone is not None and zone.kind == "region":
        perimeter = build_perimeter_streets(graph, zone, w)
        for v in perimeter:
            if v not in blocked and v not in awake:
                awake.add(v)
                provenance[v] = Provenance.PERIMETER_STREET

    geometry = UniformGeometry(lines_x=tuple(lines_x), lines_y=tuple(lines_y),
                               width=w)
    return SkeletonGraph(graph=graph, awake=frozenset(awake),
                         provenance=provenance, construction="uniform",
                         blocked=blocked, geometry=geometry)


def _pruned_grid(graph: CommGraph, pos: np.ndarray, lines_x, lines_y,
                 half: float, grid_nodes: set[NodeId]) -> set[NodeId]:
    """Per-street shortest-path thinning; unprunable streets stay as-is."""
    kept: set[NodeId] = set()
    for axis, lines in ((0, lines_x), (1, lines_y)):
        other = 1 - axis
        for line in lines:
            strip = frozenset(
                v for v in grid_nodes if abs(pos[v, axis] - line) <= half)
            if len(strip) < 2:
                kept |= strip
                continue
            lo = min(strip, key=lambda v: (pos[v, other], v))
            hi = max(strip, key=lambda v: (pos[v, other], -v))
            pruned, ok = prune_street(graph, strip, (lo, hi))
            kept |= pruned
    return kept
