"""Greenfield transport topology: centroids, detoured arcs, harbor node.

Regions connect centroid to centroid along their adjacency, with lengths
inflated by a detour factor over the great-circle distance. Disconnected
parts are attached to the nearest mainland node; the export harbor is an
extra node attached to its host region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

EARTH_RADIUS_KM = 6371.0
MIN_ARC_KM = 0.1  # replaces degenerate zero-length arcs


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance on a spherical earth, km."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


def arc_efficiency(length_km: float, loss_per_1000km: float = 0.01) -> float:
    """Electric arc efficiency: linear loss per 1000 km, floored at 0.

    Pipelines do not use this; their efficiency is 1.0.
    """
    if length_km < 0:
        raise ParameterError("arc length must be >= 0")
    return max(0.0, 1.0 - loss_per_1000km * (length_km / 1000.0))


@dataclass(frozen=True)
class RegionGraph:
    """Region nodes plus one harbor node, and undirected arcs with lengths."""

    nodes: dict[str, tuple[float, float]]  # node id -> (lat, lon)
    arcs: dict[tuple[str, str], float]  # sorted (a, b) -> length km
    harbor_id: str

    def __post_init__(self):
        if self.harbor_id not in self.nodes:
            raise ParameterError(f"harbor {self.harbor_id!r} is not a node")
        for (a, b), length in self.arcs.items():
            if a not in self.nodes or b not in self.nodes:
                raise ParameterError(f"arc ({a},{b}) references unknown node")
            if (a, b) != tuple(sorted((a, b))):
                raise ParameterError(f"arc key ({a},{b}) must be sorted")
            if length <= 0:
                raise ParameterError(f"arc ({a},{b}) must have positive length")
        if not self._connected():
            raise ParameterError("region graph is not connected")
        if not any(self.harbor_id in arc for arc in self.arcs):
            raise ParameterError("harbor node has no incident arc")

    def _connected(self) -> bool:
        if not self.nodes:
            return False
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in self.arcs:
            adj[a].add(b)
            adj[b].add(a)
        seen = set()
        stack = [next(iter(self.nodes))]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(adj[n] - seen)
        return seen == set(self.nodes)

    def sorted_arcs(self) -> list[tuple[str, str]]:
        return sorted(self.arcs)

    def region_ids(self) -> list[str]:
        return sorted(self.nodes)


def _components(nodes: list[str], arcs: set[tuple[str, str]]) -> list[set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in arcs:
        adj[a].add(b)
        adj[b].add(a)
    comps, seen = [], set()
    for start in nodes:
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            n = stack.pop()
            if n in comp:
                continue
            comp.add(n)
            stack.extend(adj[n] - comp)
        seen |= comp
        comps.append(comp)
    return comps


def build_graph(
    regions: dict[str, tuple[float, float]],
    adjacency: list[tuple[str, str]],
    harbor: str | tuple[float, float],
    detour_factor: float = 1.3,
    harbor_id: str = "harbor",
) -> RegionGraph:
    """Build the transport graph from centroids, adjacency and a harbor.

    `harbor` is either a region id (harbor placed at that centroid) or an
    explicit (lat, lon), attached to the nearest region. Disconnected parts
    are joined to the largest component via their nearest node pair. All
    lengths are great-circle distance times the detour factor; coincident
    centroids get a minimal positive length.
    """
    if not regions:
        raise ParameterError("empty region set")
    if len(set(regions)) != len(regions):
        raise ParameterError("duplicate region ids")
    if harbor_id in regions:
        raise ParameterError(f"harbor id {harbor_id!r} collides with a region id")

    def arc_len(a: str, b: str, nodes: dict[str, tuple[float, float]]) -> float:
        d = detour_factor * haversine_km(*nodes[a], *nodes[b])
        return max(d, MIN_ARC_KM)

    arcs: set[tuple[str, str]] = set()
    for a, b in adjacency:
        if a not in regions or b not in regions:
            raise ParameterError(f"adjacency ({a},{b}) references unknown region")
        if a == b:
            continue
        arcs.add(tuple(sorted((a, b))))

    # Attach disconnected parts to the nearest node of the main component.
    region_ids = sorted(regions)
    comps = _components(region_ids, arcs)
    comps.sort(key=lambda c: (-len(c), min(c)))
    mainland = set(comps[0])
    for comp in comps[1:]:
        best = None
        for r in sorted(comp):
            for m in sorted(mainland):
                d = haversine_km(*regions[r], *regions[m])
                if best is None or d < best[0]:
                    best = (d, r, m)
        _, r, m = best
        arcs.add(tuple(sorted((r, m))))
        mainland |= comp

    nodes = dict(regions)
    if isinstance(harbor, str):
        if harbor not in regions:
            raise ParameterError(f"harbor region {harbor!r} unknown")
        host = harbor
        nodes[harbor_id] = regions[host]
    else:
        lat, lon = harbor
        nodes[harbor_id] = (float(lat), float(lon))
        host = min(region_ids, key=lambda r: (haversine_km(lat, lon, *regions[r]), r))
    arcs.add(tuple(sorted((host, harbor_id))))

    lengths = {arc: arc_len(arc[0], arc[1], nodes) for arc in sorted(arcs)}
    return RegionGraph(nodes=nodes, arcs=lengths, harbor_id=harbor_id)
