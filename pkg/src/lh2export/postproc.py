"""Geospatial post-optimization: placement allocation, parks, local grids, cost.

The LP works on FLH clusters; afterwards the built cluster capacity is
allocated back to concrete placements (best full load hours first), nearby
placements are merged into parks (5 km single linkage), and each region's
parks are wired to the region centroid with a minimum spanning tree priced
as local transmission line. The final hydrogen cost divides total annual
system cost plus local-grid cost by the exported mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, minimum_spanning_tree

from .datamodel import TechnoEconomics
from .errors import ParameterError
from .esm import KW_PER_GW
from .network import haversine_km
from .solve import ScenarioOutcome, Solution

if TYPE_CHECKING:  # pragma: no cover
    from .curves import CostPotentialCurve

PARK_RADIUS_KM = 5.0
CAPACITY_EPS_KW = 1e-3

# Decomposition keys, in reporting order.
COST_COMPONENTS = (
    "res",
    "pem",
    "battery",
    "lh2_tank",
    "elec_grid",
    "pipelines",
    "liquefaction",
    "local_grid",
)


@dataclass(frozen=True)
class SiteRecord:
    """Placement-level data retained for post-processing."""

    id: str
    technology: str
    region_id: str
    latitude: float
    longitude: float
    capacity_kw: float
    flh: float


@dataclass(frozen=True)
class Park:
    """A group of allocated placements within 5 km chained distance."""

    park_id: str
    technology: str
    member_ids: tuple[str, ...]
    latitude: float  # capacity-weighted centroid
    longitude: float
    capacity_kw: float


@dataclass(frozen=True)
class MstEdge:
    a_id: str
    a_lat: float
    a_lon: float
    b_id: str
    b_lat: float
    b_lon: float
    length_km: float


@dataclass(frozen=True)
class MstResult:
    total_km: float
    edges: tuple[MstEdge, ...]
    capex_meur: float
    annual_cost_eur: float


@dataclass(frozen=True)
class ExportCostResult:
    """Final export cost with its per-technology decomposition."""

    c_h2_eur_per_kg: float
    tac_opt_eur: float
    local_grid_cost_eur: float
    exported_kg: float
    decomposition_eur_per_kg: Mapping[str, float]
    curtailment: float

    def __post_init__(self):
        total = sum(self.decomposition_eur_per_kg.values())
        if abs(total - self.c_h2_eur_per_kg) > 1e-9 * max(1.0, abs(self.c_h2_eur_per_kg)):
            raise ParameterError("decomposition does not sum to the hydrogen cost")
        if not 0.0 <= self.curtailment <= 1.0:
            raise ParameterError("curtailment must lie in [0, 1]")


def allocate_placements(
    used_kw: float, members: Iterable[SiteRecord]
) -> list[tuple[SiteRecord, float]]:
    """Greedy-fill `used_kw` across members in descending FLH order.

    Ties in FLH break by id ascending, so the allocation is stable under
    input permutation. The last placement may be used partially; allocated
    capacity sums to the request exactly.
    """
    members = sorted(members, key=lambda m: (-m.flh, m.id))
    total = sum(m.capacity_kw for m in members)
    if used_kw > total * (1 + 1e-9):
        raise ParameterError(f"requested {used_kw} kW exceeds cluster bound {total} kW")
    out: list[tuple[SiteRecord, float]] = []
    remaining = min(used_kw, total)
    for m in members:
        if remaining <= 0:
            break
        take = min(m.capacity_kw, remaining)
        out.append((m, take))
        remaining -= take
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def cluster_parks(allocated: list[tuple[SiteRecord, float]]) -> list[Park]:
    """Single-linkage clustering of allocated placements into parks.

    Placements within 5 km (great-circle) chain into one park; different
    technologies never merge. The result does not depend on input order.
    """
    items = sorted(allocated, key=lambda a: a[0].id)
    parks: list[Park] = []
    for tech in sorted({m.technology for m, _ in items}):
        group = [(m, kw) for m, kw in items if m.technology == tech]
        n = len(group)
        uf = _UnionFind(n)
        for i in range(n):
            for j in range(i + 1, n):
                a, b = group[i][0], group[j][0]
                if haversine_km(a.latitude, a.longitude, b.latitude, b.longitude) <= PARK_RADIUS_KM:
                    uf.union(i, j)
        roots: dict[int, list[int]] = {}
        for i in range(n):
            roots.setdefault(uf.find(i), []).append(i)
        comps = sorted(roots.values(), key=lambda idxs: group[idxs[0]][0].id)
        for k, idxs in enumerate(comps):
            members = [group[i] for i in idxs]
            caps = np.array([kw for _, kw in members])
            lats = np.array([m.latitude for m, _ in members])
            lons = np.array([m.longitude for m, _ in members])
            region = members[0][0].region_id
            parks.append(
                Park(
                    park_id=f"{region}:{tech}:park{k:03d}",
                    technology=tech,
                    member_ids=tuple(m.id for m, _ in members),
                    latitude=float((caps * lats).sum() / caps.sum()),
                    longitude=float((caps * lons).sum() / caps.sum()),
                    capacity_kw=float(caps.sum()),
                )
            )
    return parks


def mst_connect(
    parks: list[Park], target: tuple[float, float], te: TechnoEconomics,
    target_id: str = "grid",
) -> MstResult:
    """Minimum spanning tree over parks plus the grid attachment point.

    Edge weights are great-circle distances; the cost is the local
    transmission line capex per km, annualized with its lifetime and opex.
    Coincident nodes may be missing from the edge list (the solver drops
    zero-weight edges) but never affect the total length or cost.
    """
    if not parks:
        raise ParameterError("mst_connect requires at least one park")
    nodes = [(p.park_id, p.latitude, p.longitude) for p in sorted(parks, key=lambda p: p.park_id)]
    nodes.append((target_id, float(target[0]), float(target[1])))
    n = len(nodes)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = haversine_km(nodes[i][1], nodes[i][2], nodes[j][1], nodes[j][2])
            dist[i, j] = dist[j, i] = d
    # csgraph_from_dense keeps genuine zero-length edges (coincident points).
    graph = csgraph_from_dense(dist, null_value=np.inf)
    tree = minimum_spanning_tree(graph)
    total = float(tree.sum())
    edges = []
    # tocoo() keeps explicitly stored zero-length edges, unlike nonzero().
    coo = tree.tocoo()
    for i, j in zip(coo.row, coo.col):
        edges.append(
            MstEdge(
                a_id=nodes[i][0], a_lat=nodes[i][1], a_lon=nodes[i][2],
                b_id=nodes[j][0], b_lat=nodes[j][1], b_lon=nodes[j][2],
                length_km=float(dist[i, j]),
            )
        )
    edges.sort(key=lambda e: (e.a_id, e.b_id))
    capex_meur = te.capex_local_grid * total
    annual = te.annualized("local_grid", capex_meur) * 1e6
    return MstResult(total_km=total, edges=tuple(edges), capex_meur=capex_meur,
                     annual_cost_eur=annual)


def export_cost(
    solution: Solution, local_grid_cost_eur: float, exported_kg: float
) -> ExportCostResult:
    """Final hydrogen cost: (TAC + local grid) / exported mass, decomposed."""
    if exported_kg <= 0:
        raise ParameterError("exported mass must be > 0")
    tac = solution.objective_eur
    costs = solution.cost_by_component_eur
    decomposition = {
        "res": (costs.get("pv", 0.0) + costs.get("wind", 0.0)) / exported_kg,
        "pem": costs.get("pem", 0.0) / exported_kg,
        "battery": costs.get("battery", 0.0) / exported_kg,
        "lh2_tank": costs.get("lh2_tank", 0.0) / exported_kg,
        "elec_grid": costs.get("elec_grid", 0.0) / exported_kg,
        "pipelines": costs.get("pipeline", 0.0) / exported_kg,
        "liquefaction": costs.get("liquefaction", 0.0) / exported_kg,
        "local_grid": local_grid_cost_eur / exported_kg,
    }
    return ExportCostResult(
        c_h2_eur_per_kg=(tac + local_grid_cost_eur) / exported_kg,
        tac_opt_eur=tac,
        local_grid_cost_eur=local_grid_cost_eur,
        exported_kg=exported_kg,
        decomposition_eur_per_kg=decomposition,
        curtailment=solution.curtailment,
    )


GROUP_SMALL_POTENTIAL_KWH = 1e12  # 1 PWh_LHV/a
GROUP_I_COST_CEILING = 2.50  # EUR/kg


def classify_group(curve: "CostPotentialCurve") -> str:
    """Country group: III below 1 PWh potential, I if all costs <= 2.50, else II."""
    if not curve.points:
        raise ParameterError("cannot classify an empty curve")
    if curve.max_export_kwh < GROUP_SMALL_POTENTIAL_KWH:
        return "III"
    if all(p.cost_eur_per_kg <= GROUP_I_COST_CEILING for p in curve.points):
        return "I"
    return "II"


@dataclass(frozen=True)
class LocalGridResult:
    """Aggregated local grids for one solved scenario."""

    total_cost_eur: float
    total_km: float
    parks: tuple[Park, ...]
    edges: tuple[MstEdge, ...]


def build_local_grids(
    outcome: ScenarioOutcome, sites: Mapping[str, SiteRecord]
) -> LocalGridResult:
    """Allocate built cluster capacity to placements and wire parks per region.

    Each region's parks (all technologies) join one MST rooted at the region
    centroid. Regions without built RES capacity contribute nothing.
    """
    model = outcome.model
    te = model.te
    allocations: dict[str, list[tuple[SiteRecord, float]]] = {}
    for c in model.clusters:
        used_gw = outcome.solution.capacity(f"cap:cluster:{c.cluster_id}")
        used_kw = used_gw * KW_PER_GW
        if used_kw <= CAPACITY_EPS_KW:
            continue
        members = [sites[mid] for mid in c.member_ids]
        allocations.setdefault(c.region_id, []).extend(allocate_placements(used_kw, members))

    total_cost = 0.0
    total_km = 0.0
    parks: list[Park] = []
    edges: list[MstEdge] = []
    for region in sorted(allocations):
        region_parks = cluster_parks(allocations[region])
        centroid = model.graph.nodes[region]
        mst = mst_connect(region_parks, centroid, te, target_id=f"{region}:grid")
        total_cost += mst.annual_cost_eur
        total_km += mst.total_km
        parks.extend(region_parks)
        edges.extend(mst.edges)
    return LocalGridResult(
        total_cost_eur=total_cost,
        total_km=total_km,
        parks=tuple(parks),
        edges=tuple(edges),
    )
