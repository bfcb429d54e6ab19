"""Renewable placements, full-load-hour quantile clustering, max export.

Placements arrive with an hourly capacity-factor series each. Per region and
technology they are grouped into at most 11 clusters: the best 5% of capacity
(by full load hours) forms its own cluster, the rest is cut into 10 bins at
evenly spaced cumulative-capacity quantiles of the FLH ordering. A cluster's
series is the capacity-weighted mean of its members, which conserves energy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .datamodel import TechnoEconomics, Year
from .errors import InputError, ParameterError

TECHS = ("pv", "wind")
N_QUANTILE_BINS = 10
TOP_SHARE = 0.05


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Placement:
    """One candidate RES site with an hourly capacity-factor series."""

    id: str
    technology: str
    region_id: str
    latitude: float
    longitude: float
    capacity_kw: float
    cf_series: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cf_series", _readonly(self.cf_series))
        if self.technology not in TECHS:
            raise ParameterError(f"technology must be one of {TECHS}, got {self.technology!r}")
        if self.capacity_kw <= 0:
            raise ParameterError(f"placement {self.id}: capacity must be > 0")
        if not (abs(self.latitude) <= 90 and abs(self.longitude) <= 180):
            raise ParameterError(f"placement {self.id}: invalid coordinates")
        cf = self.cf_series
        if cf.ndim != 1 or cf.size == 0:
            raise ParameterError(f"placement {self.id}: cf_series must be a nonempty vector")
        if np.any(cf < 0) or np.any(cf > 1):
            raise ParameterError(f"placement {self.id}: capacity factors must be in [0,1]")

    @property
    def flh(self) -> float:
        """Full load hours over the series (h per series span)."""
        return float(self.cf_series.sum())


@dataclass(frozen=True, eq=False)
class ClusterPotential:
    """An FLH-quantile cluster of placements for one region and technology."""

    cluster_id: str
    technology: str
    region_id: str
    capacity_bound_kw: float
    cf_series: np.ndarray
    member_ids: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cf_series", _readonly(self.cf_series))
        object.__setattr__(self, "member_ids", tuple(self.member_ids))
        if self.capacity_bound_kw <= 0:
            raise ParameterError(f"cluster {self.cluster_id}: capacity bound must be > 0")
        cf = self.cf_series
        if np.any(cf < -1e-12) or np.any(cf > 1 + 1e-12):
            raise ParameterError(f"cluster {self.cluster_id}: capacity factors outside [0,1]")

    @property
    def flh(self) -> float:
        return float(self.cf_series.sum())


def _weighted_mean_series(members: list[Placement]) -> np.ndarray:
    caps = np.array([p.capacity_kw for p in members])
    series = np.stack([p.cf_series for p in members])
    return (caps[:, None] * series).sum(axis=0) / caps.sum()


def cluster_region(placements: list[Placement]) -> list[ClusterPotential]:
    """Form at most 11 FLH clusters from one region's placements of one technology.

    Placements are sorted by descending FLH (ties broken by id ascending).
    The top 5% of cumulative capacity becomes its own cluster; the remainder
    is cut into 10 bins at even cumulative-capacity quantiles. Bins that end
    up empty are omitted. Placements are never split across clusters.
    """
    if not placements:
        return []
    regions = {p.region_id for p in placements}
    techs = {p.technology for p in placements}
    if len(regions) != 1 or len(techs) != 1:
        raise ParameterError("cluster_region expects placements of one region and technology")
    region, tech = regions.pop(), techs.pop()

    ordered = sorted(placements, key=lambda p: (-p.flh, p.id))
    total_cap = sum(p.capacity_kw for p in ordered)
    top_threshold = TOP_SHARE * total_cap

    # A placement joins the top cluster while the capacity before it is under
    # the 5% mark, so the first placement always qualifies.
    groups: list[list[Placement]] = [[] for _ in range(1 + N_QUANTILE_BINS)]
    cum = 0.0
    split = 0
    for i, p in enumerate(ordered):
        if cum < top_threshold:
            groups[0].append(p)
            cum += p.capacity_kw
            split = i + 1
        else:
            break

    rest = ordered[split:]
    rest_cap = sum(p.capacity_kw for p in rest)
    if rest:
        bin_size = rest_cap / N_QUANTILE_BINS
        cum = 0.0
        for p in rest:
            idx = min(int(cum / bin_size), N_QUANTILE_BINS - 1)
            groups[1 + idx].append(p)
            cum += p.capacity_kw

    clusters = []
    for k, members in enumerate(groups):
        if not members:
            continue
        label = "top5" if k == 0 else f"q{k:02d}"
        clusters.append(
            ClusterPotential(
                cluster_id=f"{region}:{tech}:{label}",
                technology=tech,
                region_id=region,
                capacity_bound_kw=sum(p.capacity_kw for p in members),
                cf_series=_weighted_mean_series(members),
                member_ids=tuple(p.id for p in members),
            )
        )
    return clusters


def cluster_all(placements: list[Placement]) -> list[ClusterPotential]:
    """Cluster every (region, technology) group; deterministic ordering."""
    keys = sorted({(p.region_id, p.technology) for p in placements})
    out = []
    for region, tech in keys:
        group = [p for p in placements if p.region_id == region and p.technology == tech]
        out.extend(cluster_region(group))
    return out


def max_export(total_el_potential_kwh: float, te: TechnoEconomics, year: Year) -> float:
    """Maximum exportable hydrogen (kWh_LHV) for a given electricity potential.

    Solves the lossless chain balance m/eta_pem + liq_el_demand*m = E_el,
    i.e. electrolysis input plus liquefaction electricity exhaust the
    potential exactly.
    """
    if total_el_potential_kwh < 0:
        raise ParameterError("electrical potential must be >= 0")
    eta = te.pem_efficiency[year]
    return total_el_potential_kwh / (1.0 / eta + te.liq_el_demand)


# ---------------------------------------------------------------------------
# File ingestion
#
# Placements file: CSV with header id,tech,region,lat,lon,capacity_kw.
# Companion capacity-factor file: CSV, one column per placement id, one row
# per hour.
# ---------------------------------------------------------------------------

PLACEMENT_HEADER = ["id", "tech", "region", "lat", "lon", "capacity_kw"]


def read_placements(placements_csv: str | Path, cf_csv: str | Path) -> list[Placement]:
    """Read and validate placements; errors carry 1-based row locators."""
    cf = pd.read_csv(cf_csv)
    placements = []
    with open(placements_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PLACEMENT_HEADER:
            raise InputError(
                f"{placements_csv}: expected header {','.join(PLACEMENT_HEADER)}, "
                f"got {','.join(reader.fieldnames or [])}"
            )
        for rownum, row in enumerate(reader, start=2):
            pid = row["id"]
            if pid not in cf.columns:
                raise InputError(f"{placements_csv} row {rownum}: no cf column for id {pid!r}")
            try:
                placements.append(
                    Placement(
                        id=pid,
                        technology=row["tech"],
                        region_id=row["region"],
                        latitude=float(row["lat"]),
                        longitude=float(row["lon"]),
                        capacity_kw=float(row["capacity_kw"]),
                        cf_series=cf[pid].to_numpy(dtype=float),
                    )
                )
            except (ParameterError, ValueError) as exc:
                raise InputError(f"{placements_csv} row {rownum}: {exc}") from exc
    if not placements:
        raise InputError(f"{placements_csv}: no placement rows")
    seen: set[str] = set()
    for p in placements:
        if p.id in seen:
            raise InputError(f"{placements_csv}: duplicate placement id {p.id!r}")
        seen.add(p.id)
    return placements


# ---------------------------------------------------------------------------
# Cluster cache (compact binary, .npz)
#
# Arrays:
#   cluster_ids, cluster_tech, cluster_region: str arrays, one row per cluster
#   cluster_cap_kw: float, capacity bounds
#   cluster_series: float matrix, one row per cluster
#   cluster_members: '|'-joined member id strings
#   placement_* arrays: id, tech, region, lat, lon, capacity_kw, flh
# Placement-level rows retain what post-processing needs (allocation order,
# coordinates); raw placement series are not kept.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterCache:
    clusters: tuple[ClusterPotential, ...]
    placements_index: dict[str, dict]  # id -> {tech, region, lat, lon, capacity_kw, flh}

    def total_el_potential_kwh(self) -> float:
        """Electric energy potential over the series span, kWh."""
        return sum(c.capacity_bound_kw * c.flh for c in self.clusters)


def save_cluster_cache(path: str | Path, clusters: list[ClusterPotential],
                       placements: list[Placement]) -> None:
    clusters = sorted(clusters, key=lambda c: c.cluster_id)
    placements = sorted(placements, key=lambda p: p.id)
    np.savez(
        path,
        cluster_ids=np.array([c.cluster_id for c in clusters]),
        cluster_tech=np.array([c.technology for c in clusters]),
        cluster_region=np.array([c.region_id for c in clusters]),
        cluster_cap_kw=np.array([c.capacity_bound_kw for c in clusters]),
        cluster_series=np.stack([c.cf_series for c in clusters]),
        cluster_members=np.array(["|".join(c.member_ids) for c in clusters]),
        placement_id=np.array([p.id for p in placements]),
        placement_tech=np.array([p.technology for p in placements]),
        placement_region=np.array([p.region_id for p in placements]),
        placement_lat=np.array([p.latitude for p in placements]),
        placement_lon=np.array([p.longitude for p in placements]),
        placement_cap_kw=np.array([p.capacity_kw for p in placements]),
        placement_flh=np.array([p.flh for p in placements]),
    )


def load_cluster_cache(path: str | Path) -> ClusterCache:
    with np.load(path) as data:
        clusters = tuple(
            ClusterPotential(
                cluster_id=str(data["cluster_ids"][i]),
                technology=str(data["cluster_tech"][i]),
                region_id=str(data["cluster_region"][i]),
                capacity_bound_kw=float(data["cluster_cap_kw"][i]),
                cf_series=data["cluster_series"][i],
                member_ids=tuple(m for m in str(data["cluster_members"][i]).split("|") if m),
            )
            for i in range(len(data["cluster_ids"]))
        )
        index = {
            str(data["placement_id"][i]): {
                "tech": str(data["placement_tech"][i]),
                "region": str(data["placement_region"][i]),
                "lat": float(data["placement_lat"][i]),
                "lon": float(data["placement_lon"][i]),
                "capacity_kw": float(data["placement_cap_kw"][i]),
                "flh": float(data["placement_flh"][i]),
            }
            for i in range(len(data["placement_id"]))
        }
    return ClusterCache(clusters=clusters, placements_index=index)
