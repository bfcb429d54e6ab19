"""Liquid-hydrogen export cost-potential toolkit.

Builds and solves hourly multi-region LPs over the PV/wind -> electrolysis ->
transport -> liquefaction -> LH2 export chain, post-processes local grids
geospatially, and assembles cost-potential curves with sensitivity and
attribute aggregations.
"""

from .datamodel import (
    ScenarioConfig,
    TechnoEconomics,
    Year,
    annual_cost,
    annuity_factor,
)
from .potentials import ClusterPotential, Placement, cluster_region, max_export
from .network import RegionGraph, arc_efficiency, build_graph
from .esm import DemandProfile, SystemModel, build_model, model_stats
from .solve import Solution, liq_specific_capex, solve_scenario, verify_solution
from .postproc import (
    ExportCostResult,
    Park,
    allocate_placements,
    classify_group,
    cluster_parks,
    export_cost,
    mst_connect,
)
from .curves import (
    CostPotentialCurve,
    CountryAttributes,
    build_curve,
    cumulative_by_attribute,
    export_levels,
    sensitivity_sweep,
    water_demand,
)

__version__ = "0.1.0"
