"""Hourly LP assembly for one export scenario.

The model covers the full chain: cluster generation (with free curtailment),
batteries at every node, electrolysis at every node, an electric grid and
gaseous-hydrogen pipelines on every arc, one liquefier and one LH2 tank at
the harbor, and a constant LH2 offtake. All costs are annualized capacities;
operation itself is free, so the objective only carries capacity variables.

Internal units: GW for power, GWh for storage energy (1 h steps), MEUR/yr in
the objective. EUR/kW inputs convert 1:1 to MEUR/GW.

Variable and constraint counts, with R nodes (harbor included), C clusters,
A arcs and T hours:

    n_vars = (C + 2R + 2A + 2) + T * (C + 4R + 4A + 4)
    n_eq   = T * (3R + 2)
    n_ub   = T * (C + 4R + 4A + 4)

Capacity variables come first in the registry, then hour-indexed operation
variables. Every operation variable is capped by exactly one capacity
variable (times the capacity factor, for generation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .datamodel import HOURS_PER_YEAR, ScenarioConfig, TechnoEconomics
from .errors import ParameterError
from .network import RegionGraph, arc_efficiency
from .potentials import ClusterPotential, max_export

KW_PER_GW = 1e6


@dataclass(frozen=True)
class DemandProfile:
    """Constant hourly LH2 offtake at the harbor over the model horizon."""

    hourly_offtake_gwh: float  # GWh_LHV per hour
    horizon_hours: int

    @classmethod
    def from_annual_export(cls, annual_export_gwh: float, horizon_hours: int) -> "DemandProfile":
        """Scale an annual export to the horizon: constant rate, shorter window."""
        return cls(annual_export_gwh / HOURS_PER_YEAR, horizon_hours)

    @property
    def window_export_gwh(self) -> float:
        return self.hourly_offtake_gwh * self.horizon_hours

    @property
    def annual_export_gwh(self) -> float:
        return self.hourly_offtake_gwh * HOURS_PER_YEAR

    def series(self) -> np.ndarray:
        return np.full(self.horizon_hours, self.hourly_offtake_gwh)


@dataclass
class SystemModel:
    """Assembled LP: variable registry, constraint triplets, objective.

    Not mutated after build_model returns. `capacity_components` maps each
    cost component to its capacity variable indices and annual cost
    coefficients (MEUR/yr per GW or GWh).
    """

    var_names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    obj: np.ndarray  # MEUR/yr per unit
    eq_rows: np.ndarray
    eq_cols: np.ndarray
    eq_vals: np.ndarray
    eq_rhs: np.ndarray
    eq_names: list[str]
    ub_rows: np.ndarray
    ub_cols: np.ndarray
    ub_vals: np.ndarray
    ub_rhs: np.ndarray
    ub_names: list[str]
    capacity_components: dict[str, list[tuple[int, float]]]
    clusters: tuple[ClusterPotential, ...]
    graph: RegionGraph
    te: TechnoEconomics  # overrides already applied
    cfg: ScenarioConfig
    demand: DemandProfile
    cf_matrix: np.ndarray = field(repr=False)  # clusters x T, as used in the model

    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {name: i for i, name in enumerate(self.var_names)}

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_eq(self) -> int:
        return len(self.eq_rhs)

    @property
    def n_ub(self) -> int:
        return len(self.ub_rhs)

    @property
    def nnz(self) -> int:
        return len(self.eq_vals) + len(self.ub_vals)

    @property
    def horizon(self) -> int:
        return self.demand.horizon_hours

    @property
    def annual_export_kwh(self) -> float:
        return self.demand.annual_export_gwh * KW_PER_GW

    def var_index(self, name: str) -> int:
        return self._index[name]

    def matrices(self):
        """(c, A_eq, b_eq, A_ub, b_ub, bounds) in scipy sparse form."""
        n = self.n_vars
        a_eq = sp.csr_matrix(
            (self.eq_vals, (self.eq_rows, self.eq_cols)), shape=(self.n_eq, n)
        )
        a_ub = sp.csr_matrix(
            (self.ub_vals, (self.ub_rows, self.ub_cols)), shape=(self.n_ub, n)
        )
        bounds = np.column_stack([self.lb, self.ub])
        return self.obj, a_eq, self.eq_rhs, a_ub, self.ub_rhs, bounds

    def dump(self, path: str | Path) -> None:
        """Sparse text dump for cross-checking with external LP tooling.

        Format: `VARS n` then `idx name lb ub obj` lines; `EQ m` / `UB m`
        then `name rhs idx:coef ...` lines. Inf bounds print as `inf`.
        """
        with open(path, "w") as fh:
            fh.write(f"VARS {self.n_vars}\n")
            for i, name in enumerate(self.var_names):
                fh.write(f"{i} {name} {self.lb[i]!r} {self.ub[i]!r} {self.obj[i]!r}\n")
            for label, rows, cols, vals, rhs, names in (
                ("EQ", self.eq_rows, self.eq_cols, self.eq_vals, self.eq_rhs, self.eq_names),
                ("UB", self.ub_rows, self.ub_cols, self.ub_vals, self.ub_rhs, self.ub_names),
            ):
                fh.write(f"{label} {len(rhs)}\n")
                terms: list[list[str]] = [[] for _ in rhs]
                for r, c, v in zip(rows, cols, vals):
                    terms[r].append(f"{c}:{v!r}")
                for r, name in enumerate(names):
                    fh.write(f"{name} {rhs[r]!r} " + " ".join(terms[r]) + "\n")


@dataclass(frozen=True)
class ModelStats:
    n_vars: int
    n_constraints: int
    n_eq: int
    n_ub: int
    nnz: int


def model_stats(model: SystemModel) -> ModelStats:
    """Deterministic size counts; see the module docstring for the formulas."""
    return ModelStats(
        n_vars=model.n_vars,
        n_constraints=model.n_eq + model.n_ub,
        n_eq=model.n_eq,
        n_ub=model.n_ub,
        nnz=model.nnz,
    )


class _Builder:
    def __init__(self):
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.obj: list[float] = []
        self.eq = ([], [], [], [], [])  # rows, cols, vals, rhs, names
        self.le = ([], [], [], [], [])

    def var(self, name: str, lb=0.0, ub=np.inf, obj=0.0) -> int:
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.obj.append(obj)
        return len(self.names) - 1

    def _row(self, store, name, terms, rhs):
        rows, cols, vals, rhss, names = store
        r = len(rhss)
        for c, v in terms:
            rows.append(r)
            cols.append(c)
            vals.append(v)
        rhss.append(rhs)
        names.append(name)

    def add_eq(self, name, terms, rhs=0.0):
        self._row(self.eq, name, terms, rhs)

    def add_le(self, name, terms, rhs=0.0):
        self._row(self.le, name, terms, rhs)


def _model_series(cluster: ClusterPotential, horizon: int) -> np.ndarray:
    series = cluster.cf_series
    if len(series) == horizon:
        return np.asarray(series)
    return np.asarray(series[:horizon])


def scenario_demand(
    clusters: list[ClusterPotential], resolved_te: TechnoEconomics, cfg: ScenarioConfig
) -> DemandProfile:
    """Offtake implied by the export fraction of the window's maximum export.

    `resolved_te` must already carry the scenario's overrides; this is the
    single place the demand derivation lives, shared by the model builder
    and the solve loop.
    """
    if not clusters:
        raise ParameterError("scenario_demand requires at least one cluster")
    cfg.check_horizon(len(clusters[0].cf_series))
    horizon = cfg.horizon_hours
    window_el_gwh = sum(
        (c.capacity_bound_kw / KW_PER_GW) * float(np.sum(_model_series(c, horizon)))
        for c in clusters
    )
    window_max_gwh = max_export(window_el_gwh, resolved_te, cfg.year)
    return DemandProfile(cfg.export_fraction * window_max_gwh / horizon, horizon)


def build_model(
    clusters: list[ClusterPotential],
    graph: RegionGraph,
    te: TechnoEconomics,
    cfg: ScenarioConfig,
    liq_specific_capex: float,
) -> SystemModel:
    """Assemble the scenario LP.

    `liq_specific_capex` (EUR/kW_LHV) is fixed for this build; the
    size-dependent scaling is resolved by the solve loop. Demand is
    cfg.export_fraction of the maximum exportable hydrogen implied by the
    clusters' potential.
    """
    if not clusters:
        raise ParameterError("build_model requires at least one cluster")
    if liq_specific_capex <= 0:
        raise ParameterError("liq_specific_capex must be > 0")
    te = cfg.resolved_te(te)
    year = cfg.year
    T = cfg.horizon_hours

    lengths = {len(c.cf_series) for c in clusters}
    if len(lengths) != 1:
        raise ParameterError("all cluster series must have equal length")
    cfg.check_horizon(lengths.pop())

    clusters = tuple(sorted(clusters, key=lambda c: c.cluster_id))
    nodes = graph.region_ids()
    node_set = set(nodes)
    for c in clusters:
        if c.region_id not in node_set:
            raise ParameterError(f"cluster {c.cluster_id} region {c.region_id!r} not in graph")
    arcs = graph.sorted_arcs()
    harbor = graph.harbor_id

    cf = np.stack([_model_series(c, T) for c in clusters])

    demand = scenario_demand(list(clusters), te, cfg)
    window_max_gwh = max_export(
        sum((c.capacity_bound_kw / KW_PER_GW) * cf[i].sum() for i, c in enumerate(clusters)),
        te, year,
    )
    if demand.window_export_gwh > window_max_gwh * (1 + 1e-12):
        raise ParameterError("demand exceeds maximum exportable hydrogen")

    eta_pem = te.pem_efficiency[year]
    eta_chg = eta_dis = np.sqrt(te.battery_efficiency)
    liq_el = te.liq_el_demand
    arc_eff = {
        arc: arc_efficiency(graph.arcs[arc], te.grid_loss_per_1000km) for arc in arcs
    }

    b = _Builder()
    components: dict[str, list[tuple[int, float]]] = {
        "pv": [], "wind": [], "battery": [], "pem": [],
        "liquefaction": [], "lh2_tank": [], "elec_grid": [], "pipeline": [],
    }

    def cap_var(name, component, annual_meur_per_unit, ub=np.inf) -> int:
        idx = b.var(name, 0.0, ub, obj=annual_meur_per_unit)
        components[component].append((idx, annual_meur_per_unit))
        return idx

    # --- capacity variables -------------------------------------------------
    cap_cluster = {}
    for i, c in enumerate(clusters):
        coeff = te.annualized(c.technology, te.capex_res(c.technology, year))
        cap_cluster[i] = cap_var(
            f"cap:cluster:{c.cluster_id}", c.technology, coeff,
            ub=c.capacity_bound_kw / KW_PER_GW,
        )
    batt_coeff = te.annualized("battery", te.capex_battery[year])
    pem_coeff = te.annualized("pem", te.capex_pem[year])
    cap_batt = {n: cap_var(f"cap:battery:{n}", "battery", batt_coeff) for n in nodes}
    cap_pem = {n: cap_var(f"cap:pem:{n}", "pem", pem_coeff) for n in nodes}
    cap_liq = cap_var("cap:liq", "liquefaction", te.annualized("liquefaction", liq_specific_capex))
    cap_tank = cap_var("cap:tank", "lh2_tank", te.annualized("lh2_tank", te.capex_lh2_tank))
    cap_el, cap_pipe = {}, {}
    for arc in arcs:
        km = graph.arcs[arc]
        tag = f"{arc[0]}|{arc[1]}"
        cap_el[arc] = cap_var(
            f"cap:el:{tag}", "elec_grid", te.annualized("elec_grid", te.capex_elec_grid * km)
        )
        cap_pipe[arc] = cap_var(
            f"cap:pipe:{tag}", "pipeline", te.annualized("pipeline", te.capex_pipeline * km)
        )

    # --- operation variables ------------------------------------------------
    gen = np.empty((len(clusters), T), dtype=int)
    for i, c in enumerate(clusters):
        for t in range(T):
            gen[i, t] = b.var(f"gen:{c.cluster_id}:{t}")
    chg = {n: [b.var(f"chg:{n}:{t}") for t in range(T)] for n in nodes}
    dis = {n: [b.var(f"dis:{n}:{t}") for t in range(T)] for n in nodes}
    socb = {n: [b.var(f"socb:{n}:{t}") for t in range(T)] for n in nodes}
    pem_in = {n: [b.var(f"pem:{n}:{t}") for t in range(T)] for n in nodes}
    liq_in = [b.var(f"liq:{t}") for t in range(T)]
    tank_in = [b.var(f"tin:{t}") for t in range(T)]
    tank_out = [b.var(f"tout:{t}") for t in range(T)]
    soct = [b.var(f"soct:{t}") for t in range(T)]
    flow_el = {(arc, d): [b.var(f"fel:{arc[0]}|{arc[1]}:{d}:{t}") for t in range(T)]
               for arc in arcs for d in ("f", "b")}
    flow_pipe = {(arc, d): [b.var(f"fpi:{arc[0]}|{arc[1]}:{d}:{t}") for t in range(T)]
                 for arc in arcs for d in ("f", "b")}

    cluster_by_node: dict[str, list[int]] = {n: [] for n in nodes}
    for i, c in enumerate(clusters):
        cluster_by_node[c.region_id].append(i)

    # --- balances -------------------------------------------------------------
    for n in nodes:
        for t in range(T):
            terms = [(gen[i, t], 1.0) for i in cluster_by_node[n]]
            terms.append((dis[n][t], eta_dis))
            terms.append((chg[n][t], -1.0))
            terms.append((pem_in[n][t], -1.0))
            if n == harbor:
                terms.append((liq_in[t], -liq_el))
            for arc in arcs:
                a0, a1 = arc
                if a1 == n:
                    terms.append((flow_el[(arc, "f")][t], arc_eff[arc]))
                    terms.append((flow_el[(arc, "b")][t], -1.0))
                elif a0 == n:
                    terms.append((flow_el[(arc, "b")][t], arc_eff[arc]))
                    terms.append((flow_el[(arc, "f")][t], -1.0))
            b.add_eq(f"elbal:{n}:{t}", terms, 0.0)

    for n in nodes:
        for t in range(T):
            terms = [(pem_in[n][t], eta_pem)]
            if n == harbor:
                terms.append((liq_in[t], -1.0))
            for arc in arcs:
                a0, a1 = arc
                if a1 == n:
                    terms.append((flow_pipe[(arc, "f")][t], 1.0))
                    terms.append((flow_pipe[(arc, "b")][t], -1.0))
                elif a0 == n:
                    terms.append((flow_pipe[(arc, "b")][t], 1.0))
                    terms.append((flow_pipe[(arc, "f")][t], -1.0))
            b.add_eq(f"h2bal:{n}:{t}", terms, 0.0)

    # LH2 at the harbor: liquefier output (pass-through) feeds tank and offtake.
    for t in range(T):
        b.add_eq(
            f"lh2bal:{t}",
            [(liq_in[t], 1.0), (tank_in[t], -1.0), (tank_out[t], 1.0)],
            demand.hourly_offtake_gwh,
        )

    # Cyclic storage dynamics. Discharge is metered on the storage side: the
    # bus receives eta_dis * dis (see elbal), the state of charge drops by dis,
    # so the round trip works out to eta_chg * eta_dis.
    for n in nodes:
        for t in range(T):
            nxt = (t + 1) % T
            b.add_eq(
                f"socb:{n}:{t}",
                [
                    (socb[n][nxt], 1.0),
                    (socb[n][t], -1.0),
                    (chg[n][t], -eta_chg),
                    (dis[n][t], 1.0),
                ],
                0.0,
            )
    for t in range(T):
        nxt = (t + 1) % T
        b.add_eq(
            f"soct:{t}",
            [(soct[nxt], 1.0), (soct[t], -1.0), (tank_in[t], -1.0), (tank_out[t], 1.0)],
            0.0,
        )

    # --- capacity caps on operation -----------------------------------------
    for i, c in enumerate(clusters):
        for t in range(T):
            b.add_le(
                f"genmax:{c.cluster_id}:{t}",
                [(gen[i, t], 1.0), (cap_cluster[i], -float(cf[i, t]))],
                0.0,
            )
    for n in nodes:
        for t in range(T):
            b.add_le(f"chgmax:{n}:{t}", [(chg[n][t], 1.0), (cap_batt[n], -1.0)], 0.0)
            b.add_le(f"dismax:{n}:{t}", [(dis[n][t], 1.0), (cap_batt[n], -1.0)], 0.0)
            b.add_le(f"socbmax:{n}:{t}", [(socb[n][t], 1.0), (cap_batt[n], -1.0)], 0.0)
            b.add_le(f"pemmax:{n}:{t}", [(pem_in[n][t], 1.0), (cap_pem[n], -1.0)], 0.0)
    for t in range(T):
        b.add_le(f"liqmax:{t}", [(liq_in[t], 1.0), (cap_liq, -1.0)], 0.0)
        b.add_le(f"tinmax:{t}", [(tank_in[t], 1.0), (cap_tank, -1.0)], 0.0)
        b.add_le(f"toutmax:{t}", [(tank_out[t], 1.0), (cap_tank, -1.0)], 0.0)
        b.add_le(f"soctmax:{t}", [(soct[t], 1.0), (cap_tank, -1.0)], 0.0)
    for arc in arcs:
        tag = f"{arc[0]}|{arc[1]}"
        for d in ("f", "b"):
            for t in range(T):
                b.add_le(f"felmax:{tag}:{d}:{t}", [(flow_el[(arc, d)][t], 1.0), (cap_el[arc], -1.0)], 0.0)
                b.add_le(f"fpimax:{tag}:{d}:{t}", [(flow_pipe[(arc, d)][t], 1.0), (cap_pipe[arc], -1.0)], 0.0)

    return SystemModel(
        var_names=b.names,
        lb=np.array(b.lb),
        ub=np.array(b.ub),
        obj=np.array(b.obj),
        eq_rows=np.array(b.eq[0], dtype=int),
        eq_cols=np.array(b.eq[1], dtype=int),
        eq_vals=np.array(b.eq[2]),
        eq_rhs=np.array(b.eq[3]),
        eq_names=b.eq[4],
        ub_rows=np.array(b.le[0], dtype=int),
        ub_cols=np.array(b.le[1], dtype=int),
        ub_vals=np.array(b.le[2]),
        ub_rhs=np.array(b.le[3]),
        ub_names=b.le[4],
        capacity_components=components,
        clusters=clusters,
        graph=graph,
        te=te,
        cfg=cfg,
        demand=demand,
        cf_matrix=cf,
    )
