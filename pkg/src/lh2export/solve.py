"""LP solution driver with fixed-point liquefaction economy-of-scale sizing.

The liquefier's specific capex falls with plant size (power law, clamped at
the largest single train; beyond that, extra trains scale linearly). That
nonlinearity stays out of the LP: each iterate solves a pure LP at a fixed
specific capex, then re-prices at the resulting optimal liquefier size until
the size stops moving.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .datamodel import ScenarioConfig, TechnoEconomics
from .errors import ParameterError, ScenarioError
from .esm import KW_PER_GW, SystemModel, build_model, scenario_demand
from .network import RegionGraph
from .potentials import ClusterPotential

FIXED_POINT_TOL = 1e-3
MAX_FIXED_POINT_ITER = 20

_STATUS = {0: "optimal", 1: "suboptimal", 2: "infeasible", 3: "unbounded", 4: "suboptimal"}


def tpd_to_gw(tons_per_day: float, lhv_kwh_per_kg: float) -> float:
    """Convert a liquefier size in t/d to GW_LHV throughput."""
    return tons_per_day * 1000.0 * lhv_kwh_per_kg / 24.0 / KW_PER_GW


def liq_specific_capex(
    plant_size_gw: float, te: TechnoEconomics, cap_tpd: float | None = None
) -> float:
    """Size-dependent liquefaction capex, EUR/kW_LHV.

    Power law below the maximum train size; at and above it the specific
    capex is frozen at the capped value (multiple maximum-size trains).
    """
    if plant_size_gw <= 0:
        raise ParameterError("liquefaction plant size must be > 0")
    cap = te.liq_max_size_tpd if cap_tpd is None else cap_tpd
    size = plant_size_gw
    if math.isfinite(cap):
        size = min(size, tpd_to_gw(cap, te.lhv_h2))
    return te.liq_capex_coeff * size ** (te.liq_capex_exponent - 1.0)


@dataclass
class Solution:
    """Solved scenario LP: objective, capacities, hourly operation, status."""

    status: str  # optimal | suboptimal | infeasible | unbounded
    objective_eur: float  # EUR/yr, TAC of the optimized system
    x: np.ndarray = field(repr=False)
    capacities: dict[str, float]  # capacity variable name -> GW or GWh
    cost_by_component_eur: dict[str, float]  # EUR/yr per cost component
    curtailment: float
    duals_eq: np.ndarray | None = field(default=None, repr=False)

    def capacity(self, name: str) -> float:
        return self.capacities.get(name, 0.0)


def _curtailment(model: SystemModel, x: np.ndarray) -> float:
    available = 0.0
    used = 0.0
    for i, c in enumerate(model.clusters):
        cap = x[model.var_index(f"cap:cluster:{c.cluster_id}")]
        available += cap * float(model.cf_matrix[i].sum())
        for t in range(model.horizon):
            used += x[model.var_index(f"gen:{c.cluster_id}:{t}")]
    if available <= 1e-12:
        return 0.0
    return min(1.0, max(0.0, 1.0 - used / available))


def solve_model(model: SystemModel, solver_options: dict | None = None) -> Solution:
    """Solve the assembled LP with HiGHS; deterministic for identical input.

    `solver_options` pass through to the solver (e.g. presolve, time_limit,
    primal_feasibility_tolerance).
    """
    c, a_eq, b_eq, a_ub, b_ub, bounds = model.matrices()
    res = linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
        method="highs", options=solver_options,
    )
    if res.status == 4:
        # HiGHS presolve occasionally reports infeasible models as "unknown";
        # the presolve-free solve gives a definitive verdict.
        res = linprog(
            c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
            method="highs", options={**(solver_options or {}), "presolve": False},
        )
    status = _STATUS.get(res.status, "suboptimal")
    if res.x is None:
        return Solution(
            status=status,
            objective_eur=float("nan"),
            x=np.array([]),
            capacities={},
            cost_by_component_eur={},
            curtailment=0.0,
        )
    x = np.asarray(res.x)
    capacities = {
        name: float(x[i])
        for i, name in enumerate(model.var_names)
        if name.startswith("cap:")
    }
    costs = {
        comp: sum(coeff * x[idx] for idx, coeff in entries) * 1e6
        for comp, entries in model.capacity_components.items()
    }
    duals = getattr(res, "eqlin", None)
    return Solution(
        status=status,
        objective_eur=float(res.fun) * 1e6,
        x=x,
        capacities=capacities,
        cost_by_component_eur=costs,
        curtailment=_curtailment(model, x),
        duals_eq=None if duals is None else np.asarray(duals.marginals),
    )


@dataclass
class ScenarioOutcome:
    """Result of the fixed-point solve for one scenario."""

    solution: Solution
    model: SystemModel
    liq_size_gw: float
    liq_specific_capex_eur_per_kw: float
    iterations: int
    converged: bool

    @property
    def annual_export_kwh(self) -> float:
        return self.model.annual_export_kwh


def _initial_liq_size(
    clusters: list[ClusterPotential], resolved_te: TechnoEconomics, cfg: ScenarioConfig
) -> float:
    """Demand-implied average throughput, GW_LHV."""
    return scenario_demand(clusters, resolved_te, cfg).hourly_offtake_gwh


def solve_scenario(
    clusters: list[ClusterPotential],
    graph: RegionGraph,
    te: TechnoEconomics,
    cfg: ScenarioConfig,
    solver_options: dict | None = None,
) -> ScenarioOutcome:
    """Solve one scenario, iterating the liquefier size to its fixed point.

    Stops when the size moves by less than FIXED_POINT_TOL relative, or after
    MAX_FIXED_POINT_ITER iterations (then the best-cost iterate is returned,
    flagged non-converged). An infeasible LP raises ScenarioError; a merely
    suboptimal solve is returned flagged so callers can drop it from curves.
    """
    te_r = cfg.resolved_te(te)
    cap_tpd = cfg.liq_size_cap_tpd if cfg.liq_size_cap_tpd is not None else te_r.liq_max_size_tpd

    size = _initial_liq_size(clusters, te_r, cfg)
    if size <= 0:
        raise ScenarioError("scenario has zero demand-implied throughput")

    best: ScenarioOutcome | None = None
    for iteration in range(1, MAX_FIXED_POINT_ITER + 1):
        spec_capex = liq_specific_capex(size, te_r, cap_tpd)
        model = build_model(clusters, graph, te, cfg, spec_capex)
        sol = solve_model(model, solver_options)
        if sol.status == "infeasible":
            raise ScenarioError(
                f"scenario {cfg.country_id}/{int(cfg.year)}/f={cfg.export_fraction:.4f} "
                "is infeasible",
                diagnostics={"iteration": iteration, "liq_size_gw": size},
            )
        if sol.status not in ("optimal", "suboptimal"):
            raise ScenarioError(
                f"solver returned {sol.status}",
                diagnostics={"iteration": iteration, "liq_size_gw": size},
            )
        new_size = sol.capacity("cap:liq")
        outcome = ScenarioOutcome(
            solution=sol,
            model=model,
            liq_size_gw=new_size,
            liq_specific_capex_eur_per_kw=spec_capex,
            iterations=iteration,
            converged=False,
        )
        if best is None or sol.objective_eur < best.solution.objective_eur:
            best = outcome
        if new_size <= 0 or abs(new_size - size) / max(size, 1e-12) < FIXED_POINT_TOL:
            outcome.converged = True
            return outcome
        size = new_size
    return best


def dump_solution(model: SystemModel, solution: Solution, prefix) -> tuple[Path, Path]:
    """Write `<prefix>_capacities.csv` and `<prefix>_operations.csv.gz`.

    The capacities file holds one `name,value` row per capacity variable.
    The operations file is a gzip CSV with one column per hour-indexed
    variable family (e.g. `gen:R1:pv:top5`) and one row per hour. Output
    bytes are deterministic (fixed gzip mtime).
    """
    prefix = Path(prefix)
    cap_path = prefix.parent / (prefix.name + "_capacities.csv")
    ops_path = prefix.parent / (prefix.name + "_operations.csv.gz")

    with open(cap_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "value"])
        for name in sorted(solution.capacities):
            writer.writerow([name, repr(solution.capacities[name])])

    series: dict[str, np.ndarray] = {}
    horizon = model.horizon
    for i, name in enumerate(model.var_names):
        stem, _, suffix = name.rpartition(":")
        if not stem or not suffix.isdigit():
            continue
        arr = series.setdefault(stem, np.zeros(horizon))
        arr[int(suffix)] = solution.x[i]
    stems = sorted(series)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["hour"] + stems)
    for t in range(horizon):
        writer.writerow([t] + [repr(float(series[s][t])) for s in stems])
    with open(ops_path, "wb") as fh:
        with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
            gz.write(buf.getvalue().encode())
    return cap_path, ops_path


@dataclass
class VerifyReport:
    """Constraint residuals and objective cross-check for a solved model."""

    max_eq_residual: float
    max_ub_violation: float
    max_bound_violation: float
    worst_eq_name: str
    worst_ub_name: str
    objective_recomputed_eur: float
    objective_mismatch_rel: float
    ok: bool
    tolerance: float


def verify_solution(model: SystemModel, solution: Solution, tol: float = 1e-6) -> VerifyReport:
    """Recompute every residual and the objective from the raw solution."""
    if solution.status != "optimal":
        raise ParameterError("verify_solution requires an optimal solution")
    c, a_eq, b_eq, a_ub, b_ub, bounds = model.matrices()
    x = solution.x

    eq_resid = np.abs(a_eq @ x - b_eq) / np.maximum(1.0, np.abs(b_eq))
    worst_eq = int(np.argmax(eq_resid)) if len(eq_resid) else 0
    ub_viol = (a_ub @ x - b_ub) / np.maximum(1.0, np.abs(b_ub))
    ub_viol = np.maximum(ub_viol, 0.0)
    worst_ub = int(np.argmax(ub_viol)) if len(ub_viol) else 0

    lo = np.where(np.isfinite(bounds[:, 0]), bounds[:, 0] - x, -np.inf)
    hi = np.where(np.isfinite(bounds[:, 1]), x - bounds[:, 1], -np.inf)
    bound_viol = np.maximum(np.maximum(lo, hi), 0.0) / np.maximum(1.0, np.abs(x))

    obj = float(c @ x) * 1e6
    mismatch = abs(obj - solution.objective_eur) / max(1.0, abs(solution.objective_eur))

    max_eq = float(eq_resid.max()) if len(eq_resid) else 0.0
    max_ub = float(ub_viol.max()) if len(ub_viol) else 0.0
    max_bd = float(bound_viol.max()) if len(bound_viol) else 0.0
    return VerifyReport(
        max_eq_residual=max_eq,
        max_ub_violation=max_ub,
        max_bound_violation=max_bd,
        worst_eq_name=model.eq_names[worst_eq] if len(eq_resid) else "",
        worst_ub_name=model.ub_names[worst_ub] if len(ub_viol) else "",
        objective_recomputed_eur=obj,
        objective_mismatch_rel=mismatch,
        ok=max(max_eq, max_ub, max_bd) <= tol and mismatch <= tol,
        tolerance=tol,
    )
