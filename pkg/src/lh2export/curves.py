"""Cost-potential curves, sensitivity sweeps, attribute-sorted supply curves.

A country/year curve holds nine export levels evenly spaced up to 95% of the
maximum exportable hydrogen, each with its absolute (not marginal) cost per
kg. Curves pool into cumulative supply curves per political-regime or
water-stress class, and a one-at-a-time investment sensitivity reports the
average cost impact per technology.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace as dc_replace
from typing import Mapping, Sequence

import numpy as np

from .datamodel import ScenarioConfig, TechnoEconomics, Year
from .errors import ParameterError, ScenarioError
from .network import RegionGraph
from .postproc import ExportCostResult
from .potentials import ClusterPotential
from . import solve as solve_mod

log = logging.getLogger(__name__)

N_EXPORT_LEVELS = 9
CURVE_CAP_FRACTION = 0.95

REGIME_CLASSES = (
    "working democracy",
    "deficient democracy",
    "hybrid",
    "moderate autocracy",
    "hard autocracy",
)
WATER_STRESS_CLASSES = ("low", "low-medium", "medium-high", "high", "extreme")

WATER_LITERS_PER_KG = 9.0


def export_levels(max_export: float) -> list[float]:
    """Nine evenly spaced export amounts up to 95% of the maximum."""
    if max_export <= 0:
        raise ParameterError("max_export must be > 0")
    top = CURVE_CAP_FRACTION * max_export
    return [k * top / N_EXPORT_LEVELS for k in range(1, N_EXPORT_LEVELS + 1)]


def export_fractions() -> list[float]:
    """The export levels as fractions of the maximum."""
    return [k * CURVE_CAP_FRACTION / N_EXPORT_LEVELS for k in range(1, N_EXPORT_LEVELS + 1)]


@dataclass(frozen=True)
class CurvePoint:
    export_kwh: float
    cost_eur_per_kg: float
    result: ExportCostResult


@dataclass(frozen=True)
class CostPotentialCurve:
    country_id: str
    year: Year
    points: tuple[CurvePoint, ...]
    max_export_kwh: float

    def __post_init__(self):
        exports = [p.export_kwh for p in self.points]
        if any(b <= a for a, b in zip(exports, exports[1:])):
            raise ParameterError("curve points must be strictly increasing in export")
        if exports and exports[-1] > CURVE_CAP_FRACTION * self.max_export_kwh * (1 + 1e-9):
            raise ParameterError("curve exceeds 95% of the maximum export")


@dataclass(frozen=True)
class ScenarioRecord:
    """One solved export level, as fed into curve assembly."""

    status: str  # optimal | suboptimal | infeasible | error
    export_kwh: float
    result: ExportCostResult | None


def build_curve(
    country_id: str,
    year: Year,
    records: Sequence[ScenarioRecord],
    max_export_kwh: float,
) -> CostPotentialCurve:
    """Assemble a curve from scenario records, dropping non-optimal runs."""
    kept = []
    for rec in records:
        if rec.status == "optimal" and rec.result is not None:
            kept.append(rec)
        else:
            log.warning(
                "dropping %s/%s point at %.4g kWh: status=%s",
                country_id, int(year), rec.export_kwh, rec.status,
            )
    if not kept:
        raise ScenarioError(f"no optimal scenarios for {country_id}/{int(year)}")
    kept.sort(key=lambda r: r.export_kwh)
    points = tuple(
        CurvePoint(r.export_kwh, r.result.c_h2_eur_per_kg, r.result) for r in kept
    )
    return CostPotentialCurve(country_id, year, points, max_export_kwh)


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------

CAPEX_FIELD = {"pv": "capex_pv", "wind": "capex_wind", "pem": "capex_pem"}


@dataclass(frozen=True)
class SensitivityRow:
    variant_id: str
    technology: str
    cost_eur_per_kg: float
    rel_change: float
    status: str


@dataclass(frozen=True)
class SensitivityTable:
    reference_cost: float
    rows: tuple[SensitivityRow, ...]
    average_impact: Mapping[str, float]  # technology -> mean |rel change|


def _scenario_cost(
    clusters, graph, te, cfg: ScenarioConfig
) -> tuple[float, str]:
    """Energy-system cost per exported kg for one scenario (no local grid)."""
    outcome = solve_mod.solve_scenario(clusters, graph, te, cfg)
    sol = outcome.solution
    if sol.status != "optimal":
        return float("nan"), sol.status
    exported_kg = outcome.annual_export_kwh / outcome.model.te.lhv_h2
    return sol.objective_eur / exported_kg, "optimal"


def sensitivity_sweep(
    clusters: list[ClusterPotential],
    graph: RegionGraph,
    te: TechnoEconomics,
    base_cfg: ScenarioConfig,
    capex_factors: Sequence[float] = (0.7, 1.3),
    liq_variants: Sequence[float] = (700.0, float("inf")),
) -> SensitivityTable:
    """One-at-a-time investment sensitivity around a reference scenario.

    PV, wind and PEM capex scale by the given factors; liquefaction swaps
    its plant-size cap. The per-technology average impact is the mean of
    |cost - reference| / reference over that technology's variants.
    Infeasible variants are recorded, not fatal.
    """
    ref_cost, ref_status = _scenario_cost(clusters, graph, te, base_cfg)
    if ref_status != "optimal":
        raise ScenarioError(f"sensitivity reference scenario is {ref_status}")

    rows: list[SensitivityRow] = []
    for tech in ("pv", "wind", "pem"):
        for factor in capex_factors:
            overrides = dict(base_cfg.overrides or {})
            overrides[CAPEX_FIELD[tech]] = overrides.get(CAPEX_FIELD[tech], 1.0) * factor
            cfg = dc_replace(base_cfg, overrides=overrides)
            try:
                cost, status = _scenario_cost(clusters, graph, te, cfg)
            except ScenarioError as exc:
                log.warning("sensitivity variant %s x%.2f failed: %s", tech, factor, exc)
                cost, status = float("nan"), "error"
            rel = (cost - ref_cost) / ref_cost if status == "optimal" else float("nan")
            rows.append(SensitivityRow(f"{tech}_x{factor:g}", tech, cost, rel, status))
    for cap in liq_variants:
        cfg = dc_replace(base_cfg, liq_size_cap_tpd=cap)
        try:
            cost, status = _scenario_cost(clusters, graph, te, cfg)
        except ScenarioError as exc:
            log.warning("sensitivity liquefaction cap %s failed: %s", cap, exc)
            cost, status = float("nan"), "error"
        rel = (cost - ref_cost) / ref_cost if status == "optimal" else float("nan")
        label = "unlimited" if not np.isfinite(cap) else f"cap{cap:g}tpd"
        rows.append(SensitivityRow(f"liquefaction_{label}", "liquefaction", cost, rel, status))

    impacts = {}
    for tech in ("pv", "wind", "pem", "liquefaction"):
        rels = [abs(r.rel_change) for r in rows if r.technology == tech and r.status == "optimal"]
        impacts[tech] = float(np.mean(rels)) if rels else float("nan")
    return SensitivityTable(
        reference_cost=ref_cost, rows=tuple(rows), average_impact=impacts
    )


# ---------------------------------------------------------------------------
# Attribute-sorted cumulative supply curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountryAttributes:
    country_id: str
    regime_class: str
    water_stress_class: str

    def __post_init__(self):
        if self.regime_class not in REGIME_CLASSES:
            raise ParameterError(f"unknown regime class {self.regime_class!r}")
        if self.water_stress_class not in WATER_STRESS_CLASSES:
            raise ParameterError(f"unknown water stress class {self.water_stress_class!r}")


@dataclass(frozen=True)
class StepCurve:
    """Cost-sorted cumulative supply steps."""

    cumulative_kwh: np.ndarray
    cost_eur_per_kg: np.ndarray

    @property
    def total_kwh(self) -> float:
        return float(self.cumulative_kwh[-1]) if len(self.cumulative_kwh) else 0.0

    def cost_at(self, quantity_kwh: float) -> float:
        """Cost of the step that supplies cumulative quantity `quantity_kwh`."""
        if quantity_kwh <= 0:
            raise ParameterError("quantity must be > 0")
        if quantity_kwh > self.total_kwh * (1 + 1e-9):
            raise ParameterError("quantity beyond the curve's total supply")
        idx = int(np.searchsorted(self.cumulative_kwh, quantity_kwh, side="left"))
        idx = min(idx, len(self.cost_eur_per_kg) - 1)
        return float(self.cost_eur_per_kg[idx])


@dataclass(frozen=True)
class AttributeCurves:
    key: str  # "regime" or "water_stress"
    classes: Mapping[str, StepCurve]
    merged: StepCurve

    def premium(self, cls: str, quantity_kwh: float) -> float:
        """Relative cost premium of sourcing only from one class at a quantity."""
        return self.classes[cls].cost_at(quantity_kwh) / self.merged.cost_at(quantity_kwh) - 1.0


def _curve_increments(curve: CostPotentialCurve) -> list[tuple[float, float]]:
    """(cost, incremental quantity) pairs of a curve's points."""
    out = []
    prev = 0.0
    for p in curve.points:
        out.append((p.cost_eur_per_kg, p.export_kwh - prev))
        prev = p.export_kwh
    return out


def _step_curve(entries: list[tuple[float, float, str]]) -> StepCurve:
    entries = sorted(entries, key=lambda e: (e[0], e[2]))
    costs = np.array([e[0] for e in entries])
    qty = np.array([e[1] for e in entries])
    return StepCurve(cumulative_kwh=np.cumsum(qty), cost_eur_per_kg=costs)


def cumulative_by_attribute(
    curves: Sequence[CostPotentialCurve],
    attributes: Mapping[str, CountryAttributes],
    key: str,
) -> AttributeCurves:
    """Pool curve points into per-class cumulative supply curves.

    Within each class all points pool sorted ascending by cost, quantities
    accumulate; a merged all-class curve is built the same way. Countries
    without attributes are excluded with a warning.
    """
    if key == "regime":
        classes, attr = REGIME_CLASSES, lambda a: a.regime_class
    elif key == "water_stress":
        classes, attr = WATER_STRESS_CLASSES, lambda a: a.water_stress_class
    else:
        raise ParameterError(f"unknown attribute key {key!r}")

    per_class: dict[str, list[tuple[float, float, str]]] = {c: [] for c in classes}
    pooled: list[tuple[float, float, str]] = []
    for curve in curves:
        attrs = attributes.get(curve.country_id)
        if attrs is None:
            warnings.warn(
                f"country {curve.country_id!r} has no attributes; excluded from "
                f"{key} aggregation",
                stacklevel=2,
            )
            continue
        cls = attr(attrs)
        for cost, qty in _curve_increments(curve):
            entry = (cost, qty, curve.country_id)
            per_class[cls].append(entry)
            pooled.append(entry)
    return AttributeCurves(
        key=key,
        classes={c: _step_curve(entries) for c, entries in per_class.items() if entries},
        merged=_step_curve(pooled),
    )


def water_demand(exported_kg: float) -> float:
    """Water demand of electrolysis for an exported hydrogen mass, liters."""
    if exported_kg < 0:
        raise ParameterError("exported mass must be >= 0")
    return WATER_LITERS_PER_KG * exported_kg
