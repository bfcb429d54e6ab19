"""Core typed parameters: supported years, techno-economics, scenario config.

Units follow the parameter tables: capex in EUR/kW (power technologies) or
EUR/kWh (storage), grid capex in MEUR/km/GW, opex as fraction of capex per
year. Annualization uses a single interest rate over each technology's
lifetime. All EUR values are real terms; no inflation modeling.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

from .errors import ParameterError

HOURS_PER_YEAR = 8760

# Technology keys used for opex/lifetime tables and cost decompositions.
TECHNOLOGIES = (
    "pv",
    "wind",
    "battery",
    "lh2_tank",
    "pem",
    "liquefaction",
    "elec_grid",
    "pipeline",
    "local_grid",
)


class Year(enum.IntEnum):
    """Supported scenario years; constructing any other year raises ValueError."""

    Y2020 = 2020
    Y2030 = 2030
    Y2040 = 2040
    Y2050 = 2050


def annuity_factor(rate: float, lifetime: float) -> float:
    """Capital recovery factor: r / (1 - (1+r)^-n).

    Multiplied by capex this gives the annualized capital cost. Decreases
    monotonically in lifetime towards r.
    """
    if rate <= 0:
        raise ParameterError(f"interest rate must be > 0, got {rate}")
    if lifetime < 1:
        raise ParameterError(f"lifetime must be >= 1 year, got {lifetime}")
    return rate / (1.0 - (1.0 + rate) ** (-lifetime))


def annual_cost(capex: float, opex_frac: float, rate: float, lifetime: float) -> float:
    """Total annual cost of one capex unit: annuity plus fixed opex share."""
    if capex < 0:
        raise ParameterError(f"capex must be >= 0, got {capex}")
    return capex * (annuity_factor(rate, lifetime) + opex_frac)


def _year_map(values: Mapping) -> dict[Year, float]:
    return {Year(int(k)): float(v) for k, v in values.items()}


@dataclass(frozen=True)
class TechnoEconomics:
    """Per-technology cost, efficiency and lifetime parameters.

    Immutable after construction; safe to share across parallel scenario
    evaluations. Defaults() returns the documented parameter set.
    """

    capex_pv: Mapping[Year, float]  # EUR/kW_el
    capex_wind: Mapping[Year, float]  # EUR/kW_el
    capex_battery: Mapping[Year, float]  # EUR/kWh
    capex_pem: Mapping[Year, float]  # EUR/kW_el input
    pem_efficiency: Mapping[Year, float]  # fraction, LHV basis
    capex_lh2_tank: float = 0.85  # EUR/kWh_LHV, year-independent
    liq_capex_coeff: float = 610.0  # MEUR for a 1 GW_LHV plant
    liq_capex_exponent: float = 0.66  # total capex ~ size^0.66
    liq_max_size_tpd: float = 20000.0  # largest single train, t/d
    liq_el_demand: float = 0.205  # kWh_el per kWh_H2,LHV
    capex_elec_grid: float = 0.9  # MEUR/km/GW
    capex_pipeline: float = 0.185  # MEUR/km/GW
    capex_local_grid: float = 0.45  # MEUR/km (500 MVA line)
    opex_frac: Mapping[str, float] = field(default_factory=dict)  # fraction/yr
    lifetime_years: Mapping[str, float] = field(default_factory=dict)
    battery_efficiency: float = 0.95  # round-trip; split sqrt/sqrt on charge/discharge
    grid_loss_per_1000km: float = 0.01  # electric arcs only
    interest_rate: float = 0.08
    lhv_h2: float = 33.33  # kWh/kg
    detour_factor: float = 1.3

    def __post_init__(self):
        for name in ("capex_pv", "capex_wind", "capex_battery", "capex_pem"):
            table = getattr(self, name)
            if set(table) != set(Year):
                raise ParameterError(f"{name} must cover exactly the supported years")
            if any(v <= 0 for v in table.values()):
                raise ParameterError(f"{name} values must be strictly positive")
        if set(self.pem_efficiency) != set(Year):
            raise ParameterError("pem_efficiency must cover exactly the supported years")
        for y, eta in self.pem_efficiency.items():
            if not 0 < eta <= 1:
                raise ParameterError(f"pem_efficiency[{int(y)}] must be in (0,1]")
        if not 0 < self.battery_efficiency <= 1:
            raise ParameterError("battery_efficiency must be in (0,1]")
        if not 0 < self.interest_rate < 1:
            raise ParameterError("interest_rate must be in (0,1)")
        for scalar in (
            "capex_lh2_tank",
            "liq_capex_coeff",
            "liq_max_size_tpd",
            "capex_elec_grid",
            "capex_pipeline",
            "capex_local_grid",
            "lhv_h2",
            "detour_factor",
        ):
            if getattr(self, scalar) <= 0:
                raise ParameterError(f"{scalar} must be strictly positive")
        missing = set(TECHNOLOGIES) - set(self.opex_frac)
        if missing:
            raise ParameterError(f"opex_frac missing technologies: {sorted(missing)}")
        missing = set(TECHNOLOGIES) - set(self.lifetime_years)
        if missing:
            raise ParameterError(f"lifetime_years missing technologies: {sorted(missing)}")
        if any(v < 0 for v in self.opex_frac.values()):
            raise ParameterError("opex fractions must be >= 0")
        if any(v < 1 for v in self.lifetime_years.values()):
            raise ParameterError("lifetimes must be >= 1 year")
        years = sorted(Year)
        for i in range(len(years) - 1):
            a, b = years[i], years[i + 1]
            if self.pem_efficiency[b] < self.pem_efficiency[a]:
                raise ParameterError("pem_efficiency must be nondecreasing over years")
            for name in ("capex_pv", "capex_wind", "capex_battery", "capex_pem"):
                table = getattr(self, name)
                if table[b] > table[a]:
                    raise ParameterError(f"{name} must be nonincreasing over years")

    @classmethod
    def default(cls) -> "TechnoEconomics":
        """Documented default parameter set."""
        return cls(
            capex_pv=_year_map({2020: 703, 2030: 395, 2040: 340, 2050: 326}),
            capex_wind=_year_map({2020: 1257, 2030: 1137, 2040: 987, 2050: 923}),
            capex_battery=_year_map({2020: 277, 2030: 147, 2040: 124, 2050: 102}),
            capex_pem=_year_map({2020: 900, 2030: 700, 2040: 575, 2050: 450}),
            pem_efficiency=_year_map({2020: 0.64, 2030: 0.69, 2040: 0.72, 2050: 0.74}),
            opex_frac={
                "pv": 0.01,
                "wind": 0.03,
                "battery": 0.025,
                "lh2_tank": 0.02,
                "pem": 0.015,
                "liquefaction": 0.015,
                "elec_grid": 0.015,
                "pipeline": 0.02,
                "local_grid": 0.02,
            },
            lifetime_years={
                "pv": 25,
                "wind": 25,
                "battery": 15,
                "lh2_tank": 20,
                "pem": 19,
                "liquefaction": 20,
                "elec_grid": 60,
                "pipeline": 40,
                "local_grid": 60,
            },
        )

    def capex_res(self, tech: str, year: Year) -> float:
        """Renewable capex lookup, EUR/kW."""
        if tech == "pv":
            return self.capex_pv[year]
        if tech == "wind":
            return self.capex_wind[year]
        raise ParameterError(f"unknown RES technology {tech!r}")

    def annualized(self, tech: str, capex: float) -> float:
        """Annual cost of `capex` for a technology, using its opex and lifetime."""
        return annual_cost(
            capex, self.opex_frac[tech], self.interest_rate, self.lifetime_years[tech]
        )

    def with_overrides(self, factors: Mapping[str, float] | None) -> "TechnoEconomics":
        """Return a copy with multiplicative factors applied to named fields.

        Year-indexed tables scale uniformly across years. Factors must be
        strictly positive.
        """
        if not factors:
            return self
        known = {f.name for f in fields(self)}
        changes = {}
        for name, factor in factors.items():
            if name not in known:
                raise ParameterError(f"unknown techno-economic field {name!r}")
            if not factor > 0:
                raise ParameterError(f"override factor for {name!r} must be > 0")
            current = getattr(self, name)
            if isinstance(current, Mapping):
                changes[name] = {k: v * factor for k, v in current.items()}
            else:
                changes[name] = current * factor
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Mapping):
                key0 = next(iter(value), None)
                if isinstance(key0, Year):
                    out[f.name] = {str(int(k)): v for k, v in sorted(value.items())}
                else:
                    out[f.name] = {k: value[k] for k in sorted(value)}
            else:
                out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "TechnoEconomics":
        kwargs = {}
        year_tables = {"capex_pv", "capex_wind", "capex_battery", "capex_pem", "pem_efficiency"}
        known = {f.name for f in fields(cls)}
        for name, value in data.items():
            if name not in known:
                raise ParameterError(f"unknown techno-economic field {name!r}")
            kwargs[name] = _year_map(value) if name in year_tables else value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "TechnoEconomics":
        """Load parameters from JSON, deep-merged onto the defaults."""
        with open(path) as fh:
            overrides = json.load(fh)
        base = cls.default().to_dict()
        for name, value in overrides.items():
            if isinstance(value, dict) and isinstance(base.get(name), dict):
                base[name] = {**base[name], **value}
            else:
                base[name] = value
        return cls.from_dict(base)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# liq_size_cap_tpd accepts exactly these (inf = unbounded scaling).
LIQ_SIZE_VARIANTS = (700.0, 20000.0, float("inf"))


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario: country, year, export level and optional perturbations."""

    country_id: str
    year: Year
    export_fraction: float  # of maximum exportable hydrogen, (0, 0.95]
    horizon_hours: int = HOURS_PER_YEAR
    overrides: Mapping[str, float] | None = None  # multiplicative factors
    liq_size_cap_tpd: float | None = None  # None -> techno-economics default

    def __post_init__(self):
        if not self.country_id:
            raise ParameterError("country_id must be nonempty")
        if not isinstance(self.year, Year):
            object.__setattr__(self, "year", Year(int(self.year)))
        if not 0 < self.export_fraction <= 0.95:
            raise ParameterError(
                f"export_fraction must be in (0, 0.95], got {self.export_fraction}"
            )
        if self.horizon_hours < 1:
            raise ParameterError("horizon_hours must be >= 1")
        if self.overrides:
            for name, factor in self.overrides.items():
                if not factor > 0:
                    raise ParameterError(f"override factor for {name!r} must be > 0")
        if self.liq_size_cap_tpd is not None and self.liq_size_cap_tpd not in LIQ_SIZE_VARIANTS:
            raise ParameterError(
                f"liq_size_cap_tpd must be one of {LIQ_SIZE_VARIANTS}, got {self.liq_size_cap_tpd}"
            )

    def check_horizon(self, series_length: int) -> None:
        """The horizon must equal or divide the capacity-factor series length."""
        if self.horizon_hours != series_length and series_length % self.horizon_hours != 0:
            raise ParameterError(
                f"horizon {self.horizon_hours} h neither equals nor divides "
                f"series length {series_length}"
            )

    def resolved_te(self, te: TechnoEconomics) -> TechnoEconomics:
        """Techno-economics with this scenario's overrides applied."""
        return te.with_overrides(self.overrides)
