"""Command-line orchestration: cluster ingestion, scenario runs, reporting.

Subcommands:
    cluster      validate placements, build FLH clusters, write the cache
    run          solve the year x export-level matrix into a results dir
    sensitivity  run the +-30% capex / liquefaction-size variants
    report       emit deterministic CSV/JSON bundles from a results dir

Exit codes: 0 ok, 2 configuration or input error, 3 all scenarios failed.
All paths in a config file resolve against the workspace root (the config
file's directory unless --workspace or LH2EXPORT_WORKSPACE overrides it).
Outputs are byte-identical across reruns and across --jobs settings.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import curves as curves_mod
from . import postproc, solve as solve_mod
from .datamodel import ScenarioConfig, TechnoEconomics, Year
from .errors import ConfigError, InputError, ParameterError, ScenarioError
from .network import build_graph
from .potentials import (
    ClusterCache,
    cluster_all,
    load_cluster_cache,
    max_export,
    read_placements,
    save_cluster_cache,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_ALL_FAILED = 0, 2, 3
WORKSPACE_ENV = "LH2EXPORT_WORKSPACE"


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(obj) -> str:
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


def _json_default(value):
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    raise TypeError(f"not JSON serializable: {type(value)}")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _fmt(value) -> str:
    """Deterministic cell formatting: full-precision repr for floats."""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    country_id: str
    years: list[Year]
    horizon_hours: int
    cluster_cache: Path
    regions_csv: Path
    adjacency_csv: Path
    harbor: str | tuple[float, float]
    te_file: Path | None
    overrides: dict | None
    liq_size_cap_tpd: float | None
    export_fractions: list[float]
    solver_options: dict | None
    raw: dict

    @classmethod
    def load(cls, config_path: Path, workspace: Path | None) -> "RunConfig":
        try:
            with open(config_path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(
                f"config schema_version must be {SCHEMA_VERSION}, "
                f"got {raw.get('schema_version')!r}"
            )
        root = workspace or Path(os.environ.get(WORKSPACE_ENV, config_path.parent))
        missing = [k for k in ("country_id", "cluster_cache", "regions_csv",
                               "adjacency_csv", "harbor") if k not in raw]
        if missing:
            raise ConfigError(f"config missing keys: {missing}")
        try:
            years = [Year(int(y)) for y in raw.get("years", [2020, 2030, 2040, 2050])]
        except ValueError as exc:
            raise ConfigError(str(exc))
        harbor_spec = raw["harbor"]
        if isinstance(harbor_spec, dict) and "region_id" in harbor_spec:
            harbor = str(harbor_spec["region_id"])
        elif isinstance(harbor_spec, dict) and {"lat", "lon"} <= set(harbor_spec):
            harbor = (float(harbor_spec["lat"]), float(harbor_spec["lon"]))
        else:
            raise ConfigError("harbor must give region_id or lat/lon")
        fractions = raw.get("export_fractions") or curves_mod.export_fractions()
        if any(not 0 < f <= 0.95 for f in fractions):
            raise ConfigError("export_fractions must lie in (0, 0.95]")
        cap = raw.get("liq_size_cap_tpd")
        return cls(
            country_id=str(raw["country_id"]),
            years=years,
            horizon_hours=int(raw.get("horizon_hours", 8760)),
            cluster_cache=root / raw["cluster_cache"],
            regions_csv=root / raw["regions_csv"],
            adjacency_csv=root / raw["adjacency_csv"],
            harbor=harbor,
            te_file=(root / raw["te_file"]) if raw.get("te_file") else None,
            overrides=raw.get("overrides"),
            liq_size_cap_tpd=float(cap) if cap is not None else None,
            export_fractions=[float(f) for f in fractions],
            solver_options=raw.get("solver_options"),
            raw=raw,
        )

    def input_digests(self) -> dict[str, str]:
        digests = {}
        for label, path in (
            ("cluster_cache", self.cluster_cache),
            ("regions_csv", self.regions_csv),
            ("adjacency_csv", self.adjacency_csv),
            ("te_file", self.te_file),
        ):
            if path is None:
                continue
            if not path.exists():
                raise ConfigError(f"input file missing: {path}")
            digests[label] = _sha256_file(path)
        return digests


def _read_regions(path: Path) -> dict[str, tuple[float, float]]:
    regions = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["region_id", "lat", "lon"]:
            raise InputError(f"{path}: expected header region_id,lat,lon")
        for rownum, row in enumerate(reader, start=2):
            rid = row["region_id"]
            if rid in regions:
                raise InputError(f"{path} row {rownum}: duplicate region {rid!r}")
            try:
                regions[rid] = (float(row["lat"]), float(row["lon"]))
            except ValueError as exc:
                raise InputError(f"{path} row {rownum}: {exc}")
    if not regions:
        raise InputError(f"{path}: no regions")
    return regions


def _read_adjacency(path: Path) -> list[tuple[str, str]]:
    arcs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["region_a", "region_b"]:
            raise InputError(f"{path}: expected header region_a,region_b")
        for row in reader:
            arcs.append((row["region_a"], row["region_b"]))
    return arcs


# ---------------------------------------------------------------------------
# cluster subcommand
# ---------------------------------------------------------------------------


def cmd_cluster(args) -> int:
    regions = _read_regions(Path(args.regions))
    placements = read_placements(Path(args.placements), Path(args.cf))
    for p in placements:
        if p.region_id not in regions:
            raise InputError(f"placement {p.id}: unknown region {p.region_id!r}")
    clusters = cluster_all(placements)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_cluster_cache(out, clusters, placements)
    groups: dict[tuple[str, str], list] = {}
    for c in clusters:
        groups.setdefault((c.region_id, c.technology), []).append(c)
    print(f"wrote {len(clusters)} clusters from {len(placements)} placements to {out}")
    for (region, tech), members in sorted(groups.items()):
        flhs = [c.flh for c in members]
        print(
            f"  {region} {tech}: {len(members)} clusters, "
            f"FLH {min(flhs):.0f}-{max(flhs):.0f}, "
            f"{sum(c.capacity_bound_kw for c in members):.0f} kW"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# run subcommand
# ---------------------------------------------------------------------------

_CTX: dict = {}


def _init_worker(cache_path, regions_path, adjacency_path, harbor, te_dict):
    """Load shared read-only inputs once per worker process."""
    cache = load_cluster_cache(cache_path)
    regions = _read_regions(Path(regions_path))
    adjacency = _read_adjacency(Path(adjacency_path))
    te = TechnoEconomics.from_dict(te_dict)
    graph = build_graph(regions, adjacency, harbor, detour_factor=te.detour_factor)
    sites = {
        pid: postproc.SiteRecord(
            id=pid, technology=rec["tech"], region_id=rec["region"],
            latitude=rec["lat"], longitude=rec["lon"],
            capacity_kw=rec["capacity_kw"], flh=rec["flh"],
        )
        for pid, rec in cache.placements_index.items()
    }
    _CTX.update(cache=cache, graph=graph, te=te, sites=sites)


def _solve_one(task: dict) -> dict:
    """Solve one scenario and post-process it; returns the record dict."""
    cache: ClusterCache = _CTX["cache"]
    graph = _CTX["graph"]
    te: TechnoEconomics = _CTX["te"]
    cfg = ScenarioConfig(
        country_id=task["country"],
        year=Year(task["year"]),
        export_fraction=task["export_fraction"],
        horizon_hours=task["horizon_hours"],
        overrides=task.get("overrides"),
        liq_size_cap_tpd=task.get("liq_size_cap_tpd"),
    )
    record = {
        "schema_version": SCHEMA_VERSION,
        "digest": task["digest"],
        "country": task["country"],
        "year": task["year"],
        "level": task["level"],
        "export_fraction": task["export_fraction"],
        "max_export_kwh": task["max_export_kwh"],
    }
    try:
        outcome = solve_mod.solve_scenario(
            list(cache.clusters), graph, te, cfg,
            solver_options=task.get("solver_options"),
        )
    except ScenarioError as exc:
        status = "infeasible" if "infeasible" in str(exc) else "error"
        record.update(status=status, error=str(exc))
        return record
    sol = outcome.solution
    record.update(
        status=sol.status,
        liq_size_gw=outcome.liq_size_gw,
        liq_specific_capex_eur_per_kw=outcome.liq_specific_capex_eur_per_kw,
        fixed_point_iterations=outcome.iterations,
        converged=outcome.converged,
    )
    if sol.status != "optimal":
        return record
    local = postproc.build_local_grids(outcome, _CTX["sites"])
    exported_kg = outcome.annual_export_kwh / outcome.model.te.lhv_h2
    cost = postproc.export_cost(sol, local.total_cost_eur, exported_kg)
    report = solve_mod.verify_solution(outcome.model, sol)
    record.update(
        annual_export_kwh=outcome.annual_export_kwh,
        exported_kg=exported_kg,
        tac_eur=sol.objective_eur,
        local_grid_cost_eur=local.total_cost_eur,
        local_grid_km=local.total_km,
        c_h2_eur_per_kg=cost.c_h2_eur_per_kg,
        decomposition_eur_per_kg=dict(cost.decomposition_eur_per_kg),
        curtailment=cost.curtailment,
        water_liters=curves_mod.water_demand(exported_kg),
        capacities_gw={k: v for k, v in sorted(sol.capacities.items())},
        verify_max_residual=max(
            report.max_eq_residual, report.max_ub_violation, report.max_bound_violation
        ),
        parks=[
            [p.park_id, p.technology, p.latitude, p.longitude, p.capacity_kw]
            for p in local.parks
        ],
        mst_edges=[
            [e.a_id, e.a_lat, e.a_lon, e.b_id, e.b_lat, e.b_lon, e.length_km]
            for e in local.edges
        ],
    )
    if task.get("dump_prefix"):
        solve_mod.dump_solution(outcome.model, sol, task["dump_prefix"])
    return record


def _scenario_key(year: int, level: int) -> str:
    return f"y{year}_L{level:02d}"


def cmd_run(args) -> int:
    cfg = RunConfig.load(Path(args.config), Path(args.workspace) if args.workspace else None)
    digests = cfg.input_digests()
    if cfg.te_file:
        te = TechnoEconomics.from_file(cfg.te_file)
    else:
        te = TechnoEconomics.default()

    cache = load_cluster_cache(cfg.cluster_cache)
    if not cache.clusters:
        raise ConfigError(f"cluster cache {cfg.cluster_cache} is empty")
    series_len = len(cache.clusters[0].cf_series)
    horizon = cfg.horizon_hours
    if horizon != series_len and series_len % horizon != 0:
        raise ConfigError(
            f"horizon {horizon} h neither equals nor divides cached series length {series_len}"
        )

    config_core = {
        "config": {k: v for k, v in cfg.raw.items() if k not in ("jobs",)},
        "inputs": digests,
    }
    config_hash = _digest(config_core)
    run_id = config_hash[:12]

    results = Path(args.out)
    scen_dir = results / "scenarios"
    scen_dir.mkdir(parents=True, exist_ok=True)
    _write_json(results / "run_config.json", {
        "schema_version": SCHEMA_VERSION,
        "run_id": run_id,
        "config_hash": config_hash,
        "input_digests": digests,
        "config": cfg.raw,
    })

    # Annual maximum export per year, on the model's horizon window.
    window_el_kwh = sum(
        c.capacity_bound_kw * float(np.sum(c.cf_series[:horizon])) for c in cache.clusters
    )
    annual_el_kwh = window_el_kwh * 8760.0 / horizon
    te_run = te.with_overrides(cfg.overrides)
    max_export_by_year = {
        int(y): max_export(annual_el_kwh, te_run, y) for y in cfg.years
    }

    tasks = []
    for year in cfg.years:
        for level, fraction in enumerate(cfg.export_fractions, start=1):
            key = _scenario_key(int(year), level)
            task = {
                "key": key,
                "country": cfg.country_id,
                "year": int(year),
                "level": level,
                "export_fraction": fraction,
                "horizon_hours": horizon,
                "overrides": cfg.overrides,
                "liq_size_cap_tpd": cfg.liq_size_cap_tpd,
                "max_export_kwh": max_export_by_year[int(year)],
                "solver_options": cfg.solver_options,
            }
            if args.dump_solutions:
                task["dump_prefix"] = str(scen_dir / key)
            task["digest"] = _digest({"core": config_hash, "scenario": key})
            tasks.append(task)

    manifest_scenarios: dict[str, dict] = {}
    todo = []
    for task in tasks:
        path = scen_dir / f"{task['key']}.json"
        if path.exists():
            with open(path) as fh:
                existing = json.load(fh)
            if existing.get("digest") == task["digest"]:
                manifest_scenarios[task["key"]] = {
                    "status": existing.get("status", "error"), "skipped": True,
                    "seconds": 0.0,
                }
                continue
        todo.append(task)

    jobs = args.jobs or os.cpu_count() or 1
    init_args = (
        str(cfg.cluster_cache), str(cfg.regions_csv), str(cfg.adjacency_csv),
        cfg.harbor, te.to_dict(),
    )

    def handle(task, record, seconds):
        _write_json(scen_dir / f"{task['key']}.json", record)
        manifest_scenarios[task["key"]] = {
            "status": record["status"], "skipped": False, "seconds": round(seconds, 3),
        }
        print(f"  {task['key']}: {record['status']} ({seconds:.1f}s)")

    if jobs <= 1 or len(todo) <= 1:
        _init_worker(*init_args)
        for task in todo:
            t0 = time.perf_counter()
            record = _solve_one(task)
            handle(task, record, time.perf_counter() - t0)
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=init_args) as pool:
            t0 = time.perf_counter()
            futures = {pool.submit(_solve_one, task): task for task in todo}
            for fut in as_completed(futures):
                handle(futures[fut], fut.result(), time.perf_counter() - t0)

    statuses = {k: v["status"] for k, v in manifest_scenarios.items()}
    _write_json(results / "manifest.json", {
        "schema_version": SCHEMA_VERSION,
        "run_id": run_id,
        "config_hash": config_hash,
        "input_digests": digests,
        "scenarios": {k: manifest_scenarios[k] for k in sorted(manifest_scenarios)},
    })
    n_ok = sum(1 for s in statuses.values() if s == "optimal")
    print(f"run {run_id}: {n_ok}/{len(statuses)} scenarios optimal")
    return EXIT_OK if n_ok > 0 else EXIT_ALL_FAILED


# ---------------------------------------------------------------------------
# sensitivity subcommand
# ---------------------------------------------------------------------------


def cmd_sensitivity(args) -> int:
    cfg = RunConfig.load(Path(args.config), Path(args.workspace) if args.workspace else None)
    cache = load_cluster_cache(cfg.cluster_cache)
    regions = _read_regions(cfg.regions_csv)
    adjacency = _read_adjacency(cfg.adjacency_csv)
    te = TechnoEconomics.from_file(cfg.te_file) if cfg.te_file else TechnoEconomics.default()
    graph = build_graph(regions, adjacency, cfg.harbor, detour_factor=te.detour_factor)
    year = Year(int(args.year))
    base = ScenarioConfig(
        country_id=cfg.country_id,
        year=year,
        export_fraction=args.export_fraction,
        horizon_hours=cfg.horizon_hours,
        overrides=cfg.overrides,
        liq_size_cap_tpd=cfg.liq_size_cap_tpd,
    )
    table = curves_mod.sensitivity_sweep(list(cache.clusters), graph, te, base)
    out = Path(args.out)
    _write_json(out / "sensitivity.json", {
        "schema_version": SCHEMA_VERSION,
        "country": cfg.country_id,
        "year": int(year),
        "export_fraction": args.export_fraction,
        "reference_cost_eur_per_kg": table.reference_cost,
        "rows": [
            {
                "variant_id": r.variant_id,
                "technology": r.technology,
                "cost_eur_per_kg": r.cost_eur_per_kg,
                "rel_change": r.rel_change,
                "status": r.status,
            }
            for r in table.rows
        ],
        "average_impact": dict(table.average_impact),
    })
    for tech, impact in table.average_impact.items():
        print(f"  {tech}: average impact {impact:.1%}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report subcommand
# ---------------------------------------------------------------------------


def _load_results(results: Path) -> tuple[dict, list[dict]]:
    expected = [results / "run_config.json", results / "manifest.json",
                results / "scenarios"]
    missing = [str(p) for p in expected if not p.exists()]
    if missing:
        raise ConfigError(f"results dir {results} is missing: {', '.join(missing)}")
    with open(results / "run_config.json") as fh:
        run_config = json.load(fh)
    records = []
    for path in sorted((results / "scenarios").glob("*.json")):
        with open(path) as fh:
            records.append(json.load(fh))
    if not records:
        raise ConfigError(f"no scenario results under {results / 'scenarios'}")
    return run_config, records


def _read_attributes(path: Path) -> dict[str, curves_mod.CountryAttributes]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expect = ["country_id", "regime_class", "water_stress_class"]
        if reader.fieldnames != expect:
            raise InputError(f"{path}: expected header {','.join(expect)}")
        for rownum, row in enumerate(reader, start=2):
            try:
                out[row["country_id"]] = curves_mod.CountryAttributes(
                    country_id=row["country_id"],
                    regime_class=row["regime_class"],
                    water_stress_class=row["water_stress_class"],
                )
            except ParameterError as exc:
                raise InputError(f"{path} row {rownum}: {exc}")
    return out


def _curves_from_records(records: list[dict]) -> list[curves_mod.CostPotentialCurve]:
    by_key: dict[tuple[str, int], list[dict]] = {}
    for rec in records:
        by_key.setdefault((rec["country"], rec["year"]), []).append(rec)
    out = []
    for (country, year), recs in sorted(by_key.items()):
        scenario_records = []
        for rec in sorted(recs, key=lambda r: r["level"]):
            if rec["status"] == "optimal":
                result = postproc.ExportCostResult(
                    c_h2_eur_per_kg=rec["c_h2_eur_per_kg"],
                    tac_opt_eur=rec["tac_eur"],
                    local_grid_cost_eur=rec["local_grid_cost_eur"],
                    exported_kg=rec["exported_kg"],
                    decomposition_eur_per_kg=rec["decomposition_eur_per_kg"],
                    curtailment=rec["curtailment"],
                )
                scenario_records.append(curves_mod.ScenarioRecord(
                    status="optimal",
                    export_kwh=rec["annual_export_kwh"],
                    result=result,
                ))
            else:
                scenario_records.append(curves_mod.ScenarioRecord(
                    status=rec["status"],
                    export_kwh=rec["export_fraction"] * rec["max_export_kwh"],
                    result=None,
                ))
        try:
            out.append(curves_mod.build_curve(
                country, Year(year), scenario_records, recs[0]["max_export_kwh"]
            ))
        except ScenarioError:
            continue
    return out


def cmd_report(args) -> int:
    results = Path(args.results)
    run_config, records = _load_results(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    curve_list = _curves_from_records(records)
    comp_cols = [f"cost_{c}" for c in postproc.COST_COMPONENTS]
    rows = []
    for curve in curve_list:
        for p in curve.points:
            rows.append(
                [curve.country_id, int(curve.year), p.export_kwh, p.cost_eur_per_kg]
                + [p.result.decomposition_eur_per_kg[c] for c in postproc.COST_COMPONENTS]
                + [p.result.curtailment, curves_mod.water_demand(p.result.exported_kg)]
            )
    _write_csv(
        out / "curves.csv",
        ["country", "year", "export_kwh", "cost_eur_per_kg"] + comp_cols
        + ["curtailment", "water_liters"],
        rows,
    )
    _write_json(out / "curves.json", {
        "schema_version": SCHEMA_VERSION,
        "curves": [
            {
                "country": c.country_id,
                "year": int(c.year),
                "group": postproc.classify_group(c),
                "max_export_kwh": c.max_export_kwh,
                "points": [
                    {
                        "export_kwh": p.export_kwh,
                        "cost_eur_per_kg": p.cost_eur_per_kg,
                        "decomposition_eur_per_kg": dict(p.result.decomposition_eur_per_kg),
                        "curtailment": p.result.curtailment,
                    }
                    for p in c.points
                ],
            }
            for c in curve_list
        ],
    })

    # Per-group export-weighted decomposition.
    group_rows = []
    by_group: dict[tuple[int, str], list] = {}
    for curve in curve_list:
        by_group.setdefault((int(curve.year), postproc.classify_group(curve)), []).append(curve)
    for (year, group), group_curves in sorted(by_group.items()):
        weights, totals, comps, curts = [], [], [], []
        for curve in group_curves:
            for p in curve.points:
                weights.append(p.export_kwh)
                totals.append(p.cost_eur_per_kg)
                comps.append([p.result.decomposition_eur_per_kg[c]
                              for c in postproc.COST_COMPONENTS])
                curts.append(p.result.curtailment)
        w = np.array(weights)
        w = w / w.sum()
        mean_comps = (np.array(comps) * w[:, None]).sum(axis=0)
        group_rows.append(
            [year, group, float(np.dot(w, totals))]
            + [float(v) for v in mean_comps]
            + [float(np.dot(w, curts))]
        )
    _write_csv(
        out / "group_decomposition.csv",
        ["year", "group", "total_eur_per_kg"] + comp_cols + ["curtailment"],
        group_rows,
    )

    park_rows, edge_rows = [], []
    for rec in records:
        if rec["status"] != "optimal":
            continue
        key = [rec["country"], rec["year"], rec["level"]]
        for park in rec.get("parks", []):
            park_rows.append(key + park)
        for edge in rec.get("mst_edges", []):
            edge_rows.append(key + edge)
    _write_csv(
        out / "geometry_parks.csv",
        ["country", "year", "level", "park_id", "tech", "lat", "lon", "capacity_kw"],
        park_rows,
    )
    _write_csv(
        out / "geometry_mst.csv",
        ["country", "year", "level", "node_a", "lat1", "lon1", "node_b", "lat2", "lon2",
         "length_km"],
        edge_rows,
    )

    sens_path = results / "sensitivity.json"
    if sens_path.exists():
        with open(sens_path) as fh:
            sens = json.load(fh)
        srows = [
            [sens["country"], sens["year"], r["variant_id"], r["technology"],
             r["cost_eur_per_kg"], r["rel_change"], r["status"]]
            for r in sens["rows"]
        ]
        srows += [
            [sens["country"], sens["year"], "reference", "reference",
             sens["reference_cost_eur_per_kg"], 0.0, "optimal"]
        ]
        _write_csv(
            out / "sensitivity.csv",
            ["country", "year", "variant_id", "technology", "cost_eur_per_kg",
             "rel_change", "status"],
            srows,
        )

    if args.attributes:
        attributes = _read_attributes(Path(args.attributes))
        for key, fname in (("regime", "cumulative_regime.csv"),
                           ("water_stress", "cumulative_water_stress.csv")):
            agg = curves_mod.cumulative_by_attribute(curve_list, attributes, key)
            arows = []
            for cls in sorted(agg.classes):
                step = agg.classes[cls]
                for q, cost in zip(step.cumulative_kwh, step.cost_eur_per_kg):
                    arows.append([key, cls, float(q), float(cost)])
            for q, cost in zip(agg.merged.cumulative_kwh, agg.merged.cost_eur_per_kg):
                arows.append([key, "all", float(q), float(cost)])
            _write_csv(out / fname, ["key", "class", "cumulative_kwh", "cost_eur_per_kg"],
                       arows)

    files = sorted(p.name for p in out.iterdir() if p.name != "report_manifest.json")
    _write_json(out / "report_manifest.json", {
        "schema_version": SCHEMA_VERSION,
        "run_id": run_config.get("run_id"),
        "files": {name: _sha256_file(out / name) for name in files},
    })
    print(f"report written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lh2export",
        description="Liquid-hydrogen export cost-potential toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="build the FLH cluster cache from placements")
    p.add_argument("--placements", required=True, help="CSV: id,tech,region,lat,lon,capacity_kw")
    p.add_argument("--cf", required=True, help="CSV of hourly capacity factors, one column per id")
    p.add_argument("--regions", required=True, help="CSV: region_id,lat,lon")
    p.add_argument("--out", required=True, help="output cache (.npz)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("run", help="solve the year x export-level scenario matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="results directory")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers (default: cores)")
    p.add_argument("--workspace", default=None)
    p.add_argument("--dump-solutions", action="store_true", dest="dump_solutions",
                   help="also write capacity CSVs and gzipped hourly operation "
                        "tables for newly solved scenarios")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sensitivity", help="run capex/liquefaction sensitivity variants")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="results directory")
    p.add_argument("--year", type=int, default=2050)
    p.add_argument("--export-fraction", type=float, default=0.10, dest="export_fraction")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--workspace", default=None)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("report", help="emit CSV/JSON bundles from a results directory")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attributes", default=None,
                   help="CSV: country_id,regime_class,water_stress_class")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
