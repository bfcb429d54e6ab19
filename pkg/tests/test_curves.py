import numpy as np
import pytest

from lh2export.curves import (
    CostPotentialCurve,
    CountryAttributes,
    CurvePoint,
    ScenarioRecord,
    build_curve,
    cumulative_by_attribute,
    export_fractions,
    export_levels,
    sensitivity_sweep,
    water_demand,
)
from lh2export.datamodel import ScenarioConfig, Year
from lh2export.errors import ParameterError, ScenarioError
from lh2export.postproc import ExportCostResult
from lh2export.solve import solve_scenario

from conftest import make_cluster, single_node_graph


def result_at(cost, exported_kg=1.0e6, curtailment=0.0):
    return ExportCostResult(
        c_h2_eur_per_kg=cost, tac_opt_eur=cost * exported_kg,
        local_grid_cost_eur=0.0, exported_kg=exported_kg,
        decomposition_eur_per_kg={"res": cost}, curtailment=curtailment,
    )


class TestExportLevels:
    def test_m90_examples(self):
        levels = export_levels(90.0)
        assert levels == [9.5, 19.0, 28.5, 38.0, 47.5, 57.0, 66.5, 76.0, 85.5]
        assert levels[8] == 0.95 * 90.0
        assert levels[0] / 90.0 == 0.95 / 9
        assert levels[0] / levels[8] == 1 / 9

    def test_m9_cap(self):
        assert export_levels(9.0)[8] == pytest.approx(8.55, rel=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(ParameterError):
            export_levels(0.0)

    def test_even_spacing_property(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            m = float(rng.uniform(1e-3, 1e15))
            levels = export_levels(m)
            assert levels[8] == pytest.approx(0.95 * m, rel=1e-14)
            steps = np.diff([0.0] + levels)
            assert np.allclose(steps, steps[0], rtol=1e-12)

    def test_fractions_match_levels(self):
        fractions = export_fractions()
        assert len(fractions) == 9
        assert fractions[8] == pytest.approx(0.95, rel=1e-14)
        assert fractions[0] == pytest.approx(0.95 / 9, rel=1e-14)


class TestBuildCurve:
    def records(self, n=9, bad=()):
        out = []
        for k in range(1, n + 1):
            status = "suboptimal" if k in bad else "optimal"
            result = result_at(2.0 + 0.1 * k) if status == "optimal" else None
            out.append(ScenarioRecord(status, float(k) * 1e6, result))
        return out

    def test_full_curve(self):
        curve = build_curve("OM", Year.Y2050, self.records(), 1e7 / 0.95)
        assert len(curve.points) == 9
        exports = [p.export_kwh for p in curve.points]
        assert exports == sorted(exports)

    def test_suboptimal_dropped(self):
        curve = build_curve("OM", Year.Y2050, self.records(bad={3, 7}), 1e7 / 0.95)
        assert len(curve.points) == 7
        assert all(p.result is not None for p in curve.points)

    def test_single_point(self):
        curve = build_curve("OM", Year.Y2050, self.records(n=1), 1e7)
        assert len(curve.points) == 1

    def test_all_failed_raises(self):
        records = [ScenarioRecord("infeasible", 1e6, None)]
        with pytest.raises(ScenarioError):
            build_curve("OM", Year.Y2050, records, 1e7)

    def test_unsorted_input_sorted(self):
        records = list(reversed(self.records(n=4)))
        curve = build_curve("OM", Year.Y2050, records, 1e7)
        exports = [p.export_kwh for p in curve.points]
        assert exports == sorted(exports)

    def test_curve_validation(self):
        p1 = CurvePoint(2e6, 2.0, result_at(2.0))
        p2 = CurvePoint(1e6, 2.1, result_at(2.1))
        with pytest.raises(ParameterError):
            CostPotentialCurve("OM", Year.Y2050, (p1, p2), 1e7)
        with pytest.raises(ParameterError):
            CostPotentialCurve("OM", Year.Y2050, (p1,), 2e6 / 0.96)


class TestSensitivity:
    def pv_only_inputs(self, te, bound_scale=1.0):
        T = 24
        eta = te.pem_efficiency[Year.Y2050]
        chain = 1.0 / eta + te.liq_el_demand
        cluster = make_cluster(bound_kw=bound_scale * 2 * chain, series=np.ones(T))
        graph = single_node_graph()
        cfg = ScenarioConfig("XX", Year.Y2050, 0.5, horizon_hours=T)
        return [cluster], graph, cfg

    def test_pv_only_exact_res_scaling(self, te):
        clusters, graph, cfg = self.pv_only_inputs(te)
        table = sensitivity_sweep(clusters, graph, te, cfg)
        ref = solve_scenario(clusters, graph, te, cfg)
        exported = ref.annual_export_kwh / te.lhv_h2
        assert table.reference_cost == ref.solution.objective_eur / exported
        res_share = ref.solution.cost_by_component_eur["pv"] / ref.solution.objective_eur
        # demand-forced design: +-30% PV capex moves cost by exactly the RES share
        assert table.average_impact["pv"] == pytest.approx(0.3 * res_share, rel=1e-6)
        assert table.average_impact["wind"] == pytest.approx(0.0, abs=1e-12)
        # tiny exporter: both liquefaction variants leave the cost unchanged
        assert table.average_impact["liquefaction"] == pytest.approx(0.0, abs=1e-9)
        by_id = {r.variant_id: r for r in table.rows}
        assert by_id["pv_x0.7"].rel_change == pytest.approx(-0.3 * res_share, rel=1e-6)
        assert by_id["pv_x1.3"].rel_change == pytest.approx(+0.3 * res_share, rel=1e-6)
        assert by_id["liquefaction_unlimited"].rel_change == pytest.approx(0.0, abs=1e-9)

    def test_cap700_binds_large_exporter(self, te):
        # GW-scale exporter: the 700 t/d cap raises the specific capex
        clusters, graph, cfg = self.pv_only_inputs(te, bound_scale=1e6)
        table = sensitivity_sweep(clusters, graph, te, cfg)
        by_id = {r.variant_id: r for r in table.rows}
        assert by_id["liquefaction_cap700tpd"].rel_change > 0
        assert table.average_impact["liquefaction"] > 0

    def test_unlimited_scaling_helps_giant_exporter(self, te):
        # plant far beyond one maximum train: removing the cap cuts the cost
        clusters, graph, cfg = self.pv_only_inputs(te, bound_scale=1e8)
        table = sensitivity_sweep(clusters, graph, te, cfg)
        by_id = {r.variant_id: r for r in table.rows}
        assert by_id["liquefaction_unlimited"].rel_change < 0


class TestCumulative:
    def two_country_setup(self):
        cheap = CostPotentialCurve(
            "AA", Year.Y2050,
            (CurvePoint(10e12, 2.0, result_at(2.0)),), 10e12 / 0.95,
        )
        dear = CostPotentialCurve(
            "BB", Year.Y2050,
            (CurvePoint(10e12, 3.0, result_at(3.0)),), 10e12 / 0.95,
        )
        attributes = {
            "AA": CountryAttributes("AA", "hard autocracy", "high"),
            "BB": CountryAttributes("BB", "working democracy", "low"),
        }
        return [cheap, dear], attributes

    def test_two_step_merged_curve(self):
        curves, attributes = self.two_country_setup()
        agg = cumulative_by_attribute(curves, attributes, "regime")
        assert agg.merged.cost_at(10e12) == 2.0
        assert agg.merged.cost_at(10e12 + 1) == 3.0
        assert agg.merged.total_kwh == pytest.approx(20e12)

    def test_premium_of_expensive_class(self):
        curves, attributes = self.two_country_setup()
        agg = cumulative_by_attribute(curves, attributes, "regime")
        assert agg.premium("working democracy", 10e12) == pytest.approx(0.5)

    def test_quantity_conserved_exactly(self):
        curves, attributes = self.two_country_setup()
        for key in ("regime", "water_stress"):
            agg = cumulative_by_attribute(curves, attributes, key)
            assert sum(s.total_kwh for s in agg.classes.values()) == agg.merged.total_kwh

    def test_pooled_curve_nondecreasing(self):
        curves, attributes = self.two_country_setup()
        agg = cumulative_by_attribute(curves, attributes, "regime")
        costs = agg.merged.cost_eur_per_kg
        assert np.all(np.diff(costs) >= 0)

    def test_missing_attributes_warn_and_exclude(self):
        curves, attributes = self.two_country_setup()
        del attributes["BB"]
        with pytest.warns(UserWarning, match="BB"):
            agg = cumulative_by_attribute(curves, attributes, "regime")
        assert agg.merged.total_kwh == pytest.approx(10e12)

    def test_unknown_key_rejected(self):
        curves, attributes = self.two_country_setup()
        with pytest.raises(ParameterError):
            cumulative_by_attribute(curves, attributes, "gdp")

    def test_unknown_class_rejected(self):
        with pytest.raises(ParameterError):
            CountryAttributes("AA", "technocracy", "high")
        with pytest.raises(ParameterError):
            CountryAttributes("AA", "hybrid", "soggy")

    def test_step_curve_bounds(self):
        curves, attributes = self.two_country_setup()
        agg = cumulative_by_attribute(curves, attributes, "regime")
        with pytest.raises(ParameterError):
            agg.merged.cost_at(0.0)
        with pytest.raises(ParameterError):
            agg.merged.cost_at(21e12)


class TestWaterDemand:
    def test_nine_liters_per_kg(self):
        assert water_demand(1.0) == 9.0
        assert water_demand(0.0) == 0.0

    def test_one_pwh(self):
        kg = 1e12 / 33.33  # 1 PWh_LHV at 33.33 kWh/kg
        assert water_demand(kg) == pytest.approx(2.70e11, rel=1e-3)

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            water_demand(-1.0)
