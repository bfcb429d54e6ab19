import math

import numpy as np
import pytest

from lh2export.errors import ParameterError
from lh2export.network import (
    EARTH_RADIUS_KM,
    MIN_ARC_KM,
    arc_efficiency,
    build_graph,
    haversine_km,
)


def equator_point(km_east):
    """A point `km_east` along the equator from (0, 0); exact great circle."""
    return (0.0, math.degrees(km_east / EARTH_RADIUS_KM))


class TestArcEfficiency:
    def test_values(self):
        assert arc_efficiency(500) == pytest.approx(0.995, abs=1e-12)
        assert arc_efficiency(0) == 1.0
        assert arc_efficiency(1000) == pytest.approx(0.99, abs=1e-12)

    def test_floor_at_zero(self):
        assert arc_efficiency(150000) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            arc_efficiency(-1)

    def test_in_unit_interval_for_realistic_lengths(self):
        for km in np.linspace(0, 99000, 50):
            assert 0 < arc_efficiency(km) <= 1


class TestBuildGraph:
    def test_detour_factor_on_100km(self):
        regions = {"A": (0.0, 0.0), "B": equator_point(100.0)}
        graph = build_graph(regions, [("A", "B")], "A")
        assert graph.arcs[("A", "B")] == pytest.approx(130.0, abs=1e-9)

    def test_harbor_same_centroid_gets_epsilon_arc(self):
        graph = build_graph({"A": (10.0, 20.0)}, [], "A")
        assert set(graph.nodes) == {"A", "harbor"}
        assert graph.arcs[("A", "harbor")] == MIN_ARC_KM

    def test_island_connects_to_nearest_mainland(self):
        regions = {
            "A": (0.0, 0.0),
            "B": (0.0, 1.0),
            "C": (0.5, 0.9),  # island, no adjacency
        }
        graph = build_graph(regions, [("A", "B")], "A")
        # oracle: nearest of {A, B} by pairwise haversine
        d = {r: haversine_km(*regions["C"], *regions[r]) for r in ("A", "B")}
        nearest = min(d, key=d.get)
        assert nearest == "B"
        arc = tuple(sorted(("C", nearest)))
        assert arc in graph.arcs
        assert graph.arcs[arc] == pytest.approx(1.3 * d[nearest], rel=1e-12)

    def test_harbor_by_coordinate_attaches_nearest(self):
        regions = {"A": (0.0, 0.0), "B": (0.0, 2.0)}
        graph = build_graph(regions, [("A", "B")], (0.1, 1.9))
        assert ("B", "harbor") in graph.arcs

    def test_symmetry_and_detour_lower_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            lat1, lat2 = rng.uniform(-80, 80, 2)
            lon1, lon2 = rng.uniform(-179, 179, 2)
            assert haversine_km(lat1, lon1, lat2, lon2) == pytest.approx(
                haversine_km(lat2, lon2, lat1, lon1), rel=1e-12
            )
            regions = {"A": (lat1, lon1), "B": (lat2, lon2)}
            graph = build_graph(regions, [("A", "B")], "A")
            gc = haversine_km(lat1, lon1, lat2, lon2)
            assert graph.arcs[("A", "B")] >= gc

    def test_errors(self):
        with pytest.raises(ParameterError):
            build_graph({}, [], "A")
        with pytest.raises(ParameterError):
            build_graph({"A": (0, 0)}, [("A", "Z")], "A")
        with pytest.raises(ParameterError):
            build_graph({"A": (0, 0)}, [], "Z")
        with pytest.raises(ParameterError):
            build_graph({"A": (0, 0), "harbor": (1, 1)}, [], "A")

    def test_graph_validation(self):
        graph = build_graph({"A": (0, 0), "B": (0, 1)}, [("A", "B")], "A")
        assert graph.harbor_id == "harbor"
        assert graph.region_ids() == ["A", "B", "harbor"]
        assert all(length > 0 for length in graph.arcs.values())
