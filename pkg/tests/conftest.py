import numpy as np
import pytest

from lh2export.datamodel import ScenarioConfig, TechnoEconomics, Year
from lh2export.network import build_graph
from lh2export.potentials import ClusterPotential, Placement

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def te():
    return TechnoEconomics.default()


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURES


def make_cluster(region="R1", tech="pv", bound_kw=1000.0, series=None, cid=None):
    if series is None:
        series = np.ones(24)
    return ClusterPotential(
        cluster_id=cid or f"{region}:{tech}:top5",
        technology=tech,
        region_id=region,
        capacity_bound_kw=bound_kw,
        cf_series=np.asarray(series, dtype=float),
        member_ids=(),
    )


def make_placement(pid, tech="pv", region="R1", lat=0.0, lon=0.0, cap=1.0, series=None):
    if series is None:
        series = np.full(24, 0.5)
    return Placement(
        id=pid, technology=tech, region_id=region, latitude=lat, longitude=lon,
        capacity_kw=cap, cf_series=np.asarray(series, dtype=float),
    )


def single_node_graph(region="R1"):
    """One region hosting the harbor (epsilon arc between them)."""
    return build_graph({region: (0.0, 0.0)}, [], region)


def analytic_case(te, horizon=24, fraction=0.5, year=Year.Y2050):
    """1-region constant-cf scenario whose optimum is known in closed form.

    The cluster bound is chosen so that the demand rate is exactly
    fraction * 2 kWh_LHV/h; at fraction=0.5 the offtake is 1 kWh/h.
    """
    eta = te.pem_efficiency[year]
    chain = 1.0 / eta + te.liq_el_demand  # kWh_el per kWh_LHV delivered
    cluster = make_cluster(bound_kw=2 * chain, series=np.ones(horizon))
    graph = single_node_graph()
    cfg = ScenarioConfig("XX", year, fraction, horizon_hours=horizon)
    return cluster, graph, cfg, chain
