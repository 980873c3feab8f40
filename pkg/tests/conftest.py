import pytest

from vertiplan.scenario import (Activity, GeneratorConfig, Link, Network, Node,
                                generate_scenario)

# desk-scale congested setup shared by the convergence-sensitive tests; the
# backbone is the bottleneck artery, the grid the longer relief
ACCEPT_CFG = GeneratorConfig(
    n_agents=900, n_clusters=5, extent_km=(150.0, 70.0), grid_spacing_km=9.0,
    cluster_sigma_km=2.5, cluster_min_sep_km=25.0, cross_cluster_prob=0.5,
    link_capacity=15.0, backbone_capacity=40.0, pt_station_every=3)


@pytest.fixture(scope="session")
def tiny_scenario():
    cfg = GeneratorConfig(n_agents=80, n_clusters=3, extent_km=(100.0, 50.0),
                          grid_spacing_km=10.0, cluster_min_sep_km=25.0,
                          cross_cluster_prob=0.5, candidate_k=12,
                          link_capacity=600.0, backbone_capacity=1200.0)
    return generate_scenario(cfg, seed=42)


def line_network(n_nodes=3, length=1000.0, freespeed=10.0, capacity=3600.0):
    """Bidirectional chain 0-1-...-n with one link pair per segment."""
    nodes = [Node(i, i * length, 0.0) for i in range(n_nodes)]
    links = []
    lid = 0
    for i in range(n_nodes - 1):
        links.append(Link(lid, i, i + 1, length, freespeed, capacity))
        lid += 1
        links.append(Link(lid, i + 1, i, length, freespeed, capacity))
        lid += 1
    return Network(nodes, links)


def home_act(x, y, link, end_time, typ=43200):
    return Activity("home", x, y, link, end_time, typ)


def work_act(x, y, link, end_time, typ=28800):
    return Activity("work", x, y, link, end_time, typ)
