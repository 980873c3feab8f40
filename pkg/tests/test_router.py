import heapq
import math
import random

import pytest

from vertiplan.router import (TravelTimeField, UnreachableError, route_astar,
                              teleport_leg)
from vertiplan.scenario import Link, Mode, Network, Node

from conftest import line_network


def random_grid(rng, cols=6, rows=5, spacing=1000.0):
    nodes = []
    for r in range(rows):
        for c in range(cols):
            nodes.append(Node(r * cols + c,
                              c * spacing + rng.uniform(-150, 150),
                              r * spacing + rng.uniform(-150, 150)))
    links = []
    lid = 0
    for r in range(rows):
        for c in range(cols):
            n = nodes[r * cols + c]
            for nb in ((r, c + 1), (r + 1, c)):
                if nb[0] >= rows or nb[1] >= cols:
                    continue
                m = nodes[nb[0] * cols + nb[1]]
                d = math.hypot(n.x - m.x, n.y - m.y)
                for u, v in ((n, m), (m, n)):
                    links.append(Link(lid, u.id, v.id, d * rng.uniform(1.0, 1.4),
                                      rng.uniform(8.0, 25.0), 600.0))
                    lid += 1
    return Network(nodes, links)


def dijkstra_cost(net, origin_link, dest_link, cost_of):
    """Label-correcting Dijkstra oracle over links, no heuristic. Returns the
    total route cost with both endpoint links included."""
    if origin_link == dest_link:
        return 0.0
    by_id = {l.id: l for l in net.links}
    out = {}
    for l in net.links:
        out.setdefault(l.from_node, []).append(l)
    start = by_id[origin_link].to_node
    goal = by_id[dest_link].from_node
    dist = {start: cost_of(by_id[origin_link])}
    heap = [(dist[start], start)]
    seen = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in seen:
            continue
        seen.add(u)
        if u == goal:
            return d + cost_of(by_id[dest_link])
        for l in out.get(u, []):
            nd = d + cost_of(l)
            if nd < dist.get(l.to_node, math.inf):
                dist[l.to_node] = nd
                heapq.heappush(heap, (nd, l.to_node))
    return math.inf


def test_identity_route():
    net = line_network(3)
    r = route_astar(net, "car", 0, 0)
    assert r.links == () and r.distance == 0.0 and r.travel_time == 0.0


def test_three_node_line():
    net = line_network(3, length=1000.0, freespeed=10.0)
    # forward links are ids 0 (a->b) and 2 (b->c)
    r = route_astar(net, "car", 0, 2)
    assert r.links == (0, 2)
    assert r.distance == pytest.approx(2000.0)
    assert r.travel_time == pytest.approx(200.0)


def test_astar_matches_dijkstra_on_random_grids():
    rng = random.Random(1234)
    checked = 0
    for g in range(20):
        net = random_grid(rng)
        link_ids = [l.id for l in net.links]
        for _ in range(50):
            o, d = rng.choice(link_ids), rng.choice(link_ids)
            r = route_astar(net, "car", o, d, weight="distance")
            oracle = dijkstra_cost(net, o, d, lambda l: l.length)
            assert r.distance == pytest.approx(oracle, abs=1e-9)
            rt = route_astar(net, "car", o, d, weight="time")
            oracle_t = dijkstra_cost(net, o, d, lambda l: l.length / l.freespeed)
            assert rt.travel_time == pytest.approx(oracle_t, abs=1e-9)
            checked += 1
    assert checked == 1000


def test_astar_with_travel_time_field_matches_dijkstra():
    rng = random.Random(99)
    net = random_grid(rng)
    ttf = TravelTimeField(net)
    # constant observed times per link, at or above freespeed
    for l in net.links:
        base = l.length / l.freespeed * rng.uniform(1.0, 3.0)
        ttf._bins[l.id] = [base] * 97
    link_ids = [l.id for l in net.links]
    for _ in range(100):
        o, d = rng.choice(link_ids), rng.choice(link_ids)
        r = route_astar(net, "car", o, d, dep_time=28800.0, ttf=ttf, weight="time")
        oracle = dijkstra_cost(net, o, d, lambda l: ttf._bins[l.id][0])
        assert r.travel_time == pytest.approx(oracle, abs=1e-9)


def test_route_contiguity_and_distance_sum():
    rng = random.Random(5)
    net = random_grid(rng)
    by_id = {l.id: l for l in net.links}
    link_ids = [l.id for l in net.links]
    for _ in range(50):
        o, d = rng.choice(link_ids), rng.choice(link_ids)
        r = route_astar(net, "car", o, d, weight="distance")
        for a, b in zip(r.links, r.links[1:]):
            assert by_id[a].to_node == by_id[b].from_node
        assert r.distance == pytest.approx(sum(by_id[l].length for l in r.links))
        assert (r.distance == 0.0) == (o == d)


def test_departure_time_invariance_under_freespeed():
    net = line_network(6)
    for dep in (0.0, 3600.0, 80000.0):
        r = route_astar(net, "car", 0, 8, dep_time=dep, weight="distance")
        assert r.links == route_astar(net, "car", 0, 8, weight="distance").links


def test_unreachable_raises():
    # two disconnected components
    nodes = [Node(0, 0, 0), Node(1, 1000, 0), Node(2, 5000, 0), Node(3, 6000, 0)]
    links = [Link(0, 0, 1, 1000.0, 10.0, 600.0), Link(1, 2, 3, 1000.0, 10.0, 600.0)]
    net = Network(nodes, links)
    with pytest.raises(UnreachableError):
        route_astar(net, "car", 0, 1)


def test_tie_break_prefers_smaller_link_id_sequence():
    # diamond with two equal-length two-hop paths: 0->1->3 and 0->2->3
    nodes = [Node(0, 0, 0), Node(1, 1000, 1000), Node(2, 1000, -1000), Node(3, 2000, 0)]
    d = math.hypot(1000, 1000)
    links = [Link(10, 0, 1, d, 10.0, 600.0), Link(11, 1, 3, d, 10.0, 600.0),
             Link(12, 0, 2, d, 10.0, 600.0), Link(13, 2, 3, d, 10.0, 600.0),
             Link(14, 4, 0, 1.0, 10.0, 600.0), Link(15, 3, 5, 1.0, 10.0, 600.0)]
    nodes += [Node(4, -1, 0), Node(5, 2001, 0)]
    net = Network(nodes, links)
    r = route_astar(net, "car", 14, 15, weight="distance")
    assert r.links == (14, 10, 11, 15)


def test_teleport_zero_distance():
    walk = Mode("walk", "teleported", 1.34, 1.3, -2.0, 0.0)
    assert teleport_leg(walk, (5.0, 5.0), (5.0, 5.0)) == (0.0, 0.0)


def test_teleport_walk_kilometer():
    walk = Mode("walk", "teleported", 1.34, 1.3, -2.0, 0.0)
    tt, dist = teleport_leg(walk, (0.0, 0.0), (1000.0, 0.0))
    assert dist == pytest.approx(1300.0)
    assert tt == pytest.approx(1300.0 / 1.34)
    assert tt == pytest.approx(970.1, abs=0.1)


def test_teleport_pt_ten_km():
    pt = Mode("pt", "teleported", 20.0, 1.3, -4.0, -0.5)
    tt, dist = teleport_leg(pt, (0.0, 0.0), (10000.0, 0.0))
    assert (tt, dist) == (650.0, 13000.0)


def test_teleport_rejects_network_mode():
    car = Mode("car", "network-simulated")
    with pytest.raises(ValueError):
        teleport_leg(car, (0, 0), (1, 1))


def test_travel_time_field_from_events_clamps_to_freespeed():
    net = line_network(3, length=1000.0, freespeed=10.0)
    # one traversal of link 0 faster than physically possible: clamped
    events = [(1000, "link_enter", 1, 0, "car"), (2000, "link_leave", 1, 0, "car"),
              (1000, "link_enter", 2, 2, "car"), (251000, "link_leave", 2, 2, "car")]
    ttf = TravelTimeField.from_events(net, events)
    assert ttf.link_time(0, 1.0) == pytest.approx(100.0)      # clamped to freespeed
    assert ttf.link_time(2, 1.0) == pytest.approx(250.0)      # observed congestion
    assert ttf.link_time(2, 50000.0) == pytest.approx(100.0)  # empty bin falls back
