"""Shortest-path routing on the road network plus teleported-leg arithmetic.

Initial plans are routed by distance (shortest paths); replanning reroutes by
estimated time against observed link travel times. The router is stateless
given (network, travel-time field) and safe for concurrent use.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

from .scenario import Mode, Network

# links may undercut straight-line length by 1% (rounding); keep heuristics admissible
_LENGTH_SLACK = 0.99


class UnreachableError(RuntimeError):
    """No path exists between the requested links for the given mode."""


@dataclass(frozen=True)
class Route:
    links: tuple           # ordered link ids, origin and destination links included
    distance: float        # meters, sum of link lengths
    travel_time: float     # seconds, expected under the supplied cost field


class TravelTimeField:
    """Per-link mean observed traversal times in fixed time-of-day bins.

    Empty bins fall back to the link's freespeed traversal time; stored means
    are clamped from below by it.
    """

    def __init__(self, net: Network, bin_size: int = 900):
        self.bin_size = bin_size
        self.net = net
        self._bins: dict = {}
        self._fs_tt = {l.id: l.length / l.freespeed for l in net.links}

    @classmethod
    def from_events(cls, net: Network, events, bin_size: int = 900) -> "TravelTimeField":
        """Aggregate link_enter/link_leave pairs from an event stream."""
        field = cls(net, bin_size)
        open_enter = {}
        acc: dict = {}
        for ev in events:
            kind = ev[1]
            if kind == "link_enter":
                open_enter[(ev[2], ev[3])] = ev[0]
            elif kind == "link_leave":
                key = (ev[2], ev[3])
                t_enter = open_enter.pop(key, None)
                if t_enter is None:
                    continue
                b = t_enter // (bin_size * 1000)
                cell = acc.setdefault((ev[3], b), [0.0, 0])
                cell[0] += (ev[0] - t_enter) / 1000.0
                cell[1] += 1
        nbins = 86400 // bin_size + 1
        for (link_id, b), (total, count) in acc.items():
            arr = field._bins.get(link_id)
            if arr is None:
                arr = [None] * nbins
                field._bins[link_id] = arr
            if b < nbins:
                arr[b] = max(total / count, field._fs_tt[link_id])
        return field

    def link_time(self, link_id: int, enter_time: float) -> float:
        arr = self._bins.get(link_id)
        if arr is not None:
            b = int(enter_time) // self.bin_size
            if 0 <= b < len(arr) and arr[b] is not None:
                return arr[b]
        return self._fs_tt[link_id]


class NetworkIndex:
    """Precomputed adjacency and coordinate arrays for repeated A* queries."""

    def __init__(self, net: Network):
        self.net = net
        self.node_ids = [n.id for n in net.nodes]
        idx = {nid: i for i, nid in enumerate(self.node_ids)}
        self.xs = [n.x for n in net.nodes]
        self.ys = [n.y for n in net.nodes]
        self.out = [[] for _ in net.nodes]
        self.link_by_id = {}
        for l in net.links:
            u, v = idx[l.from_node], idx[l.to_node]
            fs_tt = l.length / l.freespeed
            self.out[u].append((v, l.id, l.length, fs_tt))
            self.link_by_id[l.id] = (u, v, l.length, fs_tt)
        for lst in self.out:
            lst.sort(key=lambda e: e[1])
        self.max_freespeed = net.max_freespeed


def network_index(net) -> NetworkIndex:
    """NetworkIndex for a Network (cached on the object) or pass one through."""
    if isinstance(net, NetworkIndex):
        return net
    cached = getattr(net, "_router_index", None)
    if cached is None:
        cached = NetworkIndex(net)
        net._router_index = cached
    return cached


def route_astar(net, mode: str, origin_link: int, dest_link: int, dep_time: float = 0.0,
                ttf: Optional[TravelTimeField] = None, weight: str = "distance") -> Route:
    """Minimum-cost route between two links, both endpoints included.

    weight="distance" minimizes meters (departure-time invariant); weight="time"
    minimizes seconds, against `ttf` when given, else freespeed. The heuristic
    is straight-line distance (scaled by 1/max freespeed for time costs), so
    costs match an exhaustive Dijkstra exactly. Equal-cost ties resolve to the
    lexicographically smallest link-id sequence.
    """
    index = network_index(net)
    if weight not in ("distance", "time"):
        raise ValueError(f"unknown weight '{weight}'")
    if origin_link == dest_link:
        return Route((), 0.0, 0.0)

    try:
        o_from, o_to, o_len, o_fs = index.link_by_id[origin_link]
        d_from, d_to, d_len, d_fs = index.link_by_id[dest_link]
    except KeyError as exc:
        raise UnreachableError(f"unknown link {exc}") from exc

    time_based = weight == "time"

    def link_cost(link_id, length, fs_tt, at_time):
        if not time_based:
            return length
        if ttf is not None:
            return ttf.link_time(link_id, at_time)
        return fs_tt

    g0 = link_cost(origin_link, o_len, o_fs, dep_time)
    start, goal = o_to, d_from

    xs, ys, out = index.xs, index.ys, index.out
    gx, gy = xs[goal], ys[goal]
    hscale = _LENGTH_SLACK / index.max_freespeed if time_based else _LENGTH_SLACK

    def h(u):
        return math.hypot(xs[u] - gx, ys[u] - gy) * hscale

    if start == goal:
        seq = (origin_link, dest_link)
        dist = o_len + d_len
        tt = g0 + link_cost(dest_link, d_len, d_fs, dep_time + (g0 if time_based else 0.0))
        if not time_based:
            tt = o_fs + d_fs
        return Route(seq, dist, tt)

    INF = math.inf
    dist = {start: g0}
    pred = {start: (None, None)}
    settled = set()
    heap = [(g0 + h(start), g0, start)]

    def seq_of(node):
        out_seq = []
        while True:
            p, lid = pred[node]
            if lid is None:
                break
            out_seq.append(lid)
            node = p
        out_seq.reverse()
        return out_seq

    while heap:
        f, g, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == goal:
            break
        at = dep_time + g if time_based else dep_time
        for v, lid, length, fs_tt in out[u]:
            if v in settled:
                continue
            ng = g + link_cost(lid, length, fs_tt, at)
            old = dist.get(v, INF)
            if ng < old:
                dist[v] = ng
                pred[v] = (u, lid)
                heapq.heappush(heap, (ng + h(v), ng, v))
            elif ng == old:
                cand = seq_of(u) + [lid]
                if cand < seq_of(v):
                    pred[v] = (u, lid)

    if goal not in settled:
        raise UnreachableError(
            f"no {mode} path from link {origin_link} to link {dest_link}")

    mid = seq_of(goal)
    links = (origin_link, *mid, dest_link)
    total_len = o_len + d_len + sum(index.link_by_id[lid][2] for lid in mid)
    if time_based:
        g_goal = dist[goal]
        total_tt = g_goal + link_cost(dest_link, d_len, d_fs, dep_time + g_goal)
    else:
        total_tt = o_fs + d_fs + sum(index.link_by_id[lid][3] for lid in mid)
    return Route(links, total_len, total_tt)


def route_freespeed_time(net, route: Route) -> float:
    """Freespeed traversal time of an existing route, seconds."""
    index = network_index(net)
    return sum(index.link_by_id[lid][3] for lid in route.links)


def teleport_leg(mode: Mode, origin, dest):
    """(travel_time s, distance m) for a teleported leg between two coordinates."""
    if mode.kind != "teleported":
        raise ValueError(f"mode '{mode.tag}' is not teleported")
    dist = math.hypot(origin[0] - dest[0], origin[1] - dest[1]) * mode.detour_factor
    return dist / mode.teleport_speed, dist
