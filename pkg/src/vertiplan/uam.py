"""Door-to-door UAM trip construction against an active vertiport set, plus
per-station demand counting and network exports.

Trips decompose into access leg, station-to-station flight, and egress leg.
Vehicle capacity never binds (infinite fleet); seats only feed the reported
vehicles-required statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .router import TravelTimeField, network_index, route_astar, teleport_leg
from .scenario import Scenario

ACCESS_WALK_MAX_M = 1500.0


@dataclass(frozen=True)
class EvtolParams:
    seats: int = 4
    range_km: float = 500.0
    cruise_speed_kmh: float = 250.0
    process_time_s: float = 300.0        # per boarding side
    min_fly_distance_m: float = 5000.0

    def __post_init__(self):
        for name in ("seats", "range_km", "cruise_speed_kmh", "process_time_s",
                     "min_fly_distance_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"evtol parameter {name} must be positive")


@dataclass(frozen=True)
class SubLeg:
    mode: str              # walk or car
    travel_time: float     # seconds
    distance: float        # meters
    route: tuple = ()      # car only


@dataclass(frozen=True)
class UamTrip:
    origin_station: int
    dest_station: int
    access: SubLeg
    fly_time: float        # seconds, includes both boarding processes
    fly_distance: float    # meters, straight line between stations
    egress: SubLeg

    @property
    def total_time(self):
        return self.access.travel_time + self.fly_time + self.egress.travel_time

    @property
    def total_distance(self):
        return self.access.distance + self.fly_distance + self.egress.distance


@dataclass(frozen=True)
class UamRejection:
    reason: str            # same_station | below_min_fly | beyond_range | dominated


def _access_subleg(xy, link, site, walk_mode, has_car, net, ttf, dep_time, outbound):
    """Connector between an activity location and a station. `outbound` routes
    location -> station; otherwise station -> location (egress side)."""
    crow = math.hypot(xy[0] - site.x, xy[1] - site.y)
    if crow <= ACCESS_WALK_MAX_M or not has_car:
        tt, dist = teleport_leg(walk_mode, xy, (site.x, site.y))
        return SubLeg("walk", tt, dist)
    if outbound:
        r = route_astar(net, "car", link, site.nearest_link, dep_time, ttf, weight="time")
    else:
        r = route_astar(net, "car", site.nearest_link, link, dep_time, ttf, weight="time")
    return SubLeg("car", r.travel_time, r.distance, r.links)


def _connector_lower_bound(xy, link, site, walk_mode, has_car, index, outbound):
    """Provable lower bound on the connector's generalized time. Car routes
    include both endpoint links, and every in-between link costs at least its
    freespeed time, itself at least 99% of the straight-line time at the
    network's top speed."""
    crow = math.hypot(xy[0] - site.x, xy[1] - site.y)
    if crow <= ACCESS_WALK_MAX_M or not has_car:
        return crow * walk_mode.detour_factor / walk_mode.teleport_speed
    if site.nearest_link == link:
        return 0.0
    u0, v0, _, fs0 = index.link_by_id[link]
    us, vs, _, fss = index.link_by_id[site.nearest_link]
    a, b = (v0, us) if outbound else (vs, u0)
    gap = math.hypot(index.xs[a] - index.xs[b], index.ys[a] - index.ys[b])
    return fs0 + fss + 0.99 * gap / index.max_freespeed


def _pick_station(xy, link, sites, walk_mode, has_car, index, ttf, dep_time, outbound):
    """Station minimizing connector generalized time; exact argmin, expanding
    candidate routes in lower-bound order. Ties resolve to the lowest site id."""
    bounds = [(_connector_lower_bound(xy, link, s, walk_mode, has_car, index, outbound),
               s.site_id, s) for s in sites]
    bounds.sort(key=lambda t: t[:2])

    best = None
    for lb, sid, s in bounds:
        if best is not None and lb > best[0]:
            break
        sub = _access_subleg(xy, link, s, walk_mode, has_car, index, ttf, dep_time, outbound)
        key = (sub.travel_time, sid)
        if best is None or key < best[:2]:
            best = (sub.travel_time, sid, s, sub)
    return best[2], best[3]


def build_uam_trip(origin, dest, origin_link, dest_link, active_sites, agent_has_car,
                   net, ttf: Optional[TravelTimeField], walk_mode,
                   evtol: EvtolParams, dep_time: float = 0.0):
    """UamTrip for origin->dest against the active station set, or a typed
    UamRejection (same station, too short, beyond range, or dominated by a
    direct walk).

    Access rides are walked within 1.5 km crow-fly, driven when the agent has
    a car, and walked otherwise; egress mirrors this from the destination side.
    """
    if not active_sites:
        raise ValueError("build_uam_trip requires a non-empty active site set")

    index = network_index(net)
    o_station, access = _pick_station(origin, origin_link, active_sites, walk_mode,
                                      agent_has_car, index, ttf, dep_time, True)
    d_station, egress = _pick_station(dest, dest_link, active_sites, walk_mode,
                                      agent_has_car, index, ttf, dep_time, False)

    if o_station.site_id == d_station.site_id:
        return UamRejection("same_station")
    fly_distance = math.hypot(o_station.x - d_station.x, o_station.y - d_station.y)
    if fly_distance < evtol.min_fly_distance_m:
        return UamRejection("below_min_fly")
    if fly_distance > evtol.range_km * 1000.0:
        return UamRejection("beyond_range")

    direct_walk_time, _ = teleport_leg(walk_mode, origin, dest)
    if access.travel_time + egress.travel_time >= direct_walk_time:
        return UamRejection("dominated")

    cruise_ms = evtol.cruise_speed_kmh / 3.6
    fly_time = fly_distance / cruise_ms + 2.0 * evtol.process_time_s
    return UamTrip(o_station.site_id, d_station.site_id, access, fly_time,
                   fly_distance, egress)


def count_station_demand(events, active_site_ids) -> dict:
    """d_j = number of uam_board events at station j (origin-side counting)."""
    active = set(active_site_ids)
    demand: dict = {}
    for ev in events:
        if ev[1] == "uam_board":
            sid = ev[3]
            if sid not in active:
                raise RuntimeError(f"uam_board at inactive station {sid}")
            demand[sid] = demand.get(sid, 0) + 1
    return demand


def feasible_pairs(sites, evtol: EvtolParams):
    """Station pairs whose straight-line distance sits inside [min_fly, range]."""
    out = []
    for i, a in enumerate(sites):
        for b in sites[i + 1:]:
            d = math.hypot(a.x - b.x, a.y - b.y)
            if evtol.min_fly_distance_m <= d <= evtol.range_km * 1000.0:
                out.append((a.site_id, b.site_id, d))
    return out


def export_active_network_geojson(scenario: Scenario, active_site_ids,
                                  evtol: EvtolParams = EvtolParams()) -> dict:
    """FeatureCollection of active station points plus straight fly edges
    between every feasible station pair."""
    sites = [scenario.candidate_sites[i] for i in sorted(active_site_ids)]
    features = []
    for s in sites:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [s.x, s.y]},
            "properties": {"site_id": s.site_id, "nearest_link": s.nearest_link},
        })
    by_id = {s.site_id: s for s in sites}
    for a, b, d in feasible_pairs(sites, evtol):
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [[by_id[a].x, by_id[a].y], [by_id[b].x, by_id[b].y]]},
            "properties": {"from_site": a, "to_site": b, "fly_distance_m": d},
        })
    return {"type": "FeatureCollection", "features": features}
