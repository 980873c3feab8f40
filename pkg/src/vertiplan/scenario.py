"""World model: road network, agent population with daily activity chains,
and candidate vertiport sites derived by clustering agent homes.

All coordinates are planar meters, all times seconds-of-day, all speeds m/s.
Scenarios are immutable value objects once built and safe to share read-only.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

SCHEMA_VERSION = 1
DAY_SECONDS = 86400

MODE_TAGS = ("car", "walk", "bike", "pt", "uam")
ACTIVITY_KINDS = ("home", "work", "education", "leisure", "shop")

TYPICAL_DURATIONS = {
    "home": 43200,
    "work": 28800,
    "education": 21600,
    "leisure": 7200,
    "shop": 3600,
}


class ScenarioError(ValueError):
    """Raised for invalid generator configs, scenario files, or broken invariants."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Link:
    id: int
    from_node: int
    to_node: int
    length: float          # meters
    freespeed: float       # m/s
    flow_capacity: float   # vehicles/hour
    allowed_modes: tuple = ("car",)


@dataclass(frozen=True)
class Mode:
    tag: str
    kind: str                                # network-simulated | teleported | uam-composite
    teleport_speed: Optional[float] = None   # m/s, teleported only
    detour_factor: Optional[float] = None    # teleported only
    marginal_utility_of_travel_time: float = -6.0   # utils/hour, <= 0
    mode_constant: float = 0.0               # utils


@dataclass(frozen=True)
class Activity:
    kind: str
    x: float
    y: float
    link: int
    end_time: Optional[int]      # seconds-of-day; None for the last activity
    typical_duration: int        # seconds


@dataclass
class Leg:
    mode: str
    departure_time: float = 0.0
    travel_time: float = 0.0
    distance: float = 0.0
    route: tuple = ()            # link ids; non-empty only for network-simulated legs
    uam_detail: Optional[dict] = None


@dataclass
class Plan:
    """Alternating Activity/Leg sequence, starting and ending with an Activity."""
    elements: list
    score: Optional[float] = None

    def activities(self):
        return self.elements[0::2]

    def legs(self):
        return self.elements[1::2]


@dataclass
class Agent:
    id: int
    home: tuple            # (x, y)
    has_car: bool
    activities: list       # base Activity chain; plans are built from it at sim time
    memory: list = field(default_factory=list)       # list of Plans, sim state
    selected: Optional[int] = None

    def __eq__(self, other):
        if not isinstance(other, Agent):
            return NotImplemented
        return (self.id, self.home, self.has_car, self.activities) == (
            other.id, other.home, other.has_car, other.activities)


@dataclass(frozen=True)
class Site:
    site_id: int
    x: float
    y: float
    nearest_link: int


@dataclass(frozen=True)
class CandidateSites:
    sites: tuple     # of Site, ids 0..len-1 in list order; the genome indexes this list

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __getitem__(self, i):
        return self.sites[i]


@dataclass
class Network:
    nodes: list
    links: list

    def __post_init__(self):
        self._node_by_id = {n.id: n for n in self.nodes}
        self._link_by_id = {l.id: l for l in self.links}
        xs = [n.x for n in self.nodes]
        ys = [n.y for n in self.nodes]
        self.bbox = (min(xs), min(ys), max(xs), max(ys)) if xs else (0, 0, 0, 0)
        self.max_freespeed = max((l.freespeed for l in self.links), default=1.0)

    def node(self, node_id):
        return self._node_by_id[node_id]

    def link(self, link_id):
        return self._link_by_id[link_id]

    def has_link(self, link_id):
        return link_id in self._link_by_id

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links

    def link_midpoints(self):
        """(m, 2) array of link midpoint coordinates, row i = link self.links[i]."""
        mids = np.empty((len(self.links), 2))
        for i, l in enumerate(self.links):
            a = self._node_by_id[l.from_node]
            b = self._node_by_id[l.to_node]
            mids[i, 0] = 0.5 * (a.x + b.x)
            mids[i, 1] = 0.5 * (a.y + b.y)
        return mids


@dataclass
class Scenario:
    network: Network
    modes: dict              # tag -> Mode
    agents: list
    candidate_sites: CandidateSites
    config: dict             # generator config echo plus derived facts (pt stations, centers)
    seed: int

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.network == other.network and self.modes == other.modes
                and self.agents == other.agents
                and self.candidate_sites == other.candidate_sites
                and self.config == other.config and self.seed == other.seed)


# ---------------------------------------------------------------------------
# generator config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    n_agents: int = 3400
    n_clusters: int = 12
    extent_km: tuple = (180.0, 80.0)
    grid_spacing_km: float = 8.0
    grid_jitter: float = 0.2             # node jitter, fraction of spacing
    cluster_sigma_km: float = 3.0
    cluster_min_sep_km: float = 12.0
    activity_mix: tuple = (("work", 0.5), ("education", 0.15), ("leisure", 0.2), ("shop", 0.15))
    secondary_prob: float = 0.3
    cross_cluster_prob: float = 0.5      # share of agents whose primary activity is in another cluster
    car_ownership: float = 0.85
    freespeed: float = 13.9              # m/s, uniform so free-flow fastest == shortest
    link_capacity: float = 30.0          # veh/h, scaled to the sampled population like the agent counts
    backbone_capacity: float = 90.0
    backbone_curviness: float = 1.05
    walk_speed: float = 1.34
    bike_speed: float = 4.1
    pt_speed: float = 20.0
    detour_factor: float = 1.3
    walk_max_km: float = 6.0             # trip-level mode availability caps
    bike_max_km: float = 25.0
    pt_access_km: float = 6.0            # both trip ends must be this close to a pt station
    pt_station_every: int = 3            # every n-th cluster center (x-sorted) gets a pt station
    candidate_k: int = 50
    min_separation_m: float = 2000.0


def default_modes(cfg: GeneratorConfig) -> dict:
    return {
        "car": Mode("car", "network-simulated", None, None, -6.0, 0.0),
        "walk": Mode("walk", "teleported", cfg.walk_speed, cfg.detour_factor, -2.0, 0.0),
        "bike": Mode("bike", "teleported", cfg.bike_speed, cfg.detour_factor, -3.0, -0.5),
        "pt": Mode("pt", "teleported", cfg.pt_speed, cfg.detour_factor, -4.0, -0.5),
        "uam": Mode("uam", "uam-composite", None, None, -6.0, -2.0),
    }


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def _euclid(ax, ay, bx, by):
    return math.hypot(ax - bx, ay - by)


def _nearest_link_ids(net: Network, points: np.ndarray) -> np.ndarray:
    """Nearest link (by midpoint distance) for each query point, vectorized."""
    mids = net.link_midpoints()
    ids = np.array([l.id for l in net.links])
    out = np.empty(len(points), dtype=int)
    for i, p in enumerate(points):
        d2 = (mids[:, 0] - p[0]) ** 2 + (mids[:, 1] - p[1]) ** 2
        out[i] = ids[int(np.argmin(d2))]
    return out


def _build_network(cfg: GeneratorConfig, centers: np.ndarray, rng: np.random.Generator) -> Network:
    """Perturbed grid plus a sparse long-distance backbone chaining the cluster centers."""
    ex, ey = cfg.extent_km[0] * 1000.0, cfg.extent_km[1] * 1000.0
    spacing = cfg.grid_spacing_km * 1000.0
    ncols = max(2, math.ceil(ex / spacing) + 1)
    nrows = max(2, math.ceil(ey / spacing) + 1)
    sx, sy = ex / (ncols - 1), ey / (nrows - 1)

    # boundary rows/columns are pinned so the network bbox spans the full
    # extent; homes are clamped into the extent and must stay inside the bbox
    nodes = []
    jx_max, jy_max = cfg.grid_jitter * sx, cfg.grid_jitter * sy
    for r in range(nrows):
        for c in range(ncols):
            nid = r * ncols + c
            jx = rng.uniform(-jx_max, jx_max)
            jy = rng.uniform(-jy_max, jy_max)
            x = 0.0 if c == 0 else ex if c == ncols - 1 else min(max(c * sx + jx, 0.0), ex)
            y = 0.0 if r == 0 else ey if r == nrows - 1 else min(max(r * sy + jy, 0.0), ey)
            nodes.append(Node(nid, x, y))

    links = []
    lid = 0

    def add_pair(a: Node, b: Node, curv: float, capacity: float):
        nonlocal lid
        length = max(_euclid(a.x, a.y, b.x, b.y) * curv, 1.0)
        for u, v in ((a, b), (b, a)):
            links.append(Link(lid, u.id, v.id, length, cfg.freespeed, capacity, ("car",)))
            lid += 1

    for r in range(nrows):
        for c in range(ncols):
            n = nodes[r * ncols + c]
            if c + 1 < ncols:
                add_pair(n, nodes[r * ncols + c + 1], 1.0 + 0.06 * rng.random(), cfg.link_capacity)
            if r + 1 < nrows:
                add_pair(n, nodes[(r + 1) * ncols + c], 1.0 + 0.06 * rng.random(), cfg.link_capacity)

    # backbone: chain cluster centers in x order through their nearest grid nodes
    coords = np.array([[n.x, n.y] for n in nodes])
    order = np.argsort(centers[:, 0], kind="stable")
    chain = []
    for ci in order:
        d2 = (coords[:, 0] - centers[ci, 0]) ** 2 + (coords[:, 1] - centers[ci, 1]) ** 2
        chain.append(int(np.argmin(d2)))
    for a, b in zip(chain, chain[1:]):
        if a != b:
            add_pair(nodes[a], nodes[b], cfg.backbone_curviness, cfg.backbone_capacity)

    return Network(nodes, links)


def _place_cluster_centers(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    ex, ey = cfg.extent_km[0] * 1000.0, cfg.extent_km[1] * 1000.0
    margin = cfg.cluster_sigma_km * 1000.0
    min_sep = cfg.cluster_min_sep_km * 1000.0
    if ex <= 2 * margin or ey <= 2 * margin:
        raise ScenarioError(
            f"region extent {cfg.extent_km} km too small for cluster sigma {cfg.cluster_sigma_km} km")
    centers = []
    attempts = 0
    while len(centers) < cfg.n_clusters:
        attempts += 1
        if attempts > 1000 * cfg.n_clusters:
            raise ScenarioError(
                f"region extent {cfg.extent_km} km cannot host {cfg.n_clusters} clusters "
                f"at min separation {cfg.cluster_min_sep_km} km")
        p = rng.uniform([margin, margin], [ex - margin, ey - margin])
        if all(_euclid(p[0], p[1], c[0], c[1]) >= min_sep for c in centers):
            centers.append(p)
    return np.array(centers)


def _draw_end_time(rng, mean, sd, lo, hi):
    t = int(round(rng.normal(mean, sd)))
    return min(max(t, lo), hi)


def generate_scenario(cfg: GeneratorConfig, seed: int) -> Scenario:
    """Build a deterministic synthetic scenario for (cfg, seed).

    Agents are placed around cluster centers with Gaussian spread; each gets a
    home -> primary -> (optional secondary) -> home chain with drawn end times.
    """
    if cfg.n_agents < 1:
        raise ScenarioError("n_agents must be >= 1")
    if cfg.n_clusters < 1:
        raise ScenarioError("n_clusters must be >= 1")
    if not 0.0 <= cfg.car_ownership <= 1.0:
        raise ScenarioError("car_ownership must be in [0, 1]")

    rng = np.random.default_rng(seed)
    centers = _place_cluster_centers(cfg, rng)
    net = _build_network(cfg, centers, rng)
    ex, ey = cfg.extent_km[0] * 1000.0, cfg.extent_km[1] * 1000.0
    sigma = cfg.cluster_sigma_km * 1000.0

    # cluster weights: deterministic largest-remainder allocation of agents
    weights = rng.random(cfg.n_clusters) + 0.5
    weights /= weights.sum()
    counts = np.floor(weights * cfg.n_agents).astype(int)
    remainder = cfg.n_agents - counts.sum()
    frac_order = np.argsort(-(weights * cfg.n_agents - counts), kind="stable")
    for i in range(remainder):
        counts[frac_order[i % cfg.n_clusters]] += 1

    cluster_of = np.repeat(np.arange(cfg.n_clusters), counts)

    def draw_point(center):
        p = center + rng.normal(0.0, sigma, size=2)
        return (min(max(p[0], 0.0), ex), min(max(p[1], 0.0), ey))

    homes = np.array([draw_point(centers[c]) for c in cluster_of])
    home_links = _nearest_link_ids(net, homes)

    kinds, kind_probs = zip(*cfg.activity_mix)
    kind_probs = np.array(kind_probs, dtype=float)
    kind_probs /= kind_probs.sum()

    agents = []
    act_coords = []
    for i in range(cfg.n_agents):
        hc = cluster_of[i]
        has_car = bool(rng.random() < cfg.car_ownership)

        primary_kind = kinds[int(rng.choice(len(kinds), p=kind_probs))]
        if cfg.n_clusters > 1 and rng.random() < cfg.cross_cluster_prob:
            choices = [c for c in range(cfg.n_clusters) if c != hc]
            pc = choices[int(rng.integers(len(choices)))]
        else:
            pc = hc
        primary_xy = draw_point(centers[pc])

        home_end = _draw_end_time(rng, 27000, 3600, 14400, 39600)          # ~07:30
        p_typ = TYPICAL_DURATIONS[primary_kind]
        primary_end = _draw_end_time(rng, home_end + p_typ + 1800, 3600,
                                     home_end + 1800, 82800)

        chain = [("home", homes[i], home_end),
                 (primary_kind, primary_xy, primary_end)]
        if rng.random() < cfg.secondary_prob:
            sec_kind = "shop" if rng.random() < 0.5 else "leisure"
            sec_xy = draw_point(centers[hc])
            sec_end = _draw_end_time(rng, primary_end + TYPICAL_DURATIONS[sec_kind] + 900,
                                     1800, primary_end + 900, 84600)
            chain.append((sec_kind, sec_xy, sec_end))
        chain.append(("home", homes[i], None))

        agents.append((i, homes[i], has_car, chain))
        act_coords.extend(xy for _, xy, _ in chain)

    act_links = _nearest_link_ids(net, np.array(act_coords))

    agent_objs = []
    k = 0
    for aid, home, has_car, chain in agents:
        acts = []
        for kind, xy, end in chain:
            acts.append(Activity(kind, float(xy[0]), float(xy[1]), int(act_links[k]),
                                 end, TYPICAL_DURATIONS[kind]))
            k += 1
        agent_objs.append(Agent(aid, (float(home[0]), float(home[1])), has_car, acts))

    sites = derive_candidate_sites(
        [a.home for a in agent_objs], min(cfg.candidate_k, cfg.n_agents),
        seed=seed ^ 0x5EED, net=net, min_separation=cfg.min_separation_m)

    x_order = np.argsort(centers[:, 0], kind="stable")
    pt_stations = [(float(centers[c, 0]), float(centers[c, 1]))
                   for c in x_order[::max(1, cfg.pt_station_every)]]

    config = asdict(cfg)
    config["activity_mix"] = [list(p) for p in cfg.activity_mix]
    config["extent_km"] = list(cfg.extent_km)
    config["cluster_centers"] = [[float(c[0]), float(c[1])] for c in centers]
    config["pt_stations"] = [list(p) for p in pt_stations]

    s = Scenario(net, default_modes(cfg), agent_objs, sites, config, seed)
    validate_scenario(s)
    return s


def scale_capacities(s: Scenario, factor: float) -> Scenario:
    """Scenario copy with every link's flow capacity multiplied by `factor`."""
    links = [Link(l.id, l.from_node, l.to_node, l.length, l.freespeed,
                  l.flow_capacity * factor, l.allowed_modes) for l in s.network.links]
    return Scenario(Network(list(s.network.nodes), links), dict(s.modes),
                    s.agents, s.candidate_sites, dict(s.config), s.seed)


# ---------------------------------------------------------------------------
# candidate sites: k-means over home locations
# ---------------------------------------------------------------------------

def derive_candidate_sites(homes, k: int, seed: int, net: Network,
                           min_separation: float = 2000.0) -> CandidateSites:
    """Cluster home coordinates into k spatial mean centers and snap each to the
    nearest link. Centers closer than min_separation are merged, keeping the
    larger cluster, so the result may have fewer than k sites.

    The site list depends only on (homes, k, seed): inputs are sort-normalized
    before seeding, and the final sites are ordered by (x, y).
    """
    pts = np.asarray(homes, dtype=float)
    if pts.size == 0:
        raise ScenarioError("cannot derive candidate sites from an empty home list")
    if k < 2:
        raise ScenarioError("candidate site count k must be >= 2")
    distinct = np.unique(pts, axis=0)
    if len(distinct) < k:
        raise ScenarioError(f"need at least k={k} distinct homes, got {len(distinct)}")

    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    rng = np.random.default_rng(seed)

    centers = _kmeans_pp_seed(pts, k, rng)
    assign = np.zeros(len(pts), dtype=int)
    for _ in range(100):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        for c in range(k):  # re-seed empty clusters at the farthest point
            if not np.any(new_assign == c):
                far = int(np.argmax(d2[np.arange(len(pts)), new_assign]))
                new_assign[far] = c
        if np.array_equal(new_assign, assign) and _ > 0:
            break
        assign = new_assign
        for c in range(k):
            centers[c] = pts[assign == c].mean(axis=0)

    sizes = np.bincount(assign, minlength=k)

    # merge near-duplicates, larger cluster wins; deterministic order
    merge_order = sorted(range(k), key=lambda c: (-sizes[c], centers[c, 0], centers[c, 1]))
    accepted = []
    for c in merge_order:
        if all(_euclid(centers[c, 0], centers[c, 1], centers[a, 0], centers[a, 1])
               >= min_separation for a in accepted):
            accepted.append(c)

    accepted.sort(key=lambda c: (centers[c, 0], centers[c, 1]))
    coords = centers[accepted]
    nearest = _nearest_link_ids(net, coords)
    sites = tuple(Site(i, float(coords[i, 0]), float(coords[i, 1]), int(nearest[i]))
                  for i in range(len(accepted)))
    return CandidateSites(sites)


def _kmeans_pp_seed(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    centers = np.empty((k, 2))
    centers[0] = pts[int(rng.integers(n))]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[i] = pts[int(rng.integers(n))]
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2), r))
        idx = min(idx, n - 1)
        centers[i] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(axis=1))
    return centers


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_plan(elements: Sequence) -> None:
    """Check strict Activity/Leg alternation with home endpoints; raises ScenarioError."""
    if len(elements) < 3 or len(elements) % 2 == 0:
        raise ScenarioError("plan must alternate activity/leg and start/end with an activity")
    for i, el in enumerate(elements):
        want_act = i % 2 == 0
        if want_act != isinstance(el, Activity):
            raise ScenarioError(f"plan element {i} breaks activity/leg alternation")
    if elements[0].kind != "home" or elements[-1].kind != "home":
        raise ScenarioError("plans must start and end at home")
    for i in range(0, len(elements) - 2, 2):
        a, leg, b = elements[i], elements[i + 1], elements[i + 2]
        if leg.mode == "car" and not leg.route and a.link != b.link:
            raise ScenarioError(f"car leg after element {i} lacks a route")
        if leg.mode != "uam" and leg.uam_detail is not None:
            raise ScenarioError("uam_detail present on a non-uam leg")


def validate_chain(acts: Sequence) -> None:
    if len(acts) < 2:
        raise ScenarioError("activity chain needs at least two activities")
    if acts[0].kind != "home" or acts[-1].kind != "home":
        raise ScenarioError("chains must start and end at home")
    for i, a in enumerate(acts):
        last = i == len(acts) - 1
        if last:
            if a.end_time is not None:
                raise ScenarioError("last activity must not carry an end_time")
        else:
            if a.end_time is None or not 0 <= a.end_time <= DAY_SECONDS:
                raise ScenarioError(f"activity {i} end_time outside [0, {DAY_SECONDS}]")
        if a.kind not in ACTIVITY_KINDS:
            raise ScenarioError(f"unknown activity kind '{a.kind}'")
        if a.typical_duration <= 0:
            raise ScenarioError("typical_duration must be positive")


def validate_scenario(s: Scenario) -> None:
    net = s.network
    seen = set()
    for n in net.nodes:
        if n.id in seen:
            raise ScenarioError(f"duplicate node id {n.id}")
        seen.add(n.id)
        if not (math.isfinite(n.x) and math.isfinite(n.y)):
            raise ScenarioError(f"node {n.id} has non-finite coordinates")

    for l in net.links:
        if l.length <= 0:
            raise ScenarioError(f"link {l.id} has non-positive length {l.length}")
        if l.freespeed <= 0:
            raise ScenarioError(f"link {l.id} has non-positive freespeed")
        if l.flow_capacity <= 0:
            raise ScenarioError(f"link {l.id} has non-positive flow capacity")
        a, b = net.node(l.from_node), net.node(l.to_node)
        if l.length < _euclid(a.x, a.y, b.x, b.y) * 0.99:
            raise ScenarioError(f"link {l.id} shorter than straight-line distance")

    for tag in MODE_TAGS:
        if tag not in s.modes:
            raise ScenarioError(f"missing mode '{tag}'")
    for tag, m in s.modes.items():
        if tag not in MODE_TAGS:
            raise ScenarioError(f"unknown mode tag '{tag}'")
        want = ("network-simulated" if tag == "car"
                else "uam-composite" if tag == "uam" else "teleported")
        if m.kind != want:
            raise ScenarioError(f"mode '{tag}' must be {want}, got {m.kind}")
        if m.kind == "teleported":
            if not m.teleport_speed or m.teleport_speed <= 0:
                raise ScenarioError(f"teleported mode '{tag}' needs a positive speed")
            if not m.detour_factor or m.detour_factor < 1.0:
                raise ScenarioError(f"teleported mode '{tag}' needs detour factor >= 1")
        if m.marginal_utility_of_travel_time > 0:
            raise ScenarioError(f"mode '{tag}' travel-time utility must be <= 0")

    minx, miny, maxx, maxy = net.bbox
    for a in s.agents:
        if not (minx <= a.home[0] <= maxx and miny <= a.home[1] <= maxy):
            raise ScenarioError(f"agent {a.id} home outside network bounding box")
        validate_chain(a.activities)
        for act in a.activities:
            if not net.has_link(act.link):
                raise ScenarioError(f"agent {a.id} references missing link {act.link}")

    for i, site in enumerate(s.candidate_sites):
        if site.site_id != i:
            raise ScenarioError("candidate site ids must be 0..n-1 in list order")
        if not net.has_link(site.nearest_link):
            raise ScenarioError(f"site {site.site_id} references missing link {site.nearest_link}")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "meta": {"schema_version": SCHEMA_VERSION, "seed": s.seed},
        "network": {
            "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in s.network.nodes],
            "links": [{"id": l.id, "from": l.from_node, "to": l.to_node,
                       "length": l.length, "freespeed": l.freespeed,
                       "flow_capacity": l.flow_capacity,
                       "allowed_modes": list(l.allowed_modes)} for l in s.network.links],
        },
        "modes": [{"tag": m.tag, "kind": m.kind, "teleport_speed": m.teleport_speed,
                   "detour_factor": m.detour_factor,
                   "marginal_utility_of_travel_time": m.marginal_utility_of_travel_time,
                   "mode_constant": m.mode_constant}
                  for _, m in sorted(s.modes.items())],
        "agents": [{"id": a.id, "home": [a.home[0], a.home[1]], "has_car": a.has_car,
                    "activities": [{"kind": act.kind, "x": act.x, "y": act.y,
                                    "link": act.link, "end_time": act.end_time,
                                    "typical_duration": act.typical_duration}
                                   for act in a.activities]}
                   for a in s.agents],
        "candidate_sites": [{"site_id": c.site_id, "x": c.x, "y": c.y,
                             "nearest_link": c.nearest_link} for c in s.candidate_sites],
        "config": s.config,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        meta = doc["meta"]
        if meta["schema_version"] != SCHEMA_VERSION:
            raise ScenarioError(
                f"schema version {meta['schema_version']} unsupported (expected {SCHEMA_VERSION})")
        nodes = [Node(n["id"], float(n["x"]), float(n["y"])) for n in doc["network"]["nodes"]]
        links = [Link(l["id"], l["from"], l["to"], float(l["length"]), float(l["freespeed"]),
                      float(l["flow_capacity"]), tuple(l["allowed_modes"]))
                 for l in doc["network"]["links"]]
        modes = {}
        for m in doc["modes"]:
            if m["tag"] not in MODE_TAGS:
                raise ScenarioError(f"unknown mode tag '{m['tag']}'")
            modes[m["tag"]] = Mode(m["tag"], m["kind"], m["teleport_speed"], m["detour_factor"],
                                   float(m["marginal_utility_of_travel_time"]),
                                   float(m["mode_constant"]))
        agents = []
        for a in doc["agents"]:
            acts = [Activity(x["kind"], float(x["x"]), float(x["y"]), x["link"],
                             x["end_time"], x["typical_duration"]) for x in a["activities"]]
            agents.append(Agent(a["id"], (float(a["home"][0]), float(a["home"][1])),
                                bool(a["has_car"]), acts))
        sites = CandidateSites(tuple(Site(c["site_id"], float(c["x"]), float(c["y"]),
                                          c["nearest_link"]) for c in doc["candidate_sites"]))
        s = Scenario(Network(nodes, links), modes, agents, sites, doc["config"], meta["seed"])
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
    validate_scenario(s)
    return s


def save_scenario(s: Scenario, path) -> None:
    doc = scenario_to_dict(s)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        json.dump(doc, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")
    os.replace(tmp, path)


def load_scenario(path) -> Scenario:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON (line {exc.lineno}: {exc.msg})") from exc
    return scenario_from_dict(doc)
