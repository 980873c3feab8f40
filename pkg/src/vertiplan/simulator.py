"""Inner loop: execute all selected daily plans on the network with a point-queue
congestion model, score them, and co-evolve plans over a fixed iteration budget.

One run is single-threaded and fully deterministic for (scenario, active sites,
config, seed); the scenario is only ever read. Event times are integer
milliseconds internally, which makes the hourly flow bound and byte-level
reproducibility exact.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .router import NetworkIndex, TravelTimeField, route_astar, teleport_leg
from .scenario import DAY_SECONDS, Activity, Agent, Leg, Plan, Scenario
from .uam import EvtolParams, UamRejection, UamTrip, build_uam_trip

EVENT_KINDS = ("departure", "link_enter", "link_leave", "arrival", "uam_board", "uam_alight")

HOUR_MS = 3_600_000


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoringParams:
    performing_utility: float = 6.0         # utils/hour, > 0
    travel_utility: tuple = (("car", -6.0), ("pt", -4.0), ("walk", -2.0),
                             ("bike", -3.0), ("uam", -6.0))   # utils/hour, <= 0
    mode_constant: tuple = (("car", 0.0), ("pt", -0.5), ("walk", 0.0),
                            ("bike", -0.5), ("uam", -2.0))
    uam_fare_per_km: float = -0.06

    def __post_init__(self):
        if self.performing_utility <= 0:
            raise ValueError("performing utility must be positive")
        if any(v > 0 for _, v in self.travel_utility):
            raise ValueError("travel-time utilities must be <= 0")


@dataclass(frozen=True)
class SimConfig:
    inner_iterations: int = 10
    replanning_share: float = 0.3
    strategy_weights: tuple = (0.4, 0.2, 0.4)    # mode_mutation, time_mutation, reroute
    memory_capacity: int = 4
    beta_best: float = 0.8
    scoring: ScoringParams = field(default_factory=ScoringParams)
    evtol: EvtolParams = field(default_factory=EvtolParams)
    ttf_bin: int = 900

    def __post_init__(self):
        if abs(sum(self.strategy_weights) - 1.0) > 1e-9:
            raise ValueError("strategy weights must sum to 1")
        if not 0.0 < self.replanning_share < 1.0:
            raise ValueError("replanning_share must be in (0, 1)")
        if self.memory_capacity < 2:
            raise ValueError("memory_capacity must be >= 2")
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    total_travel_time: float      # seconds over all executed legs and agents
    total_travel_distance: float  # meters likewise
    mean_executed_score: float


@dataclass
class EquilibriumResult:
    stats: list                   # IterationStats per executed iteration
    station_demand: dict          # site_id -> d_j, final iteration boardings
    uam_leg_count: int
    final_plans: dict             # agent id -> executed Plan of the final iteration
    events: list                  # event tuples of the final iteration
    vehicles_required: int
    distance_saturated: bool      # diagnostic only, never gates termination


# ---------------------------------------------------------------------------
# trip-level mode availability
# ---------------------------------------------------------------------------

_MODE_ORDER = ("car", "pt", "bike", "walk")


def feasible_modes(scenario: Scenario, has_car: bool, o_act: Activity, d_act: Activity,
                   uam_offered: bool) -> list:
    """Modes available for one trip, by ownership and spatial accessibility.

    walk and bike carry crow-fly range caps, pt needs both trip ends near a pt
    station, car needs ownership. `uam_offered` only adds uam to the candidate
    list; the trip builder still decides feasibility. Falls back to walk when
    nothing else is available.
    """
    cfg = scenario.config
    crow = math.hypot(o_act.x - d_act.x, o_act.y - d_act.y)
    out = []
    if has_car:
        out.append("car")
    if _pt_reachable(cfg, o_act) and _pt_reachable(cfg, d_act):
        out.append("pt")
    if crow <= cfg["bike_max_km"] * 1000.0:
        out.append("bike")
    if crow <= cfg["walk_max_km"] * 1000.0:
        out.append("walk")
    if not out:
        out.append("walk")
    if uam_offered:
        out.append("uam")
    return out


def _pt_reachable(cfg, act) -> bool:
    rad = cfg["pt_access_km"] * 1000.0
    for sx, sy in cfg["pt_stations"]:
        if math.hypot(act.x - sx, act.y - sy) <= rad:
            return True
    return False


# ---------------------------------------------------------------------------
# leg construction
# ---------------------------------------------------------------------------

def _uam_leg_from_trip(trip: UamTrip, dep_time: float) -> Leg:
    detail = {
        "origin_station": trip.origin_station,
        "dest_station": trip.dest_station,
        "access": {"mode": trip.access.mode, "travel_time": trip.access.travel_time,
                   "distance": trip.access.distance, "route": list(trip.access.route)},
        "fly": {"travel_time": trip.fly_time, "distance": trip.fly_distance},
        "egress": {"mode": trip.egress.mode, "travel_time": trip.egress.travel_time,
                   "distance": trip.egress.distance, "route": list(trip.egress.route)},
    }
    return Leg("uam", dep_time, trip.total_time, trip.total_distance, (), detail)


class _TripBuilder:
    """Builds legs against the current travel-time knowledge of one iteration."""

    def __init__(self, scenario, index, active_sites, evtol, ttf=None):
        self.scenario = scenario
        self.index = index
        self.active_sites = active_sites
        self.evtol = evtol
        self.ttf = ttf
        self._dist_route_cache = {}

    def car_leg(self, o_act, d_act, dep_time, weight) -> Leg:
        if weight == "distance":
            key = (o_act.link, d_act.link)
            r = self._dist_route_cache.get(key)
            if r is None:
                r = route_astar(self.index, "car", o_act.link, d_act.link,
                                dep_time, None, weight="distance")
                self._dist_route_cache[key] = r
        else:
            r = route_astar(self.index, "car", o_act.link, d_act.link,
                            dep_time, self.ttf, weight="time")
        return Leg("car", dep_time, r.travel_time, r.distance, r.links)

    def teleport(self, mode_tag, o_act, d_act, dep_time) -> Leg:
        tt, dist = teleport_leg(self.scenario.modes[mode_tag],
                                (o_act.x, o_act.y), (d_act.x, d_act.y))
        return Leg(mode_tag, dep_time, tt, dist)

    def uam_leg(self, o_act, d_act, has_car, dep_time):
        """Leg or UamRejection."""
        trip = build_uam_trip((o_act.x, o_act.y), (d_act.x, d_act.y),
                              o_act.link, d_act.link, self.active_sites, has_car,
                              self.index, self.ttf, self.scenario.modes["walk"],
                              self.evtol, dep_time)
        if isinstance(trip, UamRejection):
            return trip
        return _uam_leg_from_trip(trip, dep_time)

    def build(self, mode_tag, o_act, d_act, has_car, dep_time, weight="time"):
        if mode_tag == "car":
            return self.car_leg(o_act, d_act, dep_time, weight)
        if mode_tag == "uam":
            return self.uam_leg(o_act, d_act, has_car, dep_time)
        return self.teleport(mode_tag, o_act, d_act, dep_time)


def _estimate_utility(leg: Leg, params: ScoringParams, u_tt, consts) -> float:
    u = consts[leg.mode] + u_tt[leg.mode] * leg.travel_time / 3600.0
    if leg.mode == "uam":
        u += params.uam_fare_per_km * leg.uam_detail["fly"]["distance"] / 1000.0
    return u


def initial_plan(agent: Agent, builder: _TripBuilder, params: ScoringParams) -> Plan:
    """Initial daily plan: per trip, the best free-flow mode (uam excluded);
    car legs take the distance-shortest route."""
    u_tt = dict(params.travel_utility)
    consts = dict(params.mode_constant)
    elements = [agent.activities[0]]
    for o_act, d_act in zip(agent.activities, agent.activities[1:]):
        dep = float(o_act.end_time)
        candidates = feasible_modes(builder.scenario, agent.has_car, o_act, d_act, False)
        best = None
        for tag in _MODE_ORDER:
            if tag not in candidates:
                continue
            leg = builder.build(tag, o_act, d_act, agent.has_car, dep,
                                weight="distance" if tag == "car" else "time")
            util = _estimate_utility(leg, params, u_tt, consts)
            if best is None or util > best[0]:
                best = (util, leg)
        elements.append(best[1])
        elements.append(d_act)
    return Plan(elements)


# ---------------------------------------------------------------------------
# mobsim: event-driven point-queue execution
# ---------------------------------------------------------------------------

def _headway_ms(capacity: float) -> int:
    c = max(1, math.floor(capacity))
    return -(-HOUR_MS // c)    # ceil division keeps hourly outflow <= capacity exactly


def execute_mobsim(selected, net_index: NetworkIndex, evtol: EvtolParams):
    """Execute (agent_id, plan) pairs; returns (events, executed) where executed
    maps agent id -> [(dep_ms, arr_ms) per leg].

    Car legs traverse their route under per-link freespeed delay plus a
    token-bucket outflow throttle (FIFO). Teleported and uam legs produce
    analytically timed events; uam car connectors drive on the network.
    """
    link_info = net_index.link_by_id       # id -> (u, v, length, fs_tt)
    fs_ms = {lid: math.ceil(info[3] * 1000.0) for lid, info in link_info.items()}
    headway = {l.id: _headway_ms(l.flow_capacity) for l in net_index.net.links}
    last_grant: dict = {}

    events = []
    executed = {aid: [] for aid, _ in selected}
    heap = []
    seq = 0

    # per-agent interpreter state: [plan, act_idx, program, prog_pos]
    states = {}

    def push(t_ms, aid):
        nonlocal seq
        heapq.heappush(heap, (t_ms, seq, aid))
        seq += 1

    def compile_leg(leg: Leg, leg_idx: int):
        """Instruction list for one leg; each instruction consumes sim time."""
        if leg.mode == "car":
            return [("depart", leg_idx), ("drive", leg.route, "car"), ("arrive", leg_idx)]
        if leg.mode == "uam":
            d = leg.uam_detail
            prog = [("depart", leg_idx)]
            acc = d["access"]
            if acc["mode"] == "car" and acc["route"]:
                prog.append(("drive", tuple(acc["route"]), "uam"))
            else:
                prog.append(("sleep", math.ceil(acc["travel_time"] * 1000.0)))
            prog.append(("board", d["origin_station"]))
            prog.append(("fly", math.ceil(d["fly"]["travel_time"] * 1000.0),
                         d["dest_station"]))
            egr = d["egress"]
            if egr["mode"] == "car" and egr["route"]:
                prog.append(("drive", tuple(egr["route"]), "uam"))
            else:
                prog.append(("sleep", math.ceil(egr["travel_time"] * 1000.0)))
            prog.append(("arrive", leg_idx))
            return prog
        return [("depart", leg_idx),
                ("sleep", math.ceil(leg.travel_time * 1000.0)),
                ("arrive", leg_idx)]

    def enter_link(aid, lid, now, mode_tag):
        events.append((now, "link_enter", aid, lid, mode_tag))
        grant = now + fs_ms[lid]
        prev = last_grant.get(lid)
        if prev is not None:
            grant = max(grant, prev + headway[lid])
        last_grant[lid] = grant
        return grant

    def advance(aid, now):
        st = states[aid]
        plan, prog, pos = st
        while True:
            if pos >= len(prog):
                return
            ins = prog[pos]
            op = ins[0]
            if op == "depart":
                leg = plan.elements[2 * ins[1] + 1]
                executed[aid].append([now, None])
                events.append((now, "departure", aid,
                               plan.elements[2 * ins[1]].link, leg.mode))
                pos += 1
                continue
            if op == "arrive":
                leg_idx = ins[1]
                events.append((now, "arrival", aid, plan.elements[2 * leg_idx + 2].link,
                               plan.elements[2 * leg_idx + 1].mode))
                executed[aid][-1][1] = now
                pos += 1
                st[2] = pos
                continue
            if op == "wait_act":
                # departure happens at the activity end time, or immediately if late
                pos += 1
                st[2] = pos
                push(max(now, ins[1]), aid)
                return
            if op == "sleep":
                pos += 1
                st[2] = pos
                push(now + ins[1], aid)
                return
            if op == "board":
                events.append((now, "uam_board", aid, ins[1], "uam"))
                pos += 1
                continue
            if op == "fly":
                prog[pos] = ("alight", ins[2])
                st[2] = pos
                push(now + ins[1], aid)
                return
            if op == "alight":
                events.append((now, "uam_alight", aid, ins[1], "uam"))
                pos += 1
                continue
            if op == "drive":
                route, mode_tag = ins[1], ins[2]
                if not route:
                    pos += 1
                    continue
                grant = enter_link(aid, route[0], now, mode_tag)
                st[2] = pos
                prog[pos] = ("driving", route, 0, mode_tag)
                push(grant, aid)
                return
            if op == "driving":
                route, i, mode_tag = ins[1], ins[2], ins[3]
                events.append((now, "link_leave", aid, route[i], mode_tag))
                if i + 1 >= len(route):
                    pos += 1
                    st[2] = pos
                    continue
                grant = enter_link(aid, route[i + 1], now, mode_tag)
                prog[pos] = ("driving", route, i + 1, mode_tag)
                push(grant, aid)
                return
            raise SimulationError(f"unknown mobsim op {op}")

    for aid, plan in selected:
        prog = []
        acts = plan.activities()
        legs = plan.legs()
        for i, leg in enumerate(legs):
            end = acts[i].end_time
            prog.append(("wait_act", int(end) * 1000))
            prog.extend(compile_leg(leg, i))
        states[aid] = [plan, prog, 0]

    for aid, _ in selected:
        st = states[aid]
        prog = st[1]
        if prog and prog[0][0] == "wait_act":
            st[2] = 1
            push(prog[0][1], aid)

    while heap:
        now, _, aid = heapq.heappop(heap)
        advance(aid, now)

    return events, executed


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------

def score_plan(plan: Plan, executed, params: ScoringParams) -> float:
    """Utility of an executed plan: log-form activity utility (first and last
    home activities merge into one overnight activity) plus per-leg mode
    constants, travel-time disutility, and the uam distance fare."""
    u_tt = dict(params.travel_utility)
    consts = dict(params.mode_constant)
    acts = plan.activities()
    legs = plan.legs()
    if len(executed) != len(legs):
        raise SimulationError("executed record does not match plan legs")

    score = 0.0
    for leg, (dep_ms, arr_ms) in zip(legs, executed):
        t = (arr_ms - dep_ms) / 1000.0
        if t < 0:
            raise SimulationError("negative executed travel time")
        score += consts[leg.mode] + u_tt[leg.mode] * t / 3600.0
        if leg.mode == "uam":
            score += params.uam_fare_per_km * leg.uam_detail["fly"]["distance"] / 1000.0

    u_perf = params.performing_utility
    for i, act in enumerate(acts):
        if i == 0 or i == len(acts) - 1:
            continue
        arrival = executed[i - 1][1] / 1000.0
        dur = act.end_time - arrival
        score += _activity_term(u_perf, act.typical_duration, dur)

    overnight = acts[0].end_time + (DAY_SECONDS - executed[-1][1] / 1000.0)
    score += _activity_term(u_perf, acts[0].typical_duration, overnight)
    return score


def _activity_term(u_perf, typical, duration):
    t0 = typical * math.exp(-1.0)
    return u_perf * (typical / 3600.0) * math.log(max(duration, 1.0) / t0)


# ---------------------------------------------------------------------------
# selection and replanning
# ---------------------------------------------------------------------------

def select_plan(memory, beta_best: float, rng: random.Random) -> int:
    """Unscored plans first (they must run once); then the best plan with
    probability beta_best, else uniform over memory. Ties go to the lowest index."""
    for i, p in enumerate(memory):
        if p.score is None:
            return i
    if rng.random() < beta_best:
        best = 0
        for i in range(1, len(memory)):
            if memory[i].score > memory[best].score:
                best = i
        return best
    return rng.randrange(len(memory))


def evict_worst(memory, selected: int) -> int:
    """Drop the lowest-scored plan (never an unscored one, so the best scored
    plan always survives) and return the adjusted selected index."""
    scored = [i for i, p in enumerate(memory) if p.score is not None]
    worst = min(scored, key=lambda i: (memory[i].score, i))
    memory.pop(worst)
    if worst == selected:
        return len(memory) - 1
    return selected - 1 if worst < selected else selected


def _copy_plan(plan: Plan) -> Plan:
    els = []
    for el in plan.elements:
        if isinstance(el, Leg):
            els.append(Leg(el.mode, el.departure_time, el.travel_time, el.distance,
                           el.route, el.uam_detail))
        else:
            els.append(el)
    return Plan(els)


def _reroute_plan(plan: Plan, agent, builder: _TripBuilder) -> Plan:
    new = _copy_plan(plan)
    els = new.elements
    for i in range(1, len(els), 2):
        leg = els[i]
        o_act, d_act = els[i - 1], els[i + 1]
        dep = float(o_act.end_time)
        if leg.mode == "car":
            els[i] = builder.car_leg(o_act, d_act, dep, "time")
        elif leg.mode == "uam":
            rebuilt = builder.uam_leg(o_act, d_act, agent.has_car, dep)
            if isinstance(rebuilt, UamRejection):
                rebuilt = _fallback_leg(builder, agent, o_act, d_act, dep)
            els[i] = rebuilt
    return new


def _fallback_leg(builder, agent, o_act, d_act, dep):
    tags = feasible_modes(builder.scenario, agent.has_car, o_act, d_act, False)
    tag = tags[0]
    return builder.build(tag, o_act, d_act, agent.has_car, dep)


def replan(agent, plan: Plan, builder: _TripBuilder, weights, rng: random.Random) -> Plan:
    """One mutated copy of the selected plan: mode resample of one trip, end-time
    shift of one activity, or a full reroute. Infeasible mode draws fall back to
    a reroute of the current plan."""
    w_mode, w_time, _ = weights
    r = rng.random()
    if r < w_mode:
        legs = plan.legs()
        li = rng.randrange(len(legs))
        o_act = plan.elements[2 * li]
        d_act = plan.elements[2 * li + 2]
        offered = bool(builder.active_sites)
        candidates = feasible_modes(builder.scenario, agent.has_car, o_act, d_act, offered)
        tag = candidates[rng.randrange(len(candidates))]
        dep = float(o_act.end_time)
        leg = builder.build(tag, o_act, d_act, agent.has_car, dep)
        if isinstance(leg, UamRejection):
            return _reroute_plan(plan, agent, builder)
        new = _copy_plan(plan)
        new.elements[2 * li + 1] = leg
        return new
    if r < w_mode + w_time:
        acts = plan.activities()
        movable = [i for i, a in enumerate(acts) if a.end_time is not None]
        ai = movable[rng.randrange(len(movable))]
        shift = rng.randint(-1800, 1800)
        act = acts[ai]
        shifted = replace(act, end_time=min(max(act.end_time + shift, 0), DAY_SECONDS))
        new = _copy_plan(plan)
        new.elements[2 * ai] = shifted
        return new
    return _reroute_plan(plan, agent, builder)


# ---------------------------------------------------------------------------
# inner loop
# ---------------------------------------------------------------------------

def run_inner_loop(scenario: Scenario, active_sites, cfg: SimConfig, seed: int) -> EquilibriumResult:
    """Co-evolutionary equilibrium run against a fixed active vertiport set.

    Iteration 0 builds initial plans (distance-shortest car routes, best
    free-flow mode per trip); each of the cfg.inner_iterations executed
    iterations selects, runs the mobsim, scores, and then mutates a share of
    agents. Innovation is disabled in the final iteration.
    """
    rng = random.Random(seed)
    index = NetworkIndex(scenario.network)
    sites = [scenario.candidate_sites[i] for i in sorted(active_sites)]
    active_ids = [s.site_id for s in sites]

    builder0 = _TripBuilder(scenario, index, sites, cfg.evtol, ttf=None)
    sim_agents = []
    for agent in scenario.agents:
        plan = initial_plan(agent, builder0, cfg.scoring)
        sim_agents.append([agent, [plan], 0])     # [agent, memory, selected]

    stats = []
    last_events = []
    ttf = None

    for it in range(1, cfg.inner_iterations + 1):
        for st in sim_agents:
            st[2] = select_plan(st[1], cfg.beta_best, rng)

        selected = [(st[0].id, st[1][st[2]]) for st in sim_agents]
        events, executed = execute_mobsim(selected, index, cfg.evtol)

        total_tt = 0.0
        total_dist = 0.0
        score_sum = 0.0
        for st in sim_agents:
            aid = st[0].id
            plan = st[1][st[2]]
            record = executed[aid]
            plan.score = score_plan(plan, record, cfg.scoring)
            score_sum += plan.score
            for leg, (dep_ms, arr_ms) in zip(plan.legs(), record):
                t = (arr_ms - dep_ms) / 1000.0
                leg.departure_time = dep_ms / 1000.0
                leg.travel_time = t
                total_tt += t
                total_dist += leg.distance
        stats.append(IterationStats(it, total_tt, total_dist,
                                    score_sum / len(sim_agents)))

        ttf = TravelTimeField.from_events(scenario.network, events, cfg.ttf_bin)
        last_events = events

        if it < cfg.inner_iterations:
            builder = _TripBuilder(scenario, index, sites, cfg.evtol, ttf=ttf)
            for st in sim_agents:
                if rng.random() >= cfg.replanning_share:
                    continue
                agent, memory, sel = st
                new_plan = replan(agent, memory[sel], builder,
                                  cfg.strategy_weights, rng)
                memory.append(new_plan)
                if len(memory) > cfg.memory_capacity:
                    st[2] = evict_worst(memory, st[2])

    demand = {}
    for ev in last_events:
        if ev[1] == "uam_board":
            demand[ev[3]] = demand.get(ev[3], 0) + 1
    for sid in demand:
        if sid not in active_ids:
            raise SimulationError(f"uam boarding at inactive station {sid}")
    uam_legs = sum(demand.values())

    final_plans = {st[0].id: st[1][st[2]] for st in sim_agents}
    saturated = _distance_saturated(stats)
    vehicles = _vehicles_required(last_events, cfg.evtol.seats)
    return EquilibriumResult(stats, demand, uam_legs, final_plans, last_events,
                             vehicles, saturated)


def _distance_saturated(stats, tol=0.01, window=3) -> bool:
    if len(stats) < window:
        return False
    tail = [s.total_travel_distance for s in stats[-window:]]
    return all(abs(b - a) <= tol * max(a, 1e-9) for a, b in zip(tail, tail[1:]))


def _vehicles_required(events, seats: int) -> int:
    """ceil(peak concurrent flights / seats); reported statistic only."""
    marks = []
    for ev in events:
        if ev[1] == "uam_board":
            marks.append((ev[0], 1))
        elif ev[1] == "uam_alight":
            marks.append((ev[0], -1))
    marks.sort()
    peak = cur = 0
    for _, d in marks:
        cur += d
        peak = max(peak, cur)
    return -(-peak // seats)


# ---------------------------------------------------------------------------
# invariant checkers (used by tests and the acceptance suite)
# ---------------------------------------------------------------------------

def verify_event_conservation(events, final_links: Optional[dict] = None) -> None:
    """Per agent: one arrival per departure, non-decreasing times, and (when
    `final_links` is given) the day ends at the expected activity link."""
    per_agent: dict = {}
    for ev in events:
        t, kind, aid = ev[0], ev[1], ev[2]
        rec = per_agent.setdefault(aid, [0, 0, -1, None])
        if t < rec[2]:
            raise SimulationError(f"agent {aid}: event times decrease at {kind}")
        rec[2] = t
        if kind == "departure":
            rec[0] += 1
        elif kind == "arrival":
            rec[1] += 1
            rec[3] = ev[3]
    for aid, (dep, arr, _, last_link) in per_agent.items():
        if dep != arr:
            raise SimulationError(f"agent {aid}: {dep} departures vs {arr} arrivals")
        if final_links is not None and aid in final_links and last_link != final_links[aid]:
            raise SimulationError(
                f"agent {aid}: ended on link {last_link}, expected {final_links[aid]}")


def verify_flow_bound(events, net) -> None:
    """Exact hourly outflow bound: every link, every rolling 1-hour window
    (half-open, milliseconds) sees at most flow_capacity link_leave events."""
    leaves: dict = {}
    for ev in events:
        if ev[1] == "link_leave":
            leaves.setdefault(ev[3], []).append(ev[0])
    caps = {l.id: l.flow_capacity for l in net.links}
    for lid, times in leaves.items():
        cap = caps[lid]
        lo = 0
        for hi in range(len(times)):
            while times[hi] - times[lo] >= HOUR_MS:
                lo += 1
            if hi - lo + 1 > cap:
                raise SimulationError(
                    f"link {lid}: {hi - lo + 1} departures within one hour exceeds "
                    f"capacity {cap}")
