"""Outer loop: NSGA-II over binary site-activation genomes with a cardinality
cap, evaluated either by the dynamic inner-loop simulation or by a static
coverage surrogate.

Objectives are (maximize served UAM demand, minimize active vertiports);
internally both are minimized as (-f1, f2). Evaluations are memoized by genome
bits and share one evaluation seed per run, so objective differences reflect
genome differences rather than simulation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .scenario import Scenario
from .simulator import SimConfig, run_inner_loop


@dataclass(frozen=True)
class NsgaConfig:
    generations: int = 50
    population: int = 10
    crossover_rate: float = 0.9
    mutation_rate: Optional[float] = None    # default 1/|sites|
    tournament_size: int = 2
    max_active: int = 25                     # cardinality cap P
    seed: int = 0                            # GA stream
    eval_seed: int = 0                       # shared by every inner-loop evaluation

    def __post_init__(self):
        if self.population % 2 != 0:
            raise ValueError("population must be even")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


@dataclass(frozen=True)
class FrontMember:
    bits: tuple
    f1: float
    f2: int
    f1_normalized: float
    is_extreme_f1: bool = False
    is_extreme_f2: bool = False
    is_knee: bool = False


@dataclass
class ParetoFront:
    members: list            # FrontMember, sorted by (f2, -f1)
    f1_max: float

    @property
    def extreme_f1(self):
        return next(m for m in self.members if m.is_extreme_f1)

    @property
    def extreme_f2(self):
        return next(m for m in self.members if m.is_extreme_f2)

    @property
    def knee(self):
        return next(m for m in self.members if m.is_knee)


@dataclass
class NsgaResult:
    front: ParetoFront
    generation_log: list     # (generation, best_f1, min_f2, hypervolume) per generation
    evaluations: dict        # bits -> (f1, f2), everything ever evaluated


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

def make_simulation_evaluator(scenario: Scenario, sim_cfg: SimConfig,
                              eval_seed: int) -> Callable:
    """Dynamic evaluator: f1 = total station demand at inner-loop equilibrium."""
    def evaluate(bits: tuple):
        active = [i for i, b in enumerate(bits) if b]
        f2 = len(active)
        if not active:
            return 0.0, 0
        res = run_inner_loop(scenario, active, sim_cfg, eval_seed)
        return float(sum(res.station_demand.values())), f2
    return evaluate


def make_coverage_evaluator(scenario: Scenario, covering_distance: float = 10000.0) -> Callable:
    """Static surrogate: f1 = number of agent homes within covering_distance of
    an active site. Monotone in the active set; used for oracle-checked tests
    and the coverage-baseline harness."""
    homes = np.array([a.home for a in scenario.agents])
    sites = np.array([[s.x, s.y] for s in scenario.candidate_sites])
    covered = []
    for sx, sy in sites:
        d2 = (homes[:, 0] - sx) ** 2 + (homes[:, 1] - sy) ** 2
        covered.append(d2 <= covering_distance ** 2)
    covered = np.array(covered)

    def evaluate(bits: tuple):
        mask = np.zeros(len(homes), dtype=bool)
        for i, b in enumerate(bits):
            if b:
                mask |= covered[i]
        return float(mask.sum()), int(sum(bits))
    return evaluate


def evaluate_genome(genome, scenario: Scenario, sim_cfg: SimConfig, seed: int):
    """(f1, f2) for one genome via the inner loop; f2 is the popcount."""
    return make_simulation_evaluator(scenario, sim_cfg, seed)(tuple(genome))


# ---------------------------------------------------------------------------
# NSGA-II machinery
# ---------------------------------------------------------------------------

def repair(genome: np.ndarray, max_active: int, rng: np.random.Generator) -> np.ndarray:
    """Clear uniformly random set bits until popcount <= max_active. All-zero
    genomes get one random bit so every individual offers some supply."""
    g = np.array(genome, dtype=np.uint8)
    on = np.flatnonzero(g)
    while len(on) > max_active:
        pick = int(rng.integers(len(on)))
        g[on[pick]] = 0
        on = np.delete(on, pick)
    if len(on) == 0 and len(g) > 0:
        g[int(rng.integers(len(g)))] = 1
    return g


def dominates(a, b) -> bool:
    """Internal minimized objectives: a dominates b iff <= in both, < in one."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def non_dominated_sort(points) -> list:
    """Fast non-dominated sorting of (f1min, f2min) points into index fronts."""
    n = len(points)
    dominated_by: list = [[] for _ in range(n)]
    counts = [0] * n
    fronts = [[]]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if dominates(points[i], points[j]):
                dominated_by[i].append(j)
            elif dominates(points[j], points[i]):
                counts[i] += 1
        if counts[i] == 0:
            fronts[0].append(i)
    k = 0
    while fronts[k]:
        nxt = []
        for i in fronts[k]:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        k += 1
        fronts.append(sorted(nxt))
    fronts.pop()
    return fronts


def crowding_distance(points) -> list:
    """Canonical per-objective normalized neighbor-gap sums; boundaries get inf."""
    n = len(points)
    if n <= 2:
        return [math.inf] * n
    dist = [0.0] * n
    for obj in range(len(points[0])):
        order = sorted(range(n), key=lambda i: points[i][obj])
        dist[order[0]] = dist[order[-1]] = math.inf
        lo, hi = points[order[0]][obj], points[order[-1]][obj]
        if hi == lo:
            continue
        for k in range(1, n - 1):
            if dist[order[k]] != math.inf:
                dist[order[k]] += (points[order[k + 1]][obj] - points[order[k - 1]][obj]) / (hi - lo)
    return dist


def hypervolume_2d(points, ref=(0.0, 26.0)) -> float:
    """Dominated area for (maximize f1, minimize f2) against ref (f1_ref, f2_ref)."""
    front = [p for p in pareto_filter(points) if p[0] > ref[0] and p[1] < ref[1]]
    front.sort()
    hv = 0.0
    prev_f1 = ref[0]
    for f1, f2 in front:
        hv += (f1 - prev_f1) * (ref[1] - f2)
        prev_f1 = f1
    return hv


def pareto_filter(points) -> list:
    """Non-dominated subset of (f1max, f2min) pairs, duplicates collapsed."""
    uniq = sorted(set((float(f1), f2) for f1, f2 in points), key=lambda p: (-p[0], p[1]))
    out = []
    best_f2 = math.inf
    for f1, f2 in uniq:
        if f2 < best_f2:
            out.append((f1, f2))
            best_f2 = f2
    return out


def knee_point(front_points) -> int:
    """Index of the knee: maximum perpendicular distance to the chord joining
    the extremes after per-objective normalization to [0, 1]. Fronts with <= 2
    points return the max-f1 extreme; ties go to larger f1."""
    pts = [(float(f1), float(f2)) for f1, f2 in front_points]
    i_f1 = max(range(len(pts)), key=lambda i: (pts[i][0], -pts[i][1]))
    if len(pts) <= 2:
        return i_f1
    f1s = [p[0] for p in pts]
    f2s = [p[1] for p in pts]
    lo1, hi1 = min(f1s), max(f1s)
    lo2, hi2 = min(f2s), max(f2s)
    span1 = hi1 - lo1 or 1.0
    span2 = hi2 - lo2 or 1.0
    norm = [((p[0] - lo1) / span1, (p[1] - lo2) / span2) for p in pts]
    i_f2 = min(range(len(pts)), key=lambda i: (pts[i][1], -pts[i][0]))
    ax, ay = norm[i_f1]
    bx, by = norm[i_f2]
    chord = math.hypot(bx - ax, by - ay)
    if chord == 0.0:
        return i_f1
    best = None
    for i, (x, y) in enumerate(norm):
        d = abs((bx - ax) * (ay - y) - (ax - x) * (by - ay)) / chord
        key = (d, pts[i][0])
        if best is None or key > best[0]:
            best = (key, i)
    return best[1]


def build_front(evaluations: dict) -> ParetoFront:
    """Assemble the first front (with extremes, knee, and normalization) from a
    bits -> (f1, f2) evaluation map. One representative genome (smallest bit
    pattern) is kept per non-dominated objective vector."""
    items = sorted(evaluations.items())
    objs = [(-f1, f2) for _, (f1, f2) in items]
    fronts = non_dominated_sort(objs)
    first = fronts[0] if fronts else []
    seen = set()
    unique = []
    for i in sorted(first, key=lambda i: items[i][0]):
        key = items[i][1]
        if key not in seen:
            seen.add(key)
            unique.append(i)
    chosen = sorted(unique, key=lambda i: (items[i][1][1], -items[i][1][0], items[i][0]))
    f1_max = max((items[i][1][0] for i in chosen), default=0.0)

    points = [(items[i][1][0], items[i][1][1]) for i in chosen]
    i_f1 = max(range(len(chosen)), key=lambda k: (points[k][0], -points[k][1]))
    i_f2 = min(range(len(chosen)), key=lambda k: (points[k][1], -points[k][0]))
    i_knee = knee_point(points)

    members = []
    for k, i in enumerate(chosen):
        bits, (f1, f2) = items[i]
        members.append(FrontMember(
            bits, f1, int(f2), f1 / f1_max if f1_max > 0 else 0.0,
            is_extreme_f1=(k == i_f1), is_extreme_f2=(k == i_f2), is_knee=(k == i_knee)))
    return ParetoFront(members, f1_max)


def run_nsga2(scenario: Scenario, nsga_cfg: NsgaConfig, sim_cfg: Optional[SimConfig] = None,
              evaluator: Optional[Callable] = None) -> NsgaResult:
    """NSGA-II search over site-activation genomes.

    Binary tournament on (rank, crowding), uniform crossover, per-bit flip
    mutation, random-deactivation repair, then (mu+lambda) environmental
    selection. The returned front is the non-dominated set over every genome
    evaluated during the run.
    """
    n = len(scenario.candidate_sites)
    if n == 0:
        raise ValueError("scenario has no candidate sites")
    if evaluator is None:
        evaluator = make_simulation_evaluator(scenario, sim_cfg or SimConfig(),
                                              nsga_cfg.eval_seed)
    rng = np.random.default_rng(nsga_cfg.seed)
    p_mut = nsga_cfg.mutation_rate if nsga_cfg.mutation_rate is not None else 1.0 / n
    pop_size = nsga_cfg.population
    P = nsga_cfg.max_active

    memo: dict = {}

    def evaluate(g: np.ndarray):
        key = tuple(int(b) for b in g)
        if key not in memo:
            if sum(key) > P:
                raise RuntimeError("unrepaired genome reached evaluation")
            memo[key] = evaluator(key)
        return memo[key]

    population = []
    for _ in range(pop_size):
        g = np.zeros(n, dtype=np.uint8)
        c = int(rng.integers(1, min(P, n) + 1))
        g[rng.choice(n, size=c, replace=False)] = 1
        population.append(g)

    objs = [evaluate(g) for g in population]

    log = []

    def rank_and_crowd(objectives):
        pts = [(-f1, f2) for f1, f2 in objectives]
        fronts = non_dominated_sort(pts)
        rank = [0] * len(pts)
        crowd = [0.0] * len(pts)
        for fi, fr in enumerate(fronts):
            cd = crowding_distance([pts[i] for i in fr])
            for j, i in enumerate(fr):
                rank[i] = fi
                crowd[i] = cd[j]
        return fronts, rank, crowd

    def log_generation(gen):
        best_f1 = max(f1 for f1, _ in memo.values())
        min_f2 = min(f2 for _, f2 in memo.values())
        hv = hypervolume_2d(memo.values(), ref=(0.0, float(P + 1)))
        log.append((gen, best_f1, min_f2, hv))

    log_generation(0)

    for gen in range(1, nsga_cfg.generations + 1):
        _, rank, crowd = rank_and_crowd(objs)

        def tournament():
            picks = rng.integers(pop_size, size=nsga_cfg.tournament_size)
            best = int(picks[0])
            for idx in picks[1:]:
                idx = int(idx)
                if (rank[idx], -crowd[idx]) < (rank[best], -crowd[best]):
                    best = idx
            return best

        offspring = []
        while len(offspring) < pop_size:
            a = population[tournament()].copy()
            b = population[tournament()].copy()
            if rng.random() < nsga_cfg.crossover_rate:
                mask = rng.random(n) < 0.5
                a[mask], b[mask] = b[mask].copy(), a[mask].copy()
            for child in (a, b):
                flips = rng.random(n) < p_mut
                child[flips] ^= 1
                offspring.append(repair(child, P, rng))
        offspring = offspring[:pop_size]

        combined = population + offspring
        combined_objs = objs + [evaluate(g) for g in offspring]
        fronts, _, _ = rank_and_crowd(combined_objs)

        next_pop = []
        for fr in fronts:
            if len(next_pop) + len(fr) <= pop_size:
                next_pop.extend(fr)
            else:
                pts = [(-combined_objs[i][0], combined_objs[i][1]) for i in fr]
                cd = crowding_distance(pts)
                order = sorted(range(len(fr)), key=lambda j: (-cd[j], fr[j]))
                next_pop.extend(fr[j] for j in order[:pop_size - len(next_pop)])
                break
        population = [combined[i] for i in next_pop]
        objs = [combined_objs[i] for i in next_pop]
        log_generation(gen)

    return NsgaResult(build_front(memo), log, dict(memo))
