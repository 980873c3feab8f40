"""Evaluation quantities: potential travel distance savings, total travel time
savings, demand normalization, and the two-method comparison report."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .scenario import Scenario, scenario_to_dict
from .simulator import EquilibriumResult, SimConfig, run_inner_loop


def ptds(stats) -> float:
    """Potential travel distance savings: total distance of the last iteration
    minus the first, meters. Zero on an ideal (uncongested) network."""
    if len(stats) < 2:
        raise ValueError("ptds needs at least two iterations")
    return stats[-1].total_travel_distance - stats[0].total_travel_distance


def ttts(total_time_with_uam: float, total_time_without: float) -> float:
    """Total travel time savings, percent of the no-UAM reference."""
    if total_time_without <= 0:
        raise ValueError("reference travel time must be positive")
    return 100.0 * (total_time_without - total_time_with_uam) / total_time_without


def normalize_demand(f1: float, f1_max: float) -> float:
    if f1_max <= 0:
        raise ValueError("f1_max must be positive")
    return f1 / f1_max


@dataclass
class MethodRow:
    method: str
    demand: float              # total UAM trips at equilibrium
    demand_normalized: float   # fraction of f1_max
    ttts_percent: float
    port_count: int
    station_demand: dict


@dataclass
class ComparisonReport:
    rows: list                 # MethodRow for ab_ndp and hcm
    f1_max: float
    total_time_without_uam: float
    seed: int
    scenario_hash: str
    sim_config_hash: str

    def row(self, method: str) -> MethodRow:
        return next(r for r in self.rows if r.method == method)


def _digest(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, default=str).encode()).hexdigest()[:16]


def comparison_from_results(scenario: Scenario, sim_cfg: SimConfig, seed: int,
                            reference: EquilibriumResult, method_results,
                            f1_max: float = None) -> ComparisonReport:
    """Assemble the report from already-run equilibria. `method_results` maps
    method name -> (genome, EquilibriumResult or None for an empty genome)."""
    t_without = reference.stats[-1].total_travel_time
    demands = {}
    for method, (genome, res) in method_results.items():
        ports = sum(1 for b in genome if b)
        if res is None:
            demands[method] = (0.0, t_without, ports, {})
        else:
            demands[method] = (float(sum(res.station_demand.values())),
                               res.stats[-1].total_travel_time, ports,
                               dict(sorted(res.station_demand.items())))

    norm = f1_max if f1_max is not None else max(d[0] for d in demands.values())
    rows = []
    for method in ("ab_ndp", "hcm"):
        demand, t_with, ports, station_demand = demands[method]
        rows.append(MethodRow(
            method, demand,
            normalize_demand(demand, norm) if norm > 0 else 0.0,
            ttts(t_with, t_without), ports, station_demand))

    return ComparisonReport(rows, norm, t_without, seed,
                            _digest(scenario_to_dict(scenario)),
                            _digest(repr(sim_cfg)))


def build_comparison(scenario: Scenario, ab_genome, hcm_genome, sim_cfg: SimConfig,
                     seed: int, f1_max: float = None) -> ComparisonReport:
    """Three paired inner-loop runs on one seed (no-UAM reference, bi-level
    genome, coverage genome) assembled into a table-style report.

    f1_max defaults to the larger of the two methods' demands when no front
    maximum is supplied.
    """
    reference = run_inner_loop(scenario, [], sim_cfg, seed)
    method_results = {}
    for method, genome in (("ab_ndp", ab_genome), ("hcm", hcm_genome)):
        active = [i for i, b in enumerate(genome) if b]
        res = run_inner_loop(scenario, active, sim_cfg, seed) if active else None
        method_results[method] = (tuple(genome), res)
    return comparison_from_results(scenario, sim_cfg, seed, reference,
                                   method_results, f1_max)
