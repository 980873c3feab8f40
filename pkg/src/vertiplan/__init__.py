"""Bi-level vertiport network design: an NSGA-II outer search over binary
site-activation genomes, evaluated by an inner activity-based transport
microsimulation that co-evolves agent plans to equilibrium, with a static
maximal-coverage baseline for comparison."""

from .baseline import CoverageInstance, coverage, greedy_max_cover, hcm_solution_to_genome
from .metrics import ComparisonReport, build_comparison, normalize_demand, ptds, ttts
from .optimizer import (NsgaConfig, NsgaResult, ParetoFront, crowding_distance,
                        evaluate_genome, knee_point, make_coverage_evaluator,
                        make_simulation_evaluator, non_dominated_sort, repair, run_nsga2)
from .router import Route, TravelTimeField, UnreachableError, route_astar, teleport_leg
from .scenario import (Activity, Agent, CandidateSites, GeneratorConfig, Leg, Link, Mode,
                       Network, Node, Plan, Scenario, ScenarioError, derive_candidate_sites,
                       generate_scenario, load_scenario, save_scenario, scale_capacities,
                       validate_plan, validate_scenario)
from .simulator import (EquilibriumResult, IterationStats, ScoringParams, SimConfig,
                        execute_mobsim, feasible_modes, replan, run_inner_loop, score_plan,
                        select_plan, verify_event_conservation, verify_flow_bound)
from .uam import (EvtolParams, UamRejection, UamTrip, build_uam_trip, count_station_demand,
                  export_active_network_geojson)

__version__ = "0.1.0"
