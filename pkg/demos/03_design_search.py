"""Search vertiport networks with NSGA-II.

Two evaluators drive the same search machinery. The static coverage surrogate
(homes within a radius of an open site) is cheap and lets us check the search
against exhaustive enumeration. The dynamic evaluator runs the full inner-loop
simulation per genome and captures behavioral demand: station placements only
earn f1 when agents actually choose to fly at equilibrium.

Run:  python demos/03_design_search.py      (about a minute)
"""

import itertools

from vertiplan import GeneratorConfig, NsgaConfig, SimConfig, generate_scenario, run_nsga2
from vertiplan.exports import pareto_csv, write_json
from vertiplan.optimizer import make_coverage_evaluator, pareto_filter
from vertiplan.uam import export_active_network_geojson

small = generate_scenario(GeneratorConfig(
    n_agents=60, n_clusters=3, extent_km=(100.0, 50.0), grid_spacing_km=10.0,
    cluster_min_sep_km=25.0, cross_cluster_prob=0.6, candidate_k=8), seed=23)

# --- surrogate search, checked against the exhaustively enumerated truth -----
ev = make_coverage_evaluator(small, covering_distance=12000.0)
truth = set(pareto_filter(
    [ev(tuple(1 if i in combo else 0 for i in range(8)))
     for c in range(1, 5) for combo in itertools.combinations(range(8), c)]))
res = run_nsga2(small, NsgaConfig(generations=60, population=24, max_active=4,
                                  seed=1, eval_seed=1), evaluator=ev)
found = set((m.f1, m.f2) for m in res.front.members)
print(f"surrogate search: found {sorted(found)}")
print(f"enumerated truth: {sorted(truth)}  -> match: {found == truth}")

# --- simulation-backed search on a congested region --------------------------
region = generate_scenario(GeneratorConfig(
    n_agents=500, n_clusters=4, extent_km=(140.0, 60.0), grid_spacing_km=9.0,
    cluster_sigma_km=2.5, cluster_min_sep_km=28.0, cross_cluster_prob=0.5,
    link_capacity=15.0, backbone_capacity=40.0, pt_station_every=3,
    candidate_k=30), seed=5)

nsga = run_nsga2(region, NsgaConfig(generations=6, population=8, max_active=12,
                                    seed=5, eval_seed=5), SimConfig())
front = nsga.front
print(f"\nsimulation-backed front ({len(front.members)} designs, "
      f"{len(nsga.evaluations)} genomes evaluated):")
print(f"{'demand':>7} {'norm':>6} {'ports':>6} {'flags'}")
for m in front.members:
    flags = "".join(("F1* " if m.is_extreme_f1 else "",
                     "F2* " if m.is_extreme_f2 else "",
                     "knee" if m.is_knee else ""))
    print(f"{m.f1:>7.0f} {m.f1_normalized:>6.2f} {m.f2:>6} {flags}")

pareto_csv("/tmp/demo_pareto.csv", front)
knee_sites = [i for i, b in enumerate(front.knee.bits) if b]
write_json("/tmp/demo_knee_network.geojson",
           export_active_network_geojson(region, knee_sites))
print("\nwrote /tmp/demo_pareto.csv and /tmp/demo_knee_network.geojson")
