"""Build a synthetic region and look around it.

The world model is a planar road network (perturbed grid plus a long-distance
backbone chaining the population centers), a population of agents with daily
activity chains, and candidate vertiport sites obtained by k-means clustering
of the agents' home locations. Everything is deterministic in (config, seed).

Run:  python demos/01_build_a_region.py
"""

import collections

from vertiplan import GeneratorConfig, generate_scenario, load_scenario, save_scenario

cfg = GeneratorConfig(
    n_agents=600,
    n_clusters=6,
    extent_km=(150.0, 70.0),
    grid_spacing_km=9.0,
    cluster_min_sep_km=25.0,
    cross_cluster_prob=0.5,
    candidate_k=40,
)

scenario = generate_scenario(cfg, seed=2024)

print(f"agents:           {len(scenario.agents)}")
print(f"network:          {len(scenario.network.nodes)} nodes, "
      f"{len(scenario.network.links)} links")
print(f"candidate sites:  {len(scenario.candidate_sites)} "
      f"(k-means of homes, min separation {cfg.min_separation_m:.0f} m)")

# activity mix of the generated chains
kinds = collections.Counter(act.kind for a in scenario.agents for act in a.activities)
print("activity counts: ", dict(sorted(kinds.items())))

# how long are the trips between consecutive activities?
import math
crow = []
for a in scenario.agents:
    for o, d in zip(a.activities, a.activities[1:]):
        crow.append(math.hypot(o.x - d.x, o.y - d.y) / 1000.0)
crow.sort()
print(f"trips:            {len(crow)}, median {crow[len(crow) // 2]:.1f} km, "
      f"p90 {crow[int(0.9 * len(crow))]:.1f} km")

# car ownership drives mode availability later on
owners = sum(a.has_car for a in scenario.agents)
print(f"car ownership:    {owners / len(scenario.agents):.0%}")

# scenarios are single JSON files; the round trip is identity
save_scenario(scenario, "/tmp/demo_region.json")
again = load_scenario("/tmp/demo_region.json")
assert again == scenario
print("saved and reloaded /tmp/demo_region.json (structurally identical)")
