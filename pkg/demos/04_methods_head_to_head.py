"""Bi-level optimization versus the static coverage baseline, head to head.

The baseline opens the p sites that greedily maximize how many homes sit
within a covering radius; it knows where people live but not how they behave.
The bi-level method's knee-point design is evolved directly against simulated
equilibrium demand. Both designs get the same number of ports and the same
evaluation seed, and are scored against a shared no-UAM reference run: demand
normalized by the front maximum, total travel time savings (TTTS) in percent.

Run:  python demos/04_methods_head_to_head.py      (several minutes)
"""

from vertiplan import (GeneratorConfig, NsgaConfig, SimConfig, build_comparison,
                       generate_scenario, run_nsga2)
from vertiplan.baseline import greedy_max_cover, hcm_solution_to_genome, \
    instance_from_scenario
from vertiplan.exports import comparison_csv

region = generate_scenario(GeneratorConfig(
    n_agents=700, n_clusters=5, extent_km=(150.0, 70.0), grid_spacing_km=9.0,
    cluster_sigma_km=2.5, cluster_min_sep_km=25.0, cross_cluster_prob=0.5,
    link_capacity=15.0, backbone_capacity=40.0, pt_station_every=3,
    candidate_k=40), seed=11)

sim_cfg = SimConfig()
nsga = run_nsga2(region, NsgaConfig(generations=10, population=8, max_active=20,
                                    seed=11, eval_seed=11), sim_cfg)
knee = nsga.front.knee
print(f"front of {len(nsga.front.members)} designs; knee uses {knee.f2} ports "
      f"for {knee.f1:.0f} trips ({knee.f1_normalized:.0%} of the front maximum)")

# the baseline gets exactly the knee's port budget
inst = instance_from_scenario(region, p=knee.f2, covering_distance=10000.0)
order, gains = greedy_max_cover(inst)
hcm_bits = hcm_solution_to_genome(order, region.candidate_sites)
print(f"coverage baseline opens {len(order)} sites covering {sum(gains)} homes")

report = build_comparison(region, knee.bits, hcm_bits, sim_cfg, seed=11,
                          f1_max=nsga.front.f1_max)
print(f"\n{'method':>8} {'demand':>7} {'demand %':>9} {'TTTS %':>7} {'ports':>6}")
for row in report.rows:
    print(f"{row.method:>8} {row.demand:>7.0f} {100 * row.demand_normalized:>9.1f} "
          f"{row.ttts_percent:>7.2f} {row.port_count:>6}")

comparison_csv("/tmp/demo_comparison.csv", report)
print("\nwrote /tmp/demo_comparison.csv")
