"""Watch the inner loop converge under congestion.

Initial plans put every car on its shortest-distance route. With link outflow
capped, those routes queue badly; iteration by iteration agents reroute onto
longer-but-faster paths, shift departure times, or change modes. Aggregate
travel time falls while aggregate distance rises, and the gap between the
first and last iteration's distance is the potential travel distance saving
(PTDS). On an uncapacitated copy of the same network the series stay flat and
PTDS is near zero.

Run:  python demos/02_congestion_equilibrium.py
"""

from vertiplan import (GeneratorConfig, SimConfig, generate_scenario, run_inner_loop,
                       scale_capacities)
from vertiplan.exports import svg_plot, write_svg
from vertiplan.metrics import ptds

cfg = GeneratorConfig(
    n_agents=900, n_clusters=5, extent_km=(150.0, 70.0), grid_spacing_km=9.0,
    cluster_sigma_km=2.5, cluster_min_sep_km=25.0, cross_cluster_prob=0.5,
    link_capacity=15.0, backbone_capacity=40.0, pt_station_every=3)

scenario = generate_scenario(cfg, seed=7)

print("congested network, no UAM supply, 10 iterations:")
res = run_inner_loop(scenario, [], SimConfig(), seed=1)
print(f"{'iter':>4} {'time [h]':>10} {'distance [km]':>14} {'mean score':>11}")
for s in res.stats:
    print(f"{s.iteration:>4} {s.total_travel_time / 3600:>10.1f} "
          f"{s.total_travel_distance / 1000:>14.0f} {s.mean_executed_score:>11.2f}")
print(f"PTDS: {ptds(res.stats) / 1000:.0f} km "
      f"({100 * ptds(res.stats) / res.stats[0].total_travel_distance:.2f}% of day one)")
print(f"distance saturated (last 3 iters within 1%): {res.distance_saturated}")

print("\nsame demand on an uncapacitated network:")
free = scale_capacities(scenario, 1e6)
res_free = run_inner_loop(free, [], SimConfig(), seed=1)
first, last = res_free.stats[0], res_free.stats[-1]
print(f"time  h:  {first.total_travel_time / 3600:.1f} -> {last.total_travel_time / 3600:.1f}")
print(f"dist km:  {first.total_travel_distance / 1000:.0f} -> "
      f"{last.total_travel_distance / 1000:.0f}")
print(f"PTDS: {100 * ptds(res_free.stats) / first.total_travel_distance:.3f}% (ideal network)")

iters = [s.iteration for s in res.stats]
svg = svg_plot(
    [{"x": iters, "y": [s.total_travel_time / 3600 for s in res.stats],
      "label": "congested time [h]", "kind": "line"},
     {"x": iters, "y": [s.total_travel_distance / 1e6 for s in res.stats],
      "label": "congested distance [1000 km]", "kind": "line"}],
    title="Co-evolution to equilibrium", xlabel="iteration", ylabel="aggregate")
write_svg("/tmp/demo_convergence.svg", svg)
print("\nwrote /tmp/demo_convergence.svg")
