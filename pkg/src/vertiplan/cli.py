"""Command-line front end: generate scenarios, run inner-loop simulations,
optimize vertiport networks, compute the coverage baseline, and compare methods.

All randomness flows from explicit --seed flags; every command writes a
manifest next to its outputs so runs are reproducible from the manifest alone.
Exit codes: 0 success, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import exports
from .baseline import greedy_max_cover, hcm_solution_to_genome, instance_from_scenario
from .metrics import build_comparison
from .optimizer import NsgaConfig, make_coverage_evaluator, run_nsga2
from .scenario import (GeneratorConfig, ScenarioError, generate_scenario,
                       load_scenario, save_scenario)
from .simulator import EvtolParams, ScoringParams, SimConfig, run_inner_loop
from .uam import export_active_network_geojson

VERSION = "0.1.0"


class CliError(Exception):
    pass


def derive_seed(master: int, label: str) -> int:
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON (line {exc.lineno}: {exc.msg})") from exc


def load_generator_config(path) -> GeneratorConfig:
    if path is None:
        return GeneratorConfig()
    doc = _load_json(path)
    try:
        if "extent_km" in doc:
            doc["extent_km"] = tuple(doc["extent_km"])
        if "activity_mix" in doc:
            doc["activity_mix"] = tuple((k, float(v)) for k, v in doc["activity_mix"])
        return GeneratorConfig(**doc)
    except TypeError as exc:
        raise CliError(f"{path}: bad generator config: {exc}") from exc


def load_sim_config(path) -> SimConfig:
    if path is None:
        return SimConfig()
    doc = _load_json(path)
    try:
        if "scoring" in doc:
            sc = doc["scoring"]
            for key in ("travel_utility", "mode_constant"):
                if key in sc:
                    sc[key] = tuple((k, float(v)) for k, v in sc[key])
            doc["scoring"] = ScoringParams(**sc)
        if "evtol" in doc:
            doc["evtol"] = EvtolParams(**doc["evtol"])
        if "strategy_weights" in doc:
            doc["strategy_weights"] = tuple(doc["strategy_weights"])
        return SimConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: bad sim config: {exc}") from exc


def load_nsga_config(path, seed: int) -> NsgaConfig:
    doc = _load_json(path) if path else {}
    doc.setdefault("seed", seed)
    doc.setdefault("eval_seed", derive_seed(seed, "eval"))
    try:
        return NsgaConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: bad nsga config: {exc}") from exc


def _write_manifest(out_dir, command, args, seeds, inputs, outputs, started):
    doc = {
        "command": command,
        "config": getattr(args, "config", None),
        "seeds": seeds,
        "inputs": {k: os.path.abspath(v) for k, v in inputs.items()},
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "tool_version": VERSION,
        "scenario_hash": (exports.file_sha256(inputs["scenario"])
                          if "scenario" in inputs else None),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    exports.write_json(os.path.join(out_dir, "manifest.json"), doc)


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _load_scenario_arg(args):
    try:
        return load_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise CliError(f"scenario file not found: {args.scenario}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    started = time.monotonic()
    cfg = load_generator_config(args.config)
    scenario = generate_scenario(cfg, args.seed)
    out = _out_dir(args)
    path = os.path.join(out, "scenario.json")
    save_scenario(scenario, path)
    _write_manifest(out, "generate", args, {"seed": args.seed}, {}, [path], started)
    print(f"scenario: {len(scenario.agents)} agents, {len(scenario.network.links)} links, "
          f"{len(scenario.candidate_sites)} candidate sites -> {path}")
    return 0


def _active_sites_from_args(args, scenario):
    if args.no_uam:
        return []
    if args.sites is None:
        raise CliError("simulate needs --sites GENOME or --no-uam")
    bits = exports.load_genome(args.sites)
    if len(bits) != len(scenario.candidate_sites):
        raise CliError(f"genome length {len(bits)} does not match "
                       f"{len(scenario.candidate_sites)} candidate sites")
    return [i for i, b in enumerate(bits) if b]


def cmd_simulate(args) -> int:
    started = time.monotonic()
    scenario = _load_scenario_arg(args)
    sim_cfg = load_sim_config(args.config)
    active = _active_sites_from_args(args, scenario)
    out = _out_dir(args)

    stats_rows, demand_rows = [], []
    outputs = []
    events_path = None
    for rep in range(args.replications):
        seed = args.seed if rep == 0 else derive_seed(args.seed, f"rep{rep}")
        res = run_inner_loop(scenario, active, sim_cfg, seed)
        stats_rows.append((rep, res.stats))
        demand_rows.append((rep, res.station_demand))
        if rep == 0:
            if args.events:
                events_path = os.path.join(out, "events.csv")
                exports.events_csv(events_path, res.events)
                outputs.append(events_path)
            first = res

    stats_path = os.path.join(out, "stats.csv")
    demand_path = os.path.join(out, "station_demand.csv")
    exports.stats_csv(stats_path, stats_rows)
    exports.demand_csv(demand_path, demand_rows)
    outputs.extend([stats_path, demand_path])

    iters = [s.iteration for s in first.stats]
    svg = exports.svg_plot(
        [{"x": iters, "y": [s.total_travel_time / 3600.0 for s in first.stats],
          "label": "total travel time [h]", "kind": "line"},
         {"x": iters, "y": [s.total_travel_distance / 1e6 for s in first.stats],
          "label": "total distance [1000 km]", "kind": "line"}],
        title="Inner-loop convergence", xlabel="iteration", ylabel="aggregate")
    svg_path = os.path.join(out, "convergence.svg")
    exports.write_svg(svg_path, svg)
    outputs.append(svg_path)

    _write_manifest(out, "simulate", args,
                    {"seed": args.seed, "replications": args.replications},
                    {"scenario": args.scenario}, outputs, started)
    print(f"simulated {len(first.stats)} iterations x {args.replications} replication(s); "
          f"uam demand {first.uam_leg_count}, vehicles required {first.vehicles_required}")
    return 0


def cmd_optimize(args) -> int:
    started = time.monotonic()
    scenario = _load_scenario_arg(args)
    nsga_cfg = load_nsga_config(args.config, args.seed)
    sim_cfg = load_sim_config(args.sim_config)
    evaluator = None
    if args.surrogate:
        evaluator = make_coverage_evaluator(scenario, args.radius)
    result = run_nsga2(scenario, nsga_cfg, sim_cfg, evaluator=evaluator)
    front = result.front

    out = _out_dir(args)
    outputs = []
    pareto_path = os.path.join(out, "pareto.csv")
    exports.pareto_csv(pareto_path, front)
    gen_path = os.path.join(out, "generations.csv")
    exports.generation_log_csv(gen_path, result.generation_log)
    outputs.extend([pareto_path, gen_path])

    for tag, member in (("f1star", front.extreme_f1), ("f2star", front.extreme_f2),
                        ("knee", front.knee)):
        geo = export_active_network_geojson(
            scenario, [i for i, b in enumerate(member.bits) if b], sim_cfg.evtol)
        path = os.path.join(out, f"network_{tag}.geojson")
        exports.write_json(path, geo)
        outputs.append(path)

    svg = exports.svg_plot(
        [{"x": [m.f1_normalized for m in front.members],
          "y": [m.f2 for m in front.members], "label": "pareto front"}],
        title="Non-dominated vertiport networks",
        xlabel="normalized demand f1", ylabel="active vertiports f2")
    svg_path = os.path.join(out, "pareto.svg")
    exports.write_svg(svg_path, svg)
    outputs.append(svg_path)

    genome_path = os.path.join(out, "knee_genome.json")
    exports.genome_json(genome_path, front.knee.bits)
    outputs.append(genome_path)

    _write_manifest(out, "optimize", args,
                    {"seed": args.seed, "eval_seed": nsga_cfg.eval_seed},
                    {"scenario": args.scenario}, outputs, started)
    print(f"front: {len(front.members)} members, f1_max {front.f1_max:.0f}, "
          f"knee ({front.knee.f1_normalized:.2f}, {front.knee.f2})")
    return 0


def cmd_hcm(args) -> int:
    started = time.monotonic()
    scenario = _load_scenario_arg(args)
    inst = instance_from_scenario(scenario, args.p, args.radius)
    order, gains = greedy_max_cover(inst)
    bits = hcm_solution_to_genome(order, scenario.candidate_sites)

    out = _out_dir(args)
    sel_path = os.path.join(out, "hcm_selection.csv")
    exports.selection_csv(sel_path, order, gains)
    genome_path = os.path.join(out, "hcm_genome.json")
    exports.genome_json(genome_path, bits)
    _write_manifest(out, "hcm", args, {}, {"scenario": args.scenario},
                    [sel_path, genome_path], started)
    print(f"hcm: opened {len(order)} sites covering {sum(gains)} of "
          f"{len(scenario.agents)} homes (radius {args.radius:.0f} m)")
    return 0


def cmd_compare(args) -> int:
    started = time.monotonic()
    scenario = _load_scenario_arg(args)
    sim_cfg = load_sim_config(args.config)
    ab_bits = exports.load_genome(args.ab)
    hcm_bits = exports.load_genome(args.hcm)
    report = build_comparison(scenario, ab_bits, hcm_bits, sim_cfg, args.seed,
                              f1_max=args.f1_max)

    out = _out_dir(args)
    csv_path = os.path.join(out, "comparison.csv")
    exports.comparison_csv(csv_path, report)
    json_path = os.path.join(out, "comparison.json")
    exports.comparison_json(json_path, report)
    _write_manifest(out, "compare", args, {"seed": args.seed},
                    {"scenario": args.scenario, "ab": args.ab, "hcm": args.hcm},
                    [csv_path, json_path], started)
    for r in report.rows:
        print(f"{r.method}: demand {100 * r.demand_normalized:.1f}%, "
              f"ttts {r.ttts_percent:.2f}%, ports {r.port_count}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vertiplan",
        description="Bi-level vertiport network design on synthetic regional scenarios.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("generate", help="generate a synthetic scenario")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run the inner loop against a site set")
    p.add_argument("--scenario", required=True)
    p.add_argument("--sites", help="genome JSON of active sites")
    p.add_argument("--no-uam", action="store_true", help="run without any UAM supply")
    p.add_argument("--config", help="sim config JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--events", action="store_true", help="export the event log CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="NSGA-II search for vertiport networks")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", help="nsga config JSON")
    p.add_argument("--sim-config", help="sim config JSON for the evaluator")
    p.add_argument("--surrogate", action="store_true",
                   help="use the static coverage evaluator instead of the simulation")
    p.add_argument("--radius", type=float, default=10000.0,
                   help="covering distance for --surrogate")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("hcm", help="greedy maximal-coverage baseline")
    p.add_argument("--scenario", required=True)
    p.add_argument("-p", type=int, required=True, help="number of sites to open")
    p.add_argument("--radius", type=float, default=10000.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hcm)

    p = sub.add_parser("compare", help="table-style comparison of two genomes")
    p.add_argument("--scenario", required=True)
    p.add_argument("--ab", required=True, help="bi-level genome JSON")
    p.add_argument("--hcm", required=True, help="baseline genome JSON")
    p.add_argument("--config", help="sim config JSON")
    p.add_argument("--f1-max", type=float, default=None,
                   help="demand normalization constant (defaults to best of both)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:    # noqa: BLE001 - runtime failures map to exit 3
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
