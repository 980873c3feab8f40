"""File artifact writers: CSV tables, GeoJSON, self-contained SVG plots, genome
files, and run manifests. All writes are atomic (tmp + rename) and formatting
is fixed so identical inputs produce byte-identical files."""

from __future__ import annotations

import hashlib
import json
import os


def atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def write_json(path, doc) -> None:
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".6f")
    return str(value)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# simulation artifacts
# ---------------------------------------------------------------------------

def events_csv(path, events) -> None:
    lines = ["time,kind,agent,link_or_station,mode"]
    lines.extend(f"{ev[0] / 1000.0:.3f},{ev[1]},{ev[2]},{ev[3]},{ev[4]}" for ev in events)
    atomic_write_text(path, "\n".join(lines) + "\n")


def stats_csv(path, stats_by_replication) -> None:
    """stats_by_replication: list of (replication, IterationStats list)."""
    rows = []
    for rep, stats in stats_by_replication:
        for s in stats:
            rows.append((rep, s.iteration, s.total_travel_time,
                         s.total_travel_distance, s.mean_executed_score))
    write_csv(path, ("replication", "iteration", "total_travel_time",
                     "total_travel_distance", "mean_executed_score"), rows)


def demand_csv(path, demand_by_replication) -> None:
    rows = []
    for rep, demand in demand_by_replication:
        for sid in sorted(demand):
            rows.append((rep, sid, demand[sid]))
    write_csv(path, ("replication", "site_id", "demand"), rows)


def pareto_csv(path, front) -> None:
    rows = []
    for m in front.members:
        rows.append(("".join(str(b) for b in m.bits), m.f1, m.f2, m.f1_normalized,
                     m.is_extreme_f1, m.is_extreme_f2, m.is_knee))
    write_csv(path, ("genome_bits", "f1", "f2", "f1_normalized",
                     "is_extreme_f1", "is_extreme_f2", "is_knee"), rows)


def generation_log_csv(path, log) -> None:
    write_csv(path, ("generation", "best_f1", "min_f2", "hypervolume"), log)


def comparison_csv(path, report) -> None:
    rows = [(r.method, 100.0 * r.demand_normalized, r.ttts_percent, r.port_count)
            for r in report.rows]
    write_csv(path, ("method", "demand_percent", "ttts_percent", "ports"), rows)


def comparison_json(path, report) -> None:
    write_json(path, {
        "f1_max": report.f1_max,
        "total_travel_time_without_uam": report.total_time_without_uam,
        "seed": report.seed,
        "scenario_hash": report.scenario_hash,
        "sim_config_hash": report.sim_config_hash,
        "rows": [{"method": r.method, "demand": r.demand,
                  "demand_normalized": r.demand_normalized,
                  "ttts_percent": r.ttts_percent, "ports": r.port_count,
                  "station_demand": {str(k): v for k, v in r.station_demand.items()}}
                 for r in report.rows],
    })


def selection_csv(path, order, gains) -> None:
    rows = [(i, sid, gain) for i, (sid, gain) in enumerate(zip(order, gains))]
    write_csv(path, ("order", "site_id", "marginal_gain"), rows)


def genome_json(path, bits) -> None:
    write_json(path, {"schema_version": 1, "bits": [int(b) for b in bits]})


def load_genome(path) -> tuple:
    with open(path) as f:
        doc = json.load(f)
    bits = doc["bits"]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"{path}: genome bits must be 0/1")
    return tuple(int(b) for b in bits)


# ---------------------------------------------------------------------------
# SVG scatter/line plots (self-contained, no plotting dependency)
# ---------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def svg_plot(series, title="", xlabel="", ylabel="", width=640, height=440) -> str:
    """series: list of dicts {x: [..], y: [..], label: str, kind: scatter|line}."""
    pad_l, pad_r, pad_t, pad_b = 64, 16, 34, 46
    xs = [v for s in series for v in s["x"]]
    ys = [v for s in series for v in s["y"]]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys), max(ys)
    if hi_x == lo_x:
        hi_x = lo_x + 1.0
    if hi_y == lo_y:
        hi_y = lo_y + 1.0
    plot_w = width - pad_l - pad_r
    plot_h = height - pad_t - pad_b

    def px(x):
        return pad_l + (x - lo_x) / (hi_x - lo_x) * plot_w

    def py(y):
        return pad_t + plot_h - (y - lo_y) / (hi_y - lo_y) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{pad_l}" y1="{pad_t + plot_h}" x2="{pad_l + plot_w}" '
           f'y2="{pad_t + plot_h}" stroke="black"/>',
           f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + plot_h}" stroke="black"/>']
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = lo_x + frac * (hi_x - lo_x)
        yv = lo_y + frac * (hi_y - lo_y)
        out.append(f'<text x="{px(xv):.1f}" y="{pad_t + plot_h + 16}" text-anchor="middle" '
                   f'font-size="10">{xv:.4g}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{py(yv):.1f}" text-anchor="end" '
                   f'font-size="10">{yv:.4g}</text>')
    out.append(f'<text x="{pad_l + plot_w / 2:.0f}" y="{height - 10}" text-anchor="middle" '
               f'font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{pad_t + plot_h / 2:.0f}" font-size="12" '
               f'transform="rotate(-90 16 {pad_t + plot_h / 2:.0f})" '
               f'text-anchor="middle">{ylabel}</text>')

    for si, s in enumerate(series):
        color = _COLORS[si % len(_COLORS)]
        pts = list(zip(s["x"], s["y"]))
        if s.get("kind", "scatter") == "line" and len(pts) > 1:
            path = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3.5" fill="{color}"/>')
        if s.get("label"):
            ly = pad_t + 14 + 16 * si
            out.append(f'<circle cx="{pad_l + 10}" cy="{ly - 4}" r="4" fill="{color}"/>')
            out.append(f'<text x="{pad_l + 20}" y="{ly}" font-size="11">{s["label"]}</text>')
    out.append("</svg>")
    return "\n".join(out)


def write_svg(path, svg_text: str) -> None:
    atomic_write_text(path, svg_text + "\n")
