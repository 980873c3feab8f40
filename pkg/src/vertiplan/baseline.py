"""Static maximal-covering baseline: greedily open sites so that as many agent
homes as possible lie within a covering distance of an open site. Solutions
convert to genomes so the baseline and the bi-level optimizer are compared on
identical simulation machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoverageInstance:
    sites: tuple               # (site_id, x, y)
    homes: tuple               # (x, y)
    covering_distance: float = 10000.0
    p: int = 1

    def __post_init__(self):
        if self.covering_distance <= 0:
            raise ValueError("covering_distance must be positive")
        if self.p > len(self.sites):
            raise ValueError(f"cannot open p={self.p} of {len(self.sites)} sites")


def instance_from_scenario(scenario, p: int, covering_distance: float = 10000.0) -> CoverageInstance:
    sites = tuple((s.site_id, s.x, s.y) for s in scenario.candidate_sites)
    homes = tuple(a.home for a in scenario.agents)
    return CoverageInstance(sites, homes, covering_distance, p)


def _cover_masks(inst: CoverageInstance) -> dict:
    homes = np.array(inst.homes)
    masks = {}
    for sid, x, y in inst.sites:
        d2 = (homes[:, 0] - x) ** 2 + (homes[:, 1] - y) ** 2
        masks[sid] = d2 <= inst.covering_distance ** 2
    return masks


def coverage(selected_sites, homes, radius: float) -> int:
    """Homes within radius of at least one selected site; each counted once."""
    if not selected_sites or len(homes) == 0:
        return 0
    h = np.array(homes)
    mask = np.zeros(len(h), dtype=bool)
    for _, x, y in selected_sites:
        mask |= (h[:, 0] - x) ** 2 + (h[:, 1] - y) ** 2 <= radius ** 2
    return int(mask.sum())


def greedy_max_cover(inst: CoverageInstance):
    """Open p sites by repeatedly adding the one covering the most not-yet-covered
    homes (ties to the lowest site id). Returns (selected ids in order, marginal
    gains per pick)."""
    masks = _cover_masks(inst)
    remaining = dict(masks)
    covered = np.zeros(len(inst.homes), dtype=bool)
    order, gains = [], []
    for _ in range(inst.p):
        best_id, best_gain = None, -1
        for sid in sorted(remaining):
            gain = int((remaining[sid] & ~covered).sum())
            if gain > best_gain:
                best_id, best_gain = sid, gain
        covered |= remaining.pop(best_id)
        order.append(best_id)
        gains.append(best_gain)
    return order, gains


def hcm_solution_to_genome(selected_ids, candidate_sites) -> tuple:
    """Genome with bits set exactly at the selected sites."""
    bits = [0] * len(candidate_sites)
    known = {s.site_id for s in candidate_sites}
    for sid in selected_ids:
        if sid not in known:
            raise ValueError(f"selected site {sid} is not a candidate site")
        bits[sid] = 1
    return tuple(bits)
