"""Farthest view sampling: greedy maximin selection over a view pool.

Each pick maximizes the minimum distance to the already-selected set.
A per-candidate nearest-selected cache keeps the whole run at O(n * |V|)
distance evaluations instead of the naive O(n^2 * |V|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceedsPool, TooFewSelected
from .metrics import DistanceSpec, PoolDistance
from .scene import ViewSet

__all__ = ["FvsConfig", "fvs_select", "fvs_trace", "maximin_radius"]


@dataclass(frozen=True)
class FvsConfig:
    target_n: int
    spec: DistanceSpec
    initial_k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.target_n < 1:
            raise ValueError(f"target_n must be positive, got {self.target_n}")
        if not (1 <= self.initial_k <= self.target_n):
            raise ValueError(
                f"initial_k must satisfy 1 <= k <= target_n, got k={self.initial_k}, n={self.target_n}"
            )


def fvs_trace(view_set: ViewSet, cfg: FvsConfig) -> list[tuple[str, float | None]]:
    """Run the greedy selection and return (view_id, maximin score) picks in order.

    Initial views (pre-selected on the input set, or drawn uniformly at
    random with the configured seed) carry a None score; every greedy
    pick records its min-distance-to-selected at pick time. Ties in the
    argmax break toward the lexicographically smallest view id, which
    makes the run reproducible byte for byte.
    """
    if cfg.target_n > len(view_set):
        raise BudgetExceedsPool(
            f"budget {cfg.target_n} exceeds pool of {len(view_set)} views"
        )
    dist = PoolDistance(view_set.views, cfg.spec)
    ids = dist.ids
    index = {vid: i for i, vid in enumerate(ids)}

    picks: list[tuple[str, float | None]] = []
    if view_set.selected:
        # warm start: honor the caller's initial subset instead of sampling
        initial = list(view_set.selected)[: cfg.target_n]
    else:
        rng = np.random.default_rng(cfg.seed)
        k = min(cfg.initial_k, cfg.target_n)
        initial = [ids[i] for i in rng.choice(len(ids), size=k, replace=False)]
    picks.extend((vid, None) for vid in initial)

    selected_mask = np.zeros(len(ids), dtype=bool)
    min_dist = np.full(len(ids), np.inf)
    for vid in initial:
        i = index[vid]
        selected_mask[i] = True
        min_dist = np.minimum(min_dist, dist.row(i))

    while len(picks) < cfg.target_n:
        cand_dist = np.where(selected_mask, -np.inf, min_dist)
        best = cand_dist.max()
        tied = np.flatnonzero(cand_dist == best)
        pick = min(tied, key=lambda i: ids[i])
        picks.append((ids[pick], float(min_dist[pick])))
        selected_mask[pick] = True
        min_dist = np.minimum(min_dist, dist.row(pick))

    return picks


def fvs_select(view_set: ViewSet, cfg: FvsConfig) -> ViewSet:
    """Select cfg.target_n views by greedy maximin; returns a new ViewSet."""
    return view_set.with_selected([vid for vid, _ in fvs_trace(view_set, cfg)])


def maximin_radius(view_set: ViewSet, spec: DistanceSpec) -> float:
    """Minimum pairwise distance within the selected set (spread statistic)."""
    if len(view_set.selected) < 2:
        raise TooFewSelected(
            f"maximin_radius needs >= 2 selected views, got {len(view_set.selected)}"
        )
    dist = PoolDistance(view_set.views, spec)
    sel = [dist.ids.index(vid) for vid in view_set.selected]
    best = np.inf
    for a_pos, i in enumerate(sel):
        row = dist.row(i)
        for j in sel[a_pos + 1 :]:
            best = min(best, row[j])
    return float(best)
