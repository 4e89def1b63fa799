import numpy as np
import pytest

from viewselect.errors import BudgetExceedsPool, TooFewSelected
from viewselect.fvs import FvsConfig, fvs_select, fvs_trace, maximin_radius
from viewselect.metrics import DistanceSpec, PoolDistance, Spatial

from conftest import point_pool

EUC = DistanceSpec(spatial=Spatial.EUCLIDEAN)
GC = DistanceSpec(spatial=Spatial.GREAT_CIRCLE)


def greedy_maximin_oracle(points, initial_idx, n):
    """Exhaustive reference: at each step scan every candidate's min distance."""
    points = np.asarray(points, dtype=np.float64)
    selected = list(initial_idx)
    while len(selected) < n:
        best_idx, best_val = None, -np.inf
        for i in range(len(points)):
            if i in selected:
                continue
            val = min(float(np.sum((points[i] - points[s]) ** 2)) for s in selected)
            # tie-break on the id string, which is index order for point_pool
            if val > best_val or (val == best_val and i < best_idx):
                best_idx, best_val = i, val
        selected.append(best_idx)
    return selected


def unit_square_pool():
    return point_pool([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])


def circle_pool(n=8):
    theta = 2.0 * np.pi * np.arange(n) / n
    return point_pool(np.stack([np.cos(theta), np.sin(theta), np.zeros(n)], axis=1))


class TestFvsSelect:
    def test_unit_square_second_pick_is_opposite_corner(self):
        pool = unit_square_pool().with_selected(["v000"])  # corner (0,0) forced
        out = fvs_select(pool, FvsConfig(target_n=2, spec=EUC))
        assert out.selected == ("v000", "v003")  # (1,1) maximizes min distance

    def test_exhaustion_selects_all(self):
        pool = unit_square_pool()
        out = fvs_select(pool, FvsConfig(target_n=4, spec=EUC, seed=7))
        assert sorted(out.selected) == ["v000", "v001", "v002", "v003"]

    def test_circle_picks_antipode(self):
        pool = circle_pool().with_selected(["v000"])  # angle 0 forced
        out = fvs_select(pool, FvsConfig(target_n=2, spec=GC))
        assert out.selected == ("v000", "v004")  # 180 degrees

    def test_budget_exceeds_pool(self):
        with pytest.raises(BudgetExceedsPool):
            fvs_select(unit_square_pool(), FvsConfig(target_n=5, spec=EUC))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FvsConfig(target_n=3, spec=EUC, initial_k=4)
        with pytest.raises(ValueError):
            FvsConfig(target_n=0, spec=EUC)

    def test_every_pick_is_maximin(self, rng):
        for trial in range(5):
            pts = rng.uniform(0, 1, (40, 3))
            pool = point_pool(pts)
            out = fvs_select(pool, FvsConfig(target_n=12, spec=EUC, initial_k=1, seed=trial))
            got = [pool.index_of(v) for v in out.selected]
            assert got == greedy_maximin_oracle(pts, got[:1], 12)

    def test_greedy_growth_prefix(self, rng):
        pts = rng.uniform(0, 1, (30, 3))
        pool = point_pool(pts)
        small = fvs_select(pool, FvsConfig(target_n=8, spec=EUC, seed=11))
        large = fvs_select(pool, FvsConfig(target_n=15, spec=EUC, seed=11))
        assert large.selected[:8] == small.selected

    def test_determinism(self, rng):
        pts = rng.uniform(0, 1, (25, 3))
        pool = point_pool(pts)
        cfg = FvsConfig(target_n=10, spec=EUC, initial_k=3, seed=42)
        assert fvs_select(pool, cfg).selected == fvs_select(pool, cfg).selected

    def test_trace_scores_are_min_distances(self, rng):
        pts = rng.uniform(0, 1, (20, 3))
        pool = point_pool(pts)
        trace = fvs_trace(pool, FvsConfig(target_n=6, spec=EUC, seed=1))
        assert trace[0][1] is None  # initial pick carries no score
        dist = PoolDistance(pool.views, EUC)
        ids = [vid for vid, _ in trace]
        for step, (vid, score) in enumerate(trace[1:], start=1):
            i = dist.ids.index(vid)
            expected = min(dist.row(dist.ids.index(prev))[i] for prev in ids[:step])
            assert score == pytest.approx(expected, abs=1e-12)

    def test_coverage_beats_random(self):
        fvs_r, rand_r = [], []
        for seed in range(100):
            pool_rng = np.random.default_rng(seed)
            pts = pool_rng.uniform(0, 1, (50, 3))
            pool = point_pool(pts)
            out = fvs_select(pool, FvsConfig(target_n=10, spec=EUC, initial_k=1, seed=seed))
            fvs_r.append(maximin_radius(out, EUC))
            ids = [v.id for v in pool.views]
            rand_ids = [ids[i] for i in pool_rng.choice(50, size=10, replace=False)]
            rand_r.append(maximin_radius(pool.with_selected(rand_ids), EUC))
        assert np.mean(fvs_r) > np.mean(rand_r)


class TestMaximinRadius:
    def test_identical_centers(self):
        pool = point_pool([[1.0, 1, 1], [1.0, 1, 1 + 0e0], [0.0, 0, 0]])
        out = pool.with_selected(["v000", "v001"])
        assert maximin_radius(out, EUC) == 0.0

    def test_square_corners(self):
        out = unit_square_pool().with_selected(["v000", "v001", "v002", "v003"])
        assert maximin_radius(out, EUC) == 1.0

    def test_alternating_circle(self):
        out = circle_pool().with_selected(["v000", "v002", "v004", "v006"])
        assert maximin_radius(out, GC) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_too_few_selected(self):
        with pytest.raises(TooFewSelected):
            maximin_radius(unit_square_pool().with_selected(["v000"]), EUC)
