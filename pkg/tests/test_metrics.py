import numpy as np
import pytest

from viewselect.errors import EmptyCovisibility, NotUnit, UnknownView
from viewselect.metrics import DistanceSpec, PoolDistance, Spatial, d_euc, d_gc, d_photo, view_distance
from viewselect.scene import CovisibilityMatrix

from conftest import make_view, point_pool


class TestGreatCircle:
    def test_orthogonal(self):
        assert d_gc([1, 0, 0], [0, 1, 0]) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_identity(self):
        assert d_gc([1, 0, 0], [1, 0, 0]) == 0.0

    def test_antipodal(self):
        assert d_gc([1, 0, 0], [-1, 0, 0]) == pytest.approx(np.pi, abs=1e-12)

    def test_not_unit(self):
        with pytest.raises(NotUnit):
            d_gc([2, 0, 0], [1, 0, 0])

    def test_clamps_fp_drift(self, rng):
        # a dot product of a vector with itself can exceed 1 by an ulp
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        assert d_gc(v, v) >= 0.0

    def test_triangle_inequality_1000_triples(self, rng):
        v = rng.standard_normal((1000, 3, 3))
        v /= np.linalg.norm(v, axis=2, keepdims=True)
        for a, b, c in v:
            assert d_gc(a, c) <= d_gc(a, b) + d_gc(b, c) + 1e-12


class TestEuclidean:
    def test_examples(self):
        assert d_euc([0, 0, 0], [1, 2, 2]) == 9.0
        assert d_euc([3, 1, 4], [3, 1, 4]) == 0.0
        assert d_euc([1, 0, 0], [0, 0, 0]) == 1.0

    def test_squared_norm_not_a_metric(self):
        # documents the squared form: triangle inequality fails
        a, b, c = [0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]
        assert d_euc(a, c) > d_euc(a, b) + d_euc(b, c)


@pytest.fixture
def covis():
    counts = np.array([[0, 8, 0], [8, 0, 4], [0, 4, 0]])
    return CovisibilityMatrix(counts, ["a", "b", "c"])


class TestPhotogrammetric:
    def test_most_similar_pair_is_zero(self, covis):
        assert d_photo("a", "b", covis) == 0.0

    def test_no_shared_points_is_one(self, covis):
        assert d_photo("a", "c", covis) == 1.0

    def test_linearity(self, covis):
        assert d_photo("b", "c", covis) == 0.5

    def test_empty_matrix(self):
        empty = CovisibilityMatrix(np.zeros((2, 2), dtype=int), ["a", "b"])
        with pytest.raises(EmptyCovisibility):
            d_photo("a", "b", empty)

    def test_unknown_view(self, covis):
        with pytest.raises(UnknownView):
            d_photo("a", "zz", covis)

    def test_symmetric(self, covis):
        assert d_photo("b", "c", covis) == d_photo("c", "b", covis)


class TestViewDistance:
    def test_euclidean_alpha_zero(self):
        u = make_view("u", (0.0, 0.0, 0.0))
        v = make_view("v", (1.0, 0.0, 0.0))
        spec = DistanceSpec(spatial=Spatial.EUCLIDEAN)
        assert view_distance(u, v, spec) == 1.0

    def test_additivity_with_photo(self, covis):
        # centers half a radian apart on the unit sphere, zero co-visibility
        u = make_view("a", (1.0, 0.0, 0.0))
        v = make_view("c", (np.cos(0.5), np.sin(0.5), 0.0))
        spec = DistanceSpec(spatial=Spatial.GREAT_CIRCLE, photo_weight=1.0, covisibility=covis)
        assert view_distance(u, v, spec) == pytest.approx(1.5, abs=1e-12)

    def test_identical_ids_give_zero(self, covis):
        u = make_view("a", (1.0, 0.0, 0.0))
        spec = DistanceSpec(spatial=Spatial.GREAT_CIRCLE, photo_weight=1.0, covisibility=covis)
        assert view_distance(u, u, spec) == 0.0

    def test_photo_weight_requires_covisibility(self):
        with pytest.raises(ValueError):
            DistanceSpec(photo_weight=0.5)

    def test_symmetry_and_nonnegativity_random_pairs(self, rng):
        pts = rng.uniform(-2, 2, (100, 3))
        views = [make_view(f"p{i}", p) for i, p in enumerate(pts)]
        spec = DistanceSpec(spatial=Spatial.EUCLIDEAN)
        idx = rng.integers(0, 100, (10_000, 2))
        for i, j in idx:
            dij = view_distance(views[i], views[j], spec)
            assert dij == view_distance(views[j], views[i], spec)
            assert dij >= 0.0

    def test_translation_invariance_of_argminmax(self, rng):
        pts = rng.uniform(-1, 1, (30, 3))
        spec = DistanceSpec(spatial=Spatial.EUCLIDEAN)

        def extremes(points):
            pool = PoolDistance(point_pool(points).views, spec)
            pairs = [(i, j) for i in range(30) for j in range(i + 1, 30)]
            dists = [pool.between(i, j) for i, j in pairs]
            return pairs[int(np.argmin(dists))], pairs[int(np.argmax(dists))]

        assert extremes(pts) == extremes(pts + np.array([5.0, -3.0, 11.0]))


class TestPoolDistance:
    def test_row_matches_pairwise(self, rng):
        pts = rng.standard_normal((20, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        pool = point_pool(pts)
        spec = DistanceSpec(spatial=Spatial.GREAT_CIRCLE)
        dist = PoolDistance(pool.views, spec)
        row = dist.row(3)
        for j in range(20):
            expected = 0.0 if j == 3 else d_gc(pts[3], pts[j])
            assert row[j] == pytest.approx(expected, abs=1e-12)

    def test_great_circle_requires_unit_centers(self):
        pool = point_pool([[2.0, 0, 0], [0, 1.0, 0]])
        with pytest.raises(NotUnit):
            PoolDistance(pool.views, DistanceSpec(spatial=Spatial.GREAT_CIRCLE))

    def test_normalize_spatial_rescales_to_unit_max(self, rng):
        pts = rng.uniform(-2, 2, (15, 3))
        pool = point_pool(pts)
        spec = DistanceSpec(spatial=Spatial.EUCLIDEAN, normalize_spatial=True)
        dist = PoolDistance(pool.views, spec)
        top = max(dist.row(i).max() for i in range(15))
        assert top == pytest.approx(1.0, abs=1e-12)
