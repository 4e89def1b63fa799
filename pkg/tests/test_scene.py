import numpy as np
import pytest

from viewselect.errors import DegenerateCenter, DuplicateId, TooFewViews, UnknownView
from viewselect.scene import (
    CameraView,
    CovisibilityMatrix,
    Intrinsics,
    QualityReport,
    SurfaceSamples,
    TriangleMesh,
    ViewSet,
    build_view_set,
    project_to_unit_sphere,
)

from conftest import make_view


class TestCameraView:
    def test_rejects_non_orthonormal_rotation(self):
        bad = np.eye(3) * 1.01
        with pytest.raises(ValueError, match="orthonormal"):
            CameraView(id="x", center=np.zeros(3), rotation=bad)

    def test_accepts_tiny_drift(self):
        r = np.eye(3)
        r[0, 1] = 1e-8
        CameraView(id="x", center=np.zeros(3), rotation=r)

    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            Intrinsics(fx=-1.0, fy=1.0, cx=1.0, cy=1.0, width=2, height=2)
        with pytest.raises(ValueError):
            Intrinsics(fx=1.0, fy=1.0, cx=5.0, cy=1.0, width=2, height=2)

    def test_optical_axis_is_minus_z_column(self):
        v = make_view("a", (0.0, 0.0, 2.0))
        # camera at +z looking at the origin: axis points down -z
        assert np.allclose(v.optical_axis(), [0.0, 0.0, -1.0])


class TestBuildViewSet:
    def test_three_views(self):
        vs = build_view_set([make_view(f"v{i}", (i + 1.0, 0.0, 0.0)) for i in range(3)])
        assert len(vs.candidates) == 3
        assert len(vs.selected) == 0

    def test_duplicate_id(self):
        views = [make_view("a", (1.0, 0.0, 0.0)), make_view("a", (2.0, 0.0, 0.0))]
        with pytest.raises(DuplicateId):
            build_view_set(views)

    def test_too_few(self):
        with pytest.raises(TooFewViews):
            build_view_set([make_view("a", (1.0, 0.0, 0.0))])

    def test_selected_must_exist(self):
        views = tuple(make_view(f"v{i}", (i + 1.0, 0.0, 0.0)) for i in range(3))
        with pytest.raises(UnknownView):
            ViewSet(views, ("nope",))
        with pytest.raises(DuplicateId):
            ViewSet(views, ("v0", "v0"))

    def test_candidates_complement_selected(self):
        vs = build_view_set([make_view(f"v{i}", (i + 1.0, 0.0, 0.0)) for i in range(4)])
        picked = vs.with_selected(["v2", "v0"])
        assert picked.candidates == ("v1", "v3")
        assert set(picked.selected) | set(picked.candidates) == {v.id for v in vs.views}


class TestProjectToUnitSphere:
    def test_simple_scaling(self):
        vs = build_view_set([make_view("a", (2.0, 0.0, 0.0)), make_view("b", (0.0, 3.0, 0.0))])
        out = project_to_unit_sphere(vs)
        assert np.array_equal(out.view("a").center, [1.0, 0.0, 0.0])
        assert np.array_equal(out.view("b").center, [0.0, 1.0, 0.0])

    def test_degenerate_center(self):
        vs = build_view_set([make_view("a", (1.0, 0.0, 0.0)),
                             CameraView(id="b", center=np.zeros(3), rotation=np.eye(3))])
        with pytest.raises(DegenerateCenter):
            project_to_unit_sphere(vs)

    def test_translation_then_normalize(self):
        vs = build_view_set([make_view("a", (1.0, 1.0, 0.0)), make_view("b", (2.0, 0.0, 0.0))])
        out = project_to_unit_sphere(vs, origin=(1.0, 0.0, 0.0))
        assert np.array_equal(out.view("a").center, [0.0, 1.0, 0.0])

    def test_unit_norm_within_1e12(self, rng):
        views = [make_view(f"v{i}", rng.uniform(-5, 5, 3)) for i in range(50)]
        out = project_to_unit_sphere(build_view_set(views), origin=(9.0, 9.0, 9.0))
        norms = np.linalg.norm(out.centers(), axis=1)
        assert np.abs(norms - 1.0).max() < 1e-12

    def test_original_untouched(self):
        vs = build_view_set([make_view("a", (2.0, 0.0, 0.0)), make_view("b", (0.0, 3.0, 0.0))])
        before = vs.centers().copy()
        project_to_unit_sphere(vs)
        assert np.array_equal(vs.centers(), before)


class TestMeshAndSamples:
    def test_mesh_rejects_bad_index(self):
        with pytest.raises(ValueError):
            TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])

    def test_mesh_rejects_degenerate_triangle(self):
        with pytest.raises(ValueError, match="degenerate"):
            TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])

    def test_samples_default_weights(self):
        s = SurfaceSamples(points=np.zeros((4, 3)), radius=0.1)
        assert np.allclose(s.weights, 0.25)
        assert abs(s.weights.sum() - 1.0) < 1e-9

    def test_samples_weight_sum_checked(self):
        with pytest.raises(ValueError):
            SurfaceSamples(points=np.zeros((2, 3)), radius=0.1, weights=[0.7, 0.7])


class TestCovisibility:
    def test_symmetry_required(self):
        with pytest.raises(ValueError, match="symmetric"):
            CovisibilityMatrix([[0, 1], [2, 0]], ["a", "b"])

    def test_max_offdiagonal_ignores_diagonal(self):
        m = CovisibilityMatrix([[99, 2], [2, 99]], ["a", "b"])
        assert m.max_offdiagonal() == 2

    def test_unknown_view(self):
        m = CovisibilityMatrix([[0, 1], [1, 0]], ["a", "b"])
        with pytest.raises(UnknownView):
            m.index("c")


def test_quality_report_scores_cast_to_float():
    r = QualityReport({"a": 1, "b": 2.5})
    assert r.score("a") == 1.0
    with pytest.raises(UnknownView):
        r.score("zz")
