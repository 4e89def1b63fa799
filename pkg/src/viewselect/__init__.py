"""Training/test view selection for neural-rendering datasets.

Provides farthest view sampling, information-gain-based sampling (Zipf
and mixture-of-vMF samplers with optional Lloyd relaxation), uniform
test-split generation, and a ray-cast coverage density measure for
auditing how evenly a view set observes a scene.
"""

from . import errors
from .coverage import (
    CoverageField,
    Normalization,
    coverage_difference,
    coverage_measure,
    coverage_variance,
    sample_surface,
)
from .evaluator import ExternalProcess, Hotspot, OracleParams, SyntheticOracle, make_evaluator, oracle_scores
from .fvs import FvsConfig, fvs_select, fvs_trace, maximin_radius
from .igs import (
    ErrorRanking,
    Greedy,
    IgsConfig,
    MvMF,
    Zipf,
    igs_run,
    mvmf_draw,
    mvmf_weights,
    vmf_sample,
    zipf_draw,
    zipf_pmf,
)
from .metrics import DistanceSpec, Spatial, d_euc, d_gc, d_photo, view_distance
from .raycast import first_hit
from .relaxation import Domain, LloydConfig, lloyd_relax, sample_support, snap_to_candidates
from .scene import (
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
from .splitgen import fvs_resplit, rotate_views_z, uniform_sphere_poses

__version__ = "0.1.0"
