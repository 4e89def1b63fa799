"""Coverage density of a view set over a mesh surface.

One ray is cast per (strided) pixel of every view; every first hit is a
vote. Each surface sample point counts the votes landing inside its
L2 ball of radius `samples.radius`, stride-scaled to approximate the
full-resolution total, then normalized by a configurable factor so the
field is comparable across view sets.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMesh, IoError, MissingIntrinsics, SampleMismatch
from .raycast import cast_rays, first_hit  # noqa: F401  (first_hit is part of this module's API)
from .scene import CameraView, SurfaceSamples, TriangleMesh, ViewSet

__all__ = [
    "Normalization",
    "CoverageField",
    "CoverageDifference",
    "sample_surface",
    "suggest_ball_radius",
    "pixel_rays",
    "coverage_measure",
    "coverage_difference",
    "coverage_variance",
    "write_field_binary",
    "read_field_binary",
    "write_field_ply",
]


class Normalization(enum.Enum):
    MAX_COUNT = "max-count"
    TOTAL_HITS = "total-hits"
    RAY_BUDGET = "ray-budget"


@dataclass(frozen=True)
class CoverageField:
    """Raw per-sample hit counts plus the normalization constant."""

    samples: SurfaceSamples
    values: np.ndarray
    normalization: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if len(values) != len(self.samples):
            raise ValueError("one value per surface sample required")
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("coverage values must be finite and non-negative")
        if not self.normalization > 0:
            raise ValueError(f"normalization must be positive, got {self.normalization}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def normalized(self) -> np.ndarray:
        return self.values / self.normalization


@dataclass(frozen=True)
class CoverageDifference:
    """Per-sample |a - b| of normalized fields; summary in pooled-sigma units."""

    values: np.ndarray
    mean: float
    std: float
    max: float
    pooled_sigma: float


def sample_surface(
    mesh: TriangleMesh, count: int, radius: float | None = None, seed: int = 0
) -> SurfaceSamples:
    """Uniform-in-area point samples on the mesh surface.

    Triangles are chosen proportionally to area, points uniformly inside
    each via the sqrt barycentric map. When `radius` is omitted it
    defaults to twice the mean nearest-neighbor distance of the samples.
    """
    if len(mesh) == 0:
        raise EmptyMesh("cannot sample an empty mesh")
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    areas = mesh.triangle_areas()
    tri = rng.choice(len(mesh), size=count, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(count))
    r2 = rng.random(count)
    a = mesh.vertices[mesh.triangles[tri, 0]]
    b = mesh.vertices[mesh.triangles[tri, 1]]
    c = mesh.vertices[mesh.triangles[tri, 2]]
    points = (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c
    if radius is None:
        radius = suggest_ball_radius(points)
    return SurfaceSamples(points=points, radius=float(radius))


def suggest_ball_radius(points: np.ndarray) -> float:
    """Twice the mean nearest-neighbor distance (the default accumulation radius)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) < 2:
        raise ValueError("need >= 2 points to estimate a radius")
    d, _ = cKDTree(points).query(points, k=2)
    return float(2.0 * d[:, 1].mean())


def pixel_rays(view: CameraView, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Origins and unit directions for one ray per strided pixel center."""
    if view.intrinsics is None:
        raise MissingIntrinsics(f"view {view.id!r} has no intrinsics")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    intr = view.intrinsics
    rows = np.arange(0, intr.height, stride, dtype=np.float64) + 0.5
    cols = np.arange(0, intr.width, stride, dtype=np.float64) + 0.5
    jj, kk = np.meshgrid(rows, cols, indexing="ij")
    # camera looks along -z, +y up, image rows grow downward
    d_cam = np.stack(
        [
            (kk - intr.cx) / intr.fx,
            -(jj - intr.cy) / intr.fy,
            -np.ones_like(jj),
        ],
        axis=-1,
    ).reshape(-1, 3)
    d_world = d_cam @ view.rotation.T
    d_world /= np.linalg.norm(d_world, axis=1, keepdims=True)
    origins = np.broadcast_to(view.center, d_world.shape).copy()
    return origins, d_world


def _as_views(views: Union[ViewSet, Sequence[CameraView]]) -> tuple[CameraView, ...]:
    if isinstance(views, ViewSet):
        return views.views
    return tuple(views)


def coverage_measure(
    mesh: TriangleMesh,
    samples: SurfaceSamples,
    views: Union[ViewSet, Sequence[CameraView]],
    stride: int = 4,
    normalization: Normalization = Normalization.MAX_COUNT,
) -> CoverageField:
    """Accumulate first-hit counts per surface sample over every view's pixels.

    Raw values are (hits within the sample's ball) * stride^2. The
    normalization constant kappa is the max raw count by default, so the
    normalized field lies in [0, 1]; an all-miss field normalizes by 1.
    """
    view_list = _as_views(views)
    hit_points = []
    total_hits = 0
    ray_budget = 0
    for view in view_list:
        if view.intrinsics is None:
            raise MissingIntrinsics(f"view {view.id!r} has no intrinsics")
        ray_budget += view.intrinsics.width * view.intrinsics.height
        origins, dirs = pixel_rays(view, stride)
        t, tri = cast_rays(mesh, origins, dirs)
        mask = tri >= 0
        total_hits += int(mask.sum())
        if mask.any():
            hit_points.append(origins[mask] + t[mask, None] * dirs[mask])

    scale = float(stride * stride)
    if hit_points:
        hits = np.concatenate(hit_points)
        counts = cKDTree(hits).query_ball_point(
            samples.points, r=samples.radius, return_length=True
        )
        values = counts.astype(np.float64) * scale
    else:
        values = np.zeros(len(samples))

    if normalization is Normalization.MAX_COUNT:
        kappa = float(values.max())
    elif normalization is Normalization.TOTAL_HITS:
        kappa = float(total_hits) * scale
    else:
        kappa = float(ray_budget)
    if kappa <= 0:
        kappa = 1.0  # empty field: keep the normalized view well-defined
    return CoverageField(samples=samples, values=values, normalization=kappa)


def coverage_difference(a: CoverageField, b: CoverageField) -> CoverageDifference:
    """Element-wise |a - b| of the normalized fields.

    Summary statistics are expressed in units of the pooled standard
    deviation of the two normalized fields; when that sigma is zero the
    raw statistics are reported unscaled.
    """
    if not a.samples.same_sampling(b.samples):
        raise SampleMismatch("coverage fields use different surface discretizations")
    diff = np.abs(a.normalized - b.normalized)
    sigma = float(np.concatenate([a.normalized, b.normalized]).std())
    scale = sigma if sigma > 0 else 1.0
    return CoverageDifference(
        values=diff,
        mean=float(diff.mean() / scale),
        std=float(diff.std() / scale),
        max=float(diff.max() / scale),
        pooled_sigma=sigma,
    )


def coverage_variance(field: CoverageField) -> float:
    """Population variance of the normalized field (uniformity statistic)."""
    if len(field.samples) < 2:
        raise ValueError("variance needs at least 2 surface samples")
    return float(field.normalized.var())


# ---- field exports ----------------------------------------------------------

_HEADER = struct.Struct("<Qdd")  # M, ball radius, kappa


def write_field_binary(field: CoverageField, path) -> None:
    """Little-endian binary dump: header (M, radius, kappa) then M records of
    (x, y, z, raw) as float64."""
    records = np.hstack([field.samples.points, field.values[:, None]])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(len(field.samples), field.samples.radius, field.normalization))
        fh.write(np.ascontiguousarray(records, dtype="<f8").tobytes())


def read_field_binary(path) -> CoverageField:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise IoError(f"{path}: truncated coverage field header")
        m, radius, kappa = _HEADER.unpack(head)
        body = fh.read()
    expected = m * 4 * 8
    if len(body) != expected:
        raise IoError(f"{path}: expected {expected} payload bytes, found {len(body)}")
    records = np.frombuffer(body, dtype="<f8").reshape(m, 4)
    samples = SurfaceSamples(points=records[:, :3], radius=radius)
    return CoverageField(samples=samples, values=records[:, 3], normalization=kappa)


# 9-stop viridis lookup table; vertex colors interpolate linearly between stops
_COLORMAP = np.array(
    [
        [68, 1, 84], [72, 40, 120], [62, 74, 137], [49, 104, 142], [38, 130, 142],
        [31, 158, 137], [53, 183, 121], [109, 205, 89], [180, 222, 44],
    ],
    dtype=np.float64,
)


def _colormap(values: np.ndarray) -> np.ndarray:
    x = np.clip(values, 0.0, 1.0) * (len(_COLORMAP) - 1)
    i = np.minimum(x.astype(np.int64), len(_COLORMAP) - 2)
    frac = (x - i)[:, None]
    rgb = _COLORMAP[i] * (1 - frac) + _COLORMAP[i + 1] * frac
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8)


def write_field_ply(mesh: TriangleMesh, field: CoverageField, path) -> None:
    """Binary little-endian PLY of the mesh, vertices colored by the field.

    Each vertex takes the normalized value of its nearest surface sample,
    mapped through the fixed viridis lookup table above.
    """
    _, nearest = cKDTree(field.samples.points).query(mesh.vertices)
    colors = _colormap(field.normalized[nearest])
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(mesh.vertices)}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        f"element face {len(mesh.triangles)}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    vert = np.zeros(
        len(mesh.vertices),
        dtype=[("xyz", "<f4", 3), ("rgb", "u1", 3)],
    )
    vert["xyz"] = mesh.vertices.astype("<f4")
    vert["rgb"] = colors
    face = np.zeros(len(mesh.triangles), dtype=[("n", "u1"), ("idx", "<i4", 3)])
    face["n"] = 3
    face["idx"] = mesh.triangles.astype("<i4")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vert.tobytes())
        fh.write(face.tobytes())
