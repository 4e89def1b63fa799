"""Core domain types: cameras, view sets, meshes, surface samples, co-visibility.

Conventions fixed here and relied on everywhere else:
  * rotations are camera-to-world, OpenGL-style (camera looks along -z,
    +y is up in the image);
  * quality scores are "higher = better" (PSNR-like).

All types are immutable after construction; derived collections return
copies, so instances are safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DegenerateCenter, DuplicateId, TooFewViews, UnknownView

__all__ = [
    "Intrinsics",
    "CameraView",
    "ViewSet",
    "TriangleMesh",
    "SurfaceSamples",
    "CovisibilityMatrix",
    "QualityReport",
    "build_view_set",
    "project_to_unit_sphere",
]

_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )


@dataclass(frozen=True, eq=False)
class CameraView:
    """One posed camera: id, center, camera-to-world rotation, intrinsics."""

    id: str
    center: np.ndarray
    rotation: np.ndarray
    intrinsics: Optional[Intrinsics] = None
    image_path: Optional[str] = None

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(3)
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        dev = np.abs(rotation.T @ rotation - np.eye(3)).max()
        if dev >= _ORTHO_TOL:
            raise ValueError(f"view {self.id!r}: rotation is not orthonormal (deviation {dev:.3g})")
        center.setflags(write=False)
        rotation.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "rotation", rotation)

    def optical_axis(self) -> np.ndarray:
        """World-space viewing direction (camera -z axis)."""
        return -self.rotation[:, 2]


@dataclass(frozen=True)
class ViewSet:
    """An ordered pool of views plus the ordered ids selected so far (the set S)."""

    views: tuple[CameraView, ...]
    selected: tuple[str, ...] = ()

    def __post_init__(self):
        views = tuple(self.views)
        selected = tuple(self.selected)
        ids = [v.id for v in views]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DuplicateId(f"duplicate view ids: {dup}")
        known = set(ids)
        if len(set(selected)) != len(selected):
            raise DuplicateId(f"duplicate ids in selection: {list(selected)}")
        missing = [s for s in selected if s not in known]
        if missing:
            raise UnknownView(f"selected ids not in pool: {missing}")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "selected", selected)

    def __len__(self) -> int:
        return len(self.views)

    @property
    def candidates(self) -> tuple[str, ...]:
        """Ids not yet selected, in pool order (the set V \\ S)."""
        chosen = set(self.selected)
        return tuple(v.id for v in self.views if v.id not in chosen)

    def view(self, view_id: str) -> CameraView:
        for v in self.views:
            if v.id == view_id:
                return v
        raise UnknownView(f"no view with id {view_id!r}")

    def index_of(self, view_id: str) -> int:
        for i, v in enumerate(self.views):
            if v.id == view_id:
                return i
        raise UnknownView(f"no view with id {view_id!r}")

    def centers(self) -> np.ndarray:
        """(N, 3) array of camera centers in pool order."""
        if not self.views:
            return np.zeros((0, 3))
        return np.stack([v.center for v in self.views])

    def selected_views(self) -> tuple[CameraView, ...]:
        return tuple(self.view(i) for i in self.selected)

    def candidate_views(self) -> tuple[CameraView, ...]:
        chosen = set(self.selected)
        return tuple(v for v in self.views if v.id not in chosen)

    def with_selected(self, selected: Sequence[str]) -> "ViewSet":
        return ViewSet(self.views, tuple(selected))


class TriangleMesh:
    """Indexed triangle mesh; the BVH accelerator is built lazily and cached."""

    def __init__(self, vertices, triangles):
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise ValueError("triangle index out of range")
        if triangles.size:
            a = vertices[triangles[:, 0]]
            b = vertices[triangles[:, 1]]
            c = vertices[triangles[:, 2]]
            areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
            if (areas < 1e-12).any():
                bad = int(np.argmin(areas))
                raise ValueError(f"degenerate triangle {bad} with area {areas[bad]:.3g}")
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        self.vertices = vertices
        self.triangles = triangles
        self._bvh = None

    def __len__(self) -> int:
        return len(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @property
    def bvh(self):
        if self._bvh is None:
            from .raycast import build_bvh

            self._bvh = build_bvh(self.vertices, self.triangles)
        return self._bvh


@dataclass(frozen=True)
class SurfaceSamples:
    """Uniform point-cloud discretization of a mesh surface.

    `radius` is the accumulation ball radius used by the coverage measure.
    Points are expected to lie on the generating mesh (sample_surface
    guarantees this); weights default to 1/M and must sum to 1.
    """

    points: np.ndarray
    radius: float
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if len(points) == 0:
            raise ValueError("need at least one surface sample")
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        if self.weights is None:
            weights = np.full(len(points), 1.0 / len(points))
        else:
            weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if len(weights) != len(points):
                raise ValueError("weights length does not match points")
            if abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.points)

    def same_sampling(self, other: "SurfaceSamples") -> bool:
        """True when both fields were measured on the identical discretization."""
        return (
            self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and self.radius == other.radius
        )


class CovisibilityMatrix:
    """Symmetric N x N counts of co-triangulated sparse points per view pair."""

    def __init__(self, counts, view_ids: Sequence[str]):
        counts = np.asarray(counts, dtype=np.int64)
        n = len(view_ids)
        if counts.shape != (n, n):
            raise ValueError(f"counts shape {counts.shape} does not match {n} view ids")
        if (counts < 0).any():
            raise ValueError("co-visibility counts must be non-negative")
        if not np.array_equal(counts, counts.T):
            raise ValueError("co-visibility matrix must be symmetric")
        if len(set(view_ids)) != n:
            raise DuplicateId("duplicate ids in co-visibility index")
        counts.setflags(write=False)
        self.counts = counts
        self.view_index: dict[str, int] = {vid: i for i, vid in enumerate(view_ids)}

    def __len__(self) -> int:
        return len(self.view_index)

    def index(self, view_id: str) -> int:
        try:
            return self.view_index[view_id]
        except KeyError:
            raise UnknownView(f"view {view_id!r} not in co-visibility matrix") from None

    def max_offdiagonal(self) -> int:
        """Largest pair count, self-covisibility excluded."""
        if len(self.counts) < 2:
            return 0
        masked = self.counts.copy()
        np.fill_diagonal(masked, 0)
        return int(masked.max())


@dataclass(frozen=True)
class QualityReport:
    """Per-view scalar quality, higher = better (PSNR when a real evaluator runs)."""

    scores: Mapping[str, float]

    def __post_init__(self):
        scores = {str(k): float(v) for k, v in self.scores.items()}
        object.__setattr__(self, "scores", scores)

    def score(self, view_id: str) -> float:
        try:
            return self.scores[view_id]
        except KeyError:
            raise UnknownView(f"no score for view {view_id!r}") from None


def build_view_set(views: Sequence[CameraView]) -> ViewSet:
    """Assemble a selection pool: empty selection, every view a candidate."""
    if len(views) < 2:
        raise TooFewViews(f"need at least 2 views to build a pool, got {len(views)}")
    return ViewSet(tuple(views))


def project_to_unit_sphere(view_set: ViewSet, origin=(0.0, 0.0, 0.0)) -> ViewSet:
    """Re-center every camera on `origin` and normalize centers to the unit sphere.

    Rotations and intrinsics are untouched; the input set is not modified.
    """
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    projected = []
    for v in view_set.views:
        offset = v.center - origin
        norm = float(np.linalg.norm(offset))
        if norm <= 1e-9:
            raise DegenerateCenter(f"view {v.id!r} sits at the projection origin")
        projected.append(
            CameraView(
                id=v.id,
                center=offset / norm,
                rotation=v.rotation,
                intrinsics=v.intrinsics,
                image_path=v.image_path,
            )
        )
    return ViewSet(tuple(projected), view_set.selected)
