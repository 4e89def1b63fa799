"""Pairwise view distances: great-circle, Euclidean (squared), photogrammetric.

The combined distance is d_spatial + alpha * d_photo. The addends have
mixed units (radians or squared scene-units plus a dimensionless term);
they are treated as dimensionless scores and alpha absorbs the scale.
`normalize_spatial` optionally rescales the spatial term by its maximum
over a candidate pool (applied by the pool-level evaluator, off by
default).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyCovisibility, NotUnit
from .scene import CameraView, CovisibilityMatrix

__all__ = [
    "Spatial",
    "DistanceSpec",
    "d_gc",
    "d_euc",
    "d_photo",
    "view_distance",
    "PoolDistance",
]

_UNIT_TOL = 1e-6


class Spatial(enum.Enum):
    GREAT_CIRCLE = "gc"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class DistanceSpec:
    """How to measure distance between two views.

    photo_weight is the positive hyper-parameter scaling the
    photogrammetric term; it requires a co-visibility matrix.
    """

    spatial: Spatial = Spatial.EUCLIDEAN
    photo_weight: float = 0.0
    covisibility: Optional[CovisibilityMatrix] = None
    normalize_spatial: bool = False

    def __post_init__(self):
        if self.photo_weight < 0:
            raise ValueError(f"photo_weight must be >= 0, got {self.photo_weight}")
        if self.photo_weight > 0 and self.covisibility is None:
            raise ValueError("photo_weight > 0 requires a co-visibility matrix")


def _check_unit(v: np.ndarray, name: str) -> None:
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > _UNIT_TOL:
        raise NotUnit(f"{name} has norm {n!r}, expected a unit vector")


def d_gc(a, b) -> float:
    """Great-circle distance between two unit vectors, in radians.

    The dot product is clamped to [-1, 1]: floating-point drift above 1
    would otherwise produce NaN from arccos.
    """
    a = np.asarray(a, dtype=np.float64).reshape(3)
    b = np.asarray(b, dtype=np.float64).reshape(3)
    _check_unit(a, "a")
    _check_unit(b, "b")
    return float(np.arccos(np.clip(a @ b, -1.0, 1.0)))


def d_euc(a, b) -> float:
    """Squared Euclidean distance between two centers (not a metric)."""
    a = np.asarray(a, dtype=np.float64).reshape(3)
    b = np.asarray(b, dtype=np.float64).reshape(3)
    diff = a - b
    return float(diff @ diff)


def d_photo(i: str, j: str, covisibility: CovisibilityMatrix) -> float:
    """Photogrammetric dissimilarity 1 - A_ij / max(A), in [0, 1].

    max(A) is the off-diagonal maximum: the measure compares distinct
    views, and self-counts would deflate every distance.
    """
    top = covisibility.max_offdiagonal()
    if top <= 0:
        raise EmptyCovisibility("co-visibility matrix has no shared points between any view pair")
    ii = covisibility.index(i)
    jj = covisibility.index(j)
    return 1.0 - covisibility.counts[ii, jj] / top


def view_distance(u: CameraView, v: CameraView, spec: DistanceSpec) -> float:
    """Combined distance d_spatial(u, v) + photo_weight * d_photo(u, v).

    Identical ids return exactly 0. The photo term is skipped when
    photo_weight == 0. `spec.normalize_spatial` is ignored here; it only
    takes effect inside PoolDistance, where a pool maximum exists.
    """
    if u.id == v.id:
        return 0.0
    if spec.spatial is Spatial.GREAT_CIRCLE:
        spatial = d_gc(u.center, v.center)
    else:
        spatial = d_euc(u.center, v.center)
    if spec.photo_weight > 0:
        spatial += spec.photo_weight * d_photo(u.id, v.id, spec.covisibility)
    return spatial


class PoolDistance:
    """Vectorized distances from one pool view to all others.

    Precomputes the center matrix (and the spatial normalizer when
    `normalize_spatial` is on) so greedy selection costs one O(N) row
    per pick instead of repeated pairwise calls.
    """

    def __init__(self, views: Sequence[CameraView], spec: DistanceSpec):
        self.views = tuple(views)
        self.spec = spec
        self.ids = [v.id for v in views]
        self.centers = np.stack([v.center for v in views]) if views else np.zeros((0, 3))
        if spec.spatial is Spatial.GREAT_CIRCLE and len(self.centers):
            norms = np.linalg.norm(self.centers, axis=1)
            off = np.abs(norms - 1.0)
            if (off > _UNIT_TOL).any():
                bad = self.ids[int(np.argmax(off))]
                raise NotUnit(
                    f"view {bad!r} center is not on the unit sphere; "
                    "project_to_unit_sphere first or use Euclidean distance"
                )
        if spec.photo_weight > 0:
            self._photo_rows = np.array(
                [spec.covisibility.index(i) for i in self.ids], dtype=np.int64
            )
            top = spec.covisibility.max_offdiagonal()
            if top <= 0:
                raise EmptyCovisibility(
                    "co-visibility matrix has no shared points between any view pair"
                )
            self._photo_max = top
        self._spatial_scale = self._max_spatial() if spec.normalize_spatial else 1.0

    def _spatial_row(self, i: int) -> np.ndarray:
        c = self.centers[i]
        if self.spec.spatial is Spatial.GREAT_CIRCLE:
            return np.arccos(np.clip(self.centers @ c, -1.0, 1.0))
        diff = self.centers - c
        return np.einsum("ij,ij->i", diff, diff)

    def _max_spatial(self) -> float:
        top = 0.0
        for i in range(len(self.centers)):
            row = self._spatial_row(i)
            row[i] = 0.0
            top = max(top, float(row.max(initial=0.0)))
        return top if top > 0 else 1.0

    def row(self, i: int) -> np.ndarray:
        """Distances from view index i to every pool view (0 at i itself)."""
        dist = self._spatial_row(i) / self._spatial_scale
        if self.spec.photo_weight > 0:
            counts = self.spec.covisibility.counts
            a = counts[self._photo_rows[i], self._photo_rows]
            dist = dist + self.spec.photo_weight * (1.0 - a / self._photo_max)
        dist[i] = 0.0
        return dist

    def between(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.row(i)[j])
