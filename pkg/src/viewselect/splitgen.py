"""Test-split generation: uniform sphere poses and maximin re-splits.

Synthetic evaluation sets place cameras on a spherical Fibonacci lattice,
which is closed-form, deterministic, and near-optimally uniform. Real
captures are re-split by pooling all views and pulling the test set out
with farthest view sampling so it covers the scene evenly.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceedsPool
from .fvs import FvsConfig, fvs_select
from .metrics import DistanceSpec
from .scene import CameraView, Intrinsics, ViewSet

__all__ = ["uniform_sphere_poses", "fvs_resplit", "look_at_rotation", "rotate_views_z"]

_DEFAULT_INTRINSICS = Intrinsics(fx=800.0, fy=800.0, cx=400.0, cy=400.0, width=800, height=800)
_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def look_at_rotation(center: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Camera-to-world rotation aiming the optical axis (-z) from center at target.

    Up-vector is world +z, falling back to +y when the axis is parallel
    to z (gimbal case).
    """
    back = np.asarray(center, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    norm = np.linalg.norm(back)
    if norm < 1e-12:
        raise ValueError("camera center coincides with the look-at target")
    back = back / norm
    up_hint = np.array([0.0, 0.0, 1.0])
    if abs(back @ up_hint) > 1.0 - 1e-9:
        up_hint = np.array([0.0, 1.0, 0.0])
    right = np.cross(up_hint, back)
    right /= np.linalg.norm(right)
    up = np.cross(back, right)
    return np.stack([right, up, back], axis=1)


def uniform_sphere_poses(
    count: int,
    radius: float = 1.0,
    center=(0.0, 0.0, 0.0),
    look_at=None,
    intrinsics: Intrinsics | None = None,
    id_prefix: str = "sphere",
) -> list[CameraView]:
    """Cameras on a spherical Fibonacci lattice, each aimed at `look_at`.

    The lattice point for index i sits at height z = 1 - 2(i + 0.5)/n and
    azimuth i times the golden angle. Intrinsics are copied from the
    template (default: 800x800 pinhole, fx = fy = 800).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=np.float64).reshape(3)
    target = center if look_at is None else np.asarray(look_at, dtype=np.float64).reshape(3)
    intr = _DEFAULT_INTRINSICS if intrinsics is None else intrinsics

    i = np.arange(count, dtype=np.float64)
    z = 1.0 - 2.0 * (i + 0.5) / count
    ring = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = i * _GOLDEN_ANGLE
    points = np.stack([ring * np.cos(theta), ring * np.sin(theta), z], axis=1)
    pad = len(str(max(count - 1, 1)))

    views = []
    for idx in range(count):
        c = center + radius * points[idx]
        views.append(
            CameraView(
                id=f"{id_prefix}_{idx:0{max(pad, 3)}d}",
                center=c,
                rotation=look_at_rotation(c, target),
                intrinsics=intr,
            )
        )
    return views


def fvs_resplit(
    pool: ViewSet, count: int, spec: DistanceSpec, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Pull `count` test views out of the pool by farthest view sampling.

    Returns (test_ids, train_ids): disjoint, exhaustive, deterministic for
    a given seed (the single FVS start view is the seeded random pick).
    """
    if count >= len(pool):
        raise BudgetExceedsPool(
            f"test count {count} must be smaller than the pool of {len(pool)} views"
        )
    fresh = ViewSet(pool.views)  # re-split ignores any prior selection
    chosen = fvs_select(fresh, FvsConfig(target_n=count, spec=spec, initial_k=1, seed=seed))
    test = list(chosen.selected)
    taken = set(test)
    train = [v.id for v in pool.views if v.id not in taken]
    return test, train


def rotate_views_z(views: ViewSet, angle: float) -> ViewSet:
    """Rigidly rotate every camera about the world z axis by `angle` radians."""
    c, s = np.cos(angle), np.sin(angle)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    rotated = [
        CameraView(
            id=v.id,
            center=rz @ v.center,
            rotation=rz @ v.rotation,
            intrinsics=v.intrinsics,
            image_path=v.image_path,
        )
        for v in views.views
    ]
    return ViewSet(tuple(rotated), views.selected)
