"""Shared fixtures and independent oracles used across the test modules."""

import numpy as np
import pytest

from viewselect.scene import CameraView, Intrinsics, TriangleMesh, ViewSet
from viewselect.splitgen import look_at_rotation


def small_intrinsics(size: int = 64) -> Intrinsics:
    return Intrinsics(fx=float(size), fy=float(size), cx=size / 2.0, cy=size / 2.0,
                      width=size, height=size)


def make_view(vid: str, center, intrinsics=None, look_at=(0.0, 0.0, 0.0)) -> CameraView:
    center = np.asarray(center, dtype=np.float64)
    target = np.asarray(look_at, dtype=np.float64)
    rotation = np.eye(3) if np.allclose(center, target) else look_at_rotation(center, target)
    return CameraView(id=vid, center=center, rotation=rotation, intrinsics=intrinsics)


def point_pool(points, intrinsics=None) -> ViewSet:
    """ViewSet whose centers are the given points; rotations are identity."""
    eye = np.eye(3)
    views = [
        CameraView(id=f"v{i:03d}", center=np.asarray(p, dtype=np.float64),
                   rotation=eye, intrinsics=intrinsics)
        for i, p in enumerate(points)
    ]
    return ViewSet(tuple(views))


def band_views(n: int, radius: float = 3.0, intrinsics=None, lo: float = 0.3,
               hi: float = 0.9, prefix: str = "band"):
    """Cameras on an oscillating band trajectory: never sees the underside."""
    i = np.arange(n)
    az = 4.0 * np.pi * i / n
    el = lo + (hi - lo) * 0.5 * (1.0 + np.sin(2.0 * az))
    centers = radius * np.stack(
        [np.cos(az) * np.cos(el), np.sin(az) * np.cos(el), np.sin(el)], axis=1
    )
    return [
        CameraView(id=f"{prefix}_{k:03d}", center=centers[k],
                   rotation=look_at_rotation(centers[k], np.zeros(3)),
                   intrinsics=intrinsics)
        for k in range(n)
    ]


def random_triangle_soup(n_triangles: int, seed: int = 0) -> TriangleMesh:
    """Well-conditioned random triangles scattered in the unit cube."""
    rng = np.random.default_rng(seed)
    tris = []
    while len(tris) < n_triangles:
        base = rng.uniform(-1.0, 1.0, 3)
        corners = base + rng.uniform(-0.25, 0.25, (3, 3))
        area = 0.5 * np.linalg.norm(np.cross(corners[1] - corners[0], corners[2] - corners[0]))
        if area > 1e-4:
            tris.append(corners)
    tris = np.asarray(tris)
    vertices = tris.reshape(-1, 3)
    triangles = np.arange(len(vertices), dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(vertices, triangles)


def brute_force_first_hit(origin, direction, mesh, t_eps=1e-9):
    """Independent first-hit oracle: plane intersection + barycentric containment.

    Deliberately a different algorithm from the production Moller-Trumbore
    path so the two routes cross-check each other.
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    v1 = mesh.vertices[mesh.triangles[:, 1]]
    v2 = mesh.vertices[mesh.triangles[:, 2]]
    normal = np.cross(v1 - v0, v2 - v0)
    denom = normal @ direction
    best_t, best_tri = np.inf, -1
    for i in range(len(v0)):
        if abs(denom[i]) < 1e-300:
            continue
        t = (normal[i] @ (v0[i] - origin)) / denom[i]
        if not (t_eps < t < best_t):
            continue
        p = origin + t * direction
        # barycentric via dot products in the triangle plane
        e0, e1 = v1[i] - v0[i], v2[i] - v0[i]
        w = p - v0[i]
        d00, d01, d11 = e0 @ e0, e0 @ e1, e1 @ e1
        d20, d21 = w @ e0, w @ e1
        det = d00 * d11 - d01 * d01
        if det <= 0:
            continue
        u = (d11 * d20 - d01 * d21) / det
        v = (d00 * d21 - d01 * d20) / det
        if u >= -1e-12 and v >= -1e-12 and u + v <= 1.0 + 1e-12:
            best_t, best_tri = t, i
    return (best_t, best_tri) if best_tri >= 0 else None


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
