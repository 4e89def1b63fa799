"""Lloyd relaxation of proposed camera positions against a uniform measure.

The measure is discrete: N support atoms drawn uniformly over either the
unit sphere or the convex hull of all available camera centers. Each
iteration assigns every atom to its nearest center (fixed centers and
proposals together), then moves only the proposals to their cell
barycenters. Fixed centers never move, so relaxation spreads new views
into the regions the existing selection leaves empty.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .errors import DegenerateHull, NotUnit, PoolExhausted
from .scene import ViewSet

__all__ = ["Domain", "LloydConfig", "sample_support", "lloyd_relax", "snap_to_candidates"]


class Domain(enum.Enum):
    SPHERE = "sphere"
    CONVEX_HULL = "convex-hull"


@dataclass(frozen=True)
class LloydConfig:
    domain: Domain = Domain.SPHERE
    n_iter: int = 8
    support_samples: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.support_samples < 1:
            raise ValueError(f"support_samples must be positive, got {self.support_samples}")


def sample_support(
    all_views: ViewSet, cfg: LloydConfig, rng: np.random.Generator
) -> np.ndarray:
    """Draw cfg.support_samples atoms of the uniform relaxation measure.

    Sphere: normalized Gaussian samples on the unit 2-sphere (the camera
    centers must already be unit-norm). Convex hull: rejection sampling
    inside the hull of all camera centers, which needs at least four
    non-coplanar centers.
    """
    n = cfg.support_samples
    if cfg.domain is Domain.SPHERE:
        centers = all_views.centers()
        if len(centers) and (np.abs(np.linalg.norm(centers, axis=1) - 1.0) > 1e-6).any():
            raise NotUnit("sphere-domain relaxation requires unit-norm camera centers")
        g = rng.standard_normal((n, 3))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    centers = all_views.centers()
    if len(centers) < 4:
        raise DegenerateHull(f"convex hull needs >= 4 centers, got {len(centers)}")
    try:
        hull = Delaunay(centers)
    except QhullError as exc:
        raise DegenerateHull(f"camera centers are degenerate (coplanar/collinear): {exc}") from exc
    lo = centers.min(axis=0)
    hi = centers.max(axis=0)
    out = np.empty((n, 3))
    filled = 0
    while filled < n:
        batch = rng.uniform(lo, hi, size=(max(2 * (n - filled), 1024), 3))
        inside = batch[hull.find_simplex(batch) >= 0]
        take = min(len(inside), n - filled)
        out[filled : filled + take] = inside[:take]
        filled += take
    return out


def lloyd_relax(
    fixed: np.ndarray, proposals: np.ndarray, support: np.ndarray, cfg: LloydConfig
) -> np.ndarray:
    """Run cfg.n_iter Lloyd iterations; returns the relaxed proposal positions.

    Atoms are assigned to the Euclidean-nearest center among fixed and
    proposal centers. Proposals move to the barycenter of their cell
    (renormalized to the sphere when domain is SPHERE); a proposal with
    an empty cell, or a sphere barycenter that cancels to zero, keeps its
    previous position. Fixed centers are returned untouched by contract.
    """
    fixed = np.asarray(fixed, dtype=np.float64).reshape(-1, 3)
    proposals = np.array(proposals, dtype=np.float64).reshape(-1, 3)
    support = np.asarray(support, dtype=np.float64).reshape(-1, 3)
    if len(fixed) + len(proposals) == 0:
        raise ValueError("need at least one center")
    if len(support) == 0:
        raise ValueError("support measure is empty")
    if len(proposals) == 0:
        return proposals
    n_centers = len(fixed) + len(proposals)
    if len(support) < 10 * n_centers:
        raise ValueError(
            f"support of {len(support)} atoms is too sparse for {n_centers} centers "
            "(need >= 10 atoms per center)"
        )

    k = len(fixed)
    for _ in range(cfg.n_iter):
        centers = np.concatenate([fixed, proposals]) if k else proposals
        _, owner = cKDTree(centers).query(support)
        # bincount sums atoms in index order: deterministic barycenters
        counts = np.bincount(owner, minlength=n_centers)
        sums = np.stack(
            [np.bincount(owner, weights=support[:, a], minlength=n_centers) for a in range(3)],
            axis=1,
        )
        for j in range(len(proposals)):
            cell = k + j
            if counts[cell] == 0:
                continue
            b = sums[cell] / counts[cell]
            if cfg.domain is Domain.SPHERE:
                norm = np.linalg.norm(b)
                if norm <= 1e-12:
                    continue  # perfectly antipodal cell: keep previous position
                b = b / norm
            proposals[j] = b
    return proposals


def snap_to_candidates(
    relaxed: np.ndarray, candidates: ViewSet, already: set[str]
) -> list[str]:
    """Map each relaxed position to its nearest still-unselected candidate id.

    Positions are resolved greedily in input order; a candidate taken by
    an earlier position falls through to the next-nearest one.
    """
    relaxed = np.asarray(relaxed, dtype=np.float64).reshape(-1, 3)
    available = [v for v in candidates.views if v.id not in already]
    if len(relaxed) > len(available):
        raise PoolExhausted(
            f"{len(relaxed)} relaxed positions but only {len(available)} unselected candidates"
        )
    out: list[str] = []
    for pos in relaxed:
        dists = [float(np.linalg.norm(v.center - pos)) for v in available]
        best = min(range(len(available)), key=lambda i: (dists[i], available[i].id))
        out.append(available.pop(best).id)
    return out
