"""Information-gain-based sampling: select, evaluate, sample, repeat.

Each round scores the remaining candidates with a pluggable evaluator,
ranks them worst-first, and draws the next views from one of three
probability samplers:

  * Greedy — deterministically takes the worst-scoring candidates;
  * Zipf — rank-based pmf exp(-gamma * rank / (q-1)), interpolating
    between uniform (gamma -> 0) and greedy (gamma -> inf);
  * MvMF — mixture of von Mises-Fisher components on the unit sphere,
    one per measured candidate, softmax-weighted by inverse error;
    sampled directions snap to the nearest unselected candidate.

Scores are higher-better throughout; rank 0 is the worst candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DrawExceedsPool, EvaluatorFailure, NotOnSphere, ScheduleExhaustsPool
from .relaxation import LloydConfig, lloyd_relax, sample_support, snap_to_candidates
from .scene import CameraView, QualityReport, ViewSet

__all__ = [
    "Greedy",
    "Zipf",
    "MvMF",
    "IgsConfig",
    "ErrorRanking",
    "IgsResult",
    "zipf_pmf",
    "zipf_draw",
    "mvmf_weights",
    "mvmf_draw",
    "vmf_sample",
    "igs_run",
]

Evaluator = Callable[[int, Sequence[CameraView], Sequence[CameraView]], QualityReport]


@dataclass(frozen=True)
class Greedy:
    """Deterministic worst-first selection."""


@dataclass(frozen=True)
class Zipf:
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and positive, got {self.gamma}")


@dataclass(frozen=True)
class MvMF:
    kappa: float
    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be finite and positive, got {self.kappa}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and positive, got {self.sigma}")


Sampler = Union[Greedy, Zipf, MvMF]


@dataclass(frozen=True)
class IgsConfig:
    initial_k: int
    schedule: tuple[int, ...]
    sampler: Sampler
    relaxation: Optional[LloydConfig] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "schedule", tuple(int(l) for l in self.schedule))
        if self.initial_k < 1:
            raise ValueError(f"initial_k must be positive, got {self.initial_k}")
        if any(l < 1 for l in self.schedule):
            raise ValueError(f"schedule entries must be positive, got {self.schedule}")

    @property
    def total_views(self) -> int:
        return self.initial_k + sum(self.schedule)


@dataclass(frozen=True)
class ErrorRanking:
    """Candidate ids ordered worst-quality-first; rank 0 = lowest score."""

    order: tuple[str, ...]
    rank: dict[str, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "rank", {vid: r for r, vid in enumerate(self.order)})

    @staticmethod
    def from_report(report: QualityReport, candidate_ids: Sequence[str]) -> "ErrorRanking":
        # equal scores tie-break by id so ranks are reproducible
        order = sorted(candidate_ids, key=lambda vid: (report.score(vid), vid))
        return ErrorRanking(tuple(order))

    def __len__(self) -> int:
        return len(self.order)


def zipf_pmf(ranking: ErrorRanking, gamma: float) -> np.ndarray:
    """Pmf over ranking.order: f_i proportional to exp(-gamma * rank_i / (q-1)).

    Normalized in log space so it stays exact for large gamma and q.
    A single candidate degenerates to the pmf {1}.
    """
    q = len(ranking)
    if q == 0:
        raise DrawExceedsPool("empty ranking")
    if q == 1:
        return np.array([1.0])
    logf = -gamma * np.arange(q, dtype=np.float64) / (q - 1)
    logf -= logf.max()
    f = np.exp(logf)
    return f / f.sum()


def zipf_draw(
    ranking: ErrorRanking, gamma: float, l: int, rng: np.random.Generator
) -> list[str]:
    """Draw l distinct ids without replacement, renormalizing after each draw."""
    q = len(ranking)
    if l > q:
        raise DrawExceedsPool(f"cannot draw {l} from {q} candidates")
    weights = zipf_pmf(ranking, gamma).copy()
    drawn: list[str] = []
    for _ in range(l):
        p = weights / weights.sum()
        pick = int(rng.choice(q, p=p))
        drawn.append(ranking.order[pick])
        weights[pick] = 0.0
    return drawn


def mvmf_weights(
    report: QualityReport, sigma: float, ids: Optional[Sequence[str]] = None
) -> np.ndarray:
    """Softmax component weights from inverse min-max-normalized scores.

    The worst view (lowest score) gets normalized error 1 and therefore
    the largest weight. Equal scores everywhere fall back to uniform.
    """
    if ids is None:
        ids = list(report.scores.keys())
    m = np.array([report.score(vid) for vid in ids], dtype=np.float64)
    span = m.max() - m.min()
    if span == 0 or len(m) == 1:
        return np.full(len(m), 1.0 / len(m))
    inv = (m.max() - m) / span
    e = np.exp((inv - inv.max()) / sigma)
    return e / e.sum()


def _tangent_frame(mean: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(mean[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(mean, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mean, e1)
    return e1, e2


def vmf_sample(mean, kappa: float, rng: np.random.Generator, size: Optional[int] = None):
    """Sample unit vectors from a von Mises-Fisher density on the 2-sphere.

    Uses the closed-form inverse CDF of the cosine against the mean,
    w = 1 + log(u + (1-u) exp(-2 kappa)) / kappa, plus a uniform angle in
    the tangent plane. Stable for arbitrarily large kappa (the density
    normalizer is never evaluated).
    """
    mean = np.asarray(mean, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(mean)
    if abs(norm - 1.0) > 1e-6:
        raise NotOnSphere(f"vMF mean has norm {norm!r}")
    n = 1 if size is None else int(size)
    u = rng.random(n)
    arg = u + (1.0 - u) * np.exp(-2.0 * kappa)
    w = 1.0 + np.log(np.maximum(arg, 1e-300)) / kappa
    w = np.clip(w, -1.0, 1.0)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    e1, e2 = _tangent_frame(mean)
    sin_w = np.sqrt(np.maximum(0.0, 1.0 - w * w))
    out = (
        w[:, None] * mean
        + (sin_w * np.cos(theta))[:, None] * e1
        + (sin_w * np.sin(theta))[:, None] * e2
    )
    return out[0] if size is None else out


def mvmf_draw(
    candidates: Sequence[CameraView],
    report: QualityReport,
    kappa: float,
    sigma: float,
    l: int,
    rng: np.random.Generator,
) -> list[str]:
    """Draw l distinct candidate ids from the vMF mixture over candidate centers.

    Component i sits at candidate i's (unit-norm) center; a drawn
    direction snaps to the candidate with the largest dot product.
    Duplicate snaps are rejected and redrawn, bounded by 10*l*q attempts,
    after which the remainder is filled greedily from the error ranking.
    """
    ids = [v.id for v in candidates]
    q = len(ids)
    if l > q:
        raise DrawExceedsPool(f"cannot draw {l} from {q} candidates")
    centers = np.stack([v.center for v in candidates])
    norms = np.linalg.norm(centers, axis=1)
    if (np.abs(norms - 1.0) > 1e-6).any():
        bad = ids[int(np.argmax(np.abs(norms - 1.0)))]
        raise NotOnSphere(f"candidate {bad!r} center is not on the unit sphere")

    alpha = mvmf_weights(report, sigma, ids)
    drawn: list[str] = []
    taken = set()
    attempts = 0
    limit = 10 * l * q
    while len(drawn) < l and attempts < limit:
        attempts += 1
        comp = int(rng.choice(q, p=alpha))
        x = vmf_sample(centers[comp], kappa, rng)
        snap = int(np.argmax(centers @ x))
        if ids[snap] not in taken:
            taken.add(ids[snap])
            drawn.append(ids[snap])
    if len(drawn) < l:
        ranking = ErrorRanking.from_report(report, ids)
        for vid in ranking.order:
            if vid not in taken:
                taken.add(vid)
                drawn.append(vid)
                if len(drawn) == l:
                    break
    return drawn


@dataclass(frozen=True)
class IgsResult:
    view_set: ViewSet
    records: tuple[dict, ...]
    evaluator_calls: int


def _draw(
    sampler: Sampler,
    ranking: ErrorRanking,
    candidates: Sequence[CameraView],
    report: QualityReport,
    l: int,
    rng: np.random.Generator,
) -> list[str]:
    if isinstance(sampler, Greedy):
        if l > len(ranking):
            raise DrawExceedsPool(f"cannot draw {l} from {len(ranking)} candidates")
        return list(ranking.order[:l])
    if isinstance(sampler, Zipf):
        return zipf_draw(ranking, sampler.gamma, l, rng)
    if isinstance(sampler, MvMF):
        return mvmf_draw(candidates, report, sampler.kappa, sampler.sigma, l, rng)
    raise TypeError(f"unknown sampler {sampler!r}")


def igs_run(view_set: ViewSet, cfg: IgsConfig, evaluator: Evaluator) -> IgsResult:
    """Run the full select/evaluate/sample loop.

    Starts from the set's existing selection when present, otherwise from
    cfg.initial_k uniformly random views. Round i scores every remaining
    candidate, draws schedule[i] views with the configured sampler,
    optionally Lloyd-relaxes the proposals (snapping back to unselected
    candidates), and unions them into the selection.

    Returns the final ViewSet plus one flat log record per candidate per
    round: {round, view_id, score, rank, drawn, relaxed_to}.
    """
    if cfg.total_views > len(view_set):
        raise ScheduleExhaustsPool(
            f"initial_k + schedule = {cfg.total_views} exceeds pool of {len(view_set)} views"
        )
    rng = np.random.default_rng(cfg.seed)
    ids = [v.id for v in view_set.views]

    if view_set.selected:
        selected = list(view_set.selected)
    else:
        selected = [ids[i] for i in rng.choice(len(ids), size=cfg.initial_k, replace=False)]

    support = None
    records: list[dict] = []
    evaluator_calls = 0

    for round_idx, l in enumerate(cfg.schedule, start=1):
        current = view_set.with_selected(selected)
        cand_views = current.candidate_views()
        cand_ids = [v.id for v in cand_views]
        report = evaluator(round_idx, current.selected_views(), cand_views)
        for vid in cand_ids:
            if vid not in report.scores:
                raise EvaluatorFailure(f"round {round_idx}: no score for candidate {vid!r}")
            if not np.isfinite(report.scores[vid]):
                raise EvaluatorFailure(
                    f"round {round_idx}: non-finite score {report.scores[vid]!r} for {vid!r}"
                )
        evaluator_calls += len(cand_ids)

        ranking = ErrorRanking.from_report(report, cand_ids)
        drawn = _draw(cfg.sampler, ranking, cand_views, report, l, rng)

        relaxed_to: dict[str, str] = {}
        if cfg.relaxation is not None:
            if support is None:
                support = sample_support(
                    view_set, cfg.relaxation, np.random.default_rng(cfg.relaxation.seed)
                )
            fixed = np.stack([current.view(vid).center for vid in selected])
            proposals = np.stack([current.view(vid).center for vid in drawn])
            relaxed = lloyd_relax(fixed, proposals, support, cfg.relaxation)
            final = snap_to_candidates(relaxed, current, set(selected))
            relaxed_to = dict(zip(drawn, final))
        else:
            final = list(drawn)

        drawn_set = set(drawn)
        for vid in cand_ids:
            records.append(
                {
                    "round": round_idx,
                    "view_id": vid,
                    "score": report.scores[vid],
                    "rank": ranking.rank[vid],
                    "drawn": vid in drawn_set,
                    "relaxed_to": relaxed_to.get(vid),
                }
            )
        selected.extend(final)

    return IgsResult(view_set.with_selected(selected), tuple(records), evaluator_calls)
