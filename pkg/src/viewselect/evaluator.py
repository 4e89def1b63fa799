"""Evaluator boundary for the information-gain loop.

Real trainers plug in as an external process speaking a one-JSON-document
-per-round protocol on stdin/stdout; a built-in synthetic oracle makes
the loop runnable at desk scale. The oracle models a scene on the unit
sphere: quality rises with nearby selected views and dips around
configurable "hotspots" whose penalty decays as views accumulate there,
reproducing both the high-error-region signal and the oversampling trap.
"""

from __future__ import annotations

import json
import subprocess
import zlib
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np

from .errors import (
    IncompleteScores,
    MalformedResponse,
    NotOnSphere,
    SpawnFailure,
    Timeout,
)
from .scene import CameraView, QualityReport

__all__ = [
    "Hotspot",
    "OracleParams",
    "SyntheticOracle",
    "ExternalProcess",
    "EvaluatorBinding",
    "oracle_scores",
    "external_evaluate",
    "make_evaluator",
]

PROTOCOL_VERSION = 1
_KERNEL_SQ_WIDTH = 0.25  # great-circle width^2 of the per-view coverage kernel


@dataclass(frozen=True)
class Hotspot:
    """A difficult region: quality penalty centered on a unit direction."""

    center: tuple[float, float, float]
    difficulty: float
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        norm = float(np.linalg.norm(c))
        if abs(norm - 1.0) > 1e-6:
            raise NotOnSphere(f"hotspot center has norm {norm!r}")
        if not self.difficulty > 0:
            raise ValueError(f"difficulty must be positive, got {self.difficulty}")
        if not (0 < self.radius < np.pi):
            raise ValueError(f"hotspot radius must lie in (0, pi), got {self.radius}")
        object.__setattr__(self, "center", (float(c[0]), float(c[1]), float(c[2])))


@dataclass(frozen=True)
class OracleParams:
    hotspots: tuple[Hotspot, ...] = ()
    base_quality: float = 20.0
    gain_per_view: float = 1.0
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hotspots", tuple(self.hotspots))
        if not self.gain_per_view > 0:
            raise ValueError(f"gain_per_view must be positive, got {self.gain_per_view}")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd}")


@dataclass
class SyntheticOracle:
    params: OracleParams
    round_state: Any = None


@dataclass
class ExternalProcess:
    command: tuple[str, ...]
    timeout_s: float
    dataset_path: Optional[str] = None
    round_state: Any = None

    def __post_init__(self):
        self.command = tuple(self.command)
        if not self.timeout_s > 0:
            raise ValueError(f"timeout_s must be positive, got {self.timeout_s}")


EvaluatorBinding = Union[SyntheticOracle, ExternalProcess]


def _unit_centers(views: Sequence[CameraView], what: str) -> np.ndarray:
    if not views:
        return np.zeros((0, 3))
    centers = np.stack([v.center for v in views])
    norms = np.linalg.norm(centers, axis=1)
    if (np.abs(norms - 1.0) > 1e-6).any():
        bad = views[int(np.argmax(np.abs(norms - 1.0)))].id
        raise NotOnSphere(f"{what} view {bad!r} center is not on the unit sphere")
    return centers


def _gc_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.arccos(np.clip(a @ b.T, -1.0, 1.0))


def oracle_scores(
    selected: Sequence[CameraView],
    candidates: Sequence[CameraView],
    params: OracleParams,
) -> QualityReport:
    """Synthetic per-candidate quality on the unit sphere.

    score(c) = base
             + gain * sum_s exp(-d_gc(c, s)^2 / 0.25)
             - sum_h difficulty_h * exp(-d_gc(c, h)^2 / radius_h^2) / (1 + n_near_h)
             + N(0, noise_sd)

    where n_near_h counts selected views within radius_h of hotspot h, so
    stacking views on a hotspot yields diminishing penalty relief. The
    noise stream is a deterministic function of (params.seed, selection),
    making identical calls reproduce identical reports.
    """
    sel_centers = _unit_centers(selected, "selected")
    cand_centers = _unit_centers(candidates, "candidate")
    scores = np.full(len(candidates), params.base_quality)

    if len(sel_centers):
        d = _gc_matrix(cand_centers, sel_centers)
        scores += params.gain_per_view * np.exp(-(d**2) / _KERNEL_SQ_WIDTH).sum(axis=1)

    for hs in params.hotspots:
        hc = np.asarray(hs.center)
        d_cand = _gc_matrix(cand_centers, hc[None, :])[:, 0]
        if len(sel_centers):
            d_sel = _gc_matrix(sel_centers, hc[None, :])[:, 0]
            n_near = int((d_sel <= hs.radius).sum())
        else:
            n_near = 0
        scores -= hs.difficulty * np.exp(-(d_cand**2) / hs.radius**2) / (1.0 + n_near)

    if params.noise_sd > 0:
        token = ",".join(v.id for v in selected).encode()
        rng = np.random.default_rng([params.seed, len(selected), zlib.crc32(token)])
        scores = scores + rng.normal(0.0, params.noise_sd, len(candidates))

    return QualityReport({v.id: float(s) for v, s in zip(candidates, scores)})


def external_evaluate(
    binding: ExternalProcess,
    round_index: int,
    selected_ids: Sequence[str],
    candidate_ids: Sequence[str],
) -> QualityReport:
    """One round trip of the external-evaluator protocol.

    Spawns the command, writes a single request document on stdin
    ({v, round, selected, candidates, dataset_path}) and reads a single
    response line ({scores: {id: number}}). Every candidate id must come
    back with a finite score.
    """
    request = {
        "v": PROTOCOL_VERSION,
        "round": round_index,
        "selected": list(selected_ids),
        "candidates": list(candidate_ids),
        "dataset_path": binding.dataset_path,
    }
    try:
        proc = subprocess.Popen(
            binding.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        raise SpawnFailure(f"cannot spawn evaluator {binding.command!r}: {exc}") from exc
    try:
        out, err = proc.communicate(json.dumps(request) + "\n", timeout=binding.timeout_s)
    except subprocess.TimeoutExpired as exc:
        proc.kill()
        proc.communicate()
        raise Timeout(
            f"evaluator exceeded {binding.timeout_s}s in round {round_index}"
        ) from exc
    if proc.returncode != 0:
        raise MalformedResponse(
            f"evaluator exited with code {proc.returncode}: {err.strip()[:500]}"
        )
    line = next((ln for ln in out.splitlines() if ln.strip()), "")
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"evaluator wrote invalid JSON: {line[:200]!r}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("scores"), dict):
        raise MalformedResponse(f"response missing 'scores' object: {line[:200]!r}")
    scores = doc["scores"]
    for vid in candidate_ids:
        if vid not in scores:
            raise IncompleteScores(f"evaluator omitted score for {vid!r}")
        value = scores[vid]
        if not isinstance(value, (int, float)) or not np.isfinite(value):
            raise IncompleteScores(f"evaluator returned non-finite score {value!r} for {vid!r}")
    return QualityReport({vid: float(scores[vid]) for vid in candidate_ids})


def make_evaluator(binding: EvaluatorBinding):
    """Adapt a binding to the igs_run evaluator callable."""
    if isinstance(binding, SyntheticOracle):

        def run_oracle(round_index, selected, candidates):
            return oracle_scores(selected, candidates, binding.params)

        return run_oracle

    if isinstance(binding, ExternalProcess):

        def run_external(round_index, selected, candidates):
            binding.round_state = round_index
            return external_evaluate(
                binding,
                round_index,
                [v.id for v in selected],
                [v.id for v in candidates],
            )

        return run_external

    raise TypeError(f"unknown evaluator binding {binding!r}")
