"""Operator-facing commands: select, split, coverage, simulate.

Configuration comes from an optional JSON config file (schema v1, keys =
flag names) with command-line flags taking precedence. Every command is
deterministic given its seeds and overwrites its outputs in place, so
reruns with an identical config reproduce identical files (created_at
timestamps excepted; set SOURCE_DATE_EPOCH to pin those too).

Exit codes: 0 ok, 2 config error, 3 data error, 4 evaluator error,
5 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dataset_io
from .errors import (
    BudgetExceedsPool,
    ConfigError,
    DrawExceedsPool,
    EvaluatorFailure,
    ScheduleExhaustsPool,
    ViewSelectError,
)
from .evaluator import ExternalProcess, Hotspot, OracleParams, SyntheticOracle, make_evaluator, oracle_scores
from .fvs import FvsConfig, fvs_trace
from .igs import Greedy, IgsConfig, MvMF, Zipf, igs_run
from .metrics import DistanceSpec, Spatial
from .relaxation import Domain, LloydConfig
from .scene import ViewSet, project_to_unit_sphere
from .splitgen import fvs_resplit, rotate_views_z, uniform_sphere_poses

log = logging.getLogger("viewselect")

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_EVALUATOR = 4
EXIT_INTERNAL = 5

_SIZING_ERRORS = (BudgetExceedsPool, ScheduleExhaustsPool, DrawExceedsPool)

METHODS = ("rs", "fvs", "igs-greedy", "igs-zipf", "igs-vmf")
DEFAULT_SCHEDULE = "5x5,12x10"  # +5 to 30 views, then +10 to 150


def _setup_logging() -> None:
    level = os.environ.get("VIEWDIR_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ConfigError(f"VIEWDIR_LOG must be error|info|debug, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def parse_schedule(text: str) -> list[int]:
    """Comma list of round sizes; 'NxM' expands to N rounds of M views."""
    out: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "x" in token:
            n, m = token.split("x", 1)
            out.extend([int(m)] * int(n))
        else:
            out.append(int(token))
    if not out or any(v < 1 for v in out):
        raise ConfigError(f"invalid schedule {text!r}")
    return out


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid seeds {text!r}: {exc}") from exc
    if not seeds:
        raise ConfigError("at least one seed is required")
    return seeds


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected x,y,z, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def _load_dataset(args) -> tuple[ViewSet, Optional[object]]:
    if not args.dataset:
        raise ConfigError("--dataset is required")
    if args.format == "transforms":
        return dataset_io.read_transforms(args.dataset), None
    if args.format == "colmap-text":
        views, covis = dataset_io.read_colmap_text(args.dataset)
        return views, covis
    raise ConfigError(f"unknown dataset format {args.format!r}")


def _distance_spec(args, covisibility) -> DistanceSpec:
    spatial = Spatial.GREAT_CIRCLE if args.distance == "gc" else Spatial.EUCLIDEAN
    alpha = args.alpha if args.alpha is not None else 0.0
    if alpha > 0 and covisibility is None:
        raise ConfigError("--alpha needs a co-visibility matrix; use --format colmap-text")
    return DistanceSpec(
        spatial=spatial,
        photo_weight=alpha,
        covisibility=covisibility if alpha > 0 else None,
        normalize_spatial=args.normalize_spatial,
    )


def _centers_on_sphere(view_set: ViewSet) -> bool:
    centers = view_set.centers()
    if not len(centers):
        return False
    return bool((np.abs(np.linalg.norm(centers, axis=1) - 1.0) <= 1e-6).all())


def _oracle_params(args) -> OracleParams:
    hotspots = []
    for spec in args.oracle_hotspot or []:
        parts = [float(t) for t in spec.split(",")]
        if len(parts) != 5:
            raise ConfigError(
                f"--oracle-hotspot needs x,y,z,difficulty,radius, got {spec!r}"
            )
        c = np.asarray(parts[:3])
        c = c / np.linalg.norm(c)
        hotspots.append(Hotspot(center=tuple(c), difficulty=parts[3], radius=parts[4]))
    return OracleParams(
        hotspots=tuple(hotspots),
        base_quality=args.oracle_base,
        gain_per_view=args.oracle_gain,
        noise_sd=args.oracle_noise,
        seed=args.oracle_seed,
    )


def _lloyd_config(args, sphere: bool) -> Optional[LloydConfig]:
    if args.relax != "on":
        return None
    if args.relax_domain == "sphere" or (args.relax_domain == "auto" and sphere):
        domain = Domain.SPHERE
    else:
        domain = Domain.CONVEX_HULL
    return LloydConfig(
        domain=domain,
        n_iter=args.lloyd_iters,
        support_samples=args.support_samples,
        seed=args.lloyd_seed,
    )


# ---- select ------------------------------------------------------------------

@dataclass
class SelectWork:
    view_set: ViewSet
    method: str
    budget: Optional[int]
    schedule: tuple[int, ...]
    initial_k: int
    spec: DistanceSpec
    lloyd: Optional[LloydConfig]
    sampler_args: dict
    evaluator_binding: object
    seed: int
    repetition: int
    config_echo: dict
    out_dir: str


def _igs_sampler(method: str, sampler_args: dict):
    if method == "igs-greedy":
        return Greedy()
    if method == "igs-zipf":
        return Zipf(gamma=sampler_args["gamma"])
    if method == "igs-vmf":
        return MvMF(kappa=sampler_args["kappa"], sigma=sampler_args["sigma"])
    raise ConfigError(f"not an igs method: {method}")


def _run_repetition(work: SelectWork) -> str:
    rng = np.random.default_rng(work.seed)
    ids = [v.id for v in work.view_set.views]
    order: list[dict] = []
    log_records: Optional[tuple] = None

    if work.method == "rs":
        picks = [ids[i] for i in rng.choice(len(ids), size=work.budget, replace=False)]
        order = [{"step": s + 1, "view_id": vid, "score": None} for s, vid in enumerate(picks)]
    elif work.method == "fvs":
        cfg = FvsConfig(
            target_n=work.budget, spec=work.spec, initial_k=work.initial_k, seed=work.seed
        )
        trace = fvs_trace(work.view_set, cfg)
        order = [
            {"step": s + 1, "view_id": vid, "score": score}
            for s, (vid, score) in enumerate(trace)
        ]
    else:
        cfg = IgsConfig(
            initial_k=work.initial_k,
            schedule=work.schedule,
            sampler=_igs_sampler(work.method, work.sampler_args),
            relaxation=work.lloyd,
            seed=work.seed,
        )
        result = igs_run(work.view_set, cfg, make_evaluator(work.evaluator_binding))
        log_records = result.records
        scores = {(r["round"], r["view_id"]): r["score"] for r in result.records}
        selected = list(result.view_set.selected)
        round_of: dict[int, int] = {}
        pos = work.initial_k
        for round_idx, l in enumerate(work.schedule, start=1):
            for _ in range(l):
                round_of[pos] = round_idx
                pos += 1
        for s, vid in enumerate(selected):
            score = scores.get((round_of.get(s, 0), vid))
            order.append({"step": s + 1, "view_id": vid, "score": score})

    manifest = dataset_io.SelectionManifest(
        method=work.method,
        seed=work.seed,
        config_echo=work.config_echo,
        order=tuple(order),
    )
    out_dir = Path(work.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"manifest_{work.method}_rep{work.repetition:03d}.json"
    dataset_io.write_manifest(manifest, path)
    if log_records is not None:
        dataset_io.write_records_jsonl(
            log_records, out_dir / f"log_{work.method}_rep{work.repetition:03d}.jsonl"
        )
    return str(path)


def cmd_select(args) -> int:
    view_set, covisibility = _load_dataset(args)
    if args.method not in METHODS:
        raise ConfigError(f"--method must be one of {METHODS}, got {args.method!r}")
    seeds = _parse_seeds(args.seeds)
    if args.repetitions is not None and args.repetitions != len(seeds):
        raise ConfigError(
            f"--repetitions {args.repetitions} does not match {len(seeds)} seeds"
        )

    if args.project_sphere:
        view_set = project_to_unit_sphere(view_set, args.sphere_center)
    sphere = _centers_on_sphere(view_set)

    spec = _distance_spec(args, covisibility)
    schedule: tuple[int, ...] = ()
    budget = None
    sampler_args: dict = {}
    binding: object = None

    if args.method in ("rs", "fvs"):
        if args.budget is None:
            raise ConfigError(f"--budget is required for method {args.method}")
        budget = args.budget
        if budget > len(view_set):
            raise BudgetExceedsPool(
                f"budget {budget} exceeds pool of {len(view_set)} views"
            )
    else:
        schedule = tuple(parse_schedule(args.schedule))
        if args.method == "igs-zipf":
            sampler_args["gamma"] = args.gamma
        if args.method == "igs-vmf":
            if args.kappa is None or args.sigma is None:
                raise ConfigError("--kappa and --sigma are required for igs-vmf")
            if not sphere:
                raise ConfigError(
                    "igs-vmf requires camera centers on a common unit sphere: "
                    "pass --project-sphere, or use igs-zipf which has no such constraint"
                )
            sampler_args.update(kappa=args.kappa, sigma=args.sigma)
        if args.evaluator_cmd:
            import shlex

            binding = ExternalProcess(
                command=tuple(shlex.split(args.evaluator_cmd)),
                timeout_s=args.evaluator_timeout,
                dataset_path=args.dataset,
            )
        else:
            if not sphere:
                raise ConfigError(
                    "the synthetic oracle needs unit-sphere camera centers; "
                    "pass --project-sphere or supply --evaluator-cmd"
                )
            binding = SyntheticOracle(params=_oracle_params(args))

    config_echo = _echo_config(args, seeds)
    works = [
        SelectWork(
            view_set=view_set,
            method=args.method,
            budget=budget,
            schedule=schedule,
            initial_k=args.initial_k,
            spec=spec,
            lloyd=_lloyd_config(args, sphere),
            sampler_args=sampler_args,
            evaluator_binding=binding,
            seed=seed,
            repetition=rep,
            config_echo=config_echo,
            out_dir=args.out,
        )
        for rep, seed in enumerate(seeds)
    ]
    if args.jobs > 1 and len(works) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            paths = list(pool.map(_run_repetition, works))
    else:
        paths = [_run_repetition(w) for w in works]
    for p in paths:
        log.info("wrote %s", p)
    return 0


def _echo_config(args, seeds: list[int]) -> dict:
    return {
        "dataset": args.dataset,
        "format": args.format,
        "method": args.method,
        "budget": args.budget,
        "schedule": args.schedule,
        "initial_k": args.initial_k,
        "distance": args.distance,
        "alpha": args.alpha,
        "normalize_spatial": args.normalize_spatial,
        "gamma": args.gamma,
        "kappa": args.kappa,
        "sigma": args.sigma,
        "relax": args.relax,
        "relax_domain": args.relax_domain,
        "lloyd_iters": args.lloyd_iters,
        "support_samples": args.support_samples,
        "lloyd_seed": args.lloyd_seed,
        "project_sphere": args.project_sphere,
        "sphere_center": list(args.sphere_center),
        "evaluator_cmd": args.evaluator_cmd,
        "evaluator_timeout": args.evaluator_timeout,
        "oracle_base": args.oracle_base,
        "oracle_gain": args.oracle_gain,
        "oracle_noise": args.oracle_noise,
        "oracle_seed": args.oracle_seed,
        "oracle_hotspot": list(args.oracle_hotspot or []),
        "seeds": seeds,
        "repetitions": len(seeds),
        "jobs": args.jobs,
        "out": args.out,
    }


# ---- split -------------------------------------------------------------------

def cmd_split(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    angles_deg = [float(t) for t in args.rotate_z.split(",")] if args.rotate_z else []

    if args.mode == "uniform-sphere":
        intr = None
        if args.dataset:
            pool, _ = _load_dataset(args)
            intr = pool.views[0].intrinsics
        poses = uniform_sphere_poses(
            count=args.count,
            radius=args.radius,
            center=args.center,
            intrinsics=intr,
            id_prefix="test",
        )
        cam_set = ViewSet(tuple(poses))
        dataset_io.write_transforms(cam_set, out_dir / "uniform_sphere.json")
        log.info("wrote %s (%d poses)", out_dir / "uniform_sphere.json", len(poses))
        for deg in angles_deg:
            rotated = rotate_views_z(cam_set, np.deg2rad(deg))
            path = out_dir / f"uniform_sphere_rotz{deg:g}.json"
            dataset_io.write_transforms(rotated, path)
            log.info("wrote %s", path)
        return 0

    if args.mode == "fvs-resplit":
        pool, covisibility = _load_dataset(args)
        spec = _distance_spec(args, covisibility)
        test, train = fvs_resplit(pool, args.count, spec, seed=args.seed)
        dataset_io.write_split(
            out_dir / "split.json",
            mode="fvs-resplit",
            test_ids=test,
            train_ids=train,
            seed=args.seed,
            config_echo={
                "dataset": args.dataset,
                "format": args.format,
                "count": args.count,
                "distance": args.distance,
                "alpha": args.alpha,
                "seed": args.seed,
            },
        )
        log.info("wrote %s: %d test / %d train", out_dir / "split.json", len(test), len(train))
        for deg in angles_deg:
            rotated = rotate_views_z(pool, np.deg2rad(deg))
            path = out_dir / f"pool_rotz{deg:g}.json"
            dataset_io.write_transforms(rotated, path)
            log.info("wrote %s", path)
        return 0

    raise ConfigError(f"--mode must be uniform-sphere or fvs-resplit, got {args.mode!r}")


# ---- coverage ----------------------------------------------------------------

def _load_mesh(spec: str):
    from . import meshes

    if spec.startswith("icosphere"):
        parts = spec.split(":")
        subdiv = int(parts[1]) if len(parts) > 1 else 3
        radius = float(parts[2]) if len(parts) > 2 else 1.0
        return meshes.icosphere(subdivisions=subdiv, radius=radius)
    if spec.endswith(".obj"):
        return dataset_io.read_obj(spec)
    raise ConfigError(f"--mesh must be an .obj path or icosphere[:subdiv[:radius]], got {spec!r}")


def cmd_coverage(args) -> int:
    from . import coverage as cov

    if not args.mesh:
        raise ConfigError("--mesh is required")
    if not args.dataset:
        raise ConfigError("at least one --dataset camera set is required")
    mesh = _load_mesh(args.mesh)
    samples = cov.sample_surface(
        mesh, args.surface_samples, radius=args.ball_radius, seed=args.sample_seed
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    norm = {
        "max-count": cov.Normalization.MAX_COUNT,
        "total-hits": cov.Normalization.TOTAL_HITS,
        "ray-budget": cov.Normalization.RAY_BUDGET,
    }[args.normalization]

    fields = []
    rows = []
    for path in args.dataset:
        views = dataset_io.read_transforms(path) if args.format == "transforms" else dataset_io.read_colmap_text(path)[0]
        field = cov.coverage_measure(mesh, samples, views, stride=args.stride, normalization=norm)
        name = Path(path).stem
        cov.write_field_binary(field, out_dir / f"coverage_{name}.bin")
        cov.write_field_ply(mesh, field, out_dir / f"coverage_{name}.ply")
        fields.append((name, field))
        rows.append(
            {
                "set": name,
                "mean": float(field.normalized.mean()),
                "variance": cov.coverage_variance(field),
                "max": float(field.normalized.max()),
            }
        )
        log.info("coverage(%s): mean=%.4g var=%.4g", name, rows[-1]["mean"], rows[-1]["variance"])

    if len(fields) == 2:
        diff = cov.coverage_difference(fields[0][1], fields[1][1])
        diff_field = cov.CoverageField(samples=samples, values=diff.values, normalization=1.0)
        cov.write_field_binary(diff_field, out_dir / "coverage_diff.bin")
        rows.append(
            {
                "set": f"|{fields[0][0]}-{fields[1][0]}|",
                "mean": float(diff.values.mean()),
                "variance": float(diff.values.var()),
                "max": float(diff.values.max()),
            }
        )

    with open(out_dir / "coverage_summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["set", "mean", "variance", "max"])
        writer.writeheader()
        writer.writerows(rows)
    log.info("wrote %s", out_dir / "coverage_summary.csv")
    return 0


# ---- simulate ----------------------------------------------------------------

def _selection_order(method: str, pool: ViewSet, args, seed: int, schedule: list[int],
                     params: OracleParams) -> list[str]:
    total = args.initial_k + sum(schedule)
    if method == "rs":
        rng = np.random.default_rng(seed)
        ids = [v.id for v in pool.views]
        return [ids[i] for i in rng.choice(len(ids), size=total, replace=False)]
    if method == "fvs":
        cfg = FvsConfig(
            target_n=total,
            spec=DistanceSpec(spatial=Spatial.GREAT_CIRCLE),
            initial_k=args.initial_k,
            seed=seed,
        )
        return [vid for vid, _ in fvs_trace(pool, cfg)]
    cfg = IgsConfig(
        initial_k=args.initial_k,
        schedule=tuple(schedule),
        sampler=_igs_sampler(method, {"gamma": args.gamma, "kappa": args.kappa or 50.0, "sigma": args.sigma or 0.25}),
        relaxation=_lloyd_config(args, sphere=True),
        seed=seed,
    )
    result = igs_run(pool, cfg, make_evaluator(SyntheticOracle(params=params)))
    return list(result.view_set.selected)


def cmd_simulate(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r} in --methods")
    seeds = _parse_seeds(args.seeds)
    schedule = parse_schedule(args.schedule)
    params = _oracle_params(args)
    pool = ViewSet(tuple(uniform_sphere_poses(args.pool_size, id_prefix="pool")))

    checkpoints = [args.initial_k]
    for l in schedule:
        checkpoints.append(checkpoints[-1] + l)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for method in methods:
        for rep, seed in enumerate(seeds):
            order = _selection_order(method, pool, args, seed, schedule, params)
            for n in checkpoints:
                current = pool.with_selected(order[:n])
                report = oracle_scores(
                    current.selected_views(), current.candidate_views(), params
                )
                mean_score = float(np.mean(list(report.scores.values())))
                rows.append(
                    {
                        "method": method,
                        "repetition": rep,
                        "n_views": n,
                        "mean_candidate_score": mean_score,
                    }
                )
        log.info("simulated %s over %d repetitions", method, len(seeds))

    path = out_dir / "simulate.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["method", "repetition", "n_views", "mean_candidate_score"]
        )
        writer.writeheader()
        writer.writerows(rows)
    log.info("wrote %s", path)
    return 0


# ---- argument plumbing -------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, dataset: bool = True) -> None:
    p.add_argument("--config", help="JSON config file (v1); flags override its values")
    if dataset:
        p.add_argument("--dataset", help="dataset path (transforms.json file or COLMAP text dir)")
    p.add_argument("--format", choices=["transforms", "colmap-text"], default="transforms")
    p.add_argument("--distance", choices=["gc", "euclidean"], default="euclidean")
    p.add_argument("--alpha", type=float, default=None,
                   help="photogrammetric distance weight (no default; needs colmap-text)")
    p.add_argument("--normalize-spatial", action="store_true",
                   help="divide spatial distances by their pool maximum")
    p.add_argument("--out", default="viewselect_out", help="output directory")
    p.add_argument("--seed", type=int, default=0)


def _add_oracle(p: argparse.ArgumentParser) -> None:
    p.add_argument("--oracle-base", type=float, default=20.0)
    p.add_argument("--oracle-gain", type=float, default=1.0)
    p.add_argument("--oracle-noise", type=float, default=0.0)
    p.add_argument("--oracle-seed", type=int, default=0)
    p.add_argument("--oracle-hotspot", action="append", default=None,
                   metavar="X,Y,Z,DIFFICULTY,RADIUS")


def _add_sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=None, help="view budget for rs/fvs")
    p.add_argument("--schedule", default=DEFAULT_SCHEDULE,
                   help="igs rounds, e.g. '5x5,12x10' = five +5 rounds then twelve +10")
    p.add_argument("--initial-k", type=int, default=5)
    p.add_argument("--gamma", type=float, default=10.0, help="zipf randomness (larger = greedier)")
    p.add_argument("--kappa", type=float, default=None, help="vMF concentration (igs-vmf)")
    p.add_argument("--sigma", type=float, default=None, help="vMF weight temperature (igs-vmf)")
    p.add_argument("--relax", choices=["on", "off"], default="off")
    p.add_argument("--relax-domain", choices=["auto", "sphere", "hull"], default="auto")
    p.add_argument("--lloyd-iters", type=int, default=8)
    p.add_argument("--support-samples", type=int, default=20_000)
    p.add_argument("--lloyd-seed", type=int, default=0)
    p.add_argument("--project-sphere", action="store_true",
                   help="project camera centers to a unit sphere before selection")
    p.add_argument("--sphere-center", type=_parse_vec3, default=(0.0, 0.0, 0.0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viewselect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="run a view-selection method, write manifests")
    _add_common(p)
    _add_sampling(p)
    _add_oracle(p)
    p.add_argument("--method", choices=METHODS, required=False)
    p.add_argument("--seeds", default="0", help="comma list; one repetition per seed")
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--evaluator-cmd", default=None,
                   help="external evaluator command (shell-split); default: synthetic oracle")
    p.add_argument("--evaluator-timeout", type=float, default=600.0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("split", help="generate test splits / uniform sphere poses")
    _add_common(p)
    p.add_argument("--mode", choices=["uniform-sphere", "fvs-resplit"], required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--center", type=_parse_vec3, default=(0.0, 0.0, 0.0))
    p.add_argument("--rotate-z", default=None,
                   help="comma list of z-rotation angles in degrees; emits rotated camera sets")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("coverage", help="coverage density fields and summaries")
    _add_common(p, dataset=False)
    p.add_argument("--mesh", help=".obj path or icosphere[:subdiv[:radius]]")
    p.add_argument("--dataset", action="append",
                   help="camera set; pass twice to also get a difference field")
    p.add_argument("--stride", type=int, default=4)
    p.add_argument("--surface-samples", type=int, default=20_000)
    p.add_argument("--ball-radius", type=float, default=None,
                   help="accumulation radius; default 2x mean sample spacing")
    p.add_argument("--sample-seed", type=int, default=0)
    p.add_argument("--normalization", choices=["max-count", "total-hits", "ray-budget"],
                   default="max-count")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("simulate", help="oracle-score trajectories per method")
    _add_common(p)
    _add_sampling(p)
    _add_oracle(p)
    p.add_argument("--methods", default="rs,fvs", help="comma list of methods to simulate")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--pool-size", type=int, default=200)
    p.set_defaults(func=cmd_simulate)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    # first pass finds --config; its values become defaults, flags still win
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        try:
            doc = json.loads(Path(known.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {known.config}: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("v", 1) != 1:
            raise ConfigError(f"{known.config}: unsupported config schema")
        doc = {k: v for k, v in doc.items() if k not in ("v", "repetitions")}
        if isinstance(doc.get("seeds"), list):
            doc["seeds"] = ",".join(str(s) for s in doc["seeds"])
        if isinstance(doc.get("sphere_center"), list):
            doc["sphere_center"] = tuple(doc["sphere_center"])
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                for sp in action.choices.values():
                    valid = {a.dest for a in sp._actions}
                    sp.set_defaults(**{k: v for k, v in doc.items() if k in valid})
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _setup_logging()
        parser = build_parser()
        args = _apply_config_file(parser, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _SIZING_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluatorFailure as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except ViewSelectError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
