"""Ingestion and emission: transforms.json, COLMAP text models, manifests.

All emitted documents use a canonical text encoding: stable key order,
floats at 17 significant digits (lossless for float64, including the
sign of zero), one top-level key per line. Rerunning a command with the
same config therefore rewrites byte-identical files, with the created_at
timestamp as the single documented exception.
"""

from __future__ import annotations

import json
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    IoError,
    MissingFile,
    NonOrthonormalRotation,
    ParseError,
    SchemaVersionMismatch,
)
from .scene import CameraView, CovisibilityMatrix, Intrinsics, TriangleMesh, ViewSet

__all__ = [
    "SelectionManifest",
    "canon_float",
    "canon_dumps",
    "write_canonical_doc",
    "read_transforms",
    "write_transforms",
    "read_colmap_text",
    "quat_to_rotation",
    "rotation_to_quat",
    "write_manifest",
    "read_manifest",
    "manifest_content_bytes",
    "write_view_set",
    "read_view_set",
    "write_split",
    "read_split",
    "write_records_jsonl",
    "read_obj",
    "timestamp_now",
]

SCHEMA_VERSION = 1


# ---- canonical encoding ------------------------------------------------------

def canon_float(x: float) -> str:
    """17-significant-digit decimal form; round-trips float64 bit for bit."""
    if not math.isfinite(x):
        raise IoError(f"cannot serialize non-finite number {x!r}")
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def canon_dumps(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return canon_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return canon_dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canon_dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {canon_dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    raise IoError(f"cannot serialize {type(obj).__name__} canonically")


def write_canonical_doc(doc: dict, path) -> None:
    """Top-level dict, one key per line, nested values compact."""
    lines = [f"{json.dumps(str(k))}: {canon_dumps(v)}" for k, v in doc.items()]
    text = "{\n" + ",\n".join(lines) + "\n}\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_doc(path, expect_kind: Optional[str] = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    if doc.get("v") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{path}: schema version {doc.get('v')!r}, expected {SCHEMA_VERSION}"
        )
    if expect_kind is not None and doc.get("kind") != expect_kind:
        raise ParseError(f"{path}: expected kind {expect_kind!r}, found {doc.get('kind')!r}")
    return doc


def timestamp_now() -> str:
    """UTC ISO timestamp; honors SOURCE_DATE_EPOCH for reproducible outputs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch is not None else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


# ---- transforms.json ---------------------------------------------------------

def _clean_rotation(raw: np.ndarray, where: str) -> np.ndarray:
    """Accept near-orthonormal rotations, polar-fix small scale drift."""
    dev = np.abs(raw.T @ raw - np.eye(3)).max()
    if dev < 1e-6:
        return raw
    u, s, vt = np.linalg.svd(raw)
    if np.abs(s - 1.0).max() > 1e-3:
        raise NonOrthonormalRotation(
            f"{where}: rotation has singular values {s}, beyond the 1e-3 tolerance"
        )
    fixed = u @ vt
    if np.linalg.det(fixed) < 0:
        raise NonOrthonormalRotation(f"{where}: rotation is a reflection")
    warnings.warn(f"{where}: rotation re-orthonormalized (deviation {dev:.2e})")
    return fixed


def read_transforms(path, default_width: int = 800, default_height: int = 800) -> ViewSet:
    """Load a community transforms.json file (NeRF-synthetic layout).

    fx is derived from camera_angle_x as W / (2 tan(angle/2)); fy = fx and
    the principal point sits at the image center. Image size comes from
    optional "w"/"h" keys, else the provided defaults (800x800, the NeRF
    synthetic resolution).
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if "camera_angle_x" not in doc:
        raise ParseError(f"{path}: missing camera_angle_x")
    width = int(doc.get("w", default_width))
    height = int(doc.get("h", default_height))
    fx = width / (2.0 * math.tan(float(doc["camera_angle_x"]) / 2.0))
    intr = Intrinsics(fx=fx, fy=fx, cx=width / 2.0, cy=height / 2.0, width=width, height=height)

    frames = doc.get("frames")
    if not isinstance(frames, list):
        raise ParseError(f"{path}: missing frames list")
    views = []
    for i, frame in enumerate(frames):
        if "transform_matrix" not in frame:
            raise ParseError(f"{path}: frame {i} has no transform_matrix")
        m = np.asarray(frame["transform_matrix"], dtype=np.float64)
        if m.shape != (4, 4):
            raise ParseError(f"{path}: frame {i} transform_matrix has shape {m.shape}")
        rotation = _clean_rotation(m[:3, :3], f"{path} frame {i}")
        file_path = frame.get("file_path")
        views.append(
            CameraView(
                id=file_path if file_path else f"frame_{i:04d}",
                center=m[:3, 3],
                rotation=rotation,
                intrinsics=intr,
                image_path=file_path,
            )
        )
    return ViewSet(tuple(views))


def write_transforms(view_set: ViewSet, path) -> None:
    """Emit a camera set in the transforms.json layout (canonical encoding)."""
    if not view_set.views:
        raise IoError("cannot write an empty camera set as transforms.json")
    intr = view_set.views[0].intrinsics
    if intr is None:
        raise IoError("views need intrinsics to derive camera_angle_x")
    frames = []
    for v in view_set.views:
        m = np.eye(4)
        m[:3, :3] = v.rotation
        m[:3, 3] = v.center
        frames.append(
            {"file_path": v.image_path or v.id, "transform_matrix": m.tolist()}
        )
    doc = {
        "camera_angle_x": 2.0 * math.atan(intr.width / (2.0 * intr.fx)),
        "w": intr.width,
        "h": intr.height,
        "frames": frames,
    }
    write_canonical_doc(doc, path)


# ---- COLMAP text model -------------------------------------------------------

def quat_to_rotation(qw: float, qx: float, qy: float, qz: float) -> np.ndarray:
    q = np.array([qw, qx, qy, qz], dtype=np.float64)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_to_quat(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix, w >= 0."""
    t = np.trace(r)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(1.0 + r[i, i] - r[j, j] - r[k, k], 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


_CV_TO_GL = np.diag([1.0, -1.0, -1.0])  # COLMAP looks along +z, y down


def _data_lines(path: Path):
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _colmap_intrinsics(model: str, width: int, height: int, params: list[float], where: str) -> Intrinsics:
    if model in ("SIMPLE_PINHOLE", "SIMPLE_RADIAL", "RADIAL"):
        fx = fy = params[0]
        cx, cy = params[1], params[2]
    elif model in ("PINHOLE", "OPENCV", "FULL_OPENCV"):
        fx, fy, cx, cy = params[:4]
    else:
        raise ParseError(f"{where}: unsupported camera model {model!r}")
    return Intrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height)


def read_colmap_text(directory) -> tuple[ViewSet, CovisibilityMatrix]:
    """Load a COLMAP text model: poses plus the co-visibility matrix.

    Poses come from images.txt (world-to-camera quaternion + translation,
    inverted and converted to the internal -z-forward convention). The
    co-visibility count A_ij is the number of points3D.txt entries whose
    track contains both image i and image j, counted once per point.
    Binary models are not supported; export with `colmap model_converter
    --output_type TXT` first.
    """
    directory = Path(directory)
    images_path = directory / "images.txt"
    points_path = directory / "points3D.txt"
    cameras_path = directory / "cameras.txt"
    for p in (images_path, points_path, cameras_path):
        if not p.exists():
            raise MissingFile(str(p))

    cameras: dict[int, Intrinsics] = {}
    for lineno, line in _data_lines(cameras_path):
        f = line.split()
        try:
            cam_id, model = int(f[0]), f[1]
            width, height = int(f[2]), int(f[3])
            params = [float(x) for x in f[4:]]
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{cameras_path}:{lineno}: {exc}") from exc
        cameras[cam_id] = _colmap_intrinsics(model, width, height, params, f"{cameras_path}:{lineno}")

    entries = []
    pending_pose = None
    for lineno, line in _data_lines(images_path):
        if pending_pose is None:
            f = line.split()
            if len(f) < 10:
                raise ParseError(f"{images_path}:{lineno}: expected 10 pose fields, got {len(f)}")
            try:
                image_id = int(f[0])
                qw, qx, qy, qz = (float(x) for x in f[1:5])
                tvec = np.array([float(x) for x in f[5:8]])
                camera_id = int(f[8])
            except ValueError as exc:
                raise ParseError(f"{images_path}:{lineno}: {exc}") from exc
            name = f[9]
            pending_pose = (image_id, (qw, qx, qy, qz), tvec, camera_id, name)
        else:
            # the observations line; contents are not needed for poses
            image_id, quat, tvec, camera_id, name = pending_pose
            pending_pose = None
            if camera_id not in cameras:
                raise ParseError(f"{images_path}: image {image_id} references unknown camera {camera_id}")
            r_wc = quat_to_rotation(*quat)
            center = -r_wc.T @ tvec
            rotation = r_wc.T @ _CV_TO_GL
            entries.append((image_id, name, center, rotation, cameras[camera_id]))
    if pending_pose is not None:
        raise ParseError(f"{images_path}: dangling pose line for image {pending_pose[0]}")

    entries.sort(key=lambda e: e[0])
    id_by_image = {image_id: name for image_id, name, *_ in entries}
    views = tuple(
        CameraView(id=name, center=center, rotation=rotation, intrinsics=intr, image_path=name)
        for _, name, center, rotation, intr in entries
    )
    index = {name: i for i, name in enumerate(v.id for v in views)}

    counts = np.zeros((len(views), len(views)), dtype=np.int64)
    for lineno, line in _data_lines(points_path):
        f = line.split()
        if len(f) < 8:
            raise ParseError(f"{points_path}:{lineno}: expected >= 8 fields, got {len(f)}")
        track = f[8::2]
        try:
            image_ids = {int(x) for x in track}
        except ValueError as exc:
            raise ParseError(f"{points_path}:{lineno}: {exc}") from exc
        rows = sorted(index[id_by_image[i]] for i in image_ids if i in id_by_image)
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                counts[rows[a], rows[b]] += 1
                counts[rows[b], rows[a]] += 1

    return ViewSet(views), CovisibilityMatrix(counts, [v.id for v in views])


# ---- selection manifests -----------------------------------------------------

@dataclass(frozen=True)
class SelectionManifest:
    """Reproducibility record of one selection repetition."""

    method: str
    seed: int
    config_echo: dict
    order: tuple[dict, ...]
    created_at: str = field(default_factory=timestamp_now)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(dict(e) for e in self.order))

    def selected_ids(self) -> list[str]:
        return [e["view_id"] for e in self.order]

    def validate(self) -> None:
        ids = self.selected_ids()
        if len(set(ids)) != len(ids):
            raise DuplicateId(f"manifest repeats view ids: {sorted({i for i in ids if ids.count(i) > 1})}")
        steps = [e["step"] for e in self.order]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise IoError(f"manifest steps are not strictly increasing: {steps}")


def write_manifest(manifest: SelectionManifest, path) -> None:
    manifest.validate()
    doc = {
        "v": SCHEMA_VERSION,
        "kind": "selection",
        "method": manifest.method,
        "seed": manifest.seed,
        "created_at": manifest.created_at,
        "config_echo": manifest.config_echo,
        "order": [
            {"step": e["step"], "view_id": e["view_id"], "score": e.get("score")}
            for e in manifest.order
        ],
    }
    write_canonical_doc(doc, path)


def read_manifest(path) -> SelectionManifest:
    doc = _read_doc(path, expect_kind="selection")
    manifest = SelectionManifest(
        method=doc["method"],
        seed=int(doc["seed"]),
        config_echo=doc["config_echo"],
        order=tuple(doc["order"]),
        created_at=doc["created_at"],
    )
    manifest.validate()
    return manifest


def manifest_content_bytes(path) -> bytes:
    """Canonical manifest bytes with the created_at timestamp removed."""
    doc = _read_doc(path, expect_kind="selection")
    doc.pop("created_at", None)
    lines = [f"{json.dumps(str(k))}: {canon_dumps(v)}" for k, v in doc.items()]
    return ("{\n" + ",\n".join(lines) + "\n}\n").encode("utf-8")


# ---- view-set codec (lossless) -----------------------------------------------

def _intrinsics_doc(intr: Optional[Intrinsics]):
    if intr is None:
        return None
    return {
        "fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
        "width": intr.width, "height": intr.height,
    }


def write_view_set(view_set: ViewSet, path) -> None:
    """Lossless canonical dump: centers and rotations round-trip bit for bit."""
    doc = {
        "v": SCHEMA_VERSION,
        "kind": "view-set",
        "views": [
            {
                "id": v.id,
                "center": v.center,
                "rotation": v.rotation,
                "intrinsics": _intrinsics_doc(v.intrinsics),
                "image_path": v.image_path,
            }
            for v in view_set.views
        ],
        "selected": list(view_set.selected),
    }
    write_canonical_doc(doc, path)


def read_view_set(path) -> ViewSet:
    doc = _read_doc(path, expect_kind="view-set")
    views = []
    for i, entry in enumerate(doc.get("views", [])):
        try:
            intr = entry.get("intrinsics")
            views.append(
                CameraView(
                    id=entry["id"],
                    center=np.asarray(entry["center"], dtype=np.float64),
                    rotation=np.asarray(entry["rotation"], dtype=np.float64),
                    intrinsics=Intrinsics(**intr) if intr else None,
                    image_path=entry.get("image_path"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: view {i}: {exc}") from exc
    return ViewSet(tuple(views), tuple(doc.get("selected", ())))


# ---- split manifest ----------------------------------------------------------

def write_split(path, mode: str, test_ids: Sequence[str], train_ids: Sequence[str],
                seed: int, config_echo: dict, created_at: Optional[str] = None) -> None:
    overlap = set(test_ids) & set(train_ids)
    if overlap:
        raise DuplicateId(f"split is not a partition; shared ids: {sorted(overlap)}")
    doc = {
        "v": SCHEMA_VERSION,
        "kind": "split",
        "mode": mode,
        "seed": seed,
        "created_at": created_at if created_at is not None else timestamp_now(),
        "config_echo": config_echo,
        "test": list(test_ids),
        "train": list(train_ids),
    }
    write_canonical_doc(doc, path)


def read_split(path) -> dict:
    return _read_doc(path, expect_kind="split")


def write_records_jsonl(records: Sequence[dict], path) -> None:
    """Line-delimited canonical records (per-round sampler logs)."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(canon_dumps(record) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---- mesh ingestion ----------------------------------------------------------

def read_obj(path) -> TriangleMesh:
    """Minimal Wavefront OBJ reader: v and f records, polygons fan-triangulated."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    vertices: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        f = line.split()
        if f[0] == "v":
            try:
                vertices.append([float(x) for x in f[1:4]])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}:{lineno}: bad vertex: {exc}") from exc
        elif f[0] == "f":
            try:
                idx = [int(tok.split("/")[0]) - 1 for tok in f[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad face: {exc}") from exc
            if len(idx) < 3 or any(i < 0 for i in idx):
                raise ParseError(f"{path}:{lineno}: face needs >= 3 positive indices")
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
    if not faces:
        raise ParseError(f"{path}: no faces found")
    try:
        return TriangleMesh(np.asarray(vertices), np.asarray(faces, dtype=np.int64))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
