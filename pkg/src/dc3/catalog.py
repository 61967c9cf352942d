"""Dataset catalog: the manifest/feature data model and its on-disk formats.

A dataset directory holds ``manifest.json``, a feature file, and image files.
The manifest schema is::

    {
      "name": str,
      "classes": [str],
      "feature_file": str,            # relative to the manifest's directory
      "samples": [
        {"id": str, "class": str, "image": str, "feature_row": int}
      ]
    }

The feature file is a flat binary format: bytes 0-3 are the ASCII magic
"DC3F", then three little-endian u32 fields (version, always 1; row count;
dimension), then ``count * dim`` little-endian IEEE-754 float32 values in
row-major order. It is byte-exact to round-trip and trivial to parse from
any language.

Loading validates everything up front: unique ids, declared classes, feature
row bounds against the actual feature file, and that each image path points
at a readable PNG or JPEG. Loaded structures are never mutated afterward.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    BadMagic,
    DanglingFeatureRow,
    DimensionMismatch,
    DuplicateId,
    MalformedJson,
    MissingFile,
    NonFiniteValue,
    TrailingBytes,
    TruncatedFile,
    UnknownClass,
    UnreadableImage,
)

FEATURE_MAGIC = b"DC3F"
FEATURE_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, count, dim

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class SampleRecord:
    """One image: identity, class, relative image path, and feature row."""

    id: str
    class_label: str
    image_path: str
    feature_row: int


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense float32 feature vectors, one row per sample slot."""

    data: np.ndarray  # (count, dim) float32

    @property
    def count(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    classes: list[str]
    samples: list[SampleRecord]
    feature_file: str
    root: Path = field(default_factory=Path)

    @property
    def feature_path(self) -> Path:
        return self.root / self.feature_file

    def image_path(self, sample: SampleRecord) -> Path:
        return self.root / sample.image_path


def _read_feature_header(path: Path) -> tuple[int, int]:
    """Return (count, dim) from a feature file without loading the payload."""
    if not path.is_file():
        raise MissingFile(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise TruncatedFile(f"{path}: header needs {_HEADER.size} bytes, found {len(head)}")
    magic, version, count, dim = _HEADER.unpack(head)
    if magic != FEATURE_MAGIC:
        raise BadMagic(f"{path}: expected magic {FEATURE_MAGIC!r}, found {magic!r}")
    if version != FEATURE_VERSION:
        raise BadMagic(f"{path}: unsupported feature file version {version}")
    return count, dim


def load_features(path) -> FeatureMatrix:
    """Load and validate a feature file. Rejects NaN/Inf and size mismatches."""
    path = Path(path)
    count, dim = _read_feature_header(path)
    if count < 1 or dim < 1:
        raise MalformedJson(f"{path}: count and dim must be positive, got {count}x{dim}")
    payload = path.read_bytes()[_HEADER.size :]
    expected = count * dim * 4
    if len(payload) < expected:
        raise TruncatedFile(
            f"{path}: payload needs {expected} bytes for {count}x{dim} float32, "
            f"found {len(payload)}"
        )
    if len(payload) > expected:
        raise TrailingBytes(f"{path}: {len(payload) - expected} bytes beyond the declared payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    finite = np.isfinite(data)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise NonFiniteValue(int(row), int(col))
    # copy so the matrix does not alias the (read-only) file buffer
    return FeatureMatrix(data=np.array(data, dtype=np.float32))


def write_features(matrix: FeatureMatrix | np.ndarray, path) -> None:
    """Write a feature matrix in the binary format described above."""
    data = matrix.data if isinstance(matrix, FeatureMatrix) else np.asarray(matrix)
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2:
        raise DimensionMismatch(f"feature matrix must be 2-D, got shape {data.shape}")
    count, dim = data.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, count, dim))
        fh.write(data.tobytes())


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise MalformedJson(message)


def _check_image(sample: SampleRecord, path: Path) -> tuple[int, int]:
    """Verify the file opens as PNG or JPEG; return (width, height)."""
    if not path.is_file():
        raise UnreadableImage(sample.id, path, "file not found")
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise UnreadableImage(sample.id, path, f"format {img.format}")
            return img.size
    except UnidentifiedImageError as exc:
        raise UnreadableImage(sample.id, path, str(exc)) from None


def load_manifest(path) -> DatasetManifest:
    """Load ``manifest.json`` (or a dataset directory containing one) and
    validate every invariant: unique ids, declared classes, feature-row
    bounds against the referenced feature file, readable image files, and
    consistent image dimensions within each class.
    """
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise MissingFile(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedJson(f"{path}: {exc}") from None

    _require(isinstance(raw, dict), f"{path}: top level must be an object")
    for key in ("name", "classes", "feature_file", "samples"):
        _require(key in raw, f"{path}: missing key {key!r}")
    _require(isinstance(raw["name"], str), f"{path}: 'name' must be a string")
    _require(
        isinstance(raw["classes"], list) and all(isinstance(c, str) for c in raw["classes"]),
        f"{path}: 'classes' must be a list of strings",
    )
    _require(len(raw["classes"]) > 0, f"{path}: 'classes' must be nonempty")
    _require(
        len(set(raw["classes"])) == len(raw["classes"]),
        f"{path}: 'classes' contains duplicates",
    )
    _require(isinstance(raw["feature_file"], str), f"{path}: 'feature_file' must be a string")

    classes = list(raw["classes"])
    samples: list[SampleRecord] = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(raw["samples"]):
        _require(isinstance(entry, dict), f"{path}: samples[{i}] must be an object")
        for key in ("id", "class", "image", "feature_row"):
            _require(key in entry, f"{path}: samples[{i}] missing key {key!r}")
        sid = entry["id"]
        _require(isinstance(sid, str) and sid != "", f"{path}: samples[{i}] id must be nonempty")
        _require(
            isinstance(entry["feature_row"], int)
            and not isinstance(entry["feature_row"], bool)
            and entry["feature_row"] >= 0,
            f"{path}: samples[{i}] feature_row must be a nonnegative integer",
        )
        if sid in seen_ids:
            raise DuplicateId(sid)
        seen_ids.add(sid)
        if entry["class"] not in classes:
            raise UnknownClass(entry["class"])
        samples.append(
            SampleRecord(
                id=sid,
                class_label=entry["class"],
                image_path=str(entry["image"]),
                feature_row=entry["feature_row"],
            )
        )

    manifest = DatasetManifest(
        name=raw["name"],
        classes=classes,
        samples=samples,
        feature_file=raw["feature_file"],
        root=path.parent,
    )

    count, _ = _read_feature_header(manifest.feature_path)
    for sample in samples:
        if sample.feature_row >= count:
            raise DanglingFeatureRow(sample.id, sample.feature_row, count)
    check_class_dimensions(manifest)
    return manifest


def class_view(manifest: DatasetManifest, label: str) -> list[int]:
    """Indices of all samples of ``label``, in manifest order."""
    if label not in manifest.classes:
        raise UnknownClass(label)
    return [i for i, s in enumerate(manifest.samples) if s.class_label == label]


def class_features(
    manifest: DatasetManifest, features: FeatureMatrix, label: str
) -> tuple[list[int], np.ndarray]:
    """The class's sample indices and its feature rows, stacked in class order."""
    indices = class_view(manifest, label)
    rows = [manifest.samples[i].feature_row for i in indices]
    return indices, features.data[rows]


def check_class_dimensions(manifest: DatasetManifest) -> dict[str, tuple[int, int]]:
    """Require all images within a class to share (width, height).

    Returns the per-class size. Raises :class:`DimensionMismatch` naming the
    first offending sample; images are never resized.
    """
    sizes: dict[str, tuple[int, int]] = {}
    for sample in manifest.samples:
        size = _check_image(sample, manifest.image_path(sample))
        prior = sizes.get(sample.class_label)
        if prior is None:
            sizes[sample.class_label] = size
        elif prior != size:
            raise DimensionMismatch(
                f"class {sample.class_label!r}: sample {sample.id!r} is "
                f"{size[0]}x{size[1]}, expected {prior[0]}x{prior[1]}"
            )
    return sizes
