"""End-to-end condensation flow and its resumable stage functions.

The flow is load -> cluster -> select -> compensate -> stitch -> measure.
Each stage reads the previous stage's files from the output directory and
writes its own, so a run can be driven as one call or as a chain of CLI
subcommands with identical results. ``run`` executes the chain into a
temporary sibling directory and renames it into place at the end, so an
aborted run leaves nothing behind.

All artifacts hold relative paths and JSON is written with sorted keys, which
makes a run a pure function of (dataset bytes, config, seed) under the
fallback backend: rerunning it yields byte-identical trees.
"""

from __future__ import annotations

import csv
import json
import re
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import catalog
from .compensator import (
    DEFAULT_CATALOG,
    DEFAULT_GUIDANCE_SCALE,
    Backend,
    CompensationRequest,
    FallbackBackend,
    HttpBackend,
    compensate,
    pick_prompt_pairs,
)
from .errors import (
    ConfigInvalid,
    Dc3Error,
    MissingStageInput,
    StageError,
)
from .images import load_rgb, save_png
from .metrics import (
    curve_integral,
    dataset_colorfulness,
    homogenization_report,
    kde_rgb,
)
from .quantizer import BinPartition, kmeans_partition
from .rng import derive_seed
from .sampler import SelectionMode, select_per_class
from .stitcher import StitchKind, StitchStrategy, parse_strategy, stitch

CONDENSED_NAME = "condensed.json"
COMPENSATION_NAME = "compensation.json"
METRICS_NAME = "metrics.json"

_CONFIG_KEYS = {
    "ipc",
    "bins",
    "seed",
    "mode",
    "stitch",
    "backend",
    "endpoint",
    "guidance_scale",
    "variants",
    "in_flight",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved settings for one condensation run."""

    ipc: int
    bins: int = 10
    seed: int = 0
    mode: SelectionMode = SelectionMode.STATIC
    stitch: StitchStrategy = field(default_factory=StitchStrategy)
    backend: str = "fallback"
    endpoint: str | None = None
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE
    variants: int = 2
    in_flight: int = 4

    def validate(self) -> "PipelineConfig":
        if self.ipc < 1:
            raise ConfigInvalid(f"ipc must be >= 1, got {self.ipc}")
        if self.bins < 1:
            raise ConfigInvalid(f"bins must be >= 1, got {self.bins}")
        if not isinstance(self.mode, SelectionMode):
            raise ConfigInvalid(f"unknown selection mode {self.mode!r}")
        if not isinstance(self.stitch, StitchStrategy):
            raise ConfigInvalid(f"unknown stitch strategy {self.stitch!r}")
        if self.variants not in (2, 4):
            raise ConfigInvalid(f"variants must be 2 or 4, got {self.variants}")
        if self.variants == 4 and self.stitch.kind is not StitchKind.QUARTER4:
            raise ConfigInvalid(
                "variants=4 only makes sense with the quarter4 strategy; "
                f"got {self.stitch.spec_string()}"
            )
        if self.backend not in ("fallback", "http"):
            raise ConfigInvalid(f"backend must be fallback or http, got {self.backend!r}")
        if self.backend == "http" and not self.endpoint:
            raise ConfigInvalid("http backend requires an endpoint URL")
        if not self.guidance_scale > 0:
            raise ConfigInvalid(f"guidance_scale must be > 0, got {self.guidance_scale}")
        if self.in_flight < 1:
            raise ConfigInvalid(f"in_flight must be >= 1, got {self.in_flight}")
        return self

    def to_json_dict(self) -> dict:
        return {
            "ipc": self.ipc,
            "bins": self.bins,
            "seed": self.seed,
            "mode": self.mode.value,
            "stitch": self.stitch.spec_string(),
            "backend": self.backend,
            "endpoint": self.endpoint,
            "guidance_scale": self.guidance_scale,
            "variants": self.variants,
            "in_flight": self.in_flight,
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "PipelineConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        if "ipc" not in raw:
            raise ConfigInvalid("config requires 'ipc'")
        kwargs: dict = {"ipc": int(raw["ipc"])}
        for key in ("bins", "seed", "variants", "in_flight"):
            if key in raw:
                kwargs[key] = int(raw[key])
        if "mode" in raw:
            try:
                kwargs["mode"] = SelectionMode(str(raw["mode"]).lower())
            except ValueError:
                raise ConfigInvalid(f"unknown selection mode {raw['mode']!r}")
        if "stitch" in raw:
            kwargs["stitch"] = parse_strategy(str(raw["stitch"]))
        if "backend" in raw:
            kwargs["backend"] = str(raw["backend"]).lower()
        if "endpoint" in raw and raw["endpoint"] is not None:
            kwargs["endpoint"] = str(raw["endpoint"])
        if "guidance_scale" in raw:
            kwargs["guidance_scale"] = float(raw["guidance_scale"])
        return cls(**kwargs).validate()


@dataclass
class CondensedManifest:
    """Provenance record of one condensed dataset."""

    config: dict
    dataset_name: str
    classes: list[str]
    outputs: list[dict]
    metrics: dict | None = None

    def to_json_dict(self) -> dict:
        out = {
            "config": self.config,
            "dataset_name": self.dataset_name,
            "classes": self.classes,
            "outputs": self.outputs,
        }
        if self.metrics is not None:
            out["metrics"] = self.metrics
        return out

    @classmethod
    def from_json_dict(cls, raw: dict) -> "CondensedManifest":
        return cls(
            config=raw["config"],
            dataset_name=raw["dataset_name"],
            classes=list(raw["classes"]),
            outputs=list(raw["outputs"]),
            metrics=raw.get("metrics"),
        )


def class_slugs(manifest: catalog.DatasetManifest) -> dict:
    """Filesystem-safe, collision-free name per class, in manifest order."""
    slugs: dict = {}
    used: set = set()
    for i, label in enumerate(manifest.classes):
        slug = re.sub(r"[^A-Za-z0-9_-]+", "-", label).strip("-") or "class"
        if slug in used:
            slug = f"{slug}-{i}"
        used.add(slug)
        slugs[label] = slug
    return slugs


def _write_json(path: Path, obj: dict, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)


def _read_stage_json(path: Path, stage: str, what: str) -> dict:
    if not path.is_file():
        raise MissingStageInput(stage, f"{what} not found: {path.name}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cleanup(written: list[Path]) -> None:
    for p in reversed(written):
        p.unlink(missing_ok=True)
    for p in reversed(written):
        parent = p.parent
        try:
            parent.rmdir()
        except OSError:
            pass


def _guarded(stage_fn: Callable, *args) -> object:
    """Run a stage body; on error remove everything it wrote."""
    written: list[Path] = []
    try:
        return stage_fn(*args, written)
    except BaseException:
        _cleanup(written)
        raise


# ---------------------------------------------------------------- quantize

def stage_quantize(
    dataset_dir: Path | str, out_dir: Path | str, config: PipelineConfig
) -> dict:
    """Cluster every class's features into bins; writes bins.<class>.json.

    The bin count is clamped to the selection budget, so a budget smaller
    than the requested bin count yields exactly budget-many bins.
    """
    return _guarded(_quantize_body, Path(dataset_dir), Path(out_dir), config)


def _quantize_body(
    dataset_dir: Path, out_dir: Path, config: PipelineConfig, written: list[Path]
) -> dict:
    config.validate()
    manifest = catalog.load_manifest(dataset_dir)
    features = catalog.load_features(manifest.feature_path)
    effective_bins = min(config.bins, config.ipc)
    slugs = class_slugs(manifest)

    def one(label: str) -> BinPartition:
        _, rows = catalog.class_features(manifest, features, label)
        return kmeans_partition(
            rows,
            bin_count=effective_bins,
            seed=derive_seed(config.seed, "quantize", label),
            class_label=label,
        )

    with ThreadPoolExecutor(max_workers=min(4, len(manifest.classes))) as pool:
        partitions = list(pool.map(one, manifest.classes))

    out: dict = {}
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, part in zip(manifest.classes, partitions):
        _write_json(out_dir / f"bins.{slugs[label]}.json", part.to_json_dict(), written)
        out[label] = part
    return out


# ------------------------------------------------------------------ sample

def stage_sample(
    dataset_dir: Path | str, out_dir: Path | str, config: PipelineConfig
) -> dict:
    """Pick the per-class budget from the stored bins; writes
    selection.<class>.json."""
    return _guarded(_sample_body, Path(dataset_dir), Path(out_dir), config)


def _sample_body(
    dataset_dir: Path, out_dir: Path, config: PipelineConfig, written: list[Path]
) -> dict:
    config.validate()
    manifest = catalog.load_manifest(dataset_dir)
    features = catalog.load_features(manifest.feature_path)
    slugs = class_slugs(manifest)

    partitions = {}
    for label in manifest.classes:
        raw = _read_stage_json(
            out_dir / f"bins.{slugs[label]}.json", "sample", f"bins for {label}"
        )
        partitions[label] = BinPartition.from_json_dict(raw)

    def one(label: str) -> tuple:
        indices, rows = catalog.class_features(manifest, features, label)
        result = select_per_class(rows, partitions[label], config.ipc, config.mode)
        return indices, result

    with ThreadPoolExecutor(max_workers=min(4, len(manifest.classes))) as pool:
        results = list(pool.map(one, manifest.classes))

    out: dict = {}
    for label, (indices, result) in zip(manifest.classes, results):
        ids = [manifest.samples[indices[i]].id for i in result.selected]
        payload = result.to_json_dict(ids=None)
        payload["selected"] = ids
        payload["selected_bins"] = [
            int(partitions[label].assignment[i]) for i in result.selected
        ]
        _write_json(out_dir / f"selection.{slugs[label]}.json", payload, written)
        out[label] = result
    return out


# -------------------------------------------------------------- compensate

def make_backend(config: PipelineConfig) -> Backend:
    if config.backend == "http":
        backend = HttpBackend(config.endpoint)
        backend.health_check()
        return backend
    return FallbackBackend()


def _load_selections(
    manifest: catalog.DatasetManifest, out_dir: Path, stage: str
) -> list[dict]:
    slugs = class_slugs(manifest)
    selections = []
    for label in manifest.classes:
        raw = _read_stage_json(
            out_dir / f"selection.{slugs[label]}.json", stage, f"selection for {label}"
        )
        selections.append(raw)
    return selections


def stage_compensate(
    dataset_dir: Path | str,
    out_dir: Path | str,
    config: PipelineConfig,
    backend: Backend | None = None,
) -> dict:
    """Produce hue variants for every selected image; writes variant PNGs
    and compensation.json."""
    return _guarded(_compensate_body, Path(dataset_dir), Path(out_dir), config, backend)


def _compensate_body(
    dataset_dir: Path,
    out_dir: Path,
    config: PipelineConfig,
    backend: Backend | None,
    written: list[Path],
) -> dict:
    config.validate()
    manifest = catalog.load_manifest(dataset_dir)
    selections = _load_selections(manifest, out_dir, "compensate")
    if backend is None:
        backend = make_backend(config)
    slugs = class_slugs(manifest)
    by_id = {s.id: s for s in manifest.samples}

    tasks = []  # (label, sample) in deterministic order
    for raw in selections:
        for sample_id in raw["selected"]:
            tasks.append((raw["class"], by_id[sample_id]))

    def one(task: tuple) -> list[dict]:
        label, sample = task
        image = load_rgb(manifest.image_path(sample), sample.id)
        image_seed = derive_seed(config.seed, "image", sample.id)
        pairs = pick_prompt_pairs(DEFAULT_CATALOG, image_seed, config.variants // 2)
        records = []
        for k, (cool_prompt, warm_prompt) in enumerate(pairs):
            for offset, prompt in ((1, cool_prompt), (2, warm_prompt)):
                variant_seed = image_seed ^ (2 * k + offset)
                raster = compensate(
                    CompensationRequest(
                        image, prompt, variant_seed, config.guidance_scale
                    ),
                    backend,
                )
                records.append(
                    {
                        "raster": raster,
                        "prompt": prompt.text,
                        "family": prompt.family.value,
                        "seed": variant_seed,
                    }
                )
        return records

    workers = config.in_flight if getattr(backend, "name", "") == "http" else 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        all_records = list(pool.map(one, tasks))

    entries = []
    for (label, sample), records in zip(tasks, all_records):
        variant_infos = []
        for v, rec in enumerate(records):
            rel = f"variants/{slugs[label]}/{sample.id}.v{v}.png"
            path = out_dir / rel
            save_png(rec["raster"], path)
            written.append(path)
            variant_infos.append(
                {
                    "file": rel,
                    "prompt": rec["prompt"],
                    "family": rec["family"],
                    "seed": rec["seed"],
                }
            )
        entries.append(
            {
                "id": sample.id,
                "class": label,
                "seed": derive_seed(config.seed, "image", sample.id),
                "variants": variant_infos,
            }
        )

    payload = {
        "backend": getattr(backend, "name", type(backend).__name__),
        "guidance_scale": config.guidance_scale,
        "samples": entries,
    }
    _write_json(out_dir / COMPENSATION_NAME, payload, written)
    return payload


# ------------------------------------------------------------------ stitch

def stage_stitch(
    dataset_dir: Path | str, out_dir: Path | str, config: PipelineConfig
) -> CondensedManifest:
    """Fuse each sample's variants into one output image; writes the
    condensed images and condensed.json."""
    return _guarded(_stitch_body, Path(dataset_dir), Path(out_dir), config)


def _stitch_body(
    dataset_dir: Path, out_dir: Path, config: PipelineConfig, written: list[Path]
) -> CondensedManifest:
    config.validate()
    manifest = catalog.load_manifest(dataset_dir)
    compensation = _read_stage_json(
        out_dir / COMPENSATION_NAME, "stitch", "compensation record"
    )
    selections = _load_selections(manifest, out_dir, "stitch")
    slugs = class_slugs(manifest)

    gain_bin: dict = {}
    for raw in selections:
        for sample_id, gain, bin_index in zip(
            raw["selected"], raw["selected_gains"], raw["selected_bins"]
        ):
            gain_bin[sample_id] = (float(gain), int(bin_index))

    outputs = []
    for entry in compensation["samples"]:
        sample_id, label = entry["id"], entry["class"]
        rasters = []
        for info in entry["variants"]:
            path = out_dir / info["file"]
            if not path.is_file():
                raise MissingStageInput("stitch", f"variant missing: {info['file']}")
            rasters.append(load_rgb(path, sample_id))
        if config.stitch.kind is StitchKind.QUARTER4 and len(rasters) == 2:
            rasters = [rasters[0], rasters[1], rasters[0], rasters[1]]
        stitch_seed = derive_seed(config.seed, "stitch", sample_id)
        fused = stitch(rasters, config.stitch, stitch_seed)
        rel = f"images/{slugs[label]}/{sample_id}.png"
        path = out_dir / rel
        save_png(fused, path)
        written.append(path)
        gain, bin_index = gain_bin[sample_id]
        outputs.append(
            {
                "output": rel,
                "id": sample_id,
                "class": label,
                "bin": bin_index,
                "gain": gain,
                "variants": entry["variants"],
                "stitch": {
                    "strategy": config.stitch.spec_string(),
                    "seed": stitch_seed,
                },
            }
        )

    condensed = CondensedManifest(
        config=config.to_json_dict(),
        dataset_name=manifest.name,
        classes=list(manifest.classes),
        outputs=outputs,
    )
    _write_json(out_dir / CONDENSED_NAME, condensed.to_json_dict(), written)
    return condensed


# ----------------------------------------------------------------- metrics

def _write_kde_csv(path: Path, curves: Sequence, written: list[Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid", "R", "G", "B"])
        for i in range(len(curves[0].grid)):
            writer.writerow(
                [repr(float(curves[0].grid[i]))]
                + [repr(float(c.density[i])) for c in curves]
            )
    written.append(path)


def _colorfulness_dict(stats) -> dict:
    return {
        "mean": stats.mean,
        "min": stats.min,
        "max": stats.max,
        "count": stats.count,
    }


def stage_metrics(
    dataset_dir: Path | str, out_dir: Path | str, config: PipelineConfig
) -> dict:
    """Score color statistics of the condensed output against the source
    dataset; writes metrics.json and the two KDE curve files."""
    return _guarded(_metrics_body, Path(dataset_dir), Path(out_dir), config)


def _metrics_body(
    dataset_dir: Path, out_dir: Path, config: PipelineConfig, written: list[Path]
) -> dict:
    config.validate()
    manifest = catalog.load_manifest(dataset_dir)
    condensed_path = out_dir / CONDENSED_NAME
    raw = _read_stage_json(condensed_path, "metrics", "condensed record")
    condensed = CondensedManifest.from_json_dict(raw)
    by_id = {s.id: s for s in manifest.samples}

    def original_images():
        for s in manifest.samples:
            yield load_rgb(manifest.image_path(s), s.id)

    def source_images():
        for entry in condensed.outputs:
            s = by_id[entry["id"]]
            yield load_rgb(manifest.image_path(s), s.id)

    def condensed_images():
        for entry in condensed.outputs:
            yield load_rgb(out_dir / entry["output"], entry["id"])

    original_stats = dataset_colorfulness(original_images())
    source_stats = dataset_colorfulness(source_images())
    condensed_stats = dataset_colorfulness(condensed_images())

    original_curves = kde_rgb(original_images())
    condensed_curves = kde_rgb(condensed_images())
    report = homogenization_report(original_curves, condensed_curves)

    _write_kde_csv(out_dir / "kde.original.csv", original_curves, written)
    _write_kde_csv(out_dir / "kde.condensed.csv", condensed_curves, written)

    summary = {
        "colorfulness": {
            "original_dataset": _colorfulness_dict(original_stats),
            "selected_sources": _colorfulness_dict(source_stats),
            "condensed": _colorfulness_dict(condensed_stats),
        },
        "kde": {
            "grid_points": len(original_curves[0].grid),
            "bandwidths": {
                "original": {c.channel: c.bandwidth for c in original_curves},
                "condensed": {c.channel: c.bandwidth for c in condensed_curves},
            },
            "integrals": {
                "original": {c.channel: curve_integral(c) for c in original_curves},
                "condensed": {c.channel: curve_integral(c) for c in condensed_curves},
            },
        },
        "homogenization": {
            "per_channel": report.per_channel,
            "mean": report.mean,
        },
    }
    _write_json(out_dir / METRICS_NAME, summary, written)

    condensed.metrics = summary
    _write_json(condensed_path, condensed.to_json_dict(), written)
    return summary


# --------------------------------------------------------------------- run

_STAGES: tuple = (
    ("quantize", stage_quantize),
    ("sample", stage_sample),
    ("compensate", stage_compensate),
    ("stitch", stage_stitch),
    ("metrics", stage_metrics),
)


def run(
    config: PipelineConfig,
    dataset_dir: Path | str,
    out_dir: Path | str,
    backend: Backend | None = None,
) -> CondensedManifest:
    """Execute the full flow into ``out_dir``.

    Stages run against a temporary sibling directory that is renamed into
    place only after the metrics stage succeeds; any failure removes the
    partial tree and surfaces the error wrapped with its stage name.
    """
    config.validate()
    dataset_dir = Path(dataset_dir)
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        raise ConfigInvalid(f"output directory is not empty: {out_dir}")
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_dir.parent / f".{out_dir.name}.partial"
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()

    try:
        for name, fn in _STAGES:
            try:
                if name == "compensate":
                    fn(dataset_dir, tmp, config, backend)
                else:
                    fn(dataset_dir, tmp, config)
            except Dc3Error as exc:
                raise StageError(name, exc) from exc
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise

    if out_dir.exists():
        out_dir.rmdir()
    tmp.rename(out_dir)
    with open(out_dir / CONDENSED_NAME, encoding="utf-8") as fh:
        return CondensedManifest.from_json_dict(json.load(fh))
