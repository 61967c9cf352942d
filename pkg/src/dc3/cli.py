"""Command-line entry points for the condensation pipeline.

``dc3 run`` drives the whole flow; the five stage subcommands (quantize,
sample, compensate, stitch, metrics) each execute one step against an output
directory so long runs can be resumed or inspected mid-way. Flags beat config
file values, which beat defaults; the resolved config is embedded in the
output for provenance.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .errors import ConfigInvalid, Dc3Error


def _pipeline_options(fn):
    opts = [
        click.option("--dataset", "dataset_dir", required=True,
                     type=click.Path(exists=True, file_okay=True, dir_okay=True, path_type=Path),
                     help="Dataset directory (or its manifest.json)."),
        click.option("--out", "out_dir", required=True,
                     type=click.Path(path_type=Path),
                     help="Output directory for pipeline artifacts."),
        click.option("--ipc", type=int, default=None,
                     help="Images kept per class."),
        click.option("--bins", type=int, default=None,
                     help="Bins per class (clamped to --ipc)."),
        click.option("--seed", type=int, default=None,
                     help="Root seed; every stage derives its own streams."),
        click.option("--mode", type=click.Choice(["static", "greedy"]), default=None,
                     help="Gain scoring mode inside each bin."),
        click.option("--stitch", "stitch_text", default=None,
                     help="Stitch strategy: half2, quarter4, pixels:F, grid:N."),
        click.option("--backend", type=click.Choice(["fallback", "http"]), default=None,
                     help="Hue-variant producer."),
        click.option("--endpoint", default=None,
                     help="Base URL of the compensation service (http backend)."),
        click.option("--guidance-scale", type=float, default=None,
                     help="Prompt adherence strength passed to the service."),
        click.option("--variants", type=click.Choice(["2", "4"]), default=None,
                     help="Hue variants per image (4 needs quarter4)."),
        click.option("--in-flight", type=int, default=None,
                     help="Concurrent service requests."),
        click.option("--config", "config_file", default=None,
                     type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     help="JSON config file; flags override its values."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _resolve_config(config_file: Path | None, **flags) -> pipeline.PipelineConfig:
    merged: dict = {}
    if config_file is not None:
        try:
            with open(config_file, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        merged.update(loaded)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    if "variants" in merged:
        merged["variants"] = int(merged["variants"])
    return pipeline.PipelineConfig.from_json_dict(merged)


def _fail(tag: str, exc: Dc3Error) -> None:
    click.echo(f"dc3: {tag}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Dataset condensation: cluster, select, recolor, stitch, measure."""


def _stage_command(name: str, runner):
    @main.command(name=name, help=runner.__doc__)
    @_pipeline_options
    def _cmd(dataset_dir, out_dir, config_file, stitch_text, **flags):
        try:
            config = _resolve_config(config_file, stitch=stitch_text, **flags)
            out_dir.mkdir(parents=True, exist_ok=True)
            runner(dataset_dir, out_dir, config)
        except Dc3Error as exc:
            _fail(name, exc)
        click.echo(f"{name}: ok ({out_dir})")

    return _cmd


_stage_command("quantize", pipeline.stage_quantize)
_stage_command("sample", pipeline.stage_sample)
_stage_command("compensate", pipeline.stage_compensate)
_stage_command("stitch", pipeline.stage_stitch)
_stage_command("metrics", pipeline.stage_metrics)


@main.command(name="run")
@_pipeline_options
def run_cmd(dataset_dir, out_dir, config_file, stitch_text, **flags):
    """Execute every stage and write the condensed dataset."""
    try:
        config = _resolve_config(config_file, stitch=stitch_text, **flags)
        manifest = pipeline.run(config, dataset_dir, out_dir)
    except Dc3Error as exc:
        tag = getattr(exc, "stage", "run")
        _fail(tag, exc)
    click.echo(
        f"run: ok ({len(manifest.outputs)} images, "
        f"{len(manifest.classes)} classes, {out_dir})"
    )


if __name__ == "__main__":
    main()
