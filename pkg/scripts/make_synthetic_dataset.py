#!/usr/bin/env python3
"""Generate a synthetic dataset (manifest + features + images) for
experiments and offline pipeline runs."""

from pathlib import Path

import click

from dc3.synthetic import SyntheticSpec, write_synthetic_dataset


@click.command()
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Dataset root to create.")
@click.option("--classes", default=3, show_default=True)
@click.option("--per-class", default=30, show_default=True)
@click.option("--feature-dim", default=8, show_default=True)
@click.option("--image-size", default=32, show_default=True,
              help="Square image edge length in pixels.")
@click.option("--blobs-per-class", default=None, type=int,
              help="Sub-clusters per class; default one Gaussian blob.")
@click.option("--seed", default=0, show_default=True)
@click.option("--name", default="synthetic", show_default=True)
def main(out, classes, per_class, feature_dim, image_size, blobs_per_class, seed, name):
    spec = SyntheticSpec(
        classes=classes,
        per_class=per_class,
        feature_dim=feature_dim,
        image_size=(image_size, image_size),
        blobs_per_class=blobs_per_class,
        seed=seed,
        name=name,
    )
    root = write_synthetic_dataset(out, spec)
    click.echo(f"wrote {classes * per_class} samples under {root}")


if __name__ == "__main__":
    main()
