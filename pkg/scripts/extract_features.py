#!/usr/bin/env python3
"""Build a dataset's feature file by querying the model server.

Reads the dataset manifest, posts every image to the feature endpoint in
batches, and writes the rows into the binary feature file at each sample's
declared feature_row. Run this once against a live server; afterwards the
pipeline is fully offline.
"""

import json
from pathlib import Path

import click
import numpy as np
import requests

from dc3.images import encode_png_base64, load_rgb
from dc3.catalog import write_features

BATCH_LIMIT = 64


@click.command()
@click.option("--dataset", "dataset_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--endpoint", required=True, help="Model server base URL.")
@click.option("--batch-size", default=32, show_default=True)
def main(dataset_dir, endpoint, batch_size):
    batch_size = min(batch_size, BATCH_LIMIT)
    with open(dataset_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    samples = manifest["samples"]
    endpoint = endpoint.rstrip("/")

    vectors = [None] * len(samples)
    for start in range(0, len(samples), batch_size):
        chunk = samples[start : start + batch_size]
        payload = {
            "images": [
                encode_png_base64(load_rgb(dataset_dir / s["image"], s["id"]))
                for s in chunk
            ]
        }
        resp = requests.post(f"{endpoint}/v1/features", json=payload, timeout=120)
        resp.raise_for_status()
        body = resp.json()
        for s, vec in zip(chunk, body["vectors"]):
            vectors[s["feature_row"]] = vec
        click.echo(f"features {start + len(chunk)}/{len(samples)}")

    matrix = np.asarray(vectors, dtype=np.float32)
    out = dataset_dir / manifest.get("feature_file", "features.bin")
    write_features(matrix, out)
    click.echo(f"wrote {matrix.shape[0]}x{matrix.shape[1]} features to {out}")


if __name__ == "__main__":
    main()
