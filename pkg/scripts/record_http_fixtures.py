#!/usr/bin/env python3
"""Record request/response fixtures from a live model server.

The recorded JSON files let the contract tests replay the HTTP exchanges
byte-exactly with no server running. Rerun this script whenever the wire
format or the server's models change.
"""

import json
from pathlib import Path

import click
import numpy as np
import requests

from dc3.images import encode_png_base64

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "http"


def sample_image(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = rng.uniform(60, 180)
    img = base + rng.normal(0, 10, (size, size, 3))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


@click.command()
@click.option("--endpoint", required=True, help="Model server base URL.")
@click.option("--out", "out_dir", default=DEFAULT_OUT, show_default=True,
              type=click.Path(path_type=Path))
def main(endpoint, out_dir):
    endpoint = endpoint.rstrip("/")
    out_dir.mkdir(parents=True, exist_ok=True)
    exchanges = []

    def record(name, method, path, payload=None):
        if method == "GET":
            resp = requests.get(f"{endpoint}{path}", timeout=120)
        else:
            resp = requests.post(f"{endpoint}{path}", json=payload, timeout=120)
        exchanges.append(
            {
                "name": name,
                "method": method,
                "path": path,
                "request": payload,
                "response": {"status": resp.status_code, "json": resp.json()},
            }
        )
        click.echo(f"recorded {name}: {method} {path} -> {resp.status_code}")

    record("health", "GET", "/v1/health")

    img64 = encode_png_base64(sample_image(64, seed=1))
    record(
        "compensate_rainy_64",
        "POST",
        "/v1/compensate",
        {"image": img64, "prompt": "rainy", "seed": 7, "guidance_scale": 4.0},
    )
    record(
        "compensate_sunny_64",
        "POST",
        "/v1/compensate",
        {"image": img64, "prompt": "sunny", "seed": 8, "guidance_scale": 4.0},
    )

    imgs = [encode_png_base64(sample_image(32, seed=s)) for s in (2, 3)]
    record(
        "features_pair",
        "POST",
        "/v1/features",
        {"images": [imgs[0], imgs[1], imgs[0]]},
    )

    out = out_dir / "model_server_fixtures.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(exchanges, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {len(exchanges)} exchanges to {out}")


if __name__ == "__main__":
    main()
