"""Command-line entry points for batch extraction and the HTTP service."""

from __future__ import annotations

import logging

import click

from .backbone import Backbone
from .batch import extract_batch


def _load_backbone(name: str, weights: str, seed: int) -> Backbone:
    click.echo(f"loading backbone {name} (weights={weights})", err=True)
    return Backbone(name, weights=weights, seed=seed)


@click.group()
def main() -> None:
    """CNN feature extraction: batch feature files and an /extract service."""
    logging.basicConfig(level=logging.INFO)


@main.command()
@click.option("--images", "image_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--backbone", "backbone_name", default="resnet50", show_default=True)
@click.option("--weights", default="pretrained", show_default=True,
              help="pretrained | random | path to a state-dict checkpoint.")
@click.option("--seed", default=0, show_default=True,
              help="Initialization seed when --weights random.")
@click.option("--batch-size", default=16, show_default=True)
def extract(image_dir: str, out_path: str, backbone_name: str, weights: str,
            seed: int, batch_size: int) -> None:
    """Write a canonical feature file for a directory of images."""
    backbone = _load_backbone(backbone_name, weights, seed)
    n = extract_batch(image_dir, out_path, backbone, batch_size=batch_size)
    click.echo(f"{n} records, dimension {backbone.dim} -> {out_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8602, show_default=True,
              envvar="INTEREST_EXTRACTOR_PORT")
@click.option("--backbone", "backbone_name", default="resnet50", show_default=True)
@click.option("--weights", default="pretrained", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--image-root", type=click.Path(file_okay=False), default=None,
              help="Resolve relative image_path requests against this directory.")
def serve(host: str, port: int, backbone_name: str, weights: str, seed: int,
          image_root: str | None) -> None:
    """Run the extraction service (POST /extract)."""
    import uvicorn

    from .server import create_app

    app = create_app(_load_backbone(backbone_name, weights, seed), image_root)
    click.echo(f"extraction service on http://{host}:{port}", err=True)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
