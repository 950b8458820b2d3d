"""Command-line entry points. ``interestboard --help`` lists subcommands."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import evaluation, gp
from .features import KernelConfig, load_features, write_features_binary
from .ranking import PriorConfig, infer_ep
from .saliency import HttpExtractorClient, OcclusionConfig, occlusion_map, render_overlay
from .service import ComparisonLog, Session
from .storyboard import StoryboardSpec, cluster_baseline, select_top_spaced


@click.group()
def main() -> None:
    """Learn image interest from pairwise judgments; rank, storyboard, explain."""


def _prior_options(fn):
    fn = click.option("--prior-mean", default=0.0, show_default=True)(fn)
    fn = click.option("--prior-sigma", default=2.0, show_default=True)(fn)
    fn = click.option("--beta", default=1.0, show_default=True)(fn)
    return fn


def _compute_scores(features_path: str, log_path: str, prior: PriorConfig,
                    smoothed: bool = True):
    store = load_features(features_path)
    log = ComparisonLog(log_path)
    posterior = infer_ep(log.entries(), store.ids, prior)
    if not smoothed:
        return store, posterior, None
    model = gp.fit(store, posterior, KernelConfig())
    return store, gp.smooth_all(model), model


@main.command("ingest-features")
@click.argument("feature_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--binary-out", type=click.Path(dir_okay=False), default=None,
              help="Also write a binary sidecar header at this path.")
def ingest_features(feature_file: str, binary_out: str | None) -> None:
    """Validate a feature file and report its shape."""
    store = load_features(feature_file)
    click.echo(f"{len(store)} records, dimension {store.dim}")
    if binary_out:
        write_features_binary(store, binary_out)
        click.echo(f"binary sidecar written to {binary_out}")


@main.command()
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write scores JSON here instead of stdout.")
@click.option("--raw", is_flag=True, help="Skip the feature-space smoothing pass.")
@_prior_options
def rank(features_path: str, log_path: str, out: str | None, raw: bool,
         prior_mean: float, prior_sigma: float, beta: float) -> None:
    """Score every image from the judgment log (ranker + smoother)."""
    prior = PriorConfig(prior_mean, prior_sigma, beta)
    _, posterior, _ = _compute_scores(features_path, log_path, prior,
                                      smoothed=not raw)
    payload = [
        {"id": image_id, "mean": float(m), "variance": float(v)}
        for image_id, m, v in zip(posterior.ids, posterior.means, posterior.variances)
    ]
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@main.command("eval-trace")
@click.option("--images", "n_images", default=500, show_default=True)
@click.option("--dim", default=64, show_default=True)
@click.option("--comparisons", "n_comparisons", default=4000, show_default=True)
@click.option("--noise", "noise_std", default=0.5, show_default=True)
@click.option("--train-fraction", default=0.75, show_default=True)
@click.option("--budgets", default="100,250,500,1000,2000,3000", show_default=True)
@click.option("--seeds", default="0,1,2,3,4", show_default=True)
@click.option("--csv-out", type=click.Path(dir_okay=False), default=None)
@click.option("--json-out", type=click.Path(dir_okay=False), default=None)
def eval_trace(n_images: int, dim: int, n_comparisons: int, noise_std: float,
               train_fraction: float, budgets: str, seeds: str,
               csv_out: str | None, json_out: str | None) -> None:
    """Accuracy-versus-budget traces on a synthetic ground-truth dataset."""
    budget_list = [int(b) for b in budgets.split(",") if b.strip()]
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    rows = []
    traces = []
    for seed in seed_list:
        dataset = evaluation.synthesize_dataset(
            n_images, dim, n_comparisons, noise_std, seed
        )
        trace = evaluation.accuracy_trace(
            dataset, evaluation.SplitConfig(train_fraction, seed), budget_list
        )
        traces.append(trace)
        for method, values in trace.accuracies.items():
            for budget, acc in zip(trace.budgets, values):
                rows.append((method, budget, acc, seed))
        click.echo(f"seed {seed} done", err=True)
    mean = evaluation.mean_traces(traces)

    if csv_out:
        with open(csv_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "budget", "accuracy", "seed"])
            writer.writerows(rows)
        click.echo(f"per-seed trace CSV written to {csv_out}", err=True)
    summary = {
        "budgets": mean.budgets,
        "mean_accuracy": mean.accuracies,
        "seeds": seed_list,
        "config": {
            "n_images": n_images, "dim": dim, "n_comparisons": n_comparisons,
            "noise_std": noise_std, "train_fraction": train_fraction,
        },
    }
    text = json.dumps(summary, indent=2)
    if json_out:
        Path(json_out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@main.command()
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Scores JSON from `rank`; otherwise computed from --log.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None)
@click.option("--n", default=24, show_default=True, help="Board size.")
@click.option("--min-sep", default=0, show_default=True,
              help="Minimum capture-index separation.")
@click.option("--method", type=click.Choice(["interest", "cluster"]),
              default="interest", show_default=True)
@_prior_options
def storyboard(features_path: str, scores_path: str | None, log_path: str | None,
               n: int, min_sep: int, method: str,
               prior_mean: float, prior_sigma: float, beta: float) -> None:
    """Emit a storyboard manifest (JSON) on stdout."""
    store = load_features(features_path)
    score_map: dict[str, float] = {image_id: 0.0 for image_id in store.ids}
    if scores_path:
        payload = json.loads(Path(scores_path).read_text(encoding="utf-8"))
        score_map = (
            {rec["id"]: float(rec["mean"]) for rec in payload}
            if isinstance(payload, list)
            else {k: float(v) for k, v in payload.items()}
        )
    elif log_path:
        prior = PriorConfig(prior_mean, prior_sigma, beta)
        _, smoothed, _ = _compute_scores(features_path, log_path, prior)
        score_map = smoothed.score_map()
    elif method == "interest":
        raise click.UsageError("interest storyboard needs --scores or --log")

    if method == "cluster":
        chosen = cluster_baseline(store, n)
        complete = True
    else:
        result = select_top_spaced(score_map, store.ids, StoryboardSpec(n, min_sep))
        chosen, complete = result.ids, result.complete
    index = {image_id: i for i, image_id in enumerate(store.ids)}
    click.echo(json.dumps({
        "method": method,
        "complete": complete,
        "images": [
            {"id": image_id, "path": store.path(image_id),
             "score": score_map[image_id], "capture_index": index[image_id]}
            for image_id in chosen
        ],
    }, indent=2))


@main.command()
@click.option("--features", "features_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
@click.option("--image", "image_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--extractor", "extractor_url", required=True,
              envvar="INTERESTBOARD_EXTRACTOR_URL",
              help="Feature-extraction endpoint URL.")
@click.option("--window", default=16, show_default=True)
@click.option("--stride", default=16, show_default=True)
@click.option("--out", "overlay_out", type=click.Path(dir_okay=False), default=None,
              help="Write the red/blue overlay PNG here.")
@click.option("--grid-out", type=click.Path(dir_okay=False), default=None,
              help="Write the delta-grid JSON here.")
@_prior_options
def saliency(features_path: str, log_path: str, image_path: str, extractor_url: str,
             window: int, stride: int, overlay_out: str | None, grid_out: str | None,
             prior_mean: float, prior_sigma: float, beta: float) -> None:
    """Occlusion-sweep saliency map for one image."""
    prior = PriorConfig(prior_mean, prior_sigma, beta)
    _, _, model = _compute_scores(features_path, log_path, prior)
    cfg = OcclusionConfig(window_px=window, stride_px=stride)
    extractor = HttpExtractorClient(extractor_url)
    smap = occlusion_map(image_path, extractor, model, cfg)
    if grid_out:
        Path(grid_out).write_text(json.dumps(smap.to_json_dict()) + "\n",
                                  encoding="utf-8")
    if overlay_out:
        from PIL import Image

        canvas = Image.open(image_path).convert("RGB")
        if canvas.size != (cfg.image_size_px, cfg.image_size_px):
            canvas = canvas.resize((cfg.image_size_px, cfg.image_size_px),
                                   Image.BILINEAR)
        render_overlay(smap, canvas).save(overlay_out)
    if not grid_out and not overlay_out:
        click.echo(json.dumps(smap.to_json_dict()))


@main.command()
@click.option("--port", default=8000, show_default=True, envvar="INTERESTBOARD_PORT")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False),
              envvar="INTERESTBOARD_DATA_DIR", default=None,
              help="Directory holding features.jsonl and comparisons.jsonl.")
@click.option("--features", "features_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None)
@click.option("--extractor", "extractor_url", envvar="INTERESTBOARD_EXTRACTOR_URL",
              default=None, help="Feature-extraction endpoint for saliency.")
@click.option("--seed", default=0, show_default=True, help="Pair-sampling seed.")
@click.option("--auto-recompute-every", default=25, show_default=True,
              help="Recompute after every K judgments (0 disables).")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Serve a built web UI from this directory at /.")
def serve(port: int, host: str, data_dir: str | None, features_path: str | None,
          log_path: str | None, extractor_url: str | None, seed: int,
          auto_recompute_every: int, ui_dir: str | None) -> None:
    """Run the labeling service."""
    import uvicorn

    from .api import create_app

    if data_dir:
        features_path = features_path or str(Path(data_dir) / "features.jsonl")
        log_path = log_path or str(Path(data_dir) / "comparisons.jsonl")
    if not features_path or not log_path:
        raise click.UsageError("provide --data-dir or both --features and --log")
    store = load_features(features_path)
    session = Session(
        store,
        ComparisonLog(log_path),
        skip_log_path=str(Path(log_path).with_suffix(".skips.jsonl")),
        rng_seed=seed,
        auto_recompute_every=auto_recompute_every,
    )
    app = create_app(
        session,
        images_root=Path(features_path).resolve().parent,
        extractor_url=extractor_url,
        ui_dir=ui_dir,
    )
    click.echo(f"serving {len(store)} images on http://{host}:{port}", err=True)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
