"""
Command-line entry point: generate, estimate, benchmark and render.
"""

import asyncio
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer

from .benchmark import benchmark as run_suite
from .config import RunConfig, load_config
from .errors import IntersectionMcmcError
from .ingest import load_dataset, save_dataset, write_document
from .pipeline import estimate_intersection, write_estimate
from .render import load_scene, render_svg
from .synthetic import generate_suite, save_ground_truth

logger = logging.getLogger("intersection_mcmc.cli")

app = typer.Typer(help="Lane-level intersection estimation with two-stage MCMC.", no_args_is_help=True)


@app.callback()
def configure(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _parse_ints(value: Optional[str], option: str) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"expected comma-separated integers, got {value!r}", param_hint=option) from e


def _parse_center(value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        x, y = (float(part) for part in value.split(","))
    except ValueError as e:
        raise typer.BadParameter(f"expected 'x,y', got {value!r}", param_hint="--seed-center") from e
    return [x, y]


def _estimator_overrides(
    stage1_samples: Optional[int],
    stage2_samples: Optional[int],
    seed: Optional[int],
    sigma_perp: Optional[float],
    sigma_ang: Optional[float],
    tau: Optional[float],
    seed_center: Optional[str],
    input_mode: Optional[str],
    time_budget: Optional[float] = None,
) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {"topology": {}, "lane_course": {}}
    if stage1_samples is not None:
        overrides["topology"]["n_samples"] = stage1_samples
    if stage2_samples is not None:
        overrides["lane_course"]["n_samples"] = stage2_samples
    if sigma_perp is not None:
        overrides["topology"]["sigma_perp"] = sigma_perp
        overrides["lane_course"]["sigma_perp"] = sigma_perp
    if sigma_ang is not None:
        overrides["topology"]["sigma_ang"] = math.radians(sigma_ang)
    if tau is not None:
        overrides["lane_course"]["tau"] = tau
    if seed is not None:
        overrides["seed"] = seed
    if seed_center is not None:
        overrides["seed_center"] = _parse_center(seed_center)
    if input_mode is not None:
        overrides["input_mode"] = input_mode
    if time_budget is not None:
        overrides["topology"]["time_budget"] = time_budget
        overrides["lane_course"]["time_budget"] = time_budget
    return overrides


def _load(config: Optional[Path], overrides: Dict[str, Any]) -> RunConfig:
    try:
        return load_config(config, overrides)
    except IntersectionMcmcError as e:
        logger.error(str(e))
        raise typer.Exit(code=1)


@app.command()
def generate(
    out: Path = typer.Option(..., "--out", help="Output directory"),
    count: Optional[int] = typer.Option(None, "--count", help="Number of intersections"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Suite seed"),
    noise: Optional[float] = typer.Option(None, "--noise", help="Detection noise σ in meters"),
    clutter: Optional[int] = typer.Option(None, "--clutter", help="False detections per intersection"),
    config: Optional[Path] = typer.Option(None, "--config", help="JSON config document"),
) -> None:
    """Generate synthetic intersections with datasets and ground truth."""
    generation: Dict[str, Any] = {}
    overrides: Dict[str, Any] = {"generation": generation}
    if count is not None:
        generation["count"] = count
    if noise is not None:
        generation["noise_sigma"] = noise
    if clutter is not None:
        generation["clutter_count"] = clutter
    if seed is not None:
        overrides["seed"] = seed
        generation["seed"] = seed
    cfg = _load(config, overrides)
    resolved = cfg.resolved()
    try:
        entries = []
        for gt, dataset, intersection_seed in generate_suite(cfg.generation, cfg.topology, resolved):
            dataset_path = save_dataset(dataset, out / f"{gt.name}.dataset.json")
            truth_path = save_ground_truth(gt, out / f"{gt.name}.truth.json", intersection_seed, resolved)
            entries.append({
                "name": gt.name,
                "seed": intersection_seed,
                "category": gt.category,
                "dataset": dataset_path.name,
                "truth": truth_path.name,
            })
        manifest = write_document({"seed": cfg.generation.seed, "config": resolved, "intersections": entries}, out / "manifest.json")
    except IntersectionMcmcError as e:
        logger.error(str(e))
        raise typer.Exit(code=1)
    logger.info(f"Generated {len(entries)} intersections; manifest at {manifest}")


@app.command()
def estimate(
    dataset: Path = typer.Argument(..., help="Dataset JSON document"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    stage1_samples: Optional[int] = typer.Option(None, "--stage1-samples", help="Topology chain length"),
    stage2_samples: Optional[int] = typer.Option(None, "--stage2-samples", help="Lane-course chain length"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Chain seed"),
    sigma_perp: Optional[float] = typer.Option(None, "--sigma-perp", help="Lateral σ⊥ in meters"),
    sigma_ang: Optional[float] = typer.Option(None, "--sigma-ang", help="Angular σ∠ in degrees"),
    tau: Optional[float] = typer.Option(None, "--tau", help="Sharing prior exponent τ"),
    seed_center: Optional[str] = typer.Option(None, "--seed-center", help="Split center 'x,y'"),
    input_mode: Optional[str] = typer.Option(None, "--input", help="'tracked' or 'detections'"),
    time_budget: Optional[float] = typer.Option(None, "--time-budget", help="Wall-clock limit per stage in seconds"),
    config: Optional[Path] = typer.Option(None, "--config", help="JSON config document"),
) -> None:
    """Estimate topology and lane courses of one intersection."""
    cfg = _load(config, _estimator_overrides(
        stage1_samples, stage2_samples, seed, sigma_perp, sigma_ang, tau, seed_center, input_mode, time_budget
    ))
    try:
        result = estimate_intersection(load_dataset(dataset), cfg)
        write_estimate(result, cfg, out)
    except IntersectionMcmcError as e:
        logger.error(str(e))
        raise typer.Exit(code=1)


@app.command(name="benchmark")
def benchmark_command(
    directory: Path = typer.Argument(..., help="Directory written by 'generate'"),
    out: Path = typer.Option(..., "--out", help="Report directory"),
    sweep: Optional[str] = typer.Option(None, "--sweep", help="Comma-separated sample counts, e.g. 2500,5000,10000,20000"),
    parallelism: Optional[int] = typer.Option(None, "--parallelism", min=1, help="Worker processes"),
    stage1_samples: Optional[int] = typer.Option(None, "--stage1-samples"),
    stage2_samples: Optional[int] = typer.Option(None, "--stage2-samples"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    sigma_perp: Optional[float] = typer.Option(None, "--sigma-perp"),
    sigma_ang: Optional[float] = typer.Option(None, "--sigma-ang"),
    tau: Optional[float] = typer.Option(None, "--tau"),
    input_mode: Optional[str] = typer.Option(None, "--input"),
    config: Optional[Path] = typer.Option(None, "--config"),
) -> None:
    """Estimate and evaluate every intersection of a generated suite."""
    overrides = _estimator_overrides(stage1_samples, stage2_samples, seed, sigma_perp, sigma_ang, tau, None, input_mode)
    if parallelism is not None:
        overrides["parallelism"] = parallelism
    cfg = _load(config, overrides)
    try:
        summary = asyncio.run(run_suite(directory, out, cfg, _parse_ints(sweep, "--sweep")))
    except IntersectionMcmcError as e:
        logger.error(str(e))
        raise typer.Exit(code=1)
    typer.echo(
        f"arm accuracy {summary.arm_accuracy:.2f}%  lane-level accuracy {summary.lane_level_accuracy:.2f}%  "
        f"failures {summary.failures}/{summary.count}"
    )


@app.command()
def render(
    files: List[Path] = typer.Argument(..., help="Dataset, topology, lanelet map or ground-truth documents"),
    out: Path = typer.Option(..., "--out", help="SVG file to write"),
) -> None:
    """Draw documents of one intersection into a single SVG."""
    try:
        render_svg(load_scene(files), out)
    except IntersectionMcmcError as e:
        logger.error(str(e))
        raise typer.Exit(code=1)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
