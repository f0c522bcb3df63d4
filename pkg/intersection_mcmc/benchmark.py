"""
Benchmark suite runner: estimate every intersection of a generated directory,
evaluate against ground truth and write CSV/JSON reports.

Intersections run in a process pool driven from asyncio. Each intersection
uses its own recorded seed, so results do not depend on the parallelism.
"""

import asyncio
import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config import RunConfig
from .errors import IntersectionMcmcError
from .evaluation import lane_course_report, summarize_suite, topology_report
from .ingest import load_dataset, write_document
from .models.report import IntersectionRow, SuiteSummary
from .pipeline import estimate_intersection
from .synthetic import load_ground_truth

logger = logging.getLogger("intersection_mcmc.benchmark")

CSV_COLUMNS = [
    "name",
    "seed",
    "category",
    "stage1_samples",
    "stage2_samples",
    "arm_count_correct",
    "lane_level_correct",
    "center_error",
    "mean_angle_error_deg",
    "mean_deviation",
    "coverage",
    "stage1_seconds",
    "stage2_seconds",
    "error",
]


def discover(directory: Path) -> List[Tuple[str, Path, Path]]:
    """(name, dataset, ground truth) for every `<name>.dataset.json` with a matching truth file.

    Raises:
        IntersectionMcmcError: If the directory holds no dataset pair
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IntersectionMcmcError(f"Benchmark directory {directory} does not exist")
    pairs = []
    for dataset_path in sorted(directory.glob("*.dataset.json")):
        name = dataset_path.name[: -len(".dataset.json")]
        truth_path = directory / f"{name}.truth.json"
        if truth_path.exists():
            pairs.append((name, dataset_path, truth_path))
        else:
            logger.warning(f"Skipping {dataset_path}: no {truth_path.name}")
    if not pairs:
        raise IntersectionMcmcError(f"No dataset/ground-truth pairs in {directory}")
    return pairs


def evaluate_intersection(
    name: str,
    dataset_path: Path,
    truth_path: Path,
    config: Dict[str, Any],
    stage1_samples: int,
    stage2_samples: int,
) -> IntersectionRow:
    """Estimate and evaluate one intersection; failures are recorded in the row."""
    cfg = RunConfig.model_validate(config)
    cfg = cfg.model_copy(update={
        "topology": cfg.topology.model_copy(update={"n_samples": stage1_samples}),
        "lane_course": cfg.lane_course.model_copy(update={"n_samples": stage2_samples}),
    })
    row = {"name": name, "seed": cfg.seed, "stage1_samples": stage1_samples, "stage2_samples": stage2_samples}
    try:
        dataset = load_dataset(dataset_path)
        gt = load_ground_truth(truth_path)
        seed = dataset.seed if dataset.seed is not None else cfg.seed
        row.update(seed=seed, category=gt.category)
        estimate = estimate_intersection(dataset, cfg, seed)
        row.update(
            topology=topology_report(estimate.topology_model, gt.topology),
            stage1_seconds=estimate.stage1_seconds,
            stage2_seconds=estimate.stage2_seconds,
        )
        if estimate.lanelet_model is not None:
            row["lane_course"] = lane_course_report(
                estimate.lanelet_model, estimate.topology_model, gt.lanelets, gt.topology
            )
    except Exception as e:
        logger.error(f"Intersection {name} failed: {e}", exc_info=True)
        row["error"] = str(e) or type(e).__name__
    return IntersectionRow(**row)


async def run_benchmark(
    directory: Path,
    cfg: RunConfig,
    sweep: Optional[Sequence[int]] = None,
    parallelism: Optional[int] = None,
) -> List[IntersectionRow]:
    """Evaluate every intersection at every sweep setting.

    Args:
        directory: Directory written by the generate command
        cfg: Run configuration; its sample counts apply when no sweep is given
        sweep: Sample counts applied to both stages in turn
        parallelism: Worker processes; defaults to cfg.parallelism

    Returns:
        Rows ordered by sample count, then name
    """
    pairs = discover(directory)
    settings = [(s, s) for s in sweep] if sweep else [(cfg.topology.n_samples, cfg.lane_course.n_samples)]
    workers = parallelism or cfg.parallelism
    config = cfg.model_dump(mode="json")
    logger.info(f"Benchmarking {len(pairs)} intersections at {len(settings)} sample settings with {workers} workers")

    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        tasks = [
            loop.run_in_executor(pool, evaluate_intersection, name, dataset_path, truth_path, config, stage1, stage2)
            for stage1, stage2 in settings
            for name, dataset_path, truth_path in pairs
        ]
        rows = await asyncio.gather(*tasks)
    return sorted(rows, key=lambda r: (r.stage1_samples, r.stage2_samples, r.name))


def _csv_row(row: IntersectionRow) -> Dict[str, Any]:
    topology, lanes = row.topology, row.lane_course
    return {
        "name": row.name,
        "seed": row.seed,
        "category": row.category or "",
        "stage1_samples": row.stage1_samples,
        "stage2_samples": row.stage2_samples,
        "arm_count_correct": "" if topology is None else int(topology.arm_count_correct),
        "lane_level_correct": "" if topology is None else int(topology.lane_level_correct),
        "center_error": "" if topology is None else f"{topology.center_error:.6f}",
        "mean_angle_error_deg": "" if topology is None else f"{math.degrees(topology.mean_angle_error):.6f}",
        "mean_deviation": "" if lanes is None or lanes.mean_deviation is None else f"{lanes.mean_deviation:.6f}",
        "coverage": "" if lanes is None else f"{lanes.coverage:.6f}",
        "stage1_seconds": f"{row.stage1_seconds:.6f}",
        "stage2_seconds": f"{row.stage2_seconds:.6f}",
        "error": row.error or "",
    }


def write_reports(rows: Sequence[IntersectionRow], summary: SuiteSummary, cfg: RunConfig, out_dir: Path) -> Dict[str, Path]:
    """Write rows.csv, rows.json and summary.json into out_dir."""
    out_dir = Path(out_dir)
    envelope = {"seed": cfg.seed, "config": cfg.resolved()}
    csv_path = out_dir / "rows.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(_csv_row(row) for row in rows)
    except OSError as e:
        raise IntersectionMcmcError(f"Cannot write {csv_path}: {e}") from e
    written = {
        "csv": csv_path,
        "rows": write_document({**envelope, "rows": [r.model_dump(mode="json") for r in rows]}, out_dir / "rows.json"),
        "summary": write_document({**envelope, "summary": summary.model_dump(mode="json")}, out_dir / "summary.json"),
    }
    for kind, path in written.items():
        logger.info(f"Wrote {kind} report to {path}")
    return written


async def benchmark(
    directory: Path,
    out_dir: Path,
    cfg: RunConfig,
    sweep: Optional[Sequence[int]] = None,
    parallelism: Optional[int] = None,
) -> SuiteSummary:
    """Run the suite, summarize it and write the reports."""
    rows = await run_benchmark(directory, cfg, sweep, parallelism)
    summary = summarize_suite(rows)
    write_reports(rows, summary, cfg, out_dir)
    return summary
