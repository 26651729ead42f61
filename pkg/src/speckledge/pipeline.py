"""Batch orchestration: simulate mosaics, run every configured method over
every simulation, score against ground truth, and persist artifacts.

Work units are (method, simulation) pairs.  They may run on a worker pool;
results are always reduced in (method index, simulation index) order, so the
emitted reports are byte-identical regardless of worker count.
"""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig, MethodSpec
from .detectors import CannyConfig, GravitationalConfig, MultiscaleConfig
from .metrics import baddeley_delta
from .raster import (
    BinaryImage,
    ByteImage,
    MultiChannelImage,
    quantize,
    write_pbm,
    write_pgm,
)
from .report import (
    ReportRow,
    merge_rows,
    read_report,
    render_figure,
    summary_table,
    write_report,
)
from .simulate import SimulationSpec, ground_truth_edges, simulate_channel
from .strategies import (
    BINARY_DETECTORS,
    run_strategy,
    strength_map,
    sweep_best,
    threshold,
)

log = logging.getLogger("speckledge")


def simulate_mosaics(spec: SimulationSpec) -> list[MultiChannelImage]:
    """All Monte-Carlo repetitions; seeding is per (repetition, channel), so
    the result does not depend on generation order."""
    mosaics = []
    for sim_index in range(spec.count):
        channels = {
            tag: simulate_channel(spec, tag, sim_index) for tag in spec.channels
        }
        mosaics.append(MultiChannelImage(channels))
    return mosaics


def detector_config_for(method: MethodSpec, param: float | None):
    if method.detector in ("gravitational", "gravitational-fu"):
        neighbourhood = "9x9" if method.detector == "gravitational-fu" else "3x3"
        return GravitationalConfig(tnorm=method.tnorm, neighbourhood=neighbourhood)
    if method.detector == "canny":
        if param is None:
            raise ValueError("canny requires a sigma parameter")
        return CannyConfig(
            sigma=param,
            high_percentile=method.high_percentile,
            low_ratio=method.low_ratio,
        )
    return MultiscaleConfig(
        scales=tuple(method.scales),
        percentile=method.ms_percentile,
        tracking_radius=method.tracking_radius,
    )


def method_binary(method: MethodSpec, mci: MultiChannelImage, param: float | None) -> BinaryImage:
    """One detection at one sweep point."""
    if method.detector in BINARY_DETECTORS:
        return run_strategy(
            mci,
            method.strategy,
            method.detector,
            detector_config_for(method, param),
            method.filter_spec,
        )
    return run_strategy(
        mci,
        method.strategy,
        method.detector,
        detector_config_for(method, None),
        method.filter_spec,
        threshold_value=param,
    )


def method_label(method: MethodSpec) -> str:
    strategy = method.strategy.kind
    if method.strategy.channel:
        strategy += f"-{method.strategy.channel}"
    return f"{method.detector}_{strategy}_{method.filter_spec.kind}"


@dataclass(frozen=True)
class SimOutcome:
    """Scores and maps for one (method, simulation) unit.  For shared sweeps
    every grid point is retained; otherwise only the per-simulation best."""

    params: tuple[float | None, ...]
    scores: tuple[float, ...]
    maps: tuple[BinaryImage, ...]


@dataclass(frozen=True)
class MethodResult:
    method: MethodSpec
    per_sim_params: tuple[float | None, ...]
    per_sim_scores: tuple[float, ...]
    best_maps: tuple[BinaryImage, ...]

    def report_row(self) -> ReportRow:
        params = [p for p in self.per_sim_params if p is not None]
        best_param = statistics.fmean(params) if params else None
        mean = statistics.fmean(self.per_sim_scores)
        n = len(self.per_sim_scores)
        std = statistics.stdev(self.per_sim_scores) if n > 1 else 0.0
        return ReportRow(
            method=self.method.detector,
            strategy=self.method.strategy.kind,
            filter=self.method.filter_spec.kind,
            channel=self.method.strategy.channel or "-",
            best_param=best_param,
            bdm_mean=mean,
            bdm_std=std,
            n_sims=n,
        )


def _evaluate_unit(
    method: MethodSpec,
    mci: MultiChannelImage,
    gt: BinaryImage,
    config: ExperimentConfig,
) -> SimOutcome:
    grid = method.sweep_values()
    if grid is None:
        edge_map = method_binary(method, mci, None)
        score = baddeley_delta(edge_map, gt, config.bdm)
        return SimOutcome((None,), (score,), (edge_map,))

    maps: dict[float, BinaryImage] = {}
    if method.detector in BINARY_DETECTORS:
        def objective(param: float) -> BinaryImage:
            maps[param] = method_binary(method, mci, param)
            return maps[param]
    else:
        esm = strength_map(
            mci,
            method.strategy,
            method.detector,
            detector_config_for(method, None),
            method.filter_spec,
        )

        def objective(param: float) -> BinaryImage:
            maps[param] = threshold(esm, param)
            return maps[param]

    if config.shared_sweep:
        scores = tuple(
            baddeley_delta(objective(param), gt, config.bdm) for param in grid
        )
        return SimOutcome(grid, scores, tuple(maps[param] for param in grid))

    best_param, best_score = sweep_best(objective, gt, grid, config.bdm)
    return SimOutcome((best_param,), (best_score,), (maps[best_param],))


def _reduce_shared(method: MethodSpec, outcomes: list[SimOutcome]) -> MethodResult:
    grid = outcomes[0].params
    n_params = len(grid)
    means = [
        statistics.fmean(outcome.scores[k] for outcome in outcomes)
        for k in range(n_params)
    ]
    best_k = min(range(n_params), key=lambda k: (means[k], grid[k]))
    return MethodResult(
        method=method,
        per_sim_params=tuple(grid[best_k] for _ in outcomes),
        per_sim_scores=tuple(outcome.scores[best_k] for outcome in outcomes),
        best_maps=tuple(outcome.maps[best_k] for outcome in outcomes),
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[MethodResult]:
    spec = config.simulation
    log.info("simulating %d mosaics (%dx%d, %d channels)",
             spec.count, spec.labelmap.height, spec.labelmap.width, len(spec.channels))
    mosaics = simulate_mosaics(spec)
    gt = ground_truth_edges(spec.labelmap)

    units = [
        (mi, si, method, mosaics[si])
        for mi, method in enumerate(config.methods)
        for si in range(spec.count)
    ]
    def unit_context(mi: int, si: int, exc: Exception) -> RuntimeError:
        label = method_label(config.methods[mi])
        return RuntimeError(f"method {mi} ({label}), simulation {si}: {exc}")

    outcomes: dict[tuple[int, int], SimOutcome] = {}
    if jobs <= 1:
        for mi, si, method, mci in units:
            try:
                outcomes[(mi, si)] = _evaluate_unit(method, mci, gt, config)
            except Exception as exc:
                raise unit_context(mi, si, exc) from exc
            log.debug("unit method=%d sim=%d done", mi, si)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {
                (mi, si): pool.submit(_evaluate_unit, method, mci, gt, config)
                for mi, si, method, mci in units
            }
            for (mi, si), future in futures.items():
                try:
                    outcomes[(mi, si)] = future.result()
                except Exception as exc:
                    raise unit_context(mi, si, exc) from exc

    results = []
    for mi, method in enumerate(config.methods):
        ordered = [outcomes[(mi, si)] for si in range(spec.count)]
        if config.shared_sweep and method.sweep_values() is not None:
            results.append(_reduce_shared(method, ordered))
        else:
            results.append(
                MethodResult(
                    method=method,
                    per_sim_params=tuple(o.params[0] for o in ordered),
                    per_sim_scores=tuple(o.scores[0] for o in ordered),
                    best_maps=tuple(o.maps[0] for o in ordered),
                )
            )
        row = results[-1].report_row()
        log.info("%s: %.2f (%.2f)", method_label(method), row.bdm_mean, row.bdm_std)
    return results


def _labelmap_image(spec: SimulationSpec) -> ByteImage:
    return ByteImage(spec.labelmap.data.astype("uint8"))


def cmd_simulate(config: ExperimentConfig) -> list[Path]:
    """Write the phantom, its ground-truth edges, and every simulated channel
    as portable gray/bit maps.  Deterministic in the master seed."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = config.simulation
    written = []

    labelmap_path = out / "labelmap.pgm"
    write_pgm(_labelmap_image(spec), labelmap_path)
    written.append(labelmap_path)

    gt_path = out / "ground_truth.pbm"
    write_pbm(ground_truth_edges(spec.labelmap), gt_path)
    written.append(gt_path)

    for sim_index in range(spec.count):
        for tag in spec.channels:
            img = simulate_channel(spec, tag, sim_index)
            path = out / f"sim{sim_index:03d}_{tag}.pgm"
            write_pgm(quantize(img), path)
            written.append(path)
    log.info("wrote %d files under %s", len(written), out)
    return written


def cmd_run(config: ExperimentConfig, jobs: int = 1) -> tuple[list[ReportRow], Path]:
    """Full benchmark: returns the report rows and the CSV path; persists the
    ground truth and each method's best edge map per simulation."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_experiment(config, jobs=jobs)

    write_pbm(ground_truth_edges(config.simulation.labelmap), out / "ground_truth.pbm")
    rows = []
    for result in results:
        rows.append(result.report_row())
        edge_dir = out / "edges" / method_label(result.method)
        edge_dir.mkdir(parents=True, exist_ok=True)
        for si, edge_map in enumerate(result.best_maps):
            write_pbm(edge_map, edge_dir / f"sim{si:03d}.pbm")

    csv_path = out / "report.csv"
    write_report(rows, csv_path)
    log.info("report written to %s", csv_path)
    return rows, csv_path


def cmd_report(paths: list[str | Path], out_dir: str | Path) -> tuple[list[ReportRow], str]:
    """Merge result files into one sorted, deduplicated table; render the
    text summary and a bar-chart figure next to the merged CSV."""
    if not paths:
        raise ValueError("no report files given")
    merged = merge_rows([read_report(p) for p in paths])

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report(merged, out / "merged.csv")
    summary = summary_table(merged)
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    render_figure(merged, out / "bdm_summary.png")
    log.info("merged %d files into %s", len(paths), out / "merged.csv")
    return merged, summary
