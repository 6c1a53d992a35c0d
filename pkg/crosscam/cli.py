"""Main CLI interface for crosscam-sim."""

import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import ScenarioConfig, build_scenario, list_presets, load_config, preset_path
from .detsim import render_ground_truth, save_log
from .exceptions import ConfigurationError, CrossCamError
from .logging_config import (
    PerformanceTimer,
    close_run_logger,
    get_logger,
    setup_logging,
    setup_run_logger,
)
from .reports import report_stem, save_comparison, save_report, save_sweep, save_trace
from .server import (
    KNOWLEDGE_SHARING,
    RUN_MODES,
    RunMode,
    Scenario,
    camera_detections,
    compare_modes,
    run_scenario,
    sweep_knowledge_sharing,
)
from .topology import STATIC_SCORE, VALIDATION_ACCURACY, fov_footprint, resolve_clusters
from .utils import display_error, display_info, display_success, display_warning, parse_subset
from .validation import ScenarioValidator

console = Console()
logger = get_logger(__name__)


class CrossCamGroup(click.Group):
    """Click group mapping failures to exit codes: 1 for user errors, 2 for bugs."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(
                args=args,
                prog_name=prog_name,
                complete_var=complete_var,
                standalone_mode=False,
                **extra,
            )
            code = rv if isinstance(rv, int) else 0
        except click.ClickException as e:
            e.show()
            code = 1
        except click.Abort:
            console.print("\n[yellow]Aborted[/yellow]")
            code = 1
        except ConfigurationError as e:
            display_error(str(e), "Run 'crosscam validate' to list every problem")
            code = 1
        except CrossCamError as e:
            display_error(str(e))
            code = 1
        except Exception as e:
            logger.exception(f"Internal error: {e}")
            display_error(f"Internal error: {e}", "Please report this with the command you ran")
            code = 2
        if standalone_mode:
            sys.exit(code)
        return code


def scenario_options(func):
    """Options shared by every command that loads a scenario."""
    func = click.option(
        "--seed", type=click.IntRange(min=0), default=None, help="Override the scenario seed"
    )(func)
    func = click.option(
        "--preset", default=None, help="Bundled scenario to use (default: salsa-like)"
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        default=None,
        help="Scenario YAML file",
    )(func)
    return func


def out_option(default: str):
    return click.option(
        "--out",
        "out_dir",
        type=click.Path(file_okay=False, path_type=Path),
        default=Path(default),
        show_default=True,
        help="Output directory",
    )


def _load_config(
    config_path: Optional[Path], preset: Optional[str], seed: Optional[int]
) -> ScenarioConfig:
    config = load_config(config_path, preset)
    if seed is not None:
        config.set("scenario.seed", seed)
    return config


def _load_scenario(
    config_path: Optional[Path], preset: Optional[str], seed: Optional[int]
) -> Scenario:
    scenario = build_scenario(_load_config(config_path, preset, seed))
    logger.info(
        f"Scenario '{scenario.name}': {len(scenario.cameras)} cameras, "
        f"{scenario.n_frames} frames, seed {scenario.seed}"
    )
    return scenario


def _parse_subset_option(subset: Optional[str]) -> Optional[List[str]]:
    if subset is None:
        return None
    try:
        return parse_subset(subset)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--subset")


@click.group(cls=CrossCamGroup)
@click.option("--verbose", "-v", is_flag=True, help="Show debug output")
@click.option(
    "--log-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Write a detailed log file for this invocation into DIR",
)
@click.version_option(version=__version__, prog_name="crosscam")
@click.pass_context
def cli(ctx, verbose, log_dir):
    """crosscam - collaborative cross-camera video analytics simulator."""
    setup_logging("DEBUG" if verbose else "WARNING", enable_debug=verbose)
    if log_dir is not None and ctx.invoked_subcommand:
        run_id = ctx.invoked_subcommand
        log_file = setup_run_logger(run_id, log_dir)
        if log_file:
            console.print(f"[dim]Logging to: {log_file}[/dim]")
        ctx.call_on_close(lambda: close_run_logger(run_id, log_file))


main = cli


@cli.command()
@scenario_options
@out_option("crosscam_logs")
def generate(config_path, preset, seed, out_dir):
    """Write per-camera detection and ground-truth logs."""
    config = _load_config(config_path, preset, seed)
    scenario = build_scenario(config)
    with PerformanceTimer("generate", cameras=len(scenario.cameras)):
        scene = scenario.build_scene(scenario.seed)
        for cam in scenario.cameras:
            gt = render_ground_truth(scene, cam)
            detections = camera_detections(
                scene, replace(cam, adversarial=False, detections_file=None), gt, scenario.seed
            )
            save_log(gt, out_dir / f"{cam.camera_id}.gt.jsonl")
            save_log(detections, out_dir / f"{cam.camera_id}.detections.jsonl")
    # the effective scenario travels with its logs
    config.save(out_dir / "scenario.yml")
    display_success(f"Wrote {2 * len(scenario.cameras)} logs to {out_dir}")


@cli.command()
@scenario_options
@out_option("crosscam_results")
@click.option(
    "--mode",
    type=click.Choice(RUN_MODES),
    required=True,
    help="Experiment to run",
)
@click.option("--subset", default=None, help="Knowledge-sharing cameras, e.g. 3,4")
@click.option("--trace", is_flag=True, help="Also write the message trace")
@click.option(
    "--detections",
    "detections_dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Ingest <camera>.detections.jsonl logs from DIR instead of synthesizing",
)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
def run(config_path, preset, seed, out_dir, mode, subset, trace, detections_dir, workers):
    """Run one experiment mode and write its report."""
    subset_ids = _parse_subset_option(subset)
    if mode == KNOWLEDGE_SHARING and subset_ids is None:
        raise click.UsageError("--subset is required for --mode knowledge-sharing")
    if mode != KNOWLEDGE_SHARING and subset_ids is not None:
        raise click.UsageError(f"--subset only applies to --mode {KNOWLEDGE_SHARING}")

    scenario = _load_scenario(config_path, preset, seed)
    if detections_dir is not None:
        cameras = tuple(
            replace(c, detections_file=detections_dir / f"{c.camera_id}.detections.jsonl")
            for c in scenario.cameras
        )
        scenario = replace(scenario, cameras=cameras)

    run_mode = RunMode(mode, tuple(subset_ids) if subset_ids else None)
    with PerformanceTimer("run", mode=run_mode.label):
        report = run_scenario(scenario, run_mode, workers=workers, collect_trace=trace)

    paths = save_report(report, out_dir)
    if trace:
        save_trace(report.trace, out_dir / f"{report_stem(report.mode, report.subset)}.trace.jsonl")

    table = Table(title=f"{run_mode.label} (seed {report.seed})")
    table.add_column("Camera", style="cyan")
    table.add_column("Transmitted", justify="right")
    table.add_column("Fraction", justify="right")
    table.add_column("Trust", justify="right")
    for camera_id, fraction in report.per_camera_fraction.items():
        score = report.trust_snapshot.get(camera_id)
        table.add_row(
            camera_id,
            f"{report.frames_transmitted[camera_id]}/{report.frames_total}",
            f"{fraction:.3f}",
            "-" if score is None else f"{score:.2f}",
        )
    console.print(table)
    console.print(
        f"Accuracy [bold]{report.accuracy:.4f}[/bold], "
        f"mean transmitted fraction [bold]{report.mean_fraction:.4f}[/bold]"
    )
    for camera_id, frame_idx in report.trust_events.items():
        display_warning(f"Camera {camera_id} was gated by trust at frame {frame_idx}")
    if report.trust_events:
        settled = max(report.trust_events.values()) + 1
        if settled < report.frames_total:
            console.print(
                f"Accuracy from frame {settled} on: "
                f"[bold]{report.accuracy_between(settled):.4f}[/bold]"
            )
    display_success(f"Report written to {paths['report']}")


@cli.command()
@scenario_options
@out_option("crosscam_results")
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
def sweep(config_path, preset, seed, out_dir, seeds, workers):
    """Knowledge-sharing accuracy as cameras join in accretion order."""
    scenario = _load_scenario(config_path, preset, seed)
    with PerformanceTimer("sweep", seeds=seeds, workers=workers):
        rows = sweep_knowledge_sharing(scenario, seeds, workers, show_progress=True)

    path = out_dir / "sweep.csv"
    save_sweep(rows, path)

    table = Table(title=f"Knowledge-sharing sweep over {seeds} seed(s)")
    table.add_column("Cameras", justify="right", style="cyan")
    table.add_column("Mean accuracy", justify="right")
    table.add_column("Std dev", justify="right")
    table.add_column("Mean fraction", justify="right")
    for row in rows:
        table.add_row(
            str(row.subset_size),
            f"{row.mean_accuracy:.4f}",
            f"{row.stddev:.4f}",
            f"{row.mean_fraction:.4f}",
        )
    console.print(table)
    display_success(f"Sweep written to {path}")


@cli.command()
@scenario_options
@out_option("crosscam_results")
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--subset", default=None, help="Knowledge-sharing cameras (default: all)")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
def compare(config_path, preset, seed, out_dir, seeds, subset, workers):
    """Compare isolated, collaborative and knowledge-sharing runs."""
    subset_ids = _parse_subset_option(subset)
    scenario = _load_scenario(config_path, preset, seed)
    with PerformanceTimer("compare", seeds=seeds, workers=workers):
        rows = compare_modes(scenario, seeds, subset_ids, workers, show_progress=True)

    path = out_dir / "compare.csv"
    save_comparison(rows, path)

    table = Table(title=f"Mode comparison over {seeds} seed(s)")
    table.add_column("Mode", style="cyan")
    table.add_column("Mean accuracy", justify="right")
    table.add_column("Std dev", justify="right")
    table.add_column("Mean fraction", justify="right")
    for row in rows:
        table.add_row(
            row.mode, f"{row.mean_accuracy:.4f}", f"{row.stddev:.4f}", f"{row.mean_fraction:.4f}"
        )
    console.print(table)
    display_success(f"Comparison written to {path}")


@cli.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Scenario YAML file",
)
@click.option("--preset", default=None, help="Bundled scenario to check")
def validate(config_path, preset):
    """Check a scenario and show its cameras and clusters."""
    config = load_config(config_path, preset)
    validator = ScenarioValidator()
    if not validator.validate(config.to_dict()):
        console.print(validator.errors_table())
        display_error(f"{len(validator.errors)} problem(s) found")
        sys.exit(1)
    if validator.warnings:
        console.print(validator.errors_table())

    scenario = build_scenario(config)
    params = scenario.params.topology
    if params.supreme_mode == VALIDATION_ACCURACY and params.supreme is None:
        display_info(
            "Supremes are chosen by calibration at run time; showing static scores instead"
        )
        params = replace(params, supreme_mode=STATIC_SCORE)
    clusters, _ = resolve_clusters(
        scenario.cameras,
        params.overlap_threshold,
        params.supreme_mode,
        beta=params.beta,
        supreme_override=params.supreme,
    )
    supremes = {c.supreme for c in clusters}

    table = Table(title=f"Scenario '{scenario.name}'")
    table.add_column("Camera", style="cyan")
    table.add_column("Image", justify="right")
    table.add_column("Quality", justify="right")
    table.add_column("Footprint m²", justify="right")
    table.add_column("Role")
    for cam in scenario.cameras:
        role = "supreme" if cam.camera_id in supremes else "collaborator"
        if cam.adversarial:
            role += " (adversarial)"
        table.add_row(
            cam.camera_id,
            f"{cam.image_w}x{cam.image_h}",
            f"{cam.quality:.2f}",
            f"{fov_footprint(cam).area:.1f}",
            role,
        )
    console.print(table)
    for cluster in clusters:
        display_info(f"Cluster {cluster.ordered_members()} led by camera {cluster.supreme}")
    display_success("Scenario is valid")


@cli.command()
def presets():
    """List bundled scenarios."""
    names = list_presets()
    if not names:
        display_warning("No presets are installed")
        return
    table = Table(title="Bundled presets")
    table.add_column("Name", style="cyan")
    table.add_column("Cameras", justify="right")
    table.add_column("Frames", justify="right")
    for name in names:
        config = ScenarioConfig(preset_path(name))
        table.add_row(
            name, str(len(config.get("cameras", []))), str(config.get("scenario.n_frames"))
        )
    console.print(table)


if __name__ == "__main__":
    main()
