import click
import yaml
from flask import Blueprint, current_app

from decorators import handles_errors, output_path, scenario_options, writes_to_out_dir
from depth.io import read_ply
from exceptions import ConfigError
from localization.io import write_beacons
from mapping.evaluation import map_error
from mapping.global_map import GlobalMap
from simulation.config import load_scenario
from simulation.evaluation import pose_rmse
from simulation.io import export_log, read_pose_track, rounded
from simulation.scenario import run_scenario

simulation_bp = Blueprint("simulation", __name__, cli_group=None)

BEACONS_FILE = "beacons.csv"


@simulation_bp.cli.command("simulate")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed")
@scenario_options
@click.option("--beacons", "export_beacons", is_flag=True,
              help="Also write beacons.csv for offline replay with `fuse`")
@handles_errors
@writes_to_out_dir
def simulate(config_path, out_dir, seed, overrides, export_beacons):
    """Run a closed-loop scenario and export trajectory, observations, map and metrics."""
    cfg = current_app.config
    fmt = cfg["FLOAT_FORMAT"]
    if seed is not None:
        # applied as an override so seeded beacon placement follows it too
        overrides = (*overrides, f"seed={seed}")
    scenario = load_scenario(config_path or cfg["SCENARIO_PATH"], overrides)

    log = run_scenario(scenario)
    written = export_log(log, scenario, lambda name: output_path(out_dir, name), fmt)
    if export_beacons:
        write_beacons(output_path(out_dir, BEACONS_FILE), scenario.world.beacons, fmt)
        written.append(BEACONS_FILE)

    fused, dr = log.metrics["fusion"], log.metrics["dead_reckoning"]
    click.echo(f"fused rmse_xy {fmt % fused['rmse_xy_m']} m, "
               f"dead reckoning rmse_xy {fmt % dr['rmse_xy_m']} m, "
               f"{len(log.global_map)} voxels")
    current_app.logger.info("simulate wrote %d files to %s", len(written), out_dir)


@simulation_bp.cli.command("metrics")
@click.option("--estimated", type=click.Path(exists=True, dir_okay=False),
              help="Estimated poses (estimates.csv or trajectory.csv)")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False),
              help="Ground-truth poses (trajectory.csv or any x,y,theta CSV)")
@click.option("--map", "map_ply", type=click.Path(exists=True, dir_okay=False))
@click.option("--world", "--config", "world_config", type=click.Path(exists=True, dir_okay=False),
              help="Scenario YAML describing the world the map was built in")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Also write the report to metrics.yaml (metrics.json with --json)")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of YAML")
@handles_errors
@writes_to_out_dir
def metrics(estimated, truth, map_ply, world_config, overrides, out_dir, as_json):
    """Score a trajectory against ground truth and/or a map against its world."""
    if bool(estimated) != bool(truth) or bool(map_ply) != bool(world_config):
        raise ConfigError("--estimated needs --truth and --map needs --world")
    if not (estimated or map_ply):
        raise ConfigError("nothing to score: give --estimated/--truth or --map/--world")

    report = {}
    if estimated:
        report["pose"] = pose_rmse(read_pose_track(estimated, "est_"),
                                   read_pose_track(truth, "truth_"))
    if map_ply:
        scenario = load_scenario(world_config, overrides)
        global_map = GlobalMap(scenario.mapping.voxel_size).insert_points(read_ply(map_ply).points)
        report["map"] = {"voxels": len(global_map), **map_error(global_map, scenario.world)}

    report = rounded(report)
    if as_json:
        name, text = "metrics.json", current_app.json.dumps(report) + "\n"
    else:
        name, text = "metrics.yaml", yaml.safe_dump(report, sort_keys=True)
    if out_dir is not None:
        with open(output_path(out_dir, name), "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)
