import math

import click
import yaml
from flask import Blueprint, current_app
from scipy.spatial.transform import Rotation

from decorators import handles_errors, output_path, scenario_options, writes_to_out_dir
from depth.io import read_ply, write_ply
from exceptions import ConfigError
from geometry.transforms import rotation_angle
from mapping.icp import icp_register
from models import IcpParams, RigidTransform3
from simulation.config import load_scenario

mapping_bp = Blueprint("mapping", __name__, cli_group=None)


def icp_params_from_config(cfg):
    return IcpParams(
        max_iterations=cfg["ICP_MAX_ITERATIONS"],
        max_correspondence_m=cfg["ICP_MAX_CORRESPONDENCE_M"],
        convergence_eps=cfg["ICP_CONVERGENCE_EPS"],
        min_correspondences=cfg["ICP_MIN_CORRESPONDENCES"],
    )


def parse_initial(text):
    """'x,y,z,roll,pitch,yaw' (metres, degrees) -> RigidTransform3."""
    if not text:
        return RigidTransform3.identity()
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--initial: cannot parse {text!r}") from None
    if len(values) != 6:
        raise ConfigError("--initial expects x,y,z,roll,pitch,yaw")
    rotation = Rotation.from_euler("xyz", values[3:], degrees=True).as_matrix()
    return RigidTransform3(rotation, values[:3])


@mapping_bp.cli.command("register")
@click.argument("source_ply", type=click.Path(exists=True, dir_okay=False))
@click.argument("target_ply", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--initial", default=None, metavar="X,Y,Z,ROLL,PITCH,YAW",
              help="Initial source-to-target transform (metres, degrees)")
@scenario_options
@handles_errors
@writes_to_out_dir
def register(source_ply, target_ply, out_dir, initial, config_path, overrides):
    """ICP-align SOURCE onto TARGET; writes aligned.ply and registration.yaml.

    ICP parameters come from the scenario's icp section when --config or --set
    is given, otherwise from the POG_ICP_* settings.
    """
    cfg = current_app.config
    fmt = cfg["FLOAT_FORMAT"]
    if config_path or overrides:
        params = load_scenario(config_path or cfg["SCENARIO_PATH"], overrides).icp
    else:
        params = icp_params_from_config(cfg)

    source, target = read_ply(source_ply), read_ply(target_ply)
    result = icp_register(source, target, parse_initial(initial), params)
    write_ply(output_path(out_dir, "aligned.ply"), source.transformed(result.transform), fmt)

    t = result.transform
    report = {
        "rotation": [[float(fmt % v) for v in row] for row in t.rotation],
        "translation": [float(fmt % v) for v in t.translation],
        "rotation_deg": float(fmt % math.degrees(rotation_angle(t.rotation))),
        "rmse": float(fmt % result.rmse),
        "inlier_rmse": float(fmt % result.inlier_rmse),
        "iterations": result.iterations,
        "converged": result.converged,
        "correspondences": result.correspondences,
    }
    with open(output_path(out_dir, "registration.yaml"), "w") as fh:
        yaml.safe_dump(report, fh, sort_keys=True)
    click.echo(yaml.safe_dump(report, sort_keys=True), nl=False)
    current_app.logger.info("registered %s onto %s in %d iterations", source_ply, target_ply,
                            result.iterations)
