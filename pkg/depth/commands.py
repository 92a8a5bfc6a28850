import click
import numpy as np
from flask import Blueprint, current_app

from decorators import handles_errors, output_path, scenario_options, writes_to_out_dir
from depth.io import read_color_image, read_depth_pgm, read_intrinsics, write_height_pgm, write_ply
from depth.pipeline import back_project, fit_floor_plane, height_map
from exceptions import DepthError
from models import RansacParams
from simulation.config import load_scenario

depth_bp = Blueprint("depth", __name__, cli_group=None)


def ransac_params_from_config(cfg):
    return RansacParams(
        iterations=cfg["RANSAC_ITERATIONS"],
        inlier_threshold_m=cfg["RANSAC_INLIER_THRESHOLD_M"],
        bottom_fraction=cfg["RANSAC_BOTTOM_FRACTION"],
        min_inliers=cfg["RANSAC_MIN_INLIERS"],
    )


@depth_bp.cli.command("depth2cloud")
@click.argument("depth_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--intrinsics", "intrinsics_path", type=click.Path(exists=True, dir_okay=False),
              help="Sidecar file: fx fy cx cy width height max_depth "
                   "(defaults to the scenario camera)")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--color", "color_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--heightmap", is_flag=True, help="Also fit the floor and write heightmap.pgm")
@click.option("--seed", type=int, default=None, help="RANSAC seed")
@scenario_options
@handles_errors
@writes_to_out_dir
def depth2cloud(depth_path, intrinsics_path, out_dir, color_path, heightmap, seed, config_path,
                overrides):
    """Convert a 16-bit depth image into cloud.ply (and optionally heightmap.pgm)."""
    cfg = current_app.config
    fmt = cfg["FLOAT_FORMAT"]

    if intrinsics_path:
        intr = read_intrinsics(intrinsics_path)
    else:
        intr = load_scenario(config_path or cfg["SCENARIO_PATH"], overrides).intrinsics
    depth = read_depth_pgm(depth_path, cfg["DEPTH_SCALE_M"], intr.max_depth)
    color = read_color_image(color_path) if color_path else None

    cloud = back_project(depth, intr, color)
    if not len(cloud):
        raise DepthError("empty cloud: the depth image has no valid pixels")
    write_ply(output_path(out_dir, "cloud.ply"), cloud, fmt)

    if heightmap:
        rng = np.random.default_rng(cfg["RANSAC_SEED"] if seed is None else seed)
        floor = fit_floor_plane(cloud, ransac_params_from_config(cfg), rng, image_height=intr.height)
        write_height_pgm(output_path(out_dir, "heightmap.pgm"), height_map(depth, intr, floor))
        normal = " ".join(fmt % v for v in floor.normal)
        click.echo(f"normal {normal} offset {fmt % floor.offset}")
