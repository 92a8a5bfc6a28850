import click
from flask import Blueprint, current_app

from decorators import handles_errors, output_path, scenario_options, writes_to_out_dir
from localization.ekf import initial_state
from localization.fusion import DEFAULT_PRIOR_VARIANCES, Localizer, sort_events
from localization.io import read_beacons, read_observations, write_estimates
from models import Pose2
from simulation.config import load_scenario

localization_bp = Blueprint("localization", __name__, cli_group=None)


@localization_bp.cli.command("fuse")
@click.argument("observations_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("beacons_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@scenario_options
@handles_errors
@writes_to_out_dir
def fuse(observations_csv, beacons_csv, out_dir, config_path, overrides):
    """Replay an observation log through the EKF and write estimates.csv.

    The scenario supplies the filter noise and the receiver height.
    """
    cfg = current_app.config
    scenario = load_scenario(config_path or cfg["SCENARIO_PATH"], overrides)

    events = sort_events(read_observations(observations_csv))
    localizer = Localizer(
        read_beacons(beacons_csv),
        scenario.ekf,
        scenario.receiver_height,
        initial_state(Pose2(), DEFAULT_PRIOR_VARIANCES, events[0].timestamp if events else 0.0),
    )
    records = localizer.run(events)

    write_estimates(output_path(out_dir, "estimates.csv"), records, cfg["FLOAT_FORMAT"])
    current_app.logger.info(
        "fused %d events into %d estimates (gated rssi=%d bearing=%d)",
        len(events), len(records), localizer.gated["rssi"], localizer.gated["bearing"],
    )
