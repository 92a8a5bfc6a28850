import numpy as np

from exceptions import LocalizationError, UnknownBeaconError
from localization.path_loss import D_MIN


def grid_cell_centers(grid):
    """Cell-centre coordinates (xs, ys) of a GridSpec."""
    xmin, xmax, ymin, ymax = grid.bounds
    nx = max(int(np.floor((xmax - xmin) / grid.cell_m + 1e-9)), 1)
    ny = max(int(np.floor((ymax - ymin) / grid.cell_m + 1e-9)), 1)
    xs = xmin + (np.arange(nx) + 0.5) * grid.cell_m
    ys = ymin + (np.arange(ny) + 0.5) * grid.cell_m
    return xs, ys


def trilaterate_grid(observations, beacons, receiver_height, grid):
    """Exhaustive search for the cell centre minimising the summed squared dBm residual.

    Returns (position, residual). Ties resolve to the first cell in row-major (y, x) order.
    """
    distinct = {obs.beacon_id for obs in observations}
    if len(distinct) < 3:
        raise LocalizationError(f"trilateration needs 3 distinct beacons, got {len(distinct)}")
    for beacon_id in distinct:
        if beacon_id not in beacons:
            raise UnknownBeaconError(beacon_id)

    xs, ys = grid_cell_centers(grid)
    gx, gy = np.meshgrid(xs, ys)
    cost = np.zeros_like(gx)
    for obs in observations:
        beacon = beacons[obs.beacon_id]
        pl = beacon.path_loss
        bx, by, bz = beacon.position
        d = np.sqrt((gx - bx) ** 2 + (gy - by) ** 2 + (receiver_height - bz) ** 2)
        predicted = pl.p0_dbm - 10.0 * pl.n * np.log10(np.maximum(d, D_MIN) / pl.d0)
        cost += (obs.rssi - predicted) ** 2

    iy, ix = np.unravel_index(np.argmin(cost), cost.shape)
    return np.array([xs[ix], ys[iy]]), float(cost[iy, ix])
