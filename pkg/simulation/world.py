"""Box-world depth rendering."""
import numpy as np

from models import DepthMap


def pixel_rays(intr):
    """Camera-frame ray through every pixel centre, scaled so z = 1, row-major (h*w, 3)."""
    v, u = np.mgrid[0:intr.height, 0:intr.width]
    return np.column_stack([
        ((u - intr.cx) / intr.fx).ravel(),
        ((v - intr.cy) / intr.fy).ravel(),
        np.ones(intr.width * intr.height),
    ])


def ray_box_entry(origin, directions, box):
    """Slab-method entry parameter per ray; inf where the ray misses or starts inside."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t1 = (box.min_corner - origin) * inv
        t2 = (box.max_corner - origin) * inv
        # NaN (0 * inf) only arises on a slab boundary; fmin/fmax drop it
        near = np.nanmax(np.fmin(t1, t2), axis=1)
        far = np.nanmin(np.fmax(t1, t2), axis=1)
    hit = (far >= near) & (near > 0)
    return np.where(hit, near, np.inf)


def ray_floor_entry(origin, directions, floor):
    xmin, xmax, ymin, ymax = floor
    dz = directions[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -origin[2] / dz
    hit = (dz != 0) & (t > 0)
    t = np.where(hit, t, np.inf)
    x = origin[0] + np.where(hit, t, 0.0) * directions[:, 0]
    y = origin[1] + np.where(hit, t, 0.0) * directions[:, 1]
    inside = hit & (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)
    return np.where(inside, t, np.inf)


def raycast_depth(world, sensor_pose, intr):
    """Render the camera-z depth of the nearest surface along every pixel ray.

    `sensor_pose` maps camera coordinates to the world. Because each ray has
    unit z in the camera frame, the ray parameter at the hit is the depth.
    """
    origin = sensor_pose.translation
    directions = pixel_rays(intr) @ sensor_pose.rotation.T

    t = ray_floor_entry(origin, directions, world.floor)
    for box in world.boxes:
        t = np.minimum(t, ray_box_entry(origin, directions, box))

    valid = np.isfinite(t) & (t <= intr.max_depth)
    shape = (intr.height, intr.width)
    return DepthMap(np.where(valid, t, 0.0).reshape(shape), valid.reshape(shape))
