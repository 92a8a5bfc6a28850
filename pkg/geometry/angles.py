import math

import numpy as np

from exceptions import GeometryError

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap an angle to (-pi, pi]."""
    a = float(a)
    if not math.isfinite(a):
        raise GeometryError(f"cannot wrap non-finite angle {a}")
    w = math.remainder(a, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def wrap_angles(a):
    """Vectorized wrap_angle for numpy arrays."""
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise GeometryError("cannot wrap non-finite angles")
    w = np.remainder(a + math.pi, TWO_PI) - math.pi
    return np.where(w <= -math.pi, w + TWO_PI, w)
