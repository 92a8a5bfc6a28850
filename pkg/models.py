import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from exceptions import ConfigError, DepthError, GeometryError, LocalizationError, MappingError
from geometry.angles import wrap_angle


def _frozen(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# -------------------------
# core geometry
# -------------------------

@dataclass(frozen=True)
class Pose2:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @classmethod
    def identity(cls):
        return cls(0.0, 0.0, 0.0)

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True, eq=False)
class RigidTransform3:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = _frozen(self.rotation)
        translation = _frozen(self.translation)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise GeometryError("rigid transform needs a 3x3 rotation and a 3-vector")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise GeometryError("rigid transform has non-finite entries")
        if not np.allclose(rotation.T @ rotation, np.eye(3), rtol=0.0, atol=1e-9):
            raise GeometryError("rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > 1e-9:
            raise GeometryError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    def as_matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points):
        """Map a 3-vector or an (N, 3) array through the transform."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def inverse(self):
        rt = self.rotation.T
        return RigidTransform3(rt, -rt @ self.translation)

    def __matmul__(self, other):
        return RigidTransform3(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    max_depth: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise GeometryError("principal point outside the image")
        if not self.max_depth > 0:
            raise GeometryError("max_depth must be positive")

    @property
    def shape(self):
        return (self.height, self.width)


@dataclass(frozen=True, eq=False)
class Covariance3:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise GeometryError("covariance must be a finite 3x3 matrix")
        if np.max(np.abs(m - m.T)) > 1e-12:
            raise GeometryError("covariance is not symmetric")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.min(np.linalg.eigvalsh(m)) < -1e-12 * scale:
            raise GeometryError("covariance is not positive semi-definite")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def trace(self):
        return float(np.trace(self.matrix))


# -------------------------
# depth pipeline
# -------------------------

@dataclass(frozen=True, eq=False)
class DepthMap:
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        if values.ndim != 2 or values.shape != valid.shape:
            raise DepthError("depth values and mask must be 2D arrays of the same shape")
        good = valid & np.isfinite(values)
        if np.any(values[good] <= 0) or np.any(valid & ~np.isfinite(values)):
            raise DepthError("valid depth pixels must be finite and positive")
        values[~valid] = 0.0
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_array(cls, values, max_depth=None):
        """Build a depth map marking non-finite, non-positive and too-far pixels invalid."""
        values = np.asarray(values, dtype=np.float64)
        valid = np.isfinite(values) & (values > 0)
        if max_depth is not None:
            valid &= values <= max_depth
        return cls(np.where(valid, values, 0.0), valid)

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    def check_intrinsics(self, intr):
        if (self.height, self.width) != intr.shape:
            raise DepthError(
                f"depth map is {self.width}x{self.height}, intrinsics expect {intr.width}x{intr.height}"
            )
        if np.any(self.values[self.valid] > intr.max_depth):
            raise DepthError("depth values exceed the camera max_depth")


@dataclass(frozen=True, eq=False)
class ColorImage:
    rgb: np.ndarray

    def __post_init__(self):
        rgb = _frozen(self.rgb, dtype=np.uint8)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise DepthError("color image must be HxWx3")
        object.__setattr__(self, "rgb", rgb)

    @property
    def width(self):
        return self.rgb.shape[1]

    @property
    def height(self):
        return self.rgb.shape[0]


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    colors: Optional[np.ndarray] = None
    # source pixel (u, v) of each point, when the cloud came from a depth map
    pixels: Optional[np.ndarray] = None

    def __post_init__(self):
        points = _frozen(np.reshape(self.points, (-1, 3)))
        if not np.all(np.isfinite(points)):
            raise DepthError("point cloud has non-finite coordinates")
        object.__setattr__(self, "points", points)
        if self.colors is not None:
            colors = _frozen(np.reshape(self.colors, (-1, 3)), dtype=np.uint8)
            if len(colors) != len(points):
                raise DepthError("colors and points differ in length")
            object.__setattr__(self, "colors", colors)
        if self.pixels is not None:
            pixels = _frozen(np.reshape(self.pixels, (-1, 2)), dtype=np.int64)
            if len(pixels) != len(points):
                raise DepthError("pixels and points differ in length")
            object.__setattr__(self, "pixels", pixels)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)))

    def __len__(self):
        return len(self.points)

    def transformed(self, transform):
        return PointCloud(transform.apply(self.points), self.colors, self.pixels)


@dataclass(frozen=True, eq=False)
class Plane:
    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = _frozen(self.normal)
        if normal.shape != (3,) or abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise DepthError("plane normal must be a unit 3-vector")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, points):
        return np.asarray(points, dtype=np.float64) @ self.normal + self.offset


@dataclass(frozen=True, eq=False)
class HeightMap:
    heights: np.ndarray
    valid: np.ndarray

    @property
    def width(self):
        return self.heights.shape[1]

    @property
    def height(self):
        return self.heights.shape[0]


@dataclass(frozen=True)
class LossWeights:
    w_depth: float = 0.1
    w_grad: float = 1.0
    w_ssim: float = 1.0

    def __post_init__(self):
        weights = (self.w_depth, self.w_grad, self.w_ssim)
        if not all(math.isfinite(w) and w >= 0 for w in weights):
            raise DepthError("loss weights must be finite and nonnegative")
        if not any(w > 0 for w in weights):
            raise DepthError("at least one loss weight must be positive")


@dataclass(frozen=True)
class SsimParams:
    dynamic_range: float
    window: int = 11
    sigma: float = 1.5


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 200
    inlier_threshold_m: float = 0.02
    bottom_fraction: float = 1.0 / 3.0
    min_inliers: int = 50


# -------------------------
# BLE localization
# -------------------------

@dataclass(frozen=True)
class PathLossParams:
    p0_dbm: float = -59.0
    n: float = 2.0
    d0: float = 1.0
    sigma_sh: float = 2.0

    def __post_init__(self):
        if not (self.n > 0 and self.d0 > 0 and self.sigma_sh >= 0):
            raise LocalizationError("path loss needs n > 0, d0 > 0 and sigma_sh >= 0")


@dataclass(frozen=True, eq=False)
class Beacon:
    id: str
    position: np.ndarray
    path_loss: PathLossParams = field(default_factory=PathLossParams)

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        position = _frozen(self.position)
        if position.shape != (3,):
            raise LocalizationError(f"beacon {self.id}: position must be a 3-vector")
        object.__setattr__(self, "position", position)


@dataclass(frozen=True)
class RssiObservation:
    beacon_id: str
    rssi: float
    timestamp: float


@dataclass(frozen=True)
class BearingObservation:
    beacon_id: str
    bearing: float
    timestamp: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "bearing", wrap_angle(self.bearing))
        if not self.sigma > 0:
            raise LocalizationError("bearing sigma must be positive")


@dataclass(frozen=True)
class OdometryDelta:
    d_rot1: float
    d_trans: float
    d_rot2: float
    timestamp: float

    def __post_init__(self):
        object.__setattr__(self, "d_rot1", wrap_angle(self.d_rot1))
        object.__setattr__(self, "d_rot2", wrap_angle(self.d_rot2))
        if not (math.isfinite(self.d_trans) and math.isfinite(self.timestamp)):
            raise LocalizationError("odometry delta must be finite")


@dataclass(frozen=True)
class PriorObservation:
    """Initial filter state as recorded at the head of an observation log."""

    pose: Pose2
    variances: Tuple[float, float, float]
    timestamp: float = 0.0


@dataclass(frozen=True)
class EkfState:
    mean: Pose2
    cov: Covariance3
    last_update: float = 0.0


@dataclass(frozen=True)
class EkfNoise:
    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    gate_chi2: float = 6.63

    def __post_init__(self):
        if min(self.alpha1, self.alpha2, self.alpha3, self.alpha4) < 0:
            raise LocalizationError("odometry alphas must be nonnegative")
        if not self.gate_chi2 > 0:
            raise LocalizationError("gate_chi2 must be positive")

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)


@dataclass(frozen=True)
class GridSpec:
    bounds: Tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    cell_m: float


# -------------------------
# mapping
# -------------------------

@dataclass(frozen=True, eq=False)
class Scan:
    cloud: PointCloud
    seed_pose: Pose2
    seed_cov: Covariance3
    timestamp: float


@dataclass(frozen=True)
class IcpParams:
    max_iterations: int = 50
    max_correspondence_m: float = 0.5
    convergence_eps: float = 1e-4
    min_correspondences: int = 10

    def __post_init__(self):
        if not (self.max_iterations > 0 and self.max_correspondence_m > 0
                and self.convergence_eps > 0 and self.min_correspondences > 0):
            raise MappingError("ICP parameters must be positive")


@dataclass(frozen=True, eq=False)
class IcpResult:
    transform: RigidTransform3
    rmse: float
    iterations: int
    converged: bool
    correspondences: int
    inlier_rmse: float = 0.0
    history: Tuple[float, ...] = ()


# -------------------------
# simulation
# -------------------------

@dataclass(frozen=True, eq=False)
class Box:
    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.min_corner), _frozen(self.max_corner)
        if lo.shape != (3,) or hi.shape != (3,) or not np.all(lo < hi):
            raise ConfigError(f"box corners must satisfy min < max per axis, got {lo} / {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)


@dataclass(frozen=True, eq=False)
class World:
    floor: Tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    boxes: Tuple[Box, ...] = ()
    beacons: Tuple[Beacon, ...] = ()

    def __post_init__(self):
        xmin, xmax, ymin, ymax = self.floor
        if not (xmin < xmax and ymin < ymax):
            raise ConfigError("floor extent must be a nonempty rectangle")
        seen = set()
        for b in self.beacons:
            if b.id in seen:
                raise ConfigError(f"duplicate beacon id: {b.id}")
            seen.add(b.id)
            bx, by = b.position[:2]
            if not (xmin <= bx <= xmax and ymin <= by <= ymax):
                raise ConfigError(f"beacon {b.id} lies outside the floor extent")
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "beacons", tuple(self.beacons))

    def beacon_map(self):
        return {b.id: b for b in self.beacons}


@dataclass(frozen=True)
class TrajectorySpec:
    waypoints: Tuple[Tuple[float, float], ...]
    speed: float
    turn_rate: float = math.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple((float(x), float(y)) for x, y in self.waypoints))
        if len(self.waypoints) < 2:
            raise ConfigError("trajectory needs at least 2 waypoints")
        if not self.speed > 0 or not self.turn_rate > 0:
            raise ConfigError("trajectory speed and turn_rate must be positive")


@dataclass(frozen=True)
class StampedPose:
    timestamp: float
    pose: Pose2


@dataclass(frozen=True)
class Rates:
    depth_hz: float = 9.0
    ble_hz: float = 10.0
    odom_hz: float = 20.0
    bearing_hz: float = 10.0

    def __post_init__(self):
        if min(self.depth_hz, self.ble_hz, self.odom_hz, self.bearing_hz) <= 0:
            raise ConfigError("rates must be positive")


@dataclass(frozen=True)
class NoiseConfig:
    alphas: Tuple[float, float, float, float] = (0.002, 0.002, 0.002, 0.002)
    depth_sigma_rel: float = 0.01
    depth_quantize_mm: bool = True
    bearing_sigma: float = 0.05
    bearings: bool = True


@dataclass(frozen=True)
class MappingConfig:
    voxel_size: float = 0.05
    truth_seeds: bool = False
    top_view: bool = False
    export_poses: bool = False


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    world: World
    trajectory: TrajectorySpec
    intrinsics: CameraIntrinsics
    mount: RigidTransform3
    rates: Rates = field(default_factory=Rates)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    ekf: EkfNoise = field(default_factory=EkfNoise)
    initial_sigma_xy: float = 0.5
    initial_sigma_theta: float = 0.1
    icp: IcpParams = field(default_factory=IcpParams)
    mapping: MappingConfig = field(default_factory=MappingConfig)
    receiver_height: float = 0.3
    seed: int = 0
    duration: float = 120.0
    retain_depth: bool = False


@dataclass(frozen=True, eq=False)
class DepthFrame:
    """A depth image scheduled on the scenario timeline."""

    timestamp: float
    truth_pose: Pose2


@dataclass(frozen=True)
class EstimateRecord:
    timestamp: float
    pose: Pose2
    cov_trace: float


@dataclass(frozen=True)
class RefinedPose:
    timestamp: float
    pose: Pose2
    converged: bool
    rmse: float


@dataclass
class SimLog:
    truth: list = field(default_factory=list)            # StampedPose
    estimates: list = field(default_factory=list)        # EstimateRecord
    dead_reckoning: list = field(default_factory=list)   # StampedPose
    observations: list = field(default_factory=list)     # prior / odometry / rssi / bearing
    depth_frames: list = field(default_factory=list)     # (timestamp, DepthMap)
    refined_poses: list = field(default_factory=list)    # RefinedPose
    gated: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    global_map: object = None
