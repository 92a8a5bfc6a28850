import os

BASE_DIR = os.path.abspath(os.path.dirname(__file__))


def _env(name, default, cast=str):
    value = os.environ.get(f"POG_{name}")
    return default if value is None else cast(value)


class Config:
    LOG_LEVEL = _env("LOG_LEVEL", "INFO")
    SCENARIO_PATH = _env("SCENARIO_PATH", os.path.join(BASE_DIR, "scenarios", "default.yaml"))

    # every numeric output goes through this format
    FLOAT_FORMAT = "%.9g"

    DEPTH_SCALE_M = _env("DEPTH_SCALE_M", 0.001, float)

    RANSAC_ITERATIONS = _env("RANSAC_ITERATIONS", 200, int)
    RANSAC_INLIER_THRESHOLD_M = _env("RANSAC_INLIER_THRESHOLD_M", 0.02, float)
    RANSAC_BOTTOM_FRACTION = _env("RANSAC_BOTTOM_FRACTION", 1.0 / 3.0, float)
    RANSAC_MIN_INLIERS = _env("RANSAC_MIN_INLIERS", 50, int)
    RANSAC_SEED = _env("RANSAC_SEED", 0, int)

    ICP_MAX_ITERATIONS = _env("ICP_MAX_ITERATIONS", 50, int)
    ICP_MAX_CORRESPONDENCE_M = _env("ICP_MAX_CORRESPONDENCE_M", 0.5, float)
    ICP_CONVERGENCE_EPS = _env("ICP_CONVERGENCE_EPS", 1e-4, float)
    ICP_MIN_CORRESPONDENCES = _env("ICP_MIN_CORRESPONDENCES", 10, int)


class TestingConfig(Config):
    TESTING = True
    LOG_LEVEL = "DEBUG"
