"""Depth images (16-bit PGM + intrinsics sidecar), color images and ASCII PLY."""
import io
import logging
from pathlib import Path

import cv2
import numpy as np

from exceptions import DepthError
from models import CameraIntrinsics, ColorImage, DepthMap, PointCloud

logger = logging.getLogger(__name__)

UINT16_MAX = np.iinfo(np.uint16).max
HEIGHT_ZERO = 32768  # 16-bit code for a height of 0 m


def read_intrinsics(path):
    fields = Path(path).read_text().split()
    if len(fields) != 7:
        raise DepthError(f"{path}: expected 'fx fy cx cy width height max_depth'")
    try:
        fx, fy, cx, cy = (float(f) for f in fields[:4])
        width, height = int(fields[4]), int(fields[5])
        max_depth = float(fields[6])
    except ValueError as exc:
        raise DepthError(f"{path}: {exc}") from exc
    return CameraIntrinsics(fx, fy, cx, cy, width, height, max_depth)


def write_intrinsics(path, intr, float_format="%.9g"):
    values = [intr.fx, intr.fy, intr.cx, intr.cy]
    text = " ".join(float_format % v for v in values)
    text += f" {intr.width} {intr.height} " + float_format % intr.max_depth
    Path(path).write_text(text + "\n")


def read_depth_pgm(path, scale=0.001, max_depth=None):
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DepthError(f"cannot read depth image {path}")
    if raw.ndim != 2 or raw.dtype != np.uint16:
        raise DepthError(f"{path}: expected a single-channel 16-bit image")
    return DepthMap.from_array(raw.astype(np.float64) * scale, max_depth)


def write_depth_pgm(path, depth, scale=0.001):
    codes = np.clip(np.rint(depth.values / scale), 1, UINT16_MAX)
    codes = np.where(depth.valid, codes, 0).astype(np.uint16)
    if not cv2.imwrite(str(path), codes):
        raise DepthError(f"cannot write depth image {path}")


def write_height_pgm(path, heights):
    """Heights in millimetres offset by HEIGHT_ZERO; code 0 marks invalid pixels."""
    codes = np.clip(np.rint(heights.heights * 1000.0) + HEIGHT_ZERO, 1, UINT16_MAX)
    codes = np.where(heights.valid, codes, 0).astype(np.uint16)
    if not cv2.imwrite(str(path), codes):
        raise DepthError(f"cannot write height image {path}")


def read_color_image(path):
    bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if bgr is None:
        raise DepthError(f"cannot read color image {path}")
    return ColorImage(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))


def write_ply(path, cloud, float_format="%.9g"):
    header = ["ply", "format ascii 1.0", f"element vertex {len(cloud)}",
              "property double x", "property double y", "property double z"]
    if cloud.colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header.append("end_header")

    buf = io.StringIO()
    buf.write("\n".join(header) + "\n")
    if len(cloud):
        if cloud.colors is None:
            np.savetxt(buf, cloud.points, fmt=float_format)
        else:
            rows = np.column_stack([cloud.points, cloud.colors]).astype(object)
            np.savetxt(buf, rows, fmt=[float_format] * 3 + ["%d"] * 3)
    Path(path).write_text(buf.getvalue())
    logger.info("wrote %d points to %s", len(cloud), path)


def read_ply(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise DepthError(f"{path}: not a PLY file")
    count, props, body_start = 0, [], None
    for i, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise DepthError(f"{path}: only ASCII PLY is supported")
        if parts[:2] == ["element", "vertex"]:
            count = int(parts[2])
        elif parts[0] == "property":
            props.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if body_start is None:
        raise DepthError(f"{path}: missing end_header")

    if count == 0:
        return PointCloud.empty()
    data = np.loadtxt(lines[body_start:body_start + count], ndmin=2)
    if data.shape != (count, len(props)):
        raise DepthError(f"{path}: expected {count} vertices with {len(props)} properties")
    cols = {name: data[:, i] for i, name in enumerate(props)}
    points = np.column_stack([cols["x"], cols["y"], cols["z"]])
    colors = None
    if {"red", "green", "blue"} <= cols.keys():
        colors = np.column_stack([cols["red"], cols["green"], cols["blue"]])
    return PointCloud(points, colors)
