"""Depth quality metrics used to score a depth provider against ground truth."""
import numpy as np
from scipy.signal import convolve2d

from exceptions import DepthError


def _joint_valid(pred, gt):
    if pred.values.shape != gt.values.shape:
        raise DepthError(f"depth maps differ in size: {pred.values.shape} vs {gt.values.shape}")
    return pred.valid & gt.valid


def depth_l2(pred, gt):
    joint = _joint_valid(pred, gt)
    if not joint.any():
        raise DepthError("no jointly valid pixels")
    diff = pred.values[joint] - gt.values[joint]
    return float(np.sqrt(np.mean(diff ** 2)))


def grad_loss(pred, gt):
    """Mean norm of the forward-difference gradient error.

    A pixel takes part only if it and its right and lower neighbours are
    valid in both maps.
    """
    joint = _joint_valid(pred, gt)
    usable = joint[:-1, :-1] & joint[:-1, 1:] & joint[1:, :-1]
    if not usable.any():
        raise DepthError("no jointly valid interior pixels")

    def gradients(values):
        gx = values[:-1, 1:] - values[:-1, :-1]
        gy = values[1:, :-1] - values[:-1, :-1]
        return gx, gy

    gx_p, gy_p = gradients(pred.values)
    gx_g, gy_g = gradients(gt.values)
    err = np.sqrt((gx_p - gx_g) ** 2 + (gy_p - gy_g) ** 2)
    return float(np.mean(err[usable]))


def gaussian_window(size, sigma):
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(pred, gt, params):
    """Mean local SSIM over Gaussian windows fully inside the jointly valid region."""
    joint = _joint_valid(pred, gt)
    window = params.window
    if window % 2 == 0 or window > min(joint.shape):
        raise DepthError(f"SSIM window must be odd and fit the image, got {window}")

    kernel = gaussian_window(window, params.sigma)
    full = convolve2d(joint.astype(np.float64), np.ones((window, window)), mode="valid")
    usable = full > window * window - 0.5
    if not usable.any():
        raise DepthError("no SSIM window is fully valid")

    x, y = pred.values, gt.values

    def blur(img):
        return convolve2d(img, kernel, mode="valid")

    mu_x, mu_y = blur(x), blur(y)
    sxx = blur(x * x) - mu_x * mu_x
    syy = blur(y * y) - mu_y * mu_y
    sxy = blur(x * y) - mu_x * mu_y

    c1 = (0.01 * params.dynamic_range) ** 2
    c2 = (0.03 * params.dynamic_range) ** 2
    local = ((2 * mu_x * mu_y + c1) * (2 * sxy + c2)) / (
        (mu_x ** 2 + mu_y ** 2 + c1) * (sxx + syy + c2)
    )
    return float(np.clip(np.mean(local[usable]), -1.0, 1.0))


def combined_loss(pred, gt, weights, ssim_params):
    """Weighted sum of depth_l2, grad_loss and the SSIM dissimilarity (1 - ssim) / 2."""
    return (
        weights.w_depth * depth_l2(pred, gt)
        + weights.w_grad * grad_loss(pred, gt)
        + weights.w_ssim * (1.0 - ssim(pred, gt, ssim_params)) / 2.0
    )


def threshold_accuracy(pred, gt, threshold=1.25):
    """Fraction of jointly valid pixels with max(pred/gt, gt/pred) < threshold."""
    if not threshold > 1:
        raise DepthError("accuracy threshold must exceed 1")
    joint = _joint_valid(pred, gt)
    if not joint.any():
        raise DepthError("no jointly valid pixels")
    p, g = pred.values[joint], gt.values[joint]
    ratio = np.maximum(p / g, g / p)
    return float(np.mean(ratio < threshold))
