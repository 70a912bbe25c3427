"""Pixel-level thresholding and promotion of panoptic instances to moving objects."""

import numpy as np

from .errors import DimensionMismatchError
from .segmentation import PanopticMap

DEFAULT_TAU_PIXEL = 0.25  # both prior and likelihood at least 0.5
DEFAULT_TAU_OBJ = 0.01


def pixel_mask(posterior, tau_pixel: float = DEFAULT_TAU_PIXEL) -> np.ndarray:
    if not 0.0 < tau_pixel < 1.0:
        raise ValueError(f"tau_pixel must be in (0, 1), got {tau_pixel}")
    return np.asarray(posterior) >= tau_pixel


def _instance_fractions(pixels: np.ndarray, seg: PanopticMap):
    ids, inverse, counts = np.unique(seg.instance_id.ravel(), return_inverse=True,
                                     return_counts=True)
    moving = np.bincount(inverse, weights=pixels.ravel(), minlength=len(ids))
    return ids, inverse, moving / counts


def instance_moving_fractions(pixels, seg: PanopticMap) -> dict[int, float]:
    """Fraction of moving pixels for every instance id > 0."""
    ids, _, frac = _instance_fractions(np.asarray(pixels, dtype=bool), seg)
    return {int(i): float(f) for i, f in zip(ids, frac) if i > 0}


def object_mask(pixels, seg: PanopticMap, tau_obj: float = DEFAULT_TAU_OBJ) -> np.ndarray:
    """Whole instances become moving when their moving fraction exceeds ``tau_obj``.

    Instances at or under the threshold are cleared entirely. Uninstanced
    pixels (instance id 0) keep their pixel-level value.
    """
    pixels = np.asarray(pixels, dtype=bool)
    if pixels.shape != seg.shape:
        raise DimensionMismatchError(f"pixel mask {pixels.shape} vs label map {seg.shape}")
    _, inverse, frac = _instance_fractions(pixels, seg)
    out = (frac > tau_obj)[inverse].reshape(pixels.shape)
    stuff = seg.instance_id == 0
    out[stuff] = pixels[stuff]
    return out
