"""Netpbm (PGM/PPM) encoding and small raster helpers for diagnostics.

Netpbm is written by hand so that output bytes are fully determined by the
array contents. PNG goes through Pillow.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError

_NETPBM_HEADER = re.compile(rb"\A(P[56])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s")


def encode_pgm(image: np.ndarray) -> bytes:
    """Binary PGM; uint8 images get maxval 255, anything else 16-bit big-endian."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got {image.shape}")
    if image.dtype == np.uint8:
        maxval, payload = 255, image.tobytes()
    else:
        if image.min(initial=0) < 0 or image.max(initial=0) > 65535:
            raise ValueError("16-bit PGM values must lie in [0, 65535]")
        maxval, payload = 65535, image.astype(">u2").tobytes()
    h, w = image.shape
    return b"P5\n%d %d\n%d\n" % (w, h, maxval) + payload


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"PPM needs an (H, W, 3) array, got {rgb.shape}")
    h, w = rgb.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def decode_netpbm(data: bytes) -> np.ndarray:
    """Decode binary PGM (P5) or PPM (P6), 8- or 16-bit."""
    m = _NETPBM_HEADER.match(data)
    if m is None:
        raise ParseError("not a binary PGM/PPM stream")
    kind, w, h, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if w <= 0 or h <= 0 or not 0 < maxval <= 65535:
        raise ParseError(f"bad netpbm header {w}x{h} maxval {maxval}")
    channels = 3 if kind == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    count = w * h * channels
    payload = data[m.end():]
    if len(payload) < count * dtype.itemsize:
        raise ParseError("netpbm payload truncated")
    arr = np.frombuffer(payload, dtype=dtype, count=count)
    arr = arr.astype(np.uint16 if maxval > 255 else np.uint8)
    return arr.reshape(h, w, 3) if channels == 3 else arr.reshape(h, w)


def save_image(path, image: np.ndarray) -> None:
    """Write by extension: ``.pgm``/``.ppm`` via :func:`encode_pgm`/:func:`encode_ppm`, else Pillow."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        path.write_bytes(encode_pgm(image))
    elif suffix == ".ppm":
        path.write_bytes(encode_ppm(image))
    else:
        Image.fromarray(np.asarray(image)).save(path)


def load_image(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".ppm"):
        return decode_netpbm(path.read_bytes())
    with Image.open(path) as im:
        return np.array(im)


def load_mask(path) -> np.ndarray:
    """Binary mask from any supported image; nonzero in any channel means True."""
    img = load_image(path)
    return img.any(axis=-1) if img.ndim == 3 else img != 0


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def probability_to_gray(p: np.ndarray) -> np.ndarray:
    return np.round(np.clip(p, 0.0, 1.0) * 255).astype(np.uint8)


def jet(p: np.ndarray) -> np.ndarray:
    """Jet colormap for values in [0, 1]; returns uint8 RGB."""
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, 1.0)
    r = np.clip(1.5 - np.abs(4 * p - 3), 0, 1)
    g = np.clip(1.5 - np.abs(4 * p - 2), 0, 1)
    b = np.clip(1.5 - np.abs(4 * p - 1), 0, 1)
    return np.round(np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def label_colors(labels: np.ndarray) -> np.ndarray:
    """Deterministic pseudo-random color per integer label."""
    labels = np.asarray(labels, dtype=np.uint64)
    h = (labels * np.uint64(2654435761)) & np.uint64(0xFFFFFF)
    rgb = np.stack([(h >> np.uint64(16)) & np.uint64(255), (h >> np.uint64(8)) & np.uint64(255),
                    h & np.uint64(255)], axis=-1)
    return rgb.astype(np.uint8)


def overlay(base_rgb: np.ndarray, mask: np.ndarray, color=(255, 0, 0), alpha=0.5) -> np.ndarray:
    out = np.asarray(base_rgb, dtype=np.float64).copy()
    m = np.asarray(mask, dtype=bool)
    out[m] = (1 - alpha) * out[m] + alpha * np.asarray(color, dtype=np.float64)
    return np.round(out).astype(np.uint8)


def draw_cross(rgb: np.ndarray, x: float, y: float, size=6, color=(255, 0, 0), thickness=1):
    """Draw a cross in place at (x, y); silently clipped at the borders."""
    h, w = rgb.shape[:2]
    xi, yi = int(round(x)), int(round(y))
    for d in range(-size, size + 1):
        for t in range(-thickness, thickness + 1):
            for cx, cy in ((xi + d, yi + d + t), (xi + d, yi - d + t)):
                if 0 <= cx < w and 0 <= cy < h:
                    rgb[cy, cx] = color
    return rgb
