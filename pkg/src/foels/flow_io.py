"""Dense optical flow fields and the Middlebury ``.flo`` container."""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from typing import BinaryIO, Union

import numpy as np

from .errors import BadDimsError, BadMagicError, DimensionMismatchError, TruncatedError

FLO_MAGIC = 202021.25
UNKNOWN_FLOW_THRESHOLD = 1e9
UNKNOWN_FLOW_VALUE = 1e10
MAX_DIM = 32768

_HEADER = np.dtype([("magic", "<f4"), ("width", "<i4"), ("height", "<i4")])


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement ``(u, v)`` in pixels/frame, arrays of shape (height, width).

    ``valid`` is False where flow is unknown (sky, estimator failure). Invalid
    pixels carry ``u = v = 0`` once they pass through :meth:`with_invalid` or
    :func:`read_flo`; only valid pixels are required to be finite.
    """

    u: np.ndarray
    v: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u)
        v = np.asarray(self.v)
        valid = np.asarray(self.valid, dtype=bool)
        if u.ndim != 2 or u.size == 0:
            raise BadDimsError(f"flow must be a non-empty 2-D array, got shape {u.shape}")
        if v.shape != u.shape or valid.shape != u.shape:
            raise DimensionMismatchError(
                f"u {u.shape}, v {v.shape} and valid {valid.shape} must share a shape"
            )
        if not (np.isfinite(u[valid]).all() and np.isfinite(v[valid]).all()):
            raise ValueError("valid pixels must have finite flow")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_array(cls, flow, valid=None) -> "FlowField":
        """Build from an (H, W, 2) array; all pixels valid unless ``valid`` is given."""
        flow = np.asarray(flow)
        if flow.ndim != 3 or flow.shape[2] != 2:
            raise BadDimsError(f"expected an (H, W, 2) array, got {flow.shape}")
        if valid is None:
            valid = np.ones(flow.shape[:2], dtype=bool)
        return cls(flow[..., 0], flow[..., 1], valid)

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    def as_array(self) -> np.ndarray:
        return np.stack([self.u, self.v], axis=-1).astype(np.float64)

    def magnitude(self) -> np.ndarray:
        """Flow length per pixel (float64); 0 on invalid pixels."""
        mag = np.hypot(self.u.astype(np.float64), self.v.astype(np.float64))
        return np.where(self.valid, mag, 0.0)

    def with_invalid(self, mask) -> "FlowField":
        """Return a copy with ``mask`` pixels marked invalid and zeroed."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise DimensionMismatchError(f"mask {mask.shape} vs flow {self.shape}")
        valid = self.valid & ~mask
        return FlowField(np.where(valid, self.u, 0).astype(self.u.dtype),
                         np.where(valid, self.v, 0).astype(self.v.dtype), valid)

    def equal_on_valid(self, other: "FlowField") -> bool:
        """Bit-exact comparison of validity and of float32 flow on valid pixels."""
        if self.shape != other.shape or not np.array_equal(self.valid, other.valid):
            return False
        m = self.valid
        a = np.stack([self.u[m], self.v[m]]).astype(np.float32)
        b = np.stack([other.u[m], other.v[m]]).astype(np.float32)
        return a.tobytes() == b.tobytes()


def _as_bytes(data) -> bytes:
    if isinstance(data, (bytes, bytearray, memoryview)):
        return bytes(data)
    return data.read()


def read_flo(data: Union[bytes, BinaryIO]) -> FlowField:
    """Decode a little-endian Middlebury ``.flo`` stream.

    Pixels where either component exceeds 1e9 in magnitude (or is NaN) are
    marked invalid and zeroed, following the Middlebury unknown-flow rule.
    """
    buf = _as_bytes(data)
    if len(buf) < 4:
        raise TruncatedError("stream shorter than the 4-byte magic")
    magic = np.frombuffer(buf, dtype="<f4", count=1)[0]
    if magic != np.float32(FLO_MAGIC):
        raise BadMagicError(f"bad .flo magic {magic!r}, expected {FLO_MAGIC}")
    if len(buf) < _HEADER.itemsize:
        raise TruncatedError("stream ends inside the .flo header")
    header = np.frombuffer(buf, dtype=_HEADER, count=1)[0]
    w, h = int(header["width"]), int(header["height"])
    if not (0 < w <= MAX_DIM and 0 < h <= MAX_DIM):
        raise BadDimsError(f"invalid .flo dimensions {w}x{h}")
    n = 2 * w * h
    if len(buf) < _HEADER.itemsize + 4 * n:
        raise TruncatedError(f"payload holds {(len(buf) - _HEADER.itemsize) // 4} of {n} floats")
    flow = np.frombuffer(buf, dtype="<f4", count=n, offset=_HEADER.itemsize)
    flow = flow.astype(np.float32).reshape(h, w, 2)
    u, v = flow[..., 0], flow[..., 1]
    with np.errstate(invalid="ignore"):
        known = (np.abs(u) <= UNKNOWN_FLOW_THRESHOLD) & (np.abs(v) <= UNKNOWN_FLOW_THRESHOLD)
    return FlowField(np.where(known, u, 0).astype(np.float32),
                     np.where(known, v, 0).astype(np.float32), known)


def write_flo(field: FlowField) -> bytes:
    """Encode ``field`` as a Middlebury ``.flo`` byte string; invalid pixels become 1e10."""
    header = np.array([(FLO_MAGIC, field.width, field.height)], dtype=_HEADER)
    data = np.empty((field.height, field.width, 2), dtype="<f4")
    data[..., 0] = np.where(field.valid, field.u, UNKNOWN_FLOW_VALUE)
    data[..., 1] = np.where(field.valid, field.v, UNKNOWN_FLOW_VALUE)
    return header.tobytes() + data.tobytes()


def load_flo(path: Union[str, PathLike]) -> FlowField:
    with open(path, "rb") as f:
        return read_flo(f)


def save_flo(path: Union[str, PathLike], field: FlowField) -> None:
    with open(path, "wb") as f:
        f.write(write_flo(field))


def hsv_to_rgb(h, s, v) -> np.ndarray:
    """Vectorised HSV to RGB, all channels in [0, 1]; hue in turns."""
    h = np.mod(np.asarray(h, dtype=np.float64), 1.0) * 6.0
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    p = v * (1 - s)
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def flow_to_color(field: FlowField, max_magnitude: float | None = None) -> np.ndarray:
    """Render flow as an 8-bit RGB image with direction as hue.

    Saturation is the magnitude normalised by the 99th percentile of valid
    magnitudes (or ``max_magnitude``), so zero flow is white. Invalid pixels
    are black.
    """
    mag = field.magnitude()
    if max_magnitude is None:
        valid_mag = mag[field.valid]
        max_magnitude = float(np.percentile(valid_mag, 99)) if valid_mag.size else 0.0
    hue = np.arctan2(field.v.astype(np.float64), field.u.astype(np.float64)) / (2 * np.pi)
    sat = np.clip(mag / max_magnitude, 0.0, 1.0) if max_magnitude > 0 else np.zeros_like(mag)
    rgb = hsv_to_rgb(hue, sat, np.ones_like(mag))
    rgb[~field.valid] = 0.0
    return np.round(rgb * 255).astype(np.uint8)

