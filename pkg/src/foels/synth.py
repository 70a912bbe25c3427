"""Closed-form synthetic frames: exact flow, labels, moving masks and the true FoE.

A pinhole camera looks at a background depth map (a fronto-parallel plane
or a depth ramp across the image) with rectangular billboard objects pasted
in front of it. Each pixel is back-projected at its depth, moved by the
inverse camera motion plus the object's own velocity, and re-projected with
the (optionally zoomed) focal length. Rotation enters as the first-order
term ``P' = P - omega x P``.

Scene files are line-oriented ``keyword values...`` text::

    name      forward_car
    size      160 120                  # width height
    intrinsics 100 100 80 60           # fx fy cx cy
    zoom      1.0
    translation 0 0 0.5                # tx ty tz, scene units/frame
    rotation  0 0 0                    # wx wy wz, rad/frame
    background 10                      # plane depth, or "background 10 20" for a ramp
    background_class 100
    sky       20 119                   # top rows, class id
    object    10 50 40 80 10 2 1 0.5 0 0   # x0 y0 x1 y1 depth class instance vx vy vz
    hole      20 60 30 70              # x0 y0 x1 y1, flow marked invalid

Rectangles are half-open pixel ranges ``[x0, x1) x [y0, y1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BehindCameraError,
    EmptySceneError,
    NoMotionError,
    ParseError,
    RotationPresentError,
)
from .foe import SignedFoe
from .flow_io import FlowField
from .segmentation import PanopticMap

ROAD_CLASS = 100
SKY_CLASS = 119


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    zoom_rate: float = 1.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        if self.zoom_rate <= 0:
            raise ValueError("zoom_rate must be positive")


@dataclass(frozen=True)
class CameraMotion:
    t: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (np.isfinite(self.t).all() and np.isfinite(self.omega).all()):
            raise ValueError("camera motion must be finite")


@dataclass(frozen=True)
class SceneObject:
    rect: tuple[int, int, int, int]
    depth: float
    class_id: int
    instance_id: int
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def is_moving(self) -> bool:
        return any(c != 0 for c in self.velocity)


@dataclass(frozen=True)
class SceneSpec:
    depth_left: float
    depth_right: Optional[float] = None
    background_class: int = ROAD_CLASS
    objects: tuple[SceneObject, ...] = ()
    sky_rows: int = 0
    sky_class: int = SKY_CLASS
    holes: tuple[tuple[int, int, int, int], ...] = ()

    def validate(self, width: int, height: int) -> None:
        if self.depth_left <= 0 or (self.depth_right is not None and self.depth_right <= 0):
            raise ValueError("background depth must be positive")
        seen = set()
        for obj in self.objects:
            x0, y0, x1, y1 = obj.rect
            if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
                raise ValueError(f"object rect {obj.rect} outside a {width}x{height} image")
            if obj.depth <= 0:
                raise ValueError("object depth must be positive")
            if obj.instance_id <= 0 or obj.instance_id in seen:
                raise ValueError(f"instance ids must be distinct and > 0, got {obj.instance_id}")
            seen.add(obj.instance_id)
        if not 0 <= self.sky_rows <= height:
            raise ValueError("sky rows outside the image")

    def background_depth(self, xs: np.ndarray, width: int) -> np.ndarray:
        if self.depth_right is None:
            return np.full(xs.shape, float(self.depth_left))
        frac = xs / max(width - 1, 1)
        return self.depth_left + (self.depth_right - self.depth_left) * frac


@dataclass(frozen=True, eq=False)
class SynthFrame:
    flow: FlowField
    panoptic: PanopticMap
    moving: np.ndarray
    depth: np.ndarray


def _rotate_first_order(omega, X, Y, Z):
    wx, wy, wz = omega
    return X - (wy * Z - wz * Y), Y - (wz * X - wx * Z), Z - (wx * Y - wy * X)


def render_flow(scene: SceneSpec, intr: CameraIntrinsics, motion: CameraMotion) -> SynthFrame:
    """Render exact flow, panoptic labels and the ground-truth moving mask."""
    w, h = intr.width, intr.height
    scene.validate(w, h)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    depth = scene.background_depth(xs, w)
    class_id = np.full((h, w), scene.background_class, dtype=np.int64)
    instance_id = np.zeros((h, w), dtype=np.int64)
    vel = np.zeros((h, w, 3))
    moving = np.zeros((h, w), dtype=bool)
    sky = np.zeros((h, w), dtype=bool)
    sky[:scene.sky_rows] = True
    class_id[sky] = scene.sky_class

    for obj in scene.objects:
        x0, y0, x1, y1 = obj.rect
        region = (slice(y0, y1), slice(x0, x1))
        depth[region] = obj.depth
        class_id[region] = obj.class_id
        instance_id[region] = obj.instance_id
        vel[region] = obj.velocity
        moving[region] = obj.is_moving
        sky[region] = False

    a = (xs - intr.cx) / intr.fx
    b = (ys - intr.cy) / intr.fy
    # sky is at infinity: unit depth with no translation or object motion
    Z = np.where(sky, 1.0, depth)
    shift = np.where(sky[..., None], 0.0, vel - np.asarray(motion.t, dtype=np.float64))
    X, Y = a * Z, b * Z
    Xr, Yr, Zr = _rotate_first_order(motion.omega, X, Y, Z)
    # displacement of the 3D point, kept separate so a still scene gives exactly zero flow
    dX, dY, dZ = Xr - X + shift[..., 0], Yr - Y + shift[..., 1], Zr - Z + shift[..., 2]
    Z2 = Z + dZ
    if (Z2 <= 0).any():
        raise BehindCameraError("a scene point ends up at or behind the camera")
    # X2/Z2 - a = (dX - a dZ) / Z2, then the zoomed focal length rescales everything
    z = intr.zoom_rate
    u = intr.fx * ((z - 1.0) * a + z * (dX - a * dZ) / Z2)
    v = intr.fy * ((z - 1.0) * b + z * (dY - b * dZ) / Z2)

    valid = np.ones((h, w), dtype=bool)
    for x0, y0, x1, y1 in scene.holes:
        valid[y0:y1, x0:x1] = False
    flow = FlowField(np.where(valid, u, 0.0), np.where(valid, v, 0.0), valid)
    return SynthFrame(flow, PanopticMap(class_id, instance_id), moving, np.where(sky, np.inf, depth))


def ground_truth_foe(intr: CameraIntrinsics, motion: CameraMotion) -> SignedFoe:
    """FoE of a purely translating (or purely zooming) camera.

    Translation takes precedence when both translation and zoom are present.
    """
    if any(w != 0 for w in motion.omega):
        raise RotationPresentError("rotating cameras have no single FoE")
    tx, ty, tz = motion.t
    if tz != 0:
        return SignedFoe.finite(intr.fx * tx / tz + intr.cx, intr.fy * ty / tz + intr.cy,
                                1 if tz > 0 else -1)
    if tx != 0 or ty != 0:
        return SignedFoe.at_infinity(-intr.fx * tx, -intr.fy * ty)
    if intr.zoom_rate != 1.0:
        return SignedFoe.finite(intr.cx, intr.cy, 1 if intr.zoom_rate > 1 else -1)
    raise NoMotionError("camera neither translates nor zooms")


@dataclass(frozen=True)
class SceneFile:
    name: str
    scene: SceneSpec
    intrinsics: CameraIntrinsics
    motion: CameraMotion = field(default_factory=CameraMotion)

    def render(self) -> SynthFrame:
        return render_flow(self.scene, self.intrinsics, self.motion)

    def to_text(self) -> str:
        s, k, m = self.scene, self.intrinsics, self.motion
        lines = [
            f"name {self.name}",
            f"size {k.width} {k.height}",
            f"intrinsics {k.fx!r} {k.fy!r} {k.cx!r} {k.cy!r}",
            f"zoom {k.zoom_rate!r}",
            "translation " + " ".join(repr(float(c)) for c in m.t),
            "rotation " + " ".join(repr(float(c)) for c in m.omega),
            f"background {s.depth_left!r}" + ("" if s.depth_right is None else f" {s.depth_right!r}"),
            f"background_class {s.background_class}",
        ]
        if s.sky_rows:
            lines.append(f"sky {s.sky_rows} {s.sky_class}")
        for o in s.objects:
            lines.append("object " + " ".join(str(c) for c in o.rect)
                         + f" {o.depth!r} {o.class_id} {o.instance_id} "
                         + " ".join(repr(float(c)) for c in o.velocity))
        for r in s.holes:
            lines.append("hole " + " ".join(str(c) for c in r))
        return "\n".join(lines) + "\n"


_ARITY = {"name": 1, "size": 2, "intrinsics": 4, "zoom": 1, "translation": 3, "rotation": 3,
          "background_class": 1, "sky": 2, "object": 10, "hole": 4}


def parse_scene(text: str, default_name: str = "frame") -> SceneFile:
    """Parse the scene format described in the module docstring.

    ``size`` and ``background`` are required; intrinsics default to
    ``fx = fy = width`` with the principal point at the image centre.
    """
    kv: dict[str, list[str]] = {}
    objects, holes = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        if key == "background":
            if len(vals) not in (1, 2):
                raise ParseError(f"line {lineno}: background takes 1 or 2 depths")
        elif key not in _ARITY:
            raise ParseError(f"line {lineno}: unknown keyword {key!r}")
        elif len(vals) != _ARITY[key]:
            raise ParseError(f"line {lineno}: {key} takes {_ARITY[key]} values, got {len(vals)}")
        try:
            if key == "object":
                x0, y0, x1, y1 = (int(v) for v in vals[:4])
                objects.append(SceneObject((x0, y0, x1, y1), float(vals[4]), int(vals[5]),
                                           int(vals[6]), tuple(float(v) for v in vals[7:])))
            elif key == "hole":
                holes.append(tuple(int(v) for v in vals))
            elif key in kv:
                raise ParseError(f"line {lineno}: {key} given twice")
            else:
                kv[key] = vals
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    if not kv and not objects:
        raise EmptySceneError("scene file is empty")
    if "size" not in kv or "background" not in kv:
        raise ParseError("scene needs at least 'size' and 'background'")
    try:
        width, height = (int(v) for v in kv["size"])
        fx, fy, cx, cy = (float(v) for v in kv.get(
            "intrinsics", [width, width, (width - 1) / 2, (height - 1) / 2]))
        intr = CameraIntrinsics(fx, fy, cx, cy, width, height, float(kv.get("zoom", ["1"])[0]))
        motion = CameraMotion(tuple(float(v) for v in kv.get("translation", ["0"] * 3)),
                              tuple(float(v) for v in kv.get("rotation", ["0"] * 3)))
        depths = [float(v) for v in kv["background"]]
        sky = kv.get("sky", ["0", str(SKY_CLASS)])
        scene = SceneSpec(depths[0], depths[1] if len(depths) > 1 else None,
                          int(kv.get("background_class", [ROAD_CLASS])[0]), tuple(objects),
                          int(sky[0]), int(sky[1]), tuple(holes))
        scene.validate(width, height)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return SceneFile(kv.get("name", [default_name])[0], scene, intr, motion)
