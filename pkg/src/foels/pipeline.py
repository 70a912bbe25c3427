"""Single-frame detector: flow + panoptic labels in, moving-object mask out."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import images
from .camera_motion import flow_existing_ratio, is_camera_moving
from .config import DetectorConfig
from .errors import DimensionMismatchError, EmptyStaticAreaError, InsufficientFlowError, NoConsensusError
from .foe import FoeResult, ransac_foe
from .flow_io import FlowField, flow_to_color
from .probability import likelihood_map, posterior_map, static_camera_likelihood
from .refinement import object_mask, pixel_mask
from .segmentation import ClassPriorTable, PanopticMap, prior_map, sky_mask, static_mask

log = logging.getLogger(__name__)

PANELS = ("segmentation", "prior", "flow", "inliers", "likelihood", "posterior",
          "pixel_mask", "object_mask", "overlay")


@dataclass(frozen=True, eq=False)
class Detection:
    flow: FlowField  # with sky removed
    panoptic: PanopticMap
    sky: np.ndarray
    prior: np.ndarray
    static: np.ndarray
    flow_ratio: Optional[float]
    camera_moving: bool
    foe: Optional[FoeResult]
    likelihood: np.ndarray
    posterior: np.ndarray
    pixels: np.ndarray
    objects: np.ndarray
    note: str = ""

    def summary(self) -> str:
        lines = [f"camera_moving {self.camera_moving}",
                 f"flow_ratio {self.flow_ratio!r}"]
        if self.foe is not None:
            f = self.foe.foe
            lines += [f"foe_h {f.h[0]!r} {f.h[1]!r} {f.h[2]!r}", f"foe_sign {f.sign}",
                      f"foe_support {self.foe.support} of {self.foe.qualifying}"]
        lines += [f"moving_pixels {int(self.pixels.sum())}",
                  f"moving_object_pixels {int(self.objects.sum())}"]
        if self.note:
            lines.append(f"note {self.note}")
        return "\n".join(lines) + "\n"


def detect(flow: FlowField, seg: PanopticMap, table: ClassPriorTable,
           config: DetectorConfig = DetectorConfig()) -> Detection:
    """Run the whole chain on one frame.

    If the camera is judged moving but no FoE can be formed (too little
    static flow, or no consensus), the frame falls back to the still-camera
    likelihood and the reason is kept in ``Detection.note``. A frame without
    any valid static pixel is treated the same way.
    """
    if seg.shape != flow.shape:
        raise DimensionMismatchError(f"labels {seg.shape} vs flow {flow.shape}")
    sky = sky_mask(seg, table)
    flow = flow.with_invalid(sky)
    prior = prior_map(seg, table)
    static = static_mask(prior, config.tau_static) & ~sky

    note = ""
    try:
        ratio: Optional[float] = flow_existing_ratio(flow, static, config.eps_mag)
    except EmptyStaticAreaError:
        ratio = None
        note = "no static area; camera motion undecidable, assuming still camera"
    moving = ratio is not None and is_camera_moving(ratio, config.tau_move)

    foe = None
    lparams = config.likelihood_params()
    if moving:
        try:
            foe = ransac_foe(flow, static, config.ransac_params())
        except (InsufficientFlowError, NoConsensusError) as exc:
            note = f"FoE unavailable ({exc}); using still-camera likelihood"
    if note:
        log.warning(note)
    if foe is not None:
        likelihood = likelihood_map(flow, foe.foe, static, lparams)
    else:
        likelihood = static_camera_likelihood(flow, lparams)

    posterior = posterior_map(prior, likelihood)
    pixels = pixel_mask(posterior, config.tau_pixel)
    objects = object_mask(pixels, seg, config.tau_obj)
    return Detection(flow, seg, sky, prior, static, ratio, moving, foe, likelihood,
                     posterior, pixels, objects, note)


def _inlier_panel(det: Detection) -> np.ndarray:
    h, w = det.flow.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    valid = det.flow.valid
    if det.foe is None:
        rgb[valid] = (128, 128, 128)
        return rgb
    inl = det.foe.inlier
    rgb[valid & inl] = (0, 200, 0)
    rgb[valid & ~inl] = (220, 0, 0)
    if det.foe.foe.is_finite:
        x, y = det.foe.foe.point
        images.draw_cross(rgb, x, y, size=max(3, min(h, w) // 20), color=(255, 255, 0))
    return rgb


def panels(det: Detection, frame_rgb: Optional[np.ndarray] = None) -> dict[str, np.ndarray]:
    """Diagnostic images, one per stage of the chain."""
    seg_key = det.panoptic.class_id * 65536 + det.panoptic.instance_id
    flow_rgb = flow_to_color(det.flow)
    base = flow_rgb if frame_rgb is None else np.asarray(frame_rgb, dtype=np.uint8)[..., :3]
    over = images.overlay(base, det.objects, color=(255, 0, 0), alpha=0.5)
    return {
        "segmentation": images.label_colors(seg_key),
        "prior": images.jet(det.prior),
        "flow": flow_rgb,
        "inliers": _inlier_panel(det),
        "likelihood": images.jet(det.likelihood),
        "posterior": images.jet(det.posterior),
        "pixel_mask": images.mask_to_gray(det.pixels),
        "object_mask": images.mask_to_gray(det.objects),
        "overlay": np.dstack([over, np.full(over.shape[:2], 255, dtype=np.uint8)]),
    }


def write_outputs(det: Detection, out_dir, frame: str, diagnostics: bool = False,
                  frame_rgb: Optional[np.ndarray] = None) -> list[Path]:
    """Write ``<frame>.mask.pgm`` and, with ``diagnostics``, every panel and probability map."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, data):
        path = out_dir / f"{frame}.{name}"
        images.save_image(path, data)
        written.append(path)

    put("mask.pgm", images.mask_to_gray(det.objects))
    if diagnostics:
        for key in ("prior", "likelihood", "posterior"):
            put(f"{key}.pgm", images.probability_to_gray(getattr(det, key)))
        for key, img in panels(det, frame_rgb).items():
            put(f"{key}.png", img)
        path = out_dir / f"{frame}.summary.txt"
        path.write_text(det.summary(), encoding="utf-8")
        written.append(path)
    return written
