"""IoU scoring: per frame, averaged per scene, then averaged over scenes."""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyDatasetError, EmptySceneError
from .images import load_mask

log = logging.getLogger(__name__)

MASK_SUFFIXES = (".png", ".pgm", ".mask.pgm", ".mask.png")
SUMMARY = "ALL"


def frame_iou(pred, gt) -> float:
    """Intersection over union; two empty masks score 1."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"prediction {pred.shape} vs ground truth {gt.shape}")
    union = int(np.count_nonzero(pred | gt))
    if union == 0:
        return 1.0
    return np.count_nonzero(pred & gt) / union


def scene_iou(frames: Sequence[float]) -> float:
    if len(frames) == 0:
        raise EmptySceneError("scene has no scored frames")
    return float(np.mean(frames))


def dataset_iou(scenes: Sequence[float]) -> float:
    """Mean of scene scores, so every scene weighs the same regardless of length."""
    if len(scenes) == 0:
        raise EmptyDatasetError("no scenes to average")
    return float(np.mean(scenes))


def read_scene_list(path) -> list[str]:
    """One scene name per line; ``#`` comments and blank lines ignored."""
    names = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            names.append(line)
    return names


def _frame_files(scene_dir: Path) -> dict[str, Path]:
    out = {}
    for p in sorted(scene_dir.iterdir()):
        for suf in sorted(MASK_SUFFIXES, key=len, reverse=True):
            if p.name.endswith(suf):
                out.setdefault(p.name[: -len(suf)], p)
                break
    return out


def evaluate_dirs(pred_dir, gt_dir, include: Optional[Iterable[str]] = None,
                  exclude: Iterable[str] = ()) -> tuple[list[tuple[str, str, float]], dict[str, float], float]:
    """Score ``pred_dir/<scene>/<frame>.*`` against ``gt_dir/<scene>/<frame>.*``.

    Frames present in the ground truth but missing from the predictions are
    scored against an empty prediction. Returns per-frame rows, per-scene
    means and the dataset mean.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    scenes = sorted(p.name for p in gt_dir.iterdir() if p.is_dir())
    if include is not None:
        wanted = list(include)
        missing = [s for s in wanted if s not in scenes]
        if missing:
            raise FileNotFoundError(f"scenes missing from ground truth: {', '.join(missing)}")
        scenes = [s for s in scenes if s in set(wanted)]
    dropped = set(exclude)
    scenes = [s for s in scenes if s not in dropped]

    rows: list[tuple[str, str, float]] = []
    per_scene: dict[str, float] = {}
    for scene in scenes:
        gts = _frame_files(gt_dir / scene)
        preds = _frame_files(pred_dir / scene) if (pred_dir / scene).is_dir() else {}
        scores = []
        for frame, gt_path in gts.items():
            gt = load_mask(gt_path)
            if frame in preds:
                pred = load_mask(preds[frame])
            else:
                log.warning("no prediction for %s/%s, scoring as empty", scene, frame)
                pred = np.zeros_like(gt)
            score = frame_iou(pred, gt)
            rows.append((scene, frame, score))
            scores.append(score)
        per_scene[scene] = scene_iou(scores)
    return rows, per_scene, dataset_iou(list(per_scene.values()))


def results_csv(rows, per_scene: dict[str, float], overall: float) -> str:
    """``scene,frame,iou`` rows, then one ``<scene>,ALL`` row per scene and an ``ALL,ALL`` row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scene", "frame", "iou"])
    for scene, frame, score in rows:
        w.writerow([scene, frame, f"{score:.6f}"])
    for scene, score in per_scene.items():
        w.writerow([scene, SUMMARY, f"{score:.6f}"])
    w.writerow([SUMMARY, SUMMARY, f"{overall:.6f}"])
    return buf.getvalue()
