"""Bundled synthetic benchmark covering the standard camera-motion situations."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .config import DetectorConfig
from .evaluation import dataset_iou, frame_iou
from .pipeline import detect
from .segmentation import ClassPriorTable, default_class_table
from .synth import SceneFile, parse_scene


def benchmark_scenes() -> list[SceneFile]:
    """The ten scene files under ``foels/data/scenes``, in file order."""
    root = resources.files("foels").joinpath("data/scenes")
    files = sorted((p for p in root.iterdir() if p.name.endswith(".txt")), key=lambda p: p.name)
    return [parse_scene(p.read_text("utf-8"), default_name=p.name[:-4]) for p in files]


@dataclass(frozen=True)
class BenchmarkResult:
    scene_iou: dict[str, float]
    dataset_iou: float


def run_benchmark(scenes: list[SceneFile] | None = None, config: DetectorConfig = DetectorConfig(),
                  table: ClassPriorTable | None = None) -> BenchmarkResult:
    """Render, detect and score every scene (one frame each)."""
    scenes = benchmark_scenes() if scenes is None else scenes
    table = default_class_table() if table is None else table
    scores = {}
    for sf in scenes:
        frame = sf.render()
        det = detect(frame.flow, frame.panoptic, table, config)
        scores[sf.name] = frame_iou(det.objects, frame.moving)
    return BenchmarkResult(scores, dataset_iou(list(scores.values())))
