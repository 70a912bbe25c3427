import numpy as np
import pytest

from foels.errors import DimensionMismatchError, EmptyDatasetError, EmptySceneError
from foels.evaluation import dataset_iou, evaluate_dirs, frame_iou, results_csv, scene_iou
from foels.images import save_image


def test_identical():
    m = np.zeros((5, 5), bool); m[1:3] = True
    assert frame_iou(m, m) == 1.0


def test_disjoint():
    a = np.zeros((5, 5), bool); a[0] = True
    b = np.zeros((5, 5), bool); b[4] = True
    assert frame_iou(a, b) == 0.0


def test_partial_overlap():
    a = np.zeros(200, bool); a[:100] = True
    b = np.zeros(200, bool); b[50:150] = True
    assert frame_iou(a, b) == pytest.approx(1 / 3, abs=1e-12)


def test_both_empty():
    assert frame_iou(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0


def test_mismatch():
    with pytest.raises(DimensionMismatchError):
        frame_iou(np.zeros((2, 2)), np.zeros((2, 3)))


@pytest.mark.parametrize("scores,expected", [([1.0], 1.0), ([1.0, 0.0], 0.5), ([0.6, 0.7, 0.8], 0.7)])
def test_scene(scores, expected):
    assert scene_iou(scores) == pytest.approx(expected, abs=1e-12)


def test_dataset():
    assert dataset_iou([0.5, 0.9]) == pytest.approx(0.7, abs=1e-12)
    assert dataset_iou([0.42]) == 0.42


def test_empty_lists():
    with pytest.raises(EmptySceneError):
        scene_iou([])
    with pytest.raises(EmptyDatasetError):
        dataset_iou([])


def test_scene_weighting(tmp_path):
    full = np.full((4, 4), 255, np.uint8)
    empty = np.zeros((4, 4), np.uint8)
    # scene a: one frame scoring 1; scene b: three frames scoring 0
    for scene, frames in {"a": ["00000"], "b": ["00000", "00001", "00002"]}.items():
        (tmp_path / "gt" / scene).mkdir(parents=True)
        (tmp_path / "pred" / scene).mkdir(parents=True)
        for f in frames:
            save_image(tmp_path / "gt" / scene / f"{f}.png", full)
            save_image(tmp_path / "pred" / scene / f"{f}.mask.pgm", full if scene == "a" else empty)
    rows, per_scene, overall = evaluate_dirs(tmp_path / "pred", tmp_path / "gt")
    assert per_scene == {"a": 1.0, "b": 0.0}
    assert overall == 0.5
    csv = results_csv(rows, per_scene, overall)
    assert csv.splitlines()[0] == "scene,frame,iou"
    assert csv.splitlines()[-1] == "ALL,ALL,0.500000"
    _, per, _ = evaluate_dirs(tmp_path / "pred", tmp_path / "gt", exclude=["b"])
    assert list(per) == ["a"]


def test_missing_prediction_scores_empty(tmp_path):
    (tmp_path / "gt" / "s").mkdir(parents=True)
    (tmp_path / "pred").mkdir()
    save_image(tmp_path / "gt" / "s" / "0.png", np.full((2, 2), 255, np.uint8))
    rows, _, overall = evaluate_dirs(tmp_path / "pred", tmp_path / "gt")
    assert rows == [("s", "0", 0.0)] and overall == 0.0
