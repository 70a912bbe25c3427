# %% [markdown]
# # Benchmark and command line
#
# The ten bundled scenes cover a still camera, forward and backward motion,
# forward motion with a little rotation, sideways motion, a textureless
# object, a close object, parallel motion, zoom and a frame with sky.

# %%
import tempfile
from pathlib import Path

from foels.cli import main
from foels.scenarios import run_benchmark

result = run_benchmark()
for name, score in result.scene_iou.items():
    print(f"{name:16s} {score:.3f}")
print(f"dataset IoU      {result.dataset_iou:.3f}")

# %% [markdown]
# The same thing through the CLI: render scene files, detect, then score the
# masks against the rendered ground truth with the per-scene directory
# layout the evaluator expects.

# %%
scenes = sorted((Path(__file__).resolve().parents[1] / "src" / "foels" / "data" / "scenes").glob("*.txt"))
work = Path(tempfile.mkdtemp(prefix="foels-"))
main(["synth", *map(str, scenes), "-o", str(work / "synth")])
for flo in sorted((work / "synth").glob("*.flo")):
    name = flo.name[:-4]
    main(["detect", str(flo), "-o", str(work / "pred" / name)])
    gt = work / "gt" / name
    gt.mkdir(parents=True)
    (gt / f"{name}.pgm").write_bytes((work / "synth" / f"{name}.gt.pgm").read_bytes())

main(["eval", str(work / "pred"), str(work / "gt"), "-o", str(work / "iou.csv")])
print((work / "iou.csv").read_text())
