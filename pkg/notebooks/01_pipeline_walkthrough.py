# %% [markdown]
# # One frame through the detector
#
# A camera drives forward over a flat road. One car crosses in front of it,
# another is parked. We render exact flow and labels, then follow the frame
# through every stage: sky removal, prior, static area, camera-motion gate,
# signed FoE, likelihood, posterior and the two masks.

# %%
from pathlib import Path

import numpy as np

from foels import default_class_table, detect, frame_iou
from foels.pipeline import write_outputs
from foels.scenarios import benchmark_scenes

OUT = Path(__file__).resolve().parent / "_out" / "walkthrough"

scene = next(s for s in benchmark_scenes() if s.name == "forward")
print(scene.to_text())
frame = scene.render()

# %% [markdown]
# The rendered flow is an expansion about the FoE except on the crossing car.

# %%
mag = frame.flow.magnitude()
print("flow magnitude: min %.3f  median %.3f  max %.3f px" % (mag.min(), np.median(mag), mag.max()))
print("moving pixels in ground truth:", int(frame.moving.sum()))

# %%
table = default_class_table()
det = detect(frame.flow, frame.panoptic, table)
print(det.summary())

# %% [markdown]
# Priors come from the class table: road is 0.02, cars 0.9. Only low-prior
# pixels feed the FoE search, so the parked car does not vote. It still gets
# a likelihood, and that likelihood is low because its flow is radial.

# %%
parked = frame.panoptic.instance_id == 2
crossing = frame.panoptic.instance_id == 1
for name, region in (("crossing car", crossing), ("parked car", parked), ("road", ~(parked | crossing))):
    print(f"{name:13s} prior {det.prior[region].mean():.2f}  "
          f"likelihood {det.likelihood[region].mean():.3f}  posterior {det.posterior[region].mean():.3f}")

# %%
print("IoU against ground truth:", frame_iou(det.objects, frame.moving))

# %% [markdown]
# With diagnostics on, every stage is written as an image next to the mask.

# %%
for path in write_outputs(det, OUT, "forward", diagnostics=True):
    print(path.relative_to(OUT.parent))
