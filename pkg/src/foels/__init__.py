"""Moving object detection from optical flow and panoptic segmentation.

The chain for one frame: remove sky, look up class priors, gate on camera
motion, fit a signed focus of expansion by RANSAC, score every pixel's flow
against it, multiply by the prior, threshold, and promote instances.
"""

from .camera_motion import flow_existing_ratio, is_camera_moving
from .config import DetectorConfig
from .errors import FoelsError
from .evaluation import dataset_iou, frame_iou, scene_iou
from .flow_io import FlowField, flow_to_color, read_flo, write_flo
from .foe import (
    FoeResult,
    RansacParams,
    SignedFoe,
    angular_deviation,
    expected_direction,
    foe_from_pair,
    ransac_foe,
)
from .pipeline import Detection, detect
from .probability import (
    LikelihoodParams,
    angle_probability,
    foe_likelihood,
    length_factor,
    likelihood_map,
    posterior_map,
    relative_length,
    static_camera_likelihood,
)
from .refinement import object_mask, pixel_mask
from .segmentation import (
    ClassPriorTable,
    PanopticMap,
    default_class_table,
    load_class_table,
    prior_map,
    sky_mask,
    static_mask,
)
from .synth import CameraIntrinsics, CameraMotion, SceneObject, SceneSpec, ground_truth_foe, render_flow

__version__ = "0.1.0"
