"""Moving-camera gate: is there enough flow in the static part of the scene?"""

import numpy as np

from .errors import DimensionMismatchError, EmptyStaticAreaError
from .flow_io import FlowField

DEFAULT_EPS_MAG = 0.5
DEFAULT_TAU_MOVE = 0.1


def flow_existing_ratio(flow: FlowField, static_area, eps_mag: float = DEFAULT_EPS_MAG) -> float:
    """Fraction of valid static pixels whose flow magnitude exceeds ``eps_mag``."""
    static_area = np.asarray(static_area, dtype=bool)
    if static_area.shape != flow.shape:
        raise DimensionMismatchError(f"static mask {static_area.shape} vs flow {flow.shape}")
    pool = static_area & flow.valid
    n = int(pool.sum())
    if n == 0:
        raise EmptyStaticAreaError("no valid flow pixels inside the static area")
    moving = int((flow.magnitude()[pool] > eps_mag).sum())
    return moving / n


def is_camera_moving(ratio: float, tau_move: float = DEFAULT_TAU_MOVE) -> bool:
    if not 0.0 < tau_move < 1.0:
        raise ValueError(f"tau_move must be in (0, 1), got {tau_move}")
    return ratio > tau_move
