"""FoE-based moving likelihood and its fusion with the segmentation prior.

The per-pixel likelihood adds two kinds of evidence: how far the observed
flow direction strays from the FoE-implied direction (angle term), and how
different its length is from the typical static-area flow on a log scale
(length term). The posterior is the plain product of prior and likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ZeroStaticFlowError
from .foe import SignedFoe, deviation_map
from .flow_io import FlowField


@dataclass(frozen=True)
class LikelihoodParams:
    alpha: float = 0.25
    theta_th: float = math.radians(30.0)
    eps_len: float = 1e-3
    fl_cap: float = 4.0
    m_stop: float = 1.0
    # static pixels at or below eps_mag are left out of the mean static flow length
    eps_mag: float = 0.5
    # pixels at or below min_mag carry no motion evidence
    min_mag: float = 0.5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 < self.theta_th < math.pi:
            raise ValueError("theta_th must lie in (0, pi)")
        if self.eps_len <= 0 or self.fl_cap <= 0 or self.m_stop <= 0:
            raise ValueError("eps_len, fl_cap and m_stop must be positive")


def angle_probability(d_a, theta_th: float = math.radians(30.0)):
    """Linear in the angular deviation, 0.5 at ``theta_th``, clipped to [0, 1]."""
    return np.clip(0.5 * np.asarray(d_a, dtype=np.float64) / theta_th, 0.0, 1.0)


def relative_length(mag, mean_static_mag: float, eps_len: float = 1e-3):
    if not mean_static_mag > 0:
        raise ZeroStaticFlowError("mean static flow magnitude is zero")
    return np.maximum(np.asarray(mag, dtype=np.float64) / mean_static_mag, eps_len)


def length_factor(d_l, fl_cap: float = 4.0):
    """``|log10(d_l)|`` capped at ``fl_cap``; equal flow lengths give 0."""
    return np.minimum(np.abs(np.log10(np.asarray(d_l, dtype=np.float64))), fl_cap)


def foe_likelihood(p_a, f_l, alpha: float = 0.25):
    return np.clip(np.asarray(p_a, dtype=np.float64) + alpha * np.asarray(f_l), 0.0, 1.0)


def mean_static_magnitude(flow: FlowField, static_area, eps_mag: float) -> float:
    mag = flow.magnitude()
    pool = np.asarray(static_area, dtype=bool) & flow.valid & (mag > eps_mag)
    if not pool.any():
        raise ZeroStaticFlowError("no static pixel carries flow above eps_mag")
    return float(mag[pool].mean())


def likelihood_map(flow: FlowField, foe: SignedFoe, static_area,
                   params: LikelihoodParams = LikelihoodParams()) -> np.ndarray:
    """Moving likelihood for a moving camera with the given FoE.

    Invalid pixels, pixels with flow at or below ``min_mag`` and pixels at
    the FoE get 0.
    """
    static_area = np.asarray(static_area, dtype=bool)
    if static_area.shape != flow.shape:
        raise DimensionMismatchError(f"static mask {static_area.shape} vs flow {flow.shape}")
    mean_mag = mean_static_magnitude(flow, static_area, params.eps_mag)
    mag = flow.magnitude()
    d_a, at_foe = deviation_map(flow, foe)
    evidence = flow.valid & (mag > params.min_mag) & ~at_foe

    out = np.zeros(flow.shape, dtype=np.float64)
    p_a = angle_probability(d_a[evidence], params.theta_th)
    f_l = length_factor(relative_length(mag[evidence], mean_mag, params.eps_len), params.fl_cap)
    out[evidence] = foe_likelihood(p_a, f_l, params.alpha)
    return out


def static_camera_likelihood(flow: FlowField, params: LikelihoodParams = LikelihoodParams()) -> np.ndarray:
    """Fallback for a still camera: any flow is motion evidence, saturating at ``m_stop`` px."""
    return np.where(flow.valid, np.clip(flow.magnitude() / params.m_stop, 0.0, 1.0), 0.0)


def posterior_map(prior, likelihood) -> np.ndarray:
    prior = np.asarray(prior, dtype=np.float64)
    likelihood = np.asarray(likelihood, dtype=np.float64)
    if prior.shape != likelihood.shape:
        raise DimensionMismatchError(f"prior {prior.shape} vs likelihood {likelihood.shape}")
    return prior * likelihood
