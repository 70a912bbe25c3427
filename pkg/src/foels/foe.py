"""Signed focus of expansion: two-vector hypotheses and RANSAC consensus.

Pixel positions are ``(x, y) = (column, row)`` in pixel units; flow vectors
are ``(u, v)`` in the same axes. A FoE is kept in homogeneous form so that
lateral camera translation (parallel flow, FoE at infinity) is an ordinary
value rather than a special case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AtFoeError,
    DegenerateError,
    DimensionMismatchError,
    InsufficientFlowError,
    NoConsensusError,
    ZeroFlowError,
)
from .flow_io import FlowField

DEFAULT_THETA_INLIER = math.radians(1.0)
DEFAULT_ITERATIONS = 512
DEFAULT_MIN_MAG = 0.5

# |sin| between the two flow directions below which the lines count as parallel
PARALLEL_TOL = 1e-9
AT_FOE_TOL = 1e-9

# hypotheses x pixels evaluated per vectorised block
_BLOCK_ELEMENTS = 1 << 16


@dataclass(frozen=True)
class SignedFoe:
    """Homogeneous FoE ``h = (hx, hy, hw)`` with unit norm and ``hw >= 0``.

    ``sign`` is +1 for a source (flow points away) and -1 for a sink. When
    ``hw == 0`` the FoE is at infinity, ``(hx, hy)`` is the unit flow
    direction and ``sign`` is fixed at +1.
    """

    h: tuple[float, float, float]
    sign: int

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (3,) or not np.isfinite(h).all():
            raise ValueError(f"h must be three finite numbers, got {self.h!r}")
        norm = float(np.linalg.norm(h))
        if norm == 0.0:
            raise ValueError("h must be nonzero")
        h = h / norm
        if h[2] < 0:
            h = -h
        sign = int(self.sign)
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if h[2] == 0.0:
            sign = 1
        object.__setattr__(self, "h", (float(h[0]), float(h[1]), float(h[2])))
        object.__setattr__(self, "sign", sign)

    @classmethod
    def finite(cls, x: float, y: float, sign: int = 1) -> "SignedFoe":
        return cls((x, y, 1.0), sign)

    @classmethod
    def at_infinity(cls, dx: float, dy: float) -> "SignedFoe":
        return cls((dx, dy, 0.0), 1)

    @property
    def is_finite(self) -> bool:
        return self.h[2] > 0.0

    @property
    def point(self) -> tuple[float, float]:
        """Euclidean image position; only defined for a finite FoE."""
        if not self.is_finite:
            raise ValueError("FoE is at infinity")
        return self.h[0] / self.h[2], self.h[1] / self.h[2]

    @property
    def direction(self) -> tuple[float, float]:
        """Unit flow direction of an infinite FoE."""
        if self.is_finite:
            raise ValueError("FoE is finite")
        return self.h[0], self.h[1]

    def isclose(self, other: "SignedFoe", atol: float = 1e-9) -> bool:
        return self.sign == other.sign and bool(np.allclose(self.h, other.h, rtol=0, atol=atol))


@dataclass(frozen=True)
class RansacParams:
    iterations: int = DEFAULT_ITERATIONS
    theta_inlier: float = DEFAULT_THETA_INLIER
    min_mag: float = DEFAULT_MIN_MAG
    seed: int = 0
    exhaustive: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.theta_inlier < math.pi:
            raise ValueError("theta_inlier must lie in (0, pi)")
        if self.min_mag < 0:
            raise ValueError("min_mag must be >= 0")


@dataclass(frozen=True, eq=False)
class FoeResult:
    """Best RANSAC hypothesis.

    ``support`` is the consensus count the search maximised: qualifying
    static pixels (valid, above ``min_mag``) that are inliers. ``inlier``
    covers every valid pixel of the frame; invalid pixels are False.
    """

    foe: SignedFoe
    inlier: np.ndarray
    support: int
    qualifying: int
    hypotheses: int


def _unit(x: float, y: float) -> tuple[float, float, float]:
    n = math.hypot(x, y)
    return x / n, y / n, n


def foe_from_pair(p1, f1, p2, f2, min_mag: float = 0.0) -> SignedFoe:
    """Intersect the lines carried by two flow vectors and infer the FoE sign.

    Raises :class:`DegenerateError` for coincident points, flows at or below
    ``min_mag``, collinear lines, and pairs where one vector points toward the
    intersection and the other away from it.
    """
    x1, y1 = float(p1[0]), float(p1[1])
    x2, y2 = float(p2[0]), float(p2[1])
    if x1 == x2 and y1 == y2:
        raise DegenerateError("the two sample points coincide")
    m1, m2 = math.hypot(*f1), math.hypot(*f2)
    if m1 <= min_mag or m2 <= min_mag or m1 == 0.0 or m2 == 0.0:
        raise DegenerateError("flow magnitude too small to orient a line")
    d1x, d1y, _ = _unit(float(f1[0]), float(f1[1]))
    d2x, d2y, _ = _unit(float(f2[0]), float(f2[1]))

    sin12 = d1x * d2y - d1y * d2x
    if abs(sin12) <= PARALLEL_TOL:
        bx, by, _ = _unit(x2 - x1, y2 - y1)
        if abs(d1x * by - d1y * bx) <= PARALLEL_TOL:
            raise DegenerateError("flow vectors lie on one line")
        if d1x * d2x + d1y * d2y < 0:
            raise DegenerateError("antiparallel flows admit no single translation")
        sx, sy, _ = _unit(d1x + d2x, d1y + d2y)
        return SignedFoe.at_infinity(sx, sy)

    # homogeneous lines through p with direction d: (-dy, dx, x*dy - y*dx)
    a, b, c = -d1y, d1x, x1 * d1y - y1 * d1x
    d, e, f = -d2y, d2x, x2 * d2y - y2 * d2x
    h = (b * f - c * e, c * d - a * f, a * e - b * d)
    ex, ey = h[0] / h[2], h[1] / h[2]
    a1 = (x1 - ex) * d1x + (y1 - ey) * d1y
    a2 = (x2 - ex) * d2x + (y2 - ey) * d2y
    if a1 > 0 and a2 > 0:
        sign = 1
    elif a1 < 0 and a2 < 0:
        sign = -1
    else:
        raise DegenerateError("mixed source/sink orientation")
    return SignedFoe(h, sign)


def expected_directions(foe: SignedFoe, points) -> tuple[np.ndarray, np.ndarray]:
    """Unit expected flow directions at ``points`` (N, 2), and an at-FoE mask.

    Rows flagged at the FoE are zero.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if not foe.is_finite:
        dirs = np.broadcast_to(np.array(foe.direction) * foe.sign, pts.shape).copy()
        return dirs, np.zeros(len(pts), dtype=bool)
    ex, ey = foe.point
    v = pts - np.array([ex, ey])
    norm = np.hypot(v[:, 0], v[:, 1])
    at_foe = norm <= AT_FOE_TOL
    with np.errstate(invalid="ignore", divide="ignore"):
        dirs = foe.sign * v / norm[:, None]
    dirs[at_foe] = 0.0
    return dirs, at_foe


def expected_direction(foe: SignedFoe, p) -> np.ndarray:
    dirs, at_foe = expected_directions(foe, [p])
    if at_foe[0]:
        raise AtFoeError(f"point {tuple(p)} coincides with the FoE")
    return dirs[0]


def deviation_cosines(foe: SignedFoe, points, flows) -> tuple[np.ndarray, np.ndarray]:
    """Cosine between expected and observed flow per row, plus the at-FoE mask.

    Zero-length flow rows yield NaN.
    """
    flows = np.asarray(flows, dtype=np.float64).reshape(-1, 2)
    dirs, at_foe = expected_directions(foe, points)
    mag = np.hypot(flows[:, 0], flows[:, 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.einsum("ij,ij->i", dirs, flows) / mag
    return np.clip(cos, -1.0, 1.0), at_foe


def angular_deviation(foe: SignedFoe, p, f) -> float:
    """Angle in [0, pi] between the observed flow ``f`` at ``p`` and the FoE-implied direction."""
    if math.hypot(float(f[0]), float(f[1])) == 0.0:
        raise ZeroFlowError("zero flow has no direction")
    cos, at_foe = deviation_cosines(foe, [p], [f])
    if at_foe[0]:
        raise AtFoeError(f"point {tuple(p)} coincides with the FoE")
    return float(np.arccos(cos[0]))


def deviation_map(flow: FlowField, foe: SignedFoe) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel angular deviation (NaN where undefined) and at-FoE mask for a whole field."""
    ys, xs = np.mgrid[0:flow.height, 0:flow.width]
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    cos, at_foe = deviation_cosines(foe, pts, flow.as_array().reshape(-1, 2))
    d = np.arccos(cos)
    return d.reshape(flow.shape), at_foe.reshape(flow.shape)


def _pixel_positions(flat_idx: np.ndarray, width: int) -> np.ndarray:
    return np.stack([flat_idx % width, flat_idx // width], axis=1).astype(np.float64)


def _sample_pairs(n: int, params: RansacParams):
    if params.exhaustive:
        yield from itertools.islice(itertools.combinations(range(n), 2), params.iterations)
        return
    rng = np.random.default_rng(params.seed)
    for _ in range(params.iterations):
        i, j = rng.choice(n, size=2, replace=False)
        yield int(i), int(j)


class _Points:
    """Qualifying pixels with unit flows, plus the per-point terms the consensus kernel reuses."""

    def __init__(self, pts: np.ndarray, units: np.ndarray):
        self.pts = pts
        self.units = units
        self.p_dot_u = np.einsum("ij,ij->i", pts, units)
        self.p_sq = np.einsum("ij,ij->i", pts, pts)


def _inlier_block(hyps: list[SignedFoe], points: _Points, cos_theta: float) -> np.ndarray:
    """(hypotheses, points) boolean matrix: at the FoE or within the angle threshold.

    For a finite FoE ``o`` the test is ``s * (p - o) . u > cos_theta * |p - o|``;
    for an infinite one ``s * d . u > cos_theta``. Both are expanded so the
    heavy lifting is two (k, 2) x (2, n) products. The consensus count and the
    final per-pixel mask both go through here so they agree exactly.
    """
    h = np.array([x.h for x in hyps], dtype=np.float64).reshape(-1, 3)
    finite = h[:, 2] > 0
    fin = finite.astype(np.float64)[:, None]
    origin = np.where(finite[:, None], h[:, :2] / np.where(finite, h[:, 2], 1.0)[:, None], 0.0)
    sign = np.array([x.sign for x in hyps], dtype=np.float64)[:, None]
    # finite: (p - o).u = p.u - o.u ; infinite: d.u
    dot = np.where(finite[:, None], -origin, h[:, :2]) @ points.units.T
    dot += fin * points.p_dot_u[None, :]
    dot *= sign
    # finite: |p - o|^2 = p.p - 2 o.p + o.o ; infinite: 1
    norm_sq = origin @ points.pts.T
    norm_sq *= -2.0
    norm_sq += fin * points.p_sq[None, :]
    norm_sq += fin * np.einsum("ij,ij->i", origin, origin)[:, None] + (1.0 - fin)
    np.maximum(norm_sq, 0.0, out=norm_sq)
    at_foe = norm_sq <= AT_FOE_TOL * AT_FOE_TOL
    if cos_theta >= 0:
        consistent = dot > 0
        dot *= dot
        norm_sq *= cos_theta * cos_theta
        consistent &= dot > norm_sq
    else:
        consistent = dot > cos_theta * np.sqrt(norm_sq)
    return at_foe | consistent


def _consensus(hyps: list[SignedFoe], points: _Points, cos_theta: float) -> np.ndarray:
    support = np.empty(len(hyps), dtype=np.int64)
    block = max(1, _BLOCK_ELEMENTS // max(len(points.pts), 1))
    for s in range(0, len(hyps), block):
        support[s:s + block] = _inlier_block(hyps[s:s + block], points, cos_theta).sum(axis=1)
    return support


def inlier_mask(flow: FlowField, foe: SignedFoe, theta_inlier: float, min_mag: float) -> np.ndarray:
    """FoE-consistency of every valid pixel.

    Pixels with flow at or below ``min_mag`` and pixels at the FoE count as
    inliers (no evidence of independent motion); invalid pixels are False.
    """
    mag = flow.magnitude()
    strong = flow.valid & (mag > min_mag)
    idx = np.flatnonzero(strong)
    pts = _pixel_positions(idx, flow.width)
    units = flow.as_array().reshape(-1, 2)[idx] / mag.ravel()[idx, None]
    out = flow.valid & ~strong
    out.ravel()[idx] = _inlier_block([foe], _Points(pts, units), math.cos(theta_inlier))[0]
    return out


def ransac_foe(flow: FlowField, static_area, params: RansacParams = RansacParams()) -> FoeResult:
    """Robust signed FoE from the flow inside ``static_area``.

    Each round draws two distinct qualifying static pixels, forms their
    intersection hypothesis and counts qualifying static pixels within
    ``theta_inlier`` of it. The first hypothesis reaching the maximum count
    wins. With ``params.exhaustive`` the pairs are enumerated in
    lexicographic order instead of sampled.
    """
    static_area = np.asarray(static_area, dtype=bool)
    if static_area.shape != flow.shape:
        raise DimensionMismatchError(f"static mask {static_area.shape} vs flow {flow.shape}")
    mag = flow.magnitude()
    qualifying = static_area & flow.valid & (mag > params.min_mag)
    idx = np.flatnonzero(qualifying)
    n = len(idx)
    if n < 2:
        raise InsufficientFlowError(f"{n} static pixels with flow above {params.min_mag} px")

    pts = _pixel_positions(idx, flow.width)
    vec = flow.as_array().reshape(-1, 2)[idx]
    units = vec / mag.ravel()[idx, None]

    hyps: list[SignedFoe] = []
    for i, j in _sample_pairs(n, params):
        try:
            hyps.append(foe_from_pair(pts[i], vec[i], pts[j], vec[j], params.min_mag))
        except DegenerateError:
            continue
    if not hyps:
        raise NoConsensusError("every sampled pair was degenerate")

    support = _consensus(hyps, _Points(pts, units), math.cos(params.theta_inlier))
    best = int(np.argmax(support))
    if support[best] < 2:
        raise NoConsensusError(f"best support {support[best]} < 2")
    foe = hyps[best]
    inlier = inlier_mask(flow, foe, params.theta_inlier, params.min_mag)
    return FoeResult(foe, inlier, int(support[best]), n, len(hyps))
