"""Sim(3) trajectory alignment and absolute trajectory error.

The predictor emits scale-normalized poses in its own frame; aligning its
translations to the sparse VO trajectory (closed-form Umeyama) recovers the
similarity transform whose scale, combined with the pre-scaling factor,
rescales predictor output into the VO frame. The same machinery backs the
7-DoF ATE evaluation protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CorrespondenceError,
    DegenerateConfigurationError,
    EmptyAssociationError,
    InsufficientDataError,
)
from .geometry import RigidPose, SimilarityTransform

DEFAULT_GAMMA = 100.0
DEFAULT_MAX_TIME_GAP = 0.02  # seconds

# Relative singular-value cutoff below which a point set counts as collinear.
_RANK_TOL = 1e-9


@dataclass(frozen=True)
class TrajectorySegment:
    """Ordered keyframe trajectory: ids, timestamps (s), world-from-camera poses."""

    ids: tuple
    timestamps: np.ndarray
    poses: tuple

    def __post_init__(self):
        if len(self.ids) == 0:
            raise ValueError("trajectory segment needs at least one entry")
        if not (len(self.ids) == len(self.timestamps) == len(self.poses)):
            raise ValueError("ids, timestamps and poses must have equal length")
        if np.any(np.diff(self.timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")

    @staticmethod
    def from_entries(entries) -> "TrajectorySegment":
        """Build from an iterable of (id, timestamp, RigidPose)."""
        entries = list(entries)
        ids = tuple(e[0] for e in entries)
        ts = np.array([e[1] for e in entries], dtype=float)
        poses = tuple(e[2] for e in entries)
        return TrajectorySegment(ids, ts, poses)

    def translations(self) -> np.ndarray:
        return np.stack([p.translation for p in self.poses])

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class AlignmentResult:
    """Umeyama solution plus the fused scale s_f = scale * gamma."""

    transform: SimilarityTransform
    fused_scale: float
    rms_residual: float


def umeyama_sim3(src, dst, with_scale: bool = True) -> SimilarityTransform:
    """Least-squares similarity transform: dst ~ s * R @ src + t.

    SVD of the cross-covariance with determinant-sign correction, so a
    reflection never leaks into the rotation. with_scale=False pins s = 1
    (6-DoF variant used by rigid ATE alignment).
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 3:
        raise ValueError("src and dst must both be (N, 3)")
    n = src.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need >= 3 correspondences, got {n}")

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    src_c = src - mu_src
    dst_c = dst - mu_dst

    cov = dst_c.T @ src_c / n
    U, d, Vt = np.linalg.svd(cov)
    if d[0] <= 0.0 or d[1] <= _RANK_TOL * d[0]:
        raise DegenerateConfigurationError(
            "point configuration is coincident or collinear"
        )
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2, 2] = -1.0
    R = U @ S @ Vt

    if with_scale:
        var_src = (src_c ** 2).sum() / n
        s = float(np.trace(np.diag(d) @ S) / var_src)
        if s <= 0.0:
            raise DegenerateConfigurationError("recovered non-positive scale")
    else:
        s = 1.0
    t = mu_dst - s * (R @ mu_src)
    return SimilarityTransform(s, R, t)


def align_predictor_trajectory(
    vo: TrajectorySegment,
    pred: TrajectorySegment,
    gamma: float = DEFAULT_GAMMA,
) -> AlignmentResult:
    """Align pre-scaled predictor translations to the VO trajectory by id.

    gamma conditions the numerics only (predictor translations are
    scale-normalized and tiny); the fused scale s_f = s * gamma is invariant
    to it on clean data.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if set(vo.ids) != set(pred.ids):
        raise CorrespondenceError(
            f"keyframe id mismatch: vo={sorted(set(vo.ids))} pred={sorted(set(pred.ids))}"
        )
    order = {kid: i for i, kid in enumerate(pred.ids)}
    src = gamma * np.stack([pred.poses[order[kid]].translation for kid in vo.ids])
    dst = vo.translations()
    transform = umeyama_sim3(src, dst)
    residual = dst - transform.apply(src)
    rms = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    return AlignmentResult(transform, transform.scale * gamma, rms)


def associate_by_time(
    estimate: TrajectorySegment,
    reference: TrajectorySegment,
    max_gap: float = DEFAULT_MAX_TIME_GAP,
):
    """Index pairs (i_est, i_ref) of nearest-timestamp matches within max_gap."""
    ref_ts = reference.timestamps
    pairs = []
    for i, t in enumerate(estimate.timestamps):
        j = int(np.searchsorted(ref_ts, t))
        best = None
        for cand in (j - 1, j):
            if 0 <= cand < len(ref_ts):
                gap = abs(ref_ts[cand] - t)
                if gap <= max_gap and (best is None or gap < best[1]):
                    best = (cand, gap)
        if best is not None:
            pairs.append((i, best[0]))
    return pairs


def ate_rmse(
    estimate: TrajectorySegment,
    ground_truth: TrajectorySegment,
    mode: str = "7dof",
    max_gap: float = DEFAULT_MAX_TIME_GAP,
) -> float:
    """RMSE of translation residuals after the selected trajectory alignment.

    mode: "7dof" (full similarity), "6dof" (rigid, s = 1), or "none".
    """
    if mode not in ("7dof", "6dof", "none"):
        raise ValueError(f"unknown alignment mode {mode!r}")
    pairs = associate_by_time(estimate, ground_truth, max_gap)
    if not pairs:
        raise EmptyAssociationError(
            f"no estimate/ground-truth pairs within {max_gap} s"
        )
    est = np.stack([estimate.poses[i].translation for i, _ in pairs])
    ref = np.stack([ground_truth.poses[j].translation for _, j in pairs])
    if mode == "none" or len(pairs) < 3:
        diff = est - ref
    else:
        transform = umeyama_sim3(est, ref, with_scale=(mode == "7dof"))
        diff = transform.apply(est) - ref
    return float(np.sqrt(np.mean(np.sum(diff ** 2, axis=1))))


def segment_from_poses(ids, timestamps, poses: dict) -> TrajectorySegment:
    """Segment over the given keyframe ids, looking poses up by id."""
    return TrajectorySegment.from_entries(
        (kid, t, poses[kid]) for kid, t in zip(ids, timestamps)
    )
