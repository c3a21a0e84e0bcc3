"""Per-frame pose estimation.

Constant-velocity prediction, adaptive switching between the primary and
robust track providers, epipolar/P3P RANSAC outlier rejection, and weighted
PnP refinement under the adaptive noise model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .alignment import umeyama_sim3
from .errors import (
    ConsensusFailureError,
    DegenerateConfigurationError,
    InsufficientDataError,
    RefinementFailureError,
)
from .geometry import CameraIntrinsics, RigidPose, interpolate_pose, relative_pose
from .uncertainty import Observation, TrackSource


class TrackStatus(enum.Enum):
    UNTRIANGULATED_2D = "untriangulated-2d"
    TRIANGULATED_3D = "triangulated-3d"


@dataclass
class FeatureTrack:
    """A feature tracked across frames, optionally bound to a map point."""

    id: int
    source: TrackSource
    status: TrackStatus = TrackStatus.UNTRIANGULATED_2D
    map_point_id: int | None = None
    history: list = field(default_factory=list)  # (frame_idx, timestamp, pixel)

    def add(self, frame_idx: int, timestamp: float, pixel) -> None:
        if self.history and timestamp <= self.history[-1][1]:
            raise ValueError("track history timestamps must be monotone")
        self.history.append((frame_idx, timestamp, np.asarray(pixel, dtype=float)))

    def pixel_at(self, frame_idx: int):
        for idx, _, pixel in reversed(self.history):
            if idx == frame_idx:
                return pixel
        return None


@dataclass(frozen=True)
class VelocityState:
    """Constant-velocity motion prior state."""

    last_pose: RigidPose
    last_motion: RigidPose     # pose increment over the previous interval
    last_timestamp: float
    last_interval: float       # seconds spanned by last_motion (0 = unknown)

    @staticmethod
    def at_rest(pose: RigidPose, timestamp: float) -> "VelocityState":
        return VelocityState(pose, RigidPose.identity(), timestamp, 0.0)

    def advanced(self, pose: RigidPose, timestamp: float) -> "VelocityState":
        dt = timestamp - self.last_timestamp
        motion = relative_pose(self.last_pose, pose)
        return VelocityState(pose, motion, timestamp, dt)


def predict_pose(v: VelocityState, t_now: float) -> RigidPose:
    """Extrapolate the last motion increment log-linearly to t_now."""
    if t_now < v.last_timestamp:
        raise ValueError("t_now must not precede the state timestamp")
    dt = t_now - v.last_timestamp
    if dt == 0.0 or v.last_interval <= 0.0:
        return v.last_pose
    return v.last_pose.compose(interpolate_pose(v.last_motion, dt / v.last_interval))


class Mode(enum.Enum):
    PRIMARY = "primary"
    ROBUST = "robust"


@dataclass(frozen=True)
class TrackerMode:
    mode: Mode = Mode.PRIMARY
    trigger_count: int = 0


def select_tracker_mode(
    n_tracked: int,
    tau: int,
    current: TrackerMode,
    tau_recover: int | None = None,
) -> TrackerMode:
    """Switch to the robust tracker below tau; recover with hysteresis.

    tau_recover defaults to tau (no hysteresis); it must be >= tau.
    """
    if tau_recover is None:
        tau_recover = tau
    if tau_recover < tau:
        raise ValueError("tau_recover must be >= tau")
    if current.mode is Mode.PRIMARY:
        if n_tracked < tau:
            return TrackerMode(Mode.ROBUST, current.trigger_count + 1)
        return current
    if n_tracked >= tau_recover:
        return TrackerMode(Mode.PRIMARY, current.trigger_count)
    return current


@dataclass(frozen=True)
class RansacParams:
    confidence: float = 0.99
    max_iters: int = 500
    seed: int = 0
    # epipolar: squared Sampson gate in px^2 (threshold in px, squared below)
    sampson_threshold: float = 2.0
    # p3p: chi-square gate on the sigma-whitened squared reprojection error
    chi2_threshold: float = 5.991


@dataclass(frozen=True)
class EpipolarResult:
    inlier_mask: np.ndarray
    fundamental: np.ndarray
    iterations: int


def _adaptive_iters(inlier_ratio: float, sample_size: int, confidence: float, cap: int) -> int:
    eps = 1e-12
    w = min(max(inlier_ratio, eps), 1.0 - eps)
    n = np.log(1.0 - confidence) / np.log(1.0 - w ** sample_size)
    return int(min(cap, max(1.0, np.ceil(n))))


def _normalize_points(pts):
    centroid = pts.mean(axis=0)
    d = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    scale = np.sqrt(2.0) / max(d, 1e-12)
    T = np.array([
        [scale, 0.0, -scale * centroid[0]],
        [0.0, scale, -scale * centroid[1]],
        [0.0, 0.0, 1.0],
    ])
    return (pts - centroid) * scale, T


def _eight_point(pts_a, pts_b):
    """Normalized 8-point fundamental matrix fit (rank-2 projected)."""
    na, Ta = _normalize_points(pts_a)
    nb, Tb = _normalize_points(pts_b)
    A = np.column_stack([
        nb[:, 0] * na[:, 0], nb[:, 0] * na[:, 1], nb[:, 0],
        nb[:, 1] * na[:, 0], nb[:, 1] * na[:, 1], nb[:, 1],
        na[:, 0], na[:, 1], np.ones(len(na)),
    ])
    _, _, Vt = np.linalg.svd(A)
    F = Vt[-1].reshape(3, 3)
    U, d, Vt2 = np.linalg.svd(F)
    F = U @ np.diag([d[0], d[1], 0.0]) @ Vt2
    F = Tb.T @ F @ Ta
    norm = np.linalg.norm(F)
    return F / norm if norm > 0 else F


def epipolar_ransac(pts_a, pts_b, K: CameraIntrinsics, params: RansacParams) -> EpipolarResult:
    """RANSAC 8-point epipolar check with squared-Sampson gating."""
    pts_a = np.ascontiguousarray(pts_a, dtype=float)
    pts_b = np.ascontiguousarray(pts_b, dtype=float)
    n = len(pts_a)
    if n < 8:
        raise InsufficientDataError(f"epipolar check needs >= 8 matches, got {n}")
    rng = np.random.default_rng(params.seed)
    gate = params.sampson_threshold ** 2
    best_mask = np.zeros(n, dtype=bool)
    best_F = None
    max_iters = params.max_iters
    it = 0
    while it < max_iters:
        it += 1
        sample = rng.choice(n, size=8, replace=False)
        F = _eight_point(pts_a[sample], pts_b[sample])
        d2 = kernels.sampson_distances(F, pts_a, pts_b)
        mask = d2 < gate
        if mask.sum() > best_mask.sum():
            best_mask = mask
            best_F = F
            max_iters = min(
                params.max_iters,
                _adaptive_iters(mask.sum() / n, 8, params.confidence, params.max_iters),
            )
    if best_F is None or best_mask.sum() < 8:
        raise ConsensusFailureError("no epipolar consensus")
    # Refit on the consensus set for a stable final model.
    F = _eight_point(pts_a[best_mask], pts_b[best_mask])
    final_mask = kernels.sampson_distances(F, pts_a, pts_b) < gate
    if final_mask.sum() >= best_mask.sum():
        best_mask, best_F = final_mask, F
    return EpipolarResult(best_mask, best_F, it)


def _bearings(K: CameraIntrinsics, pixels):
    d = np.column_stack([
        (pixels[:, 0] - K.cx) / K.fx,
        (pixels[:, 1] - K.cy) / K.fy,
        np.ones(len(pixels)),
    ])
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def p3p_solve(points_world, bearings):
    """Grunert three-point solve: camera-from-world pose candidates.

    The distance-ratio quartic is assembled numerically with polynomial
    arithmetic and solved with np.roots; each admissible root yields camera
    frame points whose absolute orientation gives one candidate.
    """
    P1, P2, P3 = points_world
    f1, f2, f3 = bearings
    a = np.linalg.norm(P2 - P3)
    b = np.linalg.norm(P1 - P3)
    c = np.linalg.norm(P1 - P2)
    if min(a, b, c) < 1e-12 or b < 1e-12:
        return []
    cos_alpha = float(f2 @ f3)
    cos_beta = float(f1 @ f3)
    cos_gamma = float(f1 @ f2)
    a_b = (a / b) ** 2
    c_b = (c / b) ** 2

    # u*B(v) = A(v) with u = s2/s1, v = s3/s1; substituting u into the second
    # ratio equation times B^2 gives the quartic A^2 - 2cg*A*B + C*B^2 = 0.
    A = np.array([1.0 - a_b + c_b, 2.0 * cos_beta * (a_b - c_b), c_b - a_b - 1.0])
    B = np.array([2.0 * cos_alpha, -2.0 * cos_gamma])
    C = np.array([-c_b, 2.0 * c_b * cos_beta, 1.0 - c_b])
    quartic = np.polyadd(
        np.polysub(np.polymul(A, A), 2.0 * cos_gamma * np.polymul(A, B)),
        np.polymul(C, np.polymul(B, B)),
    )
    if np.max(np.abs(quartic)) < 1e-14:
        return []
    roots = np.roots(quartic)

    candidates = []
    for v in roots:
        if abs(v.imag) > 1e-8 or v.real <= 0.0:
            continue
        v = float(v.real)
        Bv = 2.0 * (v * cos_alpha - cos_gamma)
        if abs(Bv) < 1e-12:
            continue
        u = float(np.polyval(A, v)) / Bv
        if u <= 0.0:
            continue
        denom = 1.0 + v * v - 2.0 * v * cos_beta
        if denom <= 1e-15:
            continue
        s1 = b / np.sqrt(denom)
        cam_pts = np.stack([s1 * f1, (u * s1) * f2, (v * s1) * f3])
        try:
            rigid = umeyama_sim3(points_world, cam_pts, with_scale=False)
        except DegenerateConfigurationError:
            continue
        candidates.append(RigidPose(rigid.rotation, rigid.translation))  # camera-from-world
    return candidates


def p3p_ransac(correspondences, K: CameraIntrinsics, params: RansacParams):
    """P3P RANSAC over (world point, pixel, Observation) correspondences.

    The inlier gate is per observation: squared reprojection error below
    chi2_threshold * sigma_k^2, so low-confidence and boundary features get
    a proportionally wider gate. Returns (world-from-camera pose, mask).
    """
    n = len(correspondences)
    if n < 4:
        raise InsufficientDataError(f"p3p needs >= 4 correspondences, got {n}")
    points = np.ascontiguousarray([c[0] for c in correspondences], dtype=float)
    pixels = np.ascontiguousarray([c[1] for c in correspondences], dtype=float)
    sigmas = np.array([c[2].sigma for c in correspondences], dtype=float)
    gates = params.chi2_threshold * sigmas ** 2
    bearings = _bearings(K, pixels)

    rng = np.random.default_rng(params.seed)
    best_mask = np.zeros(n, dtype=bool)
    best_pose = None
    best_err = np.inf
    max_iters = params.max_iters
    it = 0
    while it < max_iters:
        it += 1
        sample = rng.choice(n, size=3, replace=False)
        for T_cw in p3p_solve(points[sample], bearings[sample]):
            pix_hat, depth = kernels.project_points(
                T_cw.rotation, T_cw.translation, K.fx, K.fy, K.cx, K.cy, points
            )
            err2 = ((pixels - pix_hat) ** 2).sum(axis=1)
            mask = (depth > 0.0) & (err2 < gates)
            count = int(mask.sum())
            score = float(np.where(mask, err2 / sigmas ** 2, 0.0).sum())
            if count > best_mask.sum() or (count == best_mask.sum() and score < best_err):
                best_mask = mask
                best_pose = T_cw
                best_err = score
                max_iters = min(
                    params.max_iters,
                    _adaptive_iters(count / n, 3, params.confidence, params.max_iters),
                )
    if best_pose is None or best_mask.sum() < 4:
        raise ConsensusFailureError(
            f"no P3P hypothesis reached 4 inliers over {it} iterations"
        )
    return best_pose.inverse(), best_mask


def _huber_sqrt_weights(res, delta):
    """Per-observation sqrt IRLS weights for the Huber kernel."""
    norms = np.linalg.norm(res, axis=1)
    w = np.ones_like(norms)
    heavy = norms > delta
    w[heavy] = delta / norms[heavy]
    return np.sqrt(w)


def robust_reprojection_cost(res, delta):
    """Sum of Huber losses of the whitened residual norms."""
    e2 = (res ** 2).sum(axis=1)
    e = np.sqrt(e2)
    quad = e <= delta
    return float(e2[quad].sum() + (2.0 * delta * e[~quad] - delta * delta).sum())


def refine_pose_pnp(
    initial: RigidPose,
    inliers,
    K: CameraIntrinsics,
    huber_delta: float = 2.447,
    max_iters: int = 30,
    gradient_tol: float = 1e-10,
) -> RigidPose:
    """Levenberg-Marquardt weighted-PnP refinement of a world-from-camera pose.

    Minimizes the Huber-robustified, sigma-whitened reprojection error over
    the 6-DoF pose. Raises RefinementFailureError on divergence; the caller
    keeps its initial pose in that case.
    """
    if len(inliers) < 4:
        raise InsufficientDataError(f"refinement needs >= 4 inliers, got {len(inliers)}")
    points = np.ascontiguousarray([c[0] for c in inliers], dtype=float)
    pixels = np.ascontiguousarray([c[1] for c in inliers], dtype=float)
    inv_sigma = 1.0 / np.array([c[2].sigma for c in inliers], dtype=float)

    def residuals(pose: RigidPose):
        T_cw = pose.inverse()
        res, J_pose, _, _ = kernels.reproj_system(
            T_cw.rotation, T_cw.translation, K.fx, K.fy, K.cx, K.cy,
            points, pixels, inv_sigma,
        )
        return res, J_pose

    pose = initial
    res, J = residuals(pose)
    cost = robust_reprojection_cost(res, huber_delta)
    lam = 1e-6
    accepted_any = False
    for _ in range(max_iters):
        sw = _huber_sqrt_weights(res, huber_delta)
        rw = (res * sw[:, None]).reshape(-1)
        Jw = (J * sw[:, None, None]).reshape(-1, 6)
        g = Jw.T @ rw
        if np.max(np.abs(g)) < gradient_tol:
            return pose
        H = Jw.T @ Jw
        stepped = False
        while lam <= 1e8:
            Hd = H + lam * np.diag(np.maximum(np.diag(H), 1e-12))
            try:
                delta = np.linalg.solve(Hd, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = RigidPose(
                pose.rotation @ so3_exp(delta[:3]), pose.translation + delta[3:]
            )
            new_res, new_J = residuals(candidate)
            new_cost = robust_reprojection_cost(new_res, huber_delta)
            if new_cost < cost:
                rel_decrease = (cost - new_cost) / max(cost, 1e-30)
                step_norm = float(np.linalg.norm(delta))
                pose, res, J, cost = candidate, new_res, new_J, new_cost
                lam = max(lam / 3.0, 1e-12)
                accepted_any = True
                stepped = True
                if rel_decrease < 1e-6 or step_norm < 1e-8:
                    return pose
                break
            lam *= 10.0
        if not stepped:
            if accepted_any:
                return pose
            raise RefinementFailureError(
                "no cost-decreasing step found before lambda escalation limit"
            )
    return pose


def _exp_so3(phi):
    from .geometry import so3_exp

    return so3_exp(phi)
