"""Rotation, rigid-pose and projective primitives.

Conventions used throughout the package:

- rotations are 3x3 orthonormal matrices; axis-angle vectors are in radians
- a camera pose is stored world-from-camera: ``p_world = R @ p_cam + t``
- ``project`` takes the inverse (camera-from-world) transform, so callers
  working with camera poses invert first
- quaternions appear only at file boundaries, ordered (qx, qy, qz, qw)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from .errors import BehindCameraError, InsufficientParallaxError

# Below this angle the Rodrigues terms use their Taylor expansions.
_SMALL_ANGLE = 1e-8


def skew(v):
    """3x3 skew-symmetric matrix such that skew(a) @ b == cross(a, b)."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def so3_exp(omega):
    """Rodrigues formula: axis-angle vector (radians) to rotation matrix."""
    omega = np.asarray(omega, dtype=float)
    theta = np.linalg.norm(omega)
    W = skew(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * (W @ W)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * W + b * (W @ W)


def so3_log(R):
    """Principal axis-angle vector of a rotation matrix, norm in [0, pi].

    Angles within 1e-6 of pi switch to extraction from the symmetric part
    of R, which stays well conditioned where the sin(theta) division blows up.
    """
    R = np.asarray(R, dtype=float)
    trace = np.clip((np.trace(R) - 1.0) * 0.5, -1.0, 1.0)
    theta = np.arccos(trace)
    if theta < _SMALL_ANGLE:
        # First-order: vee of the antisymmetric part.
        return 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta > np.pi - 1e-6:
        # Near pi: R + I ~ 2 (I cos + axis axis^T (1 - cos)) has the axis as
        # its dominant column; signs recovered from the off-diagonal terms.
        S = R + np.eye(3)
        axis = S[:, np.argmax(np.diag(S))]
        axis = axis / np.linalg.norm(axis)
        # Align sign with the antisymmetric part when it is not fully degenerate.
        w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        if w @ axis < 0.0:
            axis = -axis
        return theta * axis
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return theta / (2.0 * np.sin(theta)) * w


def is_rotation(R, tol=1e-9):
    """Check orthonormality and det(R) = +1 within tol."""
    R = np.asarray(R)
    return (
        R.shape == (3, 3)
        and np.allclose(R.T @ R, np.eye(3), atol=tol)
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def rotation_to_quat(R):
    """Rotation matrix to (qx, qy, qz, qw)."""
    return _ScipyRotation.from_matrix(R).as_quat()


def quat_to_rotation(q):
    """(qx, qy, qz, qw) to rotation matrix; the quaternion is normalized first."""
    return _ScipyRotation.from_quat(np.asarray(q, dtype=float)).as_matrix()


@dataclass(frozen=True)
class RigidPose:
    """SE(3) element: rotation plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "RigidPose":
        return RigidPose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(T) -> "RigidPose":
        T = np.asarray(T, dtype=float)
        return RigidPose(T[:3, :3].copy(), T[:3, 3].copy())

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def compose(self, other: "RigidPose") -> "RigidPose":
        return RigidPose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidPose":
        Rt = self.rotation.T
        return RigidPose(Rt, -Rt @ self.translation)

    def apply(self, points):
        """Transform one (3,) point or an (N, 3) array of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def copy(self) -> "RigidPose":
        return RigidPose(self.rotation.copy(), self.translation.copy())


@dataclass(frozen=True)
class SimilarityTransform:
    """Sim(3) element: uniform scale > 0, rotation, translation."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError(f"similarity scale must be positive, got {self.scale}")

    @staticmethod
    def identity() -> "SimilarityTransform":
        return SimilarityTransform(1.0, np.eye(3), np.zeros(3))

    def apply(self, points):
        p = np.asarray(points, dtype=float)
        return self.scale * (p @ self.rotation.T) + self.translation

    def inverse(self) -> "SimilarityTransform":
        s_inv = 1.0 / self.scale
        Rt = self.rotation.T
        return SimilarityTransform(s_inv, Rt, -s_inv * (Rt @ self.translation))

    def compose(self, other: "SimilarityTransform") -> "SimilarityTransform":
        return SimilarityTransform(
            self.scale * other.scale,
            self.rotation @ other.rotation,
            self.scale * (self.rotation @ other.translation) + self.translation,
        )


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels, z forward / x right / y down."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    def contains(self, pixel) -> bool:
        x, y = pixel
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


def relative_pose(T_i: RigidPose, T_j: RigidPose) -> RigidPose:
    """Relative pose T_i^-1 * T_j, so that T_i o result == T_j."""
    return T_i.inverse().compose(T_j)


def project(K: CameraIntrinsics, T_cw: RigidPose, point_world):
    """Project a world point through the camera-from-world transform T_cw.

    Raises BehindCameraError for non-positive depth; the caller treats the
    observation as invalid.
    """
    p_cam = T_cw.apply(point_world)
    if p_cam[2] <= 0.0:
        raise BehindCameraError(f"depth {p_cam[2]:.6g} <= 0")
    return np.array([
        K.fx * p_cam[0] / p_cam[2] + K.cx,
        K.fy * p_cam[1] / p_cam[2] + K.cy,
    ])


def _backproject_ray(K: CameraIntrinsics, pixel):
    """Unit bearing vector in the camera frame for a pixel."""
    d = np.array([(pixel[0] - K.cx) / K.fx, (pixel[1] - K.cy) / K.fy, 1.0])
    return d / np.linalg.norm(d)


def triangulate(
    T_a: RigidPose,
    T_b: RigidPose,
    K: CameraIntrinsics,
    pix_a,
    pix_b,
    min_parallax_deg: float = 1.0,
):
    """Two-view linear triangulation; T_a, T_b are world-from-camera poses.

    Solves the homogeneous DLT system by SVD. Raises InsufficientParallaxError
    when the viewing rays subtend less than min_parallax_deg.
    """
    ray_a = T_a.rotation @ _backproject_ray(K, pix_a)
    ray_b = T_b.rotation @ _backproject_ray(K, pix_b)
    cos_angle = np.clip(ray_a @ ray_b, -1.0, 1.0)
    parallax_deg = np.degrees(np.arccos(cos_angle))
    if parallax_deg < min_parallax_deg:
        raise InsufficientParallaxError(
            f"parallax {parallax_deg:.4f} deg below {min_parallax_deg} deg"
        )

    Km = K.matrix()
    rows = []
    for T_wc, pix in ((T_a, pix_a), (T_b, pix_b)):
        T_cw = T_wc.inverse()
        P = Km @ np.hstack([T_cw.rotation, T_cw.translation[:, None]])
        rows.append(pix[0] * P[2] - P[0])
        rows.append(pix[1] * P[2] - P[1])
    A = np.stack(rows)
    _, _, Vt = np.linalg.svd(A)
    X = Vt[-1]
    if abs(X[3]) < 1e-12:
        raise InsufficientParallaxError("triangulated point at infinity")
    return X[:3] / X[3]


# --- SE(3) exp/log, used for constant-velocity interpolation ---

def _so3_left_jacobian(omega):
    theta = np.linalg.norm(omega)
    W = skew(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + 0.5 * W + (W @ W) / 6.0
    t2 = theta * theta
    return (
        np.eye(3)
        + (1.0 - np.cos(theta)) / t2 * W
        + (theta - np.sin(theta)) / (t2 * theta) * (W @ W)
    )


def se3_exp(xi) -> RigidPose:
    """xi = [omega; rho] (rotation first) to a rigid pose."""
    xi = np.asarray(xi, dtype=float)
    omega, rho = xi[:3], xi[3:]
    return RigidPose(so3_exp(omega), _so3_left_jacobian(omega) @ rho)


def se3_log(T: RigidPose):
    """Inverse of se3_exp, returning [omega; rho]."""
    omega = so3_log(T.rotation)
    V = _so3_left_jacobian(omega)
    rho = np.linalg.solve(V, T.translation)
    return np.concatenate([omega, rho])


def interpolate_pose(T: RigidPose, alpha: float) -> RigidPose:
    """Fraction alpha of the screw motion T: exp(alpha * log(T))."""
    return se3_exp(alpha * se3_log(T))
