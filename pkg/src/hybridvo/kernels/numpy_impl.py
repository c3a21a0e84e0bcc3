"""Vectorized numpy implementations of the hot per-observation kernels.

These match hybridvo.kernels._native bit-for-bit up to floating point
reassociation; the parity suite pins the agreement tolerance.
"""

import numpy as np

BACKEND_NAME = "numpy"


def project_points(R_cw, t_cw, fx, fy, cx, cy, points):
    """Project N world points through a camera-from-world transform.

    Returns (pixels (N,2), depths (N,)). No culling: callers gate on depth.
    Zero depth produces inf/nan pixels rather than raising.
    """
    p_cam = points @ R_cw.T + t_cw
    z = p_cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = fx * p_cam[:, 0] / z + cx
        v = fy * p_cam[:, 1] / z + cy
    return np.stack([u, v], axis=1), z


def reproj_system(R_cw, t_cw, fx, fy, cx, cy, points, pixels, inv_sigma):
    """Whitened reprojection residuals and Jacobians for N observations.

    Residual r = (z_obs - pi(p_cam)) / sigma. Pose Jacobian is with respect
    to a right perturbation of the world-from-camera pose (R <- R exp([phi]x),
    t <- t + dt), columns ordered [phi, dt]. Returns
    (res (N,2), J_pose (N,2,6), J_point (N,2,3), depths (N,)).
    """
    n = points.shape[0]
    p_cam = points @ R_cw.T + t_cw
    x, y, z = p_cam[:, 0], p_cam[:, 1], p_cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        iz = 1.0 / z
    u = fx * x * iz + cx
    v = fy * y * iz + cy
    res = (pixels - np.stack([u, v], axis=1)) * inv_sigma[:, None]

    # d(pixel)/d(p_cam)
    J_proj = np.zeros((n, 2, 3))
    J_proj[:, 0, 0] = fx * iz
    J_proj[:, 0, 2] = -fx * x * iz * iz
    J_proj[:, 1, 1] = fy * iz
    J_proj[:, 1, 2] = -fy * y * iz * iz

    # d(p_cam)/d(phi) = [p_cam]x, d(p_cam)/d(dt) = -R_cw
    skew_pc = np.zeros((n, 3, 3))
    skew_pc[:, 0, 1] = -z
    skew_pc[:, 0, 2] = y
    skew_pc[:, 1, 0] = z
    skew_pc[:, 1, 2] = -x
    skew_pc[:, 2, 0] = -y
    skew_pc[:, 2, 1] = x

    w = inv_sigma[:, None, None]
    J_pose = np.empty((n, 2, 6))
    J_pose[:, :, :3] = -w * (J_proj @ skew_pc)
    J_pose[:, :, 3:] = w * (J_proj @ R_cw)
    J_point = -w * (J_proj @ R_cw)
    return res, J_pose, J_point, z


def sampson_distances(F, pts_a, pts_b):
    """Squared Sampson distance (pixels^2) of each correspondence to F."""
    n = pts_a.shape[0]
    ones = np.ones((n, 1))
    xa = np.hstack([pts_a, ones])
    xb = np.hstack([pts_b, ones])
    Fxa = xa @ F.T
    Ftxb = xb @ F
    num = np.einsum("ij,ij->i", xb, Fxa) ** 2
    den = Fxa[:, 0] ** 2 + Fxa[:, 1] ** 2 + Ftxb[:, 0] ** 2 + Ftxb[:, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        d = num / den
    return np.where(den > 0.0, d, np.inf)
