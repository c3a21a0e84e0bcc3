# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy kernels; see numpy_impl for the contracts."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "native"


def project_points(cnp.ndarray[double, ndim=2] R_cw,
                   cnp.ndarray[double, ndim=1] t_cw,
                   double fx, double fy, double cx, double cy,
                   cnp.ndarray[double, ndim=2] points):
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[double, ndim=2] pixels = np.empty((n, 2))
    cdef cnp.ndarray[double, ndim=1] depths = np.empty(n)
    cdef double px, py, pz, x, y, z
    cdef Py_ssize_t i
    for i in range(n):
        px = points[i, 0]; py = points[i, 1]; pz = points[i, 2]
        x = R_cw[0, 0] * px + R_cw[0, 1] * py + R_cw[0, 2] * pz + t_cw[0]
        y = R_cw[1, 0] * px + R_cw[1, 1] * py + R_cw[1, 2] * pz + t_cw[1]
        z = R_cw[2, 0] * px + R_cw[2, 1] * py + R_cw[2, 2] * pz + t_cw[2]
        depths[i] = z
        if z != 0.0:
            pixels[i, 0] = fx * x / z + cx
            pixels[i, 1] = fy * y / z + cy
        else:
            pixels[i, 0] = np.inf if x > 0 else (-np.inf if x < 0 else np.nan)
            pixels[i, 1] = np.inf if y > 0 else (-np.inf if y < 0 else np.nan)
    return pixels, depths


def reproj_system(cnp.ndarray[double, ndim=2] R_cw,
                  cnp.ndarray[double, ndim=1] t_cw,
                  double fx, double fy, double cx, double cy,
                  cnp.ndarray[double, ndim=2] points,
                  cnp.ndarray[double, ndim=2] pixels,
                  cnp.ndarray[double, ndim=1] inv_sigma):
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[double, ndim=2] res = np.empty((n, 2))
    cdef cnp.ndarray[double, ndim=3] J_pose = np.empty((n, 2, 6))
    cdef cnp.ndarray[double, ndim=3] J_point = np.empty((n, 2, 3))
    cdef cnp.ndarray[double, ndim=1] depths = np.empty(n)
    cdef double px, py, pz, x, y, z, iz, w
    cdef double a00, a02, a11, a12  # nonzero entries of d(pixel)/d(p_cam)
    cdef double g0, g1, g2, h0, h1, h2
    cdef Py_ssize_t i, k
    for i in range(n):
        px = points[i, 0]; py = points[i, 1]; pz = points[i, 2]
        x = R_cw[0, 0] * px + R_cw[0, 1] * py + R_cw[0, 2] * pz + t_cw[0]
        y = R_cw[1, 0] * px + R_cw[1, 1] * py + R_cw[1, 2] * pz + t_cw[1]
        z = R_cw[2, 0] * px + R_cw[2, 1] * py + R_cw[2, 2] * pz + t_cw[2]
        depths[i] = z
        iz = 1.0 / z if z != 0.0 else np.inf
        w = inv_sigma[i]
        res[i, 0] = (pixels[i, 0] - (fx * x * iz + cx)) * w
        res[i, 1] = (pixels[i, 1] - (fy * y * iz + cy)) * w
        a00 = fx * iz
        a02 = -fx * x * iz * iz
        a11 = fy * iz
        a12 = -fy * y * iz * iz
        # rows of J_proj @ [p_cam]x  (skew of camera-frame point)
        g0 = a02 * (-y)
        g1 = a00 * (-z) + a02 * x
        g2 = a00 * y
        h0 = a11 * z + a12 * (-y)
        h1 = a12 * x
        h2 = a11 * (-x)
        J_pose[i, 0, 0] = -w * g0
        J_pose[i, 0, 1] = -w * g1
        J_pose[i, 0, 2] = -w * g2
        J_pose[i, 1, 0] = -w * h0
        J_pose[i, 1, 1] = -w * h1
        J_pose[i, 1, 2] = -w * h2
        for k in range(3):
            # row of J_proj @ R_cw
            g0 = a00 * R_cw[0, k] + a02 * R_cw[2, k]
            h0 = a11 * R_cw[1, k] + a12 * R_cw[2, k]
            J_pose[i, 0, 3 + k] = w * g0
            J_pose[i, 1, 3 + k] = w * h0
            J_point[i, 0, k] = -w * g0
            J_point[i, 1, k] = -w * h0
    return res, J_pose, J_point, depths


def sampson_distances(cnp.ndarray[double, ndim=2] F,
                      cnp.ndarray[double, ndim=2] pts_a,
                      cnp.ndarray[double, ndim=2] pts_b):
    cdef Py_ssize_t n = pts_a.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double ax, ay, bx, by
    cdef double fa0, fa1, fa2, fb0, fb1, num, den
    cdef Py_ssize_t i
    for i in range(n):
        ax = pts_a[i, 0]; ay = pts_a[i, 1]
        bx = pts_b[i, 0]; by = pts_b[i, 1]
        fa0 = F[0, 0] * ax + F[0, 1] * ay + F[0, 2]
        fa1 = F[1, 0] * ax + F[1, 1] * ay + F[1, 2]
        fa2 = F[2, 0] * ax + F[2, 1] * ay + F[2, 2]
        fb0 = F[0, 0] * bx + F[1, 0] * by + F[2, 0]
        fb1 = F[0, 1] * bx + F[1, 1] * by + F[2, 1]
        num = bx * fa0 + by * fa1 + fa2
        num = num * num
        den = fa0 * fa0 + fa1 * fa1 + fb0 * fb0 + fb1 * fb1
        out[i] = num / den if den > 0.0 else np.inf
    return out
