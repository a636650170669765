"""
目标像素 -> 源像素投影：p_s ≃ K·T_{t→s}·D(p_t)·K⁻¹·p_t
"""
from dataclasses import dataclass

import numpy as np

from apps.system.exceptions import BehindCameraError

from .camera import PixelCoord

MIN_Z = 1e-9
# 距整数格点小于该值的坐标吸附到格点，保证恒等位姿逐像素精确映射
LATTICE_SNAP = 1e-9


def snap_to_lattice(values):
    nearest = np.round(values)
    return np.where(np.abs(values - nearest) < LATTICE_SNAP, nearest, values)


def _project_arrays(u_t, v_t, depth, pose, k):
    # 只用逐元素运算，单点与整图两条路径的舍入完全一致
    x = (u_t - k.cx) / k.fx * depth
    y = (v_t - k.cy) / k.fy * depth
    z = depth
    r, t = pose.rotation, pose.translation
    xs = r[0, 0] * x + r[0, 1] * y + r[0, 2] * z + t[0]
    ys = r[1, 0] * x + r[1, 1] * y + r[1, 2] * z + t[1]
    zs = r[2, 0] * x + r[2, 1] * y + r[2, 2] * z + t[2]
    in_front = zs > MIN_Z
    safe_z = np.where(in_front, zs, 1.0)
    with np.errstate(invalid='ignore'):
        u = snap_to_lattice(np.where(in_front, k.fx * xs / safe_z + k.cx, np.nan))
        v = snap_to_lattice(np.where(in_front, k.fy * ys / safe_z + k.cy, np.nan))
    in_front = in_front & np.isfinite(u) & np.isfinite(v)
    return np.stack([xs, ys, zs], axis=-1), u, v, in_front


def project(p_t, depth, pose, k):
    """单个像素的投影；结果可能落在图像外，边界检查由调用方负责"""
    _, u, v, in_front = _project_arrays(
        np.float64(p_t[0]), np.float64(p_t[1]), np.float64(depth), pose, k,
    )
    if not bool(in_front):
        raise BehindCameraError('投影点位于相机后方', data={'p_t': [float(p_t[0]), float(p_t[1])]})
    return PixelCoord(float(u), float(v))


@dataclass(frozen=True)
class ProjectionGrid:
    """整幅图的投影结果

    points: 源相机坐标系下的三维点 (H, W, 3)
    u, v: 源图像中的连续像素坐标
    in_front: z > MIN_Z 且深度有效
    """

    points: np.ndarray
    u: np.ndarray
    v: np.ndarray
    in_front: np.ndarray

    def in_bounds(self, width, height):
        with np.errstate(invalid='ignore'):
            return (
                self.in_front
                & (self.u >= 0) & (self.u <= width - 1)
                & (self.v >= 0) & (self.v <= height - 1)
            )


def project_grid(depth_values, pose, k, valid=None):
    depth_values = np.asarray(depth_values, dtype=np.float64)
    v_t, u_t = np.mgrid[0:k.height, 0:k.width].astype(np.float64)
    points, u, v, in_front = _project_arrays(u_t, v_t, depth_values, pose, k)
    if valid is not None:
        in_front = in_front & valid
    return ProjectionGrid(points=points, u=u, v=v, in_front=in_front)


def in_image(p, k):
    return 0 <= p.u <= k.width - 1 and 0 <= p.v <= k.height - 1


def principled_mask(depth, pose, k):
    """p_s 落在闭区间 [0, W−1]×[0, H−1] 内且不在相机后方"""
    grid = project_grid(depth.values, pose, k, valid=depth.valid)
    return grid.in_bounds(k.width, k.height)
