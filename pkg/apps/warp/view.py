"""
逆向变形视图合成 I_{s→t} = I_s⟨proj(D, T_{t→s}, K)⟩ 及其解析雅可比
"""
from dataclasses import dataclass

import numpy as np

from apps.geometry.projection import project_grid
from apps.system.exceptions import BadShapeError

from .sampling import as_image, sample_grid


@dataclass(frozen=True)
class WarpResult:
    image: np.ndarray      # (H, W, C)，越界处为 0
    in_bounds: np.ndarray  # (H, W) bool，等于 principled_mask
    coords: np.ndarray     # (H, W, 2)，采样坐标 (u, v)


@dataclass(frozen=True)
class WarpJacobians:
    d_intensity_d_depth: np.ndarray  # (H, W, C)
    d_intensity_d_pose: np.ndarray   # (H, W, C, 6)，(ω, t) 左扰动


def _check_shapes(source, depth, k):
    if source.shape[:2] != k.shape or depth.shape != k.shape:
        raise BadShapeError(
            '源图像、深度图与内参尺寸不一致',
            data={'source': list(source.shape), 'depth': list(depth.shape), 'intrinsics': list(k.shape)},
        )


def synthesize_view(source, depth, pose, k):
    result, _ = warp_with_jacobians(source, depth, pose, k, with_jacobians=False)
    return result


def warp_jacobians(source, depth, pose, k):
    _, jacobians = warp_with_jacobians(source, depth, pose, k)
    return jacobians


def warp_with_jacobians(source, depth, pose, k, with_jacobians=True):
    source = as_image(source)
    _check_shapes(source, depth, k)
    grid = project_grid(depth.values, pose, k, valid=depth.valid)
    in_bounds = grid.in_bounds(k.width, k.height)
    coords = np.stack([np.where(in_bounds, grid.u, 0.0), np.where(in_bounds, grid.v, 0.0)], axis=-1)

    if not with_jacobians:
        image = sample_grid(source, grid.u, grid.v, in_bounds)
        return WarpResult(image=image, in_bounds=in_bounds, coords=coords), None

    image, grad_u, grad_v = sample_grid(source, grid.u, grid.v, in_bounds, with_gradient=True)
    result = WarpResult(image=image, in_bounds=in_bounds, coords=coords)

    height, width, channels = image.shape
    d_depth = np.zeros((height, width, channels))
    d_pose = np.zeros((height, width, channels, 6))
    if not in_bounds.any():
        return result, WarpJacobians(d_intensity_d_depth=d_depth, d_intensity_d_pose=d_pose)

    points = grid.points[in_bounds]
    xs, ys, zs = points[:, 0], points[:, 1], points[:, 2]
    zero = np.zeros_like(zs)
    # ∂(u, v)/∂X_s
    du_dx = np.stack([k.fx / zs, zero, -k.fx * xs / zs ** 2], axis=-1)
    dv_dx = np.stack([zero, k.fy / zs, -k.fy * ys / zs ** 2], axis=-1)

    # ∂X_s/∂D = R·K⁻¹p_t
    v_t, u_t = np.nonzero(in_bounds)
    rays = np.stack([(u_t - k.cx) / k.fx, (v_t - k.cy) / k.fy, np.ones_like(zs)], axis=-1)
    dx_dd = rays @ pose.rotation.T
    du_dd = np.sum(du_dx * dx_dd, axis=-1)
    dv_dd = np.sum(dv_dx * dx_dd, axis=-1)

    # 左扰动下 ∂X_s/∂ω_j = e_j × (R X_t)，故 ∂u/∂ω = (R X_t) × ∂u/∂X_s
    q = points - pose.translation
    du_dxi = np.concatenate([np.cross(q, du_dx), du_dx], axis=-1)
    dv_dxi = np.concatenate([np.cross(q, dv_dx), dv_dx], axis=-1)

    gu = grad_u[in_bounds]
    gv = grad_v[in_bounds]
    d_depth[in_bounds] = gu * du_dd[:, None] + gv * dv_dd[:, None]
    d_pose[in_bounds] = gu[:, :, None] * du_dxi[:, None, :] + gv[:, :, None] * dv_dxi[:, None, :]
    return result, WarpJacobians(d_intensity_d_depth=d_depth, d_intensity_d_pose=d_pose)
