"""
中心差分梯度校验
"""
import logging

import numpy as np

from .objective import frozen_mask_loss, objective_gradient

logger = logging.getLogger(__name__)


def central_difference(func, x0, eps=1e-6, indices=None):
    """func 对 x0 各分量（或 indices 所列的扁平下标）的中心差分

    x0 不会被修改。返回与 indices 等长的一维数组；indices 为 None 时返回与 x0 同形的数组。
    """
    x0 = np.asarray(x0, dtype=np.float64)
    flat = x0.reshape(-1)
    targets = range(flat.size) if indices is None else indices
    grad = np.zeros(len(targets))
    for n, j in enumerate(targets):
        x = flat.copy()
        x[j] = flat[j] + eps
        f_plus = func(x.reshape(x0.shape))
        x[j] = flat[j] - eps
        f_minus = func(x.reshape(x0.shape))
        grad[n] = (f_plus - f_minus) / (2 * eps)
    if indices is None:
        return grad.reshape(x0.shape)
    return grad


def relative_error(analytic, numeric, floor=1e-12):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(numeric).max(), np.abs(analytic).max(), floor)
    return float(np.abs(analytic - numeric).max() / scale)


def pose_gradient_check(bundle, state, result, cfg, eps=1e-6):
    """在 state 处（掩码取 result 的掩码）比较位姿梯度的解析值与中心差分

    result 必须是 state 处 with_jacobians=True 的 total_loss 结果。
    """
    inv_depths = state.inv_depths
    masks = [[m.combined for m in row] for row in result.masks]
    _, analytic = objective_gradient(result, bundle, inv_depths, cfg.loss, cfg.photometric).total()

    rows = []
    for s, pose in enumerate(state.poses):
        def loss_at(delta, s=s, pose=pose):
            poses = list(state.poses)
            poses[s] = pose.perturbed(delta)
            return frozen_mask_loss(bundle, inv_depths, poses, masks, cfg.loss, cfg.photometric)

        numeric = central_difference(loss_at, np.zeros(6), eps)
        error = relative_error(analytic[s], numeric)
        rows.append({
            'source': bundle.source_ids[s],
            'analytic': analytic[s].tolist(),
            'numeric': numeric.tolist(),
            'relative_error': error,
        })
        logger.info('源帧 %d 位姿梯度相对误差 %.3e', bundle.source_ids[s], error)
    return rows
