"""
对数逆深度与位姿的梯度下降

由粗到细：先依次只用尺度 S−1, …, 1 的项更新该尺度的 ρ 与位姿，每段结束后把 ρ
最近邻上采样给下一个更细的尺度；最后对所有尺度联合更新。每次迭代都在当前参数下
计算完整的总损失并记入 loss_history，掩码在这次求值内视为常量。
"""
import logging
from dataclasses import replace

import numpy as np

from apps.geometry.pose import Pose
from apps.masking.loss import total_loss
from apps.photometric.pyramid import upsample_nearest
from apps.system.exceptions import BadShapeError, DivergedError

from .config import OptimConfig
from .objective import objective_gradient
from .state import OptimState

logger = logging.getLogger(__name__)


def initial_state(bundle, cfg: OptimConfig, inv_depths=None):
    """inv_depths 为各尺度的逆深度初值；缺省时为常数 init_inv_depth 加可选的高斯扰动"""
    scales = cfg.loss.scales
    if scales > bundle.scales:
        raise BadShapeError('样本金字塔层数不足', data={'bundle': bundle.scales, 'scales': scales})
    if inv_depths is not None:
        if len(inv_depths) != scales:
            raise BadShapeError('逆深度初值层数与尺度数不一致', data={'given': len(inv_depths), 'scales': scales})
        log_inv = []
        for r, inv in enumerate(inv_depths):
            inv = np.asarray(inv, dtype=np.float64)
            if inv.shape != bundle.level_shape(r) or not np.all(inv > 0):
                raise BadShapeError(f'尺度 {r} 的逆深度初值不合法', data={'shape': list(inv.shape)})
            log_inv.append(np.log(inv))
    else:
        rng = np.random.default_rng(cfg.seed)
        log_inv = []
        for r in range(scales):
            rho = np.full(bundle.level_shape(r), np.log(cfg.init_inv_depth))
            if cfg.init_jitter > 0:
                rho = rho + cfg.init_jitter * rng.standard_normal(rho.shape)
            log_inv.append(rho)

    if cfg.pose_init is None:
        poses = [Pose.identity() for _ in range(bundle.num_sources)]
    else:
        poses = list(cfg.pose_init)
        if len(poses) != bundle.num_sources:
            raise BadShapeError('位姿初值数量与源帧数量不一致', data={'poses': len(poses), 'sources': bundle.num_sources})
    return OptimState(log_inv_depths=tuple(log_inv), poses=tuple(poses))


def _evaluate(bundle, state, cfg, with_jacobians):
    return total_loss(
        bundle, state.inv_depths, state.poses,
        cfg=cfg.loss, ocfg=cfg.outlier, flags=cfg.flags, pcfg=cfg.photometric,
        workers=cfg.workers, with_jacobians=with_jacobians,
    )


def _check_finite(state, last_finite, result=None):
    if not state.is_finite() or (result is not None and not np.isfinite(result.loss)):
        raise DivergedError(
            f'第 {state.iteration} 次迭代损失发散',
            state=last_finite,
            data={'iteration': state.iteration, 'loss': None if result is None else result.loss},
        )


def _step(state, gradient, scale, step_scale, cfg: OptimConfig):
    if scale is None:
        d_rho, d_pose = gradient.total()
        active = range(cfg.loss.scales)
    else:
        d_rho_r, d_pose = gradient.stage(scale)
        d_rho = {scale: d_rho_r}
        active = [scale]
    if not (np.isfinite(d_pose).all() and all(np.isfinite(d_rho[r]).all() for r in active)):
        raise DivergedError(f'第 {state.iteration} 次迭代梯度发散', state=state, data={'iteration': state.iteration})

    log_inv = list(state.log_inv_depths)
    if cfg.optimize_depth:
        for r in active:
            # 单像素梯度约为 1/N_r 量级，按像素数放大后共用一个步长
            pixels = log_inv[r].size
            log_inv[r] = log_inv[r] - cfg.step_size * step_scale * pixels * d_rho[r]

    poses = list(state.poses)
    if cfg.optimize_pose:
        for s, pose in enumerate(poses):
            delta = np.concatenate([
                -cfg.rotation_step * step_scale * d_pose[s, :3],
                -cfg.translation_step * step_scale * d_pose[s, 3:],
            ])
            poses[s] = pose.perturbed(delta)
    return log_inv, poses


def optimize(bundle, cfg: OptimConfig = None, inv_depths=None, callback=None):
    """返回最终状态；loss_history 为每次迭代更新前的损失，再加上最终损失

    callback(state, result) 在每次迭代求值后调用，state 即 result 对应的参数。
    """
    cfg = cfg or OptimConfig()
    state = initial_state(bundle, cfg, inv_depths)
    last_finite = state

    for scale, iterations in cfg.stage_plan():
        for _ in range(iterations):
            _check_finite(state, last_finite)
            result = _evaluate(bundle, state, cfg, with_jacobians=True)
            _check_finite(state, last_finite, result)
            last_finite = state
            if callback is not None:
                callback(state, result)
            if cfg.log_every and state.iteration % cfg.log_every == 0:
                logger.info(
                    'iter %d stage %s loss %.6f kept %.3f',
                    state.iteration, 'joint' if scale is None else scale, result.loss, result.kept_fraction(0),
                )
            gradient = objective_gradient(result, bundle, state.inv_depths, cfg.loss, cfg.photometric)
            log_inv, poses = _step(state, gradient, scale, cfg.step_scale(state.iteration), cfg)
            state = state.advanced(log_inv, poses, result.loss, result.kept_fraction(0))

        if scale is not None and iterations > 0 and cfg.optimize_depth:
            log_inv = list(state.log_inv_depths)
            log_inv[scale - 1] = upsample_nearest(log_inv[scale], 2)
            state = replace(state, log_inv_depths=tuple(log_inv))

    _check_finite(state, last_finite)
    result = _evaluate(bundle, state, cfg, with_jacobians=False)
    _check_finite(state, last_finite, result)
    final = OptimState(
        log_inv_depths=state.log_inv_depths,
        poses=state.poses,
        iteration=state.iteration,
        loss_history=state.loss_history + [result.loss],
        kept_history=state.kept_history + [result.kept_fraction(0)],
        last_result=result,
    )
    logger.info(
        '优化结束: %d 次迭代, 初始损失 %.6f, 最终损失 %.6f',
        final.iteration, final.loss_history[0], final.loss_history[-1],
    )
    return final
