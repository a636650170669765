"""
总损失对对数逆深度与位姿切向量的解析梯度

掩码在一次求值内视为常量，梯度不穿过掩码的选择。
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from apps.geometry.camera import DepthMap
from apps.masking.config import LossConfig, MaskFlags
from apps.masking.loss import evaluate_term, scale_weights, smoothness_weights
from apps.photometric.config import PhotometricConfig
from apps.photometric.losses import (
    photometric_error, photometric_error_vjp, smoothness_loss, smoothness_loss_and_gradient,
)
from apps.photometric.pyramid import build_pyramid, upsample_adjoint
from apps.system.exceptions import ConfigError


@dataclass
class ObjectiveGradient:
    """按尺度拆开的梯度，已乘上 η·f^r 与 λ·e^r"""

    photometric_rho: List[np.ndarray]
    smoothness_rho: List[np.ndarray]
    photometric_pose: np.ndarray  # (尺度, 源帧, 6)
    cfg: LossConfig

    def total(self):
        d_rho = [p + s for p, s in zip(self.photometric_rho, self.smoothness_rho)]
        return d_rho, self.photometric_pose.sum(axis=0)

    def stage(self, scale):
        """只含尺度 scale 的项，并去掉 f^r、e^r 权重"""
        f_r = self.cfg.f ** scale
        e_r = self.cfg.e ** scale
        d_rho = self.photometric_rho[scale] / f_r + self.smoothness_rho[scale] / e_r
        return d_rho, self.photometric_pose[scale] / f_r


def inverse_depth_pyramid(depth: DepthMap, scales):
    """把深度图转成各尺度的逆深度（在逆深度上做 2×2 均值）"""
    return build_pyramid(depth.inverse(), scales)


def objective_gradient(result, bundle, inv_depths, cfg: LossConfig = None, pcfg: PhotometricConfig = None):
    """result 必须来自 total_loss(..., with_jacobians=True)"""
    cfg = cfg or LossConfig()
    pcfg = pcfg or PhotometricConfig()
    weights = scale_weights(cfg)
    smooth_weights = smoothness_weights(cfg)
    n_sources = bundle.num_sources

    photometric_rho = [np.zeros(bundle.level_shape(r)) for r in range(cfg.scales)]
    photometric_pose = np.zeros((cfg.scales, n_sources, 6))
    for r in range(cfg.scales):
        for s in range(n_sources):
            ev = result.evaluations[r][s]
            if ev.jacobians is None:
                raise ConfigError('求梯度需要带雅可比的损失结果（with_jacobians=True）')
            count = result.kept[r][s]
            if count == 0:
                continue
            mask = result.masks[r][s].combined
            upstream = cfg.eta * weights[r] * mask / count
            grad_image = photometric_error_vjp(ev.target, ev.warp.image, upstream, pcfg)

            d_depth = np.sum(grad_image * ev.jacobians.d_intensity_d_depth, axis=-1)
            depth = np.where(ev.depth.valid, ev.depth.values, 0.0)
            # D = exp(−ρ)
            d_rho = -d_depth * depth
            if ev.upsample > 1:
                d_rho = upsample_adjoint(d_rho, ev.upsample)
            photometric_rho[r] += d_rho
            photometric_pose[r, s] = np.einsum('hwc,hwcj->j', grad_image, ev.jacobians.d_intensity_d_pose)

    smoothness_rho = []
    for r in range(cfg.scales):
        _, grad = smoothness_loss_and_gradient(inv_depths[r], bundle.target_pyramid[r])
        # d = exp(ρ)
        smoothness_rho.append(cfg.lambda_ * smooth_weights[r] * grad * inv_depths[r])

    return ObjectiveGradient(
        photometric_rho=photometric_rho,
        smoothness_rho=smoothness_rho,
        photometric_pose=photometric_pose,
        cfg=cfg,
    )


def frozen_mask_loss(bundle, inv_depths, poses, masks, cfg: LossConfig = None, pcfg: PhotometricConfig = None):
    """用给定掩码（masks[r][s] 为布尔图）重新计算总损失，用于有限差分校验"""
    cfg = cfg or LossConfig()
    pcfg = pcfg or PhotometricConfig()
    weights = scale_weights(cfg)
    smooth_weights = smoothness_weights(cfg)
    flags = MaskFlags.none()

    photometric = 0.0
    for r in range(cfg.scales):
        for s in range(bundle.num_sources):
            mask = masks[r][s]
            count = int(mask.sum())
            if count == 0:
                continue
            ev = evaluate_term(bundle, inv_depths[r], poses[s], r, s, cfg, pcfg, flags)
            error = photometric_error(ev.target, ev.warp.image, pcfg)
            photometric += weights[r] * error.values[mask].sum() / count
    smoothness = sum(
        smooth_weights[r] * smoothness_loss(inv_depths[r], bundle.target_pyramid[r]) for r in range(cfg.scales)
    )
    return float(cfg.eta * photometric + cfg.lambda_ * smoothness)
