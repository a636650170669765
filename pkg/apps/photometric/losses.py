"""
光度误差 PE = α·(1−SSIM)/2 + (1−α)·|a−b|₁ 与边缘感知平滑项
"""
from dataclasses import dataclass

import numpy as np

from apps.system.exceptions import BadShapeError, DegenerateDepthError

from .config import PhotometricConfig
from .ssim import WindowFilter, check_pair, ssim_channels, ssim_vjp


@dataclass(frozen=True)
class ErrorMap:
    values: np.ndarray  # (H, W)，位于 [0, 1]
    valid: np.ndarray   # (H, W) bool

    @property
    def shape(self):
        return self.values.shape

    def valid_values(self):
        return self.values[self.valid]


def photometric_error(a, b, cfg: PhotometricConfig = None, valid=None):
    cfg = cfg or PhotometricConfig()
    a, b = check_pair(a, b)
    l1 = np.abs(a - b).mean(axis=-1)
    if cfg.alpha > 0:
        ssim = np.clip(ssim_channels(a, b, cfg).mean(axis=-1), -1.0, 1.0)
        values = cfg.alpha * (1.0 - ssim) / 2.0 + (1.0 - cfg.alpha) * l1
    else:
        values = l1
    values = np.clip(values, 0.0, 1.0)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    return ErrorMap(values=values, valid=np.asarray(valid, dtype=bool))


def photometric_error_vjp(a, b, weights, cfg: PhotometricConfig = None):
    """∑_p weights(p)·PE(a, b)(p) 对 b 的梯度 (H, W, C)

    a 为目标图像（常量），b 为合成视图。
    """
    cfg = cfg or PhotometricConfig()
    a, b = check_pair(a, b)
    channels = a.shape[-1]
    weights = np.asarray(weights, dtype=np.float64)[:, :, None]
    grad = -(1.0 - cfg.alpha) / channels * weights * np.sign(a - b)
    if cfg.alpha > 0:
        upstream = np.broadcast_to(weights, a.shape)
        window_filter = WindowFilter(a.shape[0], a.shape[1], cfg)
        grad = grad - cfg.alpha / (2.0 * channels) * ssim_vjp(a, b, upstream, cfg, window_filter)
    return grad


def image_edges(image):
    """通道平均的前向差分绝对值 (|∂x I|, |∂y I|)"""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[:, :, None]
    grad_x = np.abs(np.diff(image, axis=1)).mean(axis=-1)
    grad_y = np.abs(np.diff(image, axis=0)).mean(axis=-1)
    return grad_x, grad_y


def _normalized(inv_depth):
    inv_depth = np.asarray(inv_depth, dtype=np.float64)
    if inv_depth.ndim != 2:
        raise BadShapeError('逆深度必须是 H×W', data={'shape': list(inv_depth.shape)})
    mean = inv_depth.mean()
    if not mean > 0:
        raise DegenerateDepthError('逆深度均值必须为正', data={'mean': float(mean)})
    return inv_depth, mean, inv_depth / mean


def smoothness_loss(inv_depth, image):
    loss, _ = smoothness_loss_and_gradient(inv_depth, image, with_gradient=False)
    return loss


def smoothness_loss_and_gradient(inv_depth, image, with_gradient=True):
    """L_es 以及它对逆深度 d 的梯度

    d* = d / mean(d)；前向差分，末行末列不计；按 H·W 取平均。
    """
    inv_depth, mean, norm = _normalized(inv_depth)
    if np.shape(image)[:2] != inv_depth.shape:
        raise BadShapeError(
            '逆深度与图像尺寸不一致',
            data={'inv_depth': list(inv_depth.shape), 'image': list(np.shape(image))},
        )
    edge_x, edge_y = image_edges(image)
    weight_x = np.exp(-edge_x)
    weight_y = np.exp(-edge_y)
    diff_x = np.diff(norm, axis=1)
    diff_y = np.diff(norm, axis=0)
    count = inv_depth.size
    loss = float((np.abs(diff_x) * weight_x).sum() + (np.abs(diff_y) * weight_y).sum()) / count
    if not with_gradient:
        return loss, None

    # 对 d* 的梯度
    g = np.zeros_like(norm)
    sx = np.sign(diff_x) * weight_x / count
    sy = np.sign(diff_y) * weight_y / count
    g[:, 1:] += sx
    g[:, :-1] -= sx
    g[1:, :] += sy
    g[:-1, :] -= sy
    # 经由均值归一化回传到 d
    grad = (g - (g * norm).sum() / count) / mean
    return loss, grad
