"""
四种掩码：异常值掩码、原则性掩码（见 geometry.projection）、自动掩码、最小重投影
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np

from apps.system.exceptions import BadShapeError, EmptySampleError

from .config import OutlierConfig


@dataclass(frozen=True)
class ErrorStats:
    mu: float
    sigma: float
    count: int = 0

    def bounds(self, cfg: OutlierConfig):
        return self.mu - cfg.l * self.sigma, self.mu + cfg.u * self.sigma

    def to_dict(self):
        return {'mu': self.mu, 'sigma': self.sigma, 'count': self.count}


def error_stats(errors):
    """同一样本所有源视图有效像素合并后的均值与总体标准差"""
    pooled = [err.valid_values() for err in errors]
    pooled = np.concatenate(pooled) if pooled else np.empty(0)
    if pooled.size == 0:
        raise EmptySampleError('没有可用于统计的有效像素', data={'maps': len(errors)})
    return ErrorStats(mu=float(pooled.mean()), sigma=float(pooled.std()), count=int(pooled.size))


def outlier_mask(err, stats: ErrorStats, cfg: OutlierConfig = None):
    cfg = cfg or OutlierConfig()
    if stats.sigma < cfg.sigma_floor:
        return np.ones(err.shape, dtype=bool)
    lower, upper = stats.bounds(cfg)
    return (err.values > lower) & (err.values < upper)


def auto_mask(err_recon, err_direct):
    if err_recon.shape != err_direct.shape:
        raise BadShapeError('误差图尺寸不一致', data={'recon': list(err_recon.shape), 'direct': list(err_direct.shape)})
    return err_recon.values < err_direct.values


def min_reprojection_mask(errors):
    """各源视图误差等于逐像素最小值处为真；并列时全部为真

    无效像素按 +∞ 参与比较。
    """
    stacked = np.stack([np.where(err.valid, err.values, np.inf) for err in errors])
    minimum = stacked.min(axis=0)
    return [layer <= minimum for layer in stacked]


def combine_masks(masks):
    masks = list(masks)
    if not masks:
        raise BadShapeError('至少需要一个掩码')
    shapes = {np.shape(m) for m in masks}
    if len(shapes) != 1:
        raise BadShapeError('掩码尺寸不一致', data={'shapes': [list(s) for s in shapes]})
    return reduce(np.logical_and, masks, np.ones(masks[0].shape, dtype=bool))
