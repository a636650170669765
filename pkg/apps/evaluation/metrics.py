"""
单目深度评估

流程：选出 gt 与预测都有效、gt 位于 [min_depth, cap] 的像素 → 与 mask、裁剪区域取交 →
中值缩放（或固定缩放）→ 预测截断到 [min_depth, cap] → 计算误差。
"""
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from apps.geometry.camera import DepthMap
from apps.system.exceptions import BadShapeError, ConfigError, DegenerateDepthError, EmptyRegionError

from .config import DepthEvalConfig

METRIC_FIELDS = ('abs_rel', 'sq_rel', 'rmse', 'rmse_log', 'delta1', 'delta2', 'delta3')


@dataclass(frozen=True)
class MetricsReport:
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    delta1: float
    delta2: float
    delta3: float
    pixel_count: int
    scale: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def compute_errors(gt, pred):
    """gt、pred 为一维正数数组"""
    thresh = np.maximum(gt / pred, pred / gt)
    delta1 = (thresh < 1.25).mean()
    delta2 = (thresh < 1.25 ** 2).mean()
    delta3 = (thresh < 1.25 ** 3).mean()

    rmse = np.sqrt(((gt - pred) ** 2).mean())
    rmse_log = np.sqrt(((np.log(gt) - np.log(pred)) ** 2).mean())

    abs_rel = np.mean(np.abs(gt - pred) / gt)
    sq_rel = np.mean(((gt - pred) ** 2) / gt)

    return MetricsReport(
        abs_rel=float(abs_rel),
        sq_rel=float(sq_rel),
        rmse=float(rmse),
        rmse_log=float(rmse_log),
        delta1=float(delta1),
        delta2=float(delta2),
        delta3=float(delta3),
        pixel_count=int(gt.size),
    )


def _as_depth(depth):
    if isinstance(depth, DepthMap):
        return depth
    values = np.asarray(depth, dtype=np.float64)
    return DepthMap(values=values, valid=np.isfinite(values) & (values > 0))


def evaluable_mask(gt: DepthMap, cfg: DepthEvalConfig, pred: DepthMap = None):
    """gt 有效、位于 [min_depth, cap] 且在裁剪区域内；给出 pred 时还要求预测有效"""
    values = np.where(gt.valid, gt.values, 0.0)
    mask = gt.valid & (values >= cfg.min_depth) & (values <= cfg.cap) & cfg.crop_mask(gt.shape)
    if pred is not None:
        mask &= pred.valid
    return mask


def resolve_scale(pred, gt, region, cfg: DepthEvalConfig):
    if cfg.fixed_scale is not None:
        return float(cfg.fixed_scale)
    if not cfg.median_scaling:
        return 1.0
    if not region.any():
        raise EmptyRegionError('中值缩放区域为空')
    pred_median = float(np.median(pred.values[region]))
    scale = float(np.median(gt.values[region])) / pred_median if pred_median > 0 else math.inf
    if not (math.isfinite(scale) and scale > 0):
        raise DegenerateDepthError(
            '预测深度中值为零或非有限，无法做中值缩放',
            data={'pred_median': pred_median, 'pixels': int(region.sum())},
        )
    return scale


def depth_metrics(pred, gt, mask=None, cfg: DepthEvalConfig = None, background=None):
    """background：scaling_region 为 background_only 时用于计算中值比的像素"""
    cfg = cfg or DepthEvalConfig()
    pred = _as_depth(pred)
    gt = _as_depth(gt)
    if pred.shape != gt.shape:
        raise BadShapeError('预测与真值尺寸不一致', data={'pred': list(pred.shape), 'gt': list(gt.shape)})
    base = evaluable_mask(gt, cfg, pred)
    selected = base if mask is None else base & np.asarray(mask, dtype=bool)
    if not selected.any():
        raise EmptyRegionError('评估区域为空')

    if cfg.scaling_region == 'background_only':
        if background is None:
            raise ConfigError('background_only 缩放需要提供背景掩码')
        scale_region = base & np.asarray(background, dtype=bool)
    else:
        scale_region = selected
    scale = resolve_scale(pred, gt, scale_region, cfg)

    p = np.clip(scale * pred.values[selected], cfg.min_depth, cfg.cap)
    g = gt.values[selected]
    report = compute_errors(g, p)
    return MetricsReport(**{**report.to_dict(), 'scale': scale})


def weighted_average(reports):
    """按像素数加权平均；只有一个报告时原样返回"""
    reports = list(reports)
    if not reports:
        raise EmptyRegionError('没有可合并的评估结果')
    if len(reports) == 1:
        return reports[0]
    total = sum(r.pixel_count for r in reports)
    values = {
        name: float(sum(r.pixel_count * getattr(r, name) for r in reports) / total)
        for name in METRIC_FIELDS
    }
    return MetricsReport(pixel_count=int(total), **values)
