"""
在线评测服务器使用的深度指标，以及视差到深度的转换
"""
from dataclasses import asdict, dataclass

import numpy as np

from apps.geometry.camera import DepthMap
from apps.system.exceptions import BadShapeError, ConfigError, EmptyRegionError

from .config import DepthEvalConfig
from .metrics import _as_depth, evaluable_mask, resolve_scale


@dataclass(frozen=True)
class BenchmarkReport:
    silog: float          # 100·√(mean d² − (mean d)²)，d = log p − log g
    sq_error_rel: float   # 百分比
    abs_error_rel: float  # 百分比
    irmse: float          # 1/km
    pixel_count: int

    def to_dict(self):
        return asdict(self)


def benchmark_metrics(pred, gt, mask=None, cfg: DepthEvalConfig = None):
    cfg = cfg or DepthEvalConfig()
    pred = _as_depth(pred)
    gt = _as_depth(gt)
    if pred.shape != gt.shape:
        raise BadShapeError('预测与真值尺寸不一致', data={'pred': list(pred.shape), 'gt': list(gt.shape)})
    selected = evaluable_mask(gt, cfg, pred)
    if mask is not None:
        selected &= np.asarray(mask, dtype=bool)
    if not selected.any():
        raise EmptyRegionError('评估区域为空')
    scale = resolve_scale(pred, gt, selected, cfg)
    p = np.clip(scale * pred.values[selected], cfg.min_depth, cfg.cap)
    g = gt.values[selected]

    d = np.log(p) - np.log(g)
    silog = 100.0 * np.sqrt(max(np.mean(d ** 2) - np.mean(d) ** 2, 0.0))
    sq_error_rel = 100.0 * np.mean(((p - g) / g) ** 2)
    abs_error_rel = 100.0 * np.mean(np.abs(p - g) / g)
    irmse = np.sqrt(np.mean((1000.0 / p - 1000.0 / g) ** 2))
    return BenchmarkReport(
        silog=float(silog),
        sq_error_rel=float(sq_error_rel),
        abs_error_rel=float(abs_error_rel),
        irmse=float(irmse),
        pixel_count=int(g.size),
    )


def disparity_to_depth(disparity, baseline, fx):
    """depth = baseline·fx / disparity；视差非正处无效"""
    if not (baseline > 0 and fx > 0):
        raise ConfigError('基线与焦距必须为正', data={'baseline': baseline, 'fx': fx})
    disparity = np.asarray(disparity, dtype=np.float64)
    if disparity.ndim != 2:
        raise BadShapeError('视差图必须是 H×W', data={'shape': list(disparity.shape)})
    valid = np.isfinite(disparity) & (disparity > 0)
    values = np.where(valid, baseline * fx / np.where(valid, disparity, 1.0), 0.0)
    return DepthMap(values=values, valid=valid)
