"""
按运动类别评估

每个类别在各样本上分别计算指标，再按该类别在各样本中的像素数加权平均；
dynamic 行把所有非背景类别的并集当作一个区域，同样按像素数加权。
中值缩放默认只用背景像素，没有背景像素的样本跳过并记入 notes。
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from apps.scenesim.scene import LABELS
from apps.system.exceptions import BadShapeError, EmptyRegionError

from .config import DepthEvalConfig
from .metrics import MetricsReport, _as_depth, depth_metrics, evaluable_mask, weighted_average

logger = logging.getLogger(__name__)

DYNAMIC = 'dynamic'


@dataclass
class RegionReport:
    """reports / counts / percentages 以类别名为键，另含 dynamic 汇总行；类别百分比之和为 100"""

    reports: Dict[str, MetricsReport]
    counts: Dict[str, int]
    percentages: Dict[str, float]
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            'regions': {
                name: {**report.to_dict(), 'percent': self.percentages[name]}
                for name, report in self.reports.items()
            },
            'counts': dict(self.counts),
            'notes': list(self.notes),
        }

    def rows(self):
        return [
            {'region': name, 'percent': self.percentages[name], **report.to_dict()}
            for name, report in self.reports.items()
        ]


def _needs_background(cfg: DepthEvalConfig):
    return cfg.scaling_region == 'background_only' and cfg.median_scaling and cfg.fixed_scale is None


def region_metrics(samples, cfg: DepthEvalConfig = None, vocabulary=None):
    """samples: [(pred, gt, labels), ...]；vocabulary 为 {类别名: 标签值}，缺省为合成场景的类别"""
    cfg = cfg or DepthEvalConfig(scaling_region='background_only')
    vocabulary = vocabulary or LABELS
    background_id = vocabulary.get('background')
    moving_ids = [label_id for name, label_id in vocabulary.items() if name != 'background']

    per_label = {name: [] for name in vocabulary}
    counts = {name: 0 for name in vocabulary}
    dynamic_reports, dynamic_count = [], 0
    notes = []
    for index, (pred, gt, labels) in enumerate(samples):
        pred, gt = _as_depth(pred), _as_depth(gt)
        labels = np.asarray(labels)
        if labels.shape != gt.shape:
            raise BadShapeError(
                f'第 {index} 个样本的标签图尺寸不正确',
                data={'labels': list(labels.shape), 'gt': list(gt.shape)},
            )
        if pred.shape != gt.shape:
            raise BadShapeError(
                f'第 {index} 个样本的预测与真值尺寸不一致',
                data={'pred': list(pred.shape), 'gt': list(gt.shape)},
            )
        base = evaluable_mask(gt, cfg, pred)
        background = labels == background_id if background_id is not None else None
        if _needs_background(cfg) and background is not None and not (background & base).any():
            logger.warning('第 %d 个样本没有可用于中值缩放的背景像素，已跳过', index)
            notes.append(f'第 {index} 个样本没有背景像素，无法按背景做中值缩放，已跳过')
            continue
        for name, label_id in vocabulary.items():
            region = labels == label_id
            count = int((region & base).sum())
            if count == 0:
                continue
            counts[name] += count
            per_label[name].append(depth_metrics(pred, gt, region, cfg, background=background))
        moving = np.isin(labels, moving_ids)
        count = int((moving & base).sum())
        if count:
            dynamic_count += count
            dynamic_reports.append(depth_metrics(pred, gt, moving, cfg, background=background))

    total = sum(counts.values())
    if total == 0:
        raise EmptyRegionError('所有样本都没有可评估的像素', data={'notes': notes})
    reports, percentages = {}, {}
    for name in vocabulary:
        if not per_label[name]:
            notes.append(f'类别 {name} 在所有样本中都不存在，已省略')
            continue
        reports[name] = weighted_average(per_label[name])
        percentages[name] = 100.0 * counts[name] / total
    region_counts = {name: counts[name] for name in reports}
    if dynamic_reports:
        reports[DYNAMIC] = weighted_average(dynamic_reports)
        percentages[DYNAMIC] = 100.0 * dynamic_count / total
        region_counts[DYNAMIC] = dynamic_count
    return RegionReport(reports=reports, counts=region_counts, percentages=percentages, notes=notes)
