"""
消融实验

每个变体只改掩码开关或损失参数，其余配置（包括随机种子）共享；
有真值时按运动类别给出深度指标。
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from apps.evaluation.config import DepthEvalConfig
from apps.evaluation.regions import region_metrics
from apps.masking.config import LossConfig, MaskFlags, OutlierConfig
from apps.system.exceptions import ConfigError

from .config import OptimConfig
from .optimize import optimize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AblationVariant:
    name: str
    flags: Optional[MaskFlags] = None
    loss: Optional[LossConfig] = None
    outlier: Optional[OutlierConfig] = None

    def apply(self, cfg: OptimConfig):
        return replace(
            cfg,
            flags=self.flags or cfg.flags,
            loss=self.loss or cfg.loss,
            outlier=self.outlier or cfg.outlier,
        )

    def to_dict(self):
        return {
            'name': self.name,
            'flags': None if self.flags is None else self.flags.to_dict(),
            'loss': None if self.loss is None else self.loss.to_dict(),
            'outlier': None if self.outlier is None else self.outlier.to_dict(),
        }


@dataclass(frozen=True)
class GroundTruth:
    depth: object        # DepthMap
    labels: np.ndarray   # (H, W) 运动类别


@dataclass
class AblationResult:
    name: str
    final_loss: float
    iterations: int
    kept_fraction: float
    regions: Optional[Dict] = None
    state: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            'name': self.name,
            'final_loss': self.final_loss,
            'iterations': self.iterations,
            'kept_fraction': self.kept_fraction,
            'regions': self.regions,
        }


def standard_variants(cfg: OptimConfig):
    """异常值掩码开/关 × 加权多尺度 (f=0.25) / 均匀多尺度 (f=1) 的四种组合"""
    uniform = replace(cfg.loss, f=1.0)
    weighted = replace(cfg.loss, f=0.25)
    with_outlier = replace(cfg.flags, outlier=True)
    without_outlier = replace(cfg.flags, outlier=False)
    return [
        AblationVariant('baseline', flags=without_outlier, loss=uniform),
        AblationVariant('outlier_mask', flags=with_outlier, loss=uniform),
        AblationVariant('weighted_multiscale', flags=without_outlier, loss=weighted),
        AblationVariant('both', flags=with_outlier, loss=weighted),
    ]


def ablate(bundle, variants, cfg: OptimConfig = None, ground_truth: GroundTruth = None,
           eval_cfg: DepthEvalConfig = None, inv_depths=None) -> List[AblationResult]:
    cfg = cfg or OptimConfig()
    if not variants:
        raise ConfigError('至少需要一个消融变体')
    if ground_truth is not None and eval_cfg is None:
        eval_cfg = DepthEvalConfig(scaling_region='background_only')

    results = []
    for variant in variants:
        logger.info('消融变体 %s 开始', variant.name)
        state = optimize(bundle, variant.apply(cfg), inv_depths=inv_depths)
        regions = None
        if ground_truth is not None:
            samples = [(state.depth(0), ground_truth.depth, ground_truth.labels)]
            regions = region_metrics(samples, eval_cfg).to_dict()
        results.append(AblationResult(
            name=variant.name,
            final_loss=state.loss_history[-1],
            iterations=state.iteration,
            kept_fraction=state.kept_history[-1],
            regions=regions,
            state=state,
        ))
    return results


def comparison_rows(results):
    """每个 (变体, 类别) 一行，供 CSV 输出"""
    rows = []
    for result in results:
        if not result.regions:
            rows.append({'variant': result.name, 'final_loss': result.final_loss})
            continue
        for region, metrics in result.regions['regions'].items():
            rows.append({'variant': result.name, 'final_loss': result.final_loss, 'region': region, **metrics})
    return rows


def outlier_variants(cfg: OptimConfig):
    return [
        AblationVariant('with_outlier', flags=replace(cfg.flags, outlier=True)),
        AblationVariant('without_outlier', flags=replace(cfg.flags, outlier=False)),
    ]


def weighting_variants(cfg: OptimConfig):
    return [
        AblationVariant('weighted', loss=replace(cfg.loss, f=0.25)),
        AblationVariant('uniform', loss=replace(cfg.loss, f=1.0)),
    ]


VARIANT_SETS = {
    'standard': standard_variants,
    'outlier': outlier_variants,
    'weighting': weighting_variants,
}
