"""
总目标函数

    L = η Σ_r f^r Σ_s Σ(M_s·PE_s) / #{M_s = 1} + λ Σ_r e^r L_es^r

各 (尺度 r, 源 s) 项可以在线程池中并行计算，但求和始终按 r 为主序、s 为次序进行，
保证结果可复现。
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from apps.geometry.camera import DepthMap
from apps.photometric.config import PhotometricConfig
from apps.photometric.losses import ErrorMap, photometric_error, smoothness_loss
from apps.photometric.pyramid import upsample_nearest
from apps.system.exceptions import BadShapeError, EmptySampleError
from apps.warp.view import WarpJacobians, WarpResult, warp_with_jacobians

from .bundle import SampleBundle
from .config import LossConfig, MaskFlags, OutlierConfig
from .masks import ErrorStats, auto_mask, combine_masks, error_stats, min_reprojection_mask, outlier_mask

logger = logging.getLogger(__name__)


def scale_weights(cfg: LossConfig):
    return [cfg.f ** r for r in range(cfg.scales)]


def smoothness_weights(cfg: LossConfig):
    return [cfg.e ** r for r in range(cfg.scales)]


@dataclass
class TermEvaluation:
    """单个 (r, s) 项的中间量，供掩码、可视化与梯度使用"""

    scale: int
    source: int
    target: np.ndarray
    source_image: np.ndarray
    depth: DepthMap
    upsample: int
    warp: WarpResult
    jacobians: Optional[WarpJacobians]
    error: ErrorMap
    direct: Optional[ErrorMap]


@dataclass
class MaskSet:
    combined: np.ndarray
    outlier: Optional[np.ndarray] = None
    principled: Optional[np.ndarray] = None
    auto: Optional[np.ndarray] = None
    min_reprojection: Optional[np.ndarray] = None

    def components(self):
        items = {
            'outlier': self.outlier,
            'principled': self.principled,
            'auto': self.auto,
            'min_reprojection': self.min_reprojection,
        }
        return {name: mask for name, mask in items.items() if mask is not None}


@dataclass
class LossResult:
    loss: float
    photometric: float
    smoothness: float
    terms: List[List[float]]
    kept: List[List[int]]
    smoothness_terms: List[float]
    masks: List[List[MaskSet]]
    errors: List[List[ErrorMap]]
    stats: List[Optional[ErrorStats]]
    source_ids: List[int]
    fully_masked: List[tuple] = field(default_factory=list)
    evaluations: List[List[TermEvaluation]] = field(default_factory=list, repr=False)

    def combined_mask(self, scale, source):
        return self.masks[scale][source].combined

    def kept_fraction(self, scale=0):
        sizes = [m.combined.size for m in self.masks[scale]]
        return float(sum(self.kept[scale]) / sum(sizes))

    def breakdown(self):
        rows = []
        for r, row in enumerate(self.terms):
            for s, value in enumerate(row):
                rows.append({
                    'scale': r,
                    'source': self.source_ids[s],
                    'photometric': value,
                    'kept_fraction': self.kept[r][s] / self.masks[r][s].combined.size,
                    'smoothness': self.smoothness_terms[r],
                })
        return rows


def _check_inputs(bundle: SampleBundle, inv_depths, poses, cfg: LossConfig):
    if len(inv_depths) != cfg.scales:
        raise BadShapeError('逆深度层数与尺度数不一致', data={'given': len(inv_depths), 'scales': cfg.scales})
    if cfg.scales > bundle.scales:
        raise BadShapeError('样本金字塔层数不足', data={'bundle': bundle.scales, 'scales': cfg.scales})
    if len(poses) != bundle.num_sources:
        raise BadShapeError('位姿数量与源帧数量不一致', data={'poses': len(poses), 'sources': bundle.num_sources})
    for r, inv in enumerate(inv_depths):
        if np.shape(inv) != bundle.level_shape(r):
            raise BadShapeError(
                f'尺度 {r} 的逆深度尺寸不正确',
                data={'shape': list(np.shape(inv)), 'expected': list(bundle.level_shape(r))},
            )


def evaluate_term(bundle, inv_depth, pose, scale, source, cfg, pcfg, flags, with_jacobians=False):
    if cfg.multiscale_mode == 'full_resolution':
        level, factor = 0, 2 ** scale
        inv_depth = upsample_nearest(inv_depth, factor)
    else:
        level, factor = scale, 1
    target = bundle.target_pyramid[level]
    source_image = bundle.source_pyramids[source][level]
    k = bundle.level_intrinsics[level]
    depth = DepthMap.from_inverse(inv_depth)
    warp, jacobians = warp_with_jacobians(source_image, depth, pose, k, with_jacobians=with_jacobians)
    error = photometric_error(target, warp.image, pcfg, valid=warp.in_bounds)
    direct = photometric_error(target, source_image, pcfg) if flags.auto else None
    return TermEvaluation(
        scale=scale, source=source, target=target, source_image=source_image, depth=depth,
        upsample=factor, warp=warp, jacobians=jacobians, error=error, direct=direct,
    )


def evaluate_terms(bundle, inv_depths, poses, cfg, pcfg, flags, with_jacobians=False, workers=1):
    """按 r 为主序、s 为次序返回 [r][s] 的 TermEvaluation"""
    jobs = [(r, s) for r in range(cfg.scales) for s in range(bundle.num_sources)]

    def run(job):
        r, s = job
        return evaluate_term(bundle, inv_depths[r], poses[s], r, s, cfg, pcfg, flags, with_jacobians)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(run, jobs))
    else:
        flat = [run(job) for job in jobs]
    n = bundle.num_sources
    return [flat[r * n:(r + 1) * n] for r in range(cfg.scales)]


def _scale_stats(evaluations, scale):
    try:
        return error_stats([ev.error for ev in evaluations])
    except EmptySampleError:
        logger.warning('尺度 %d 没有有效像素，跳过异常值掩码', scale)
        return None


def build_masks(evaluations, stats, ocfg: OutlierConfig, flags: MaskFlags):
    """单个尺度上各源视图的掩码"""
    errors = [ev.error for ev in evaluations]
    min_masks = min_reprojection_mask(errors) if flags.min_reprojection else [None] * len(errors)
    mask_sets = []
    for ev, mr in zip(evaluations, min_masks):
        outlier = outlier_mask(ev.error, stats, ocfg) if flags.outlier and stats is not None else None
        principled = ev.warp.in_bounds if flags.principled else None
        auto = auto_mask(ev.error, ev.direct) if flags.auto else None
        parts = [m for m in (outlier, principled, auto, mr) if m is not None]
        if parts:
            combined = combine_masks(parts)
        else:
            combined = np.ones(ev.error.shape, dtype=bool)
        mask_sets.append(MaskSet(
            combined=combined, outlier=outlier, principled=principled, auto=auto, min_reprojection=mr,
        ))
    return mask_sets


def total_loss(bundle: SampleBundle, inv_depths, poses, cfg: LossConfig = None, ocfg: OutlierConfig = None,
               flags: MaskFlags = None, pcfg: PhotometricConfig = None, workers=1, with_jacobians=False):
    cfg = cfg or LossConfig()
    ocfg = ocfg or OutlierConfig()
    flags = flags if flags is not None else MaskFlags()
    pcfg = pcfg or PhotometricConfig()
    _check_inputs(bundle, inv_depths, poses, cfg)

    evaluations = evaluate_terms(bundle, inv_depths, poses, cfg, pcfg, flags, with_jacobians, workers)

    stats = []
    for r in range(cfg.scales):
        if cfg.stats_mode == 'finest' and r > 0:
            stats.append(stats[0])
        else:
            stats.append(_scale_stats(evaluations[r], r))

    weights = scale_weights(cfg)
    smooth_weights = smoothness_weights(cfg)
    masks, errors, terms, kept, fully_masked = [], [], [], [], []
    photometric = 0.0
    for r in range(cfg.scales):
        mask_sets = build_masks(evaluations[r], stats[r], ocfg, flags)
        row_terms, row_kept = [], []
        scale_sum = 0.0
        for s, (ev, mask_set) in enumerate(zip(evaluations[r], mask_sets)):
            count = int(mask_set.combined.sum())
            if count == 0:
                logger.warning('尺度 %d 源 %d 的掩码全部为假，该项记 0', r, bundle.source_ids[s])
                fully_masked.append((r, bundle.source_ids[s]))
                value = 0.0
            else:
                value = float(ev.error.values[mask_set.combined].sum() / count)
            row_terms.append(value)
            row_kept.append(count)
            scale_sum += value
        photometric += weights[r] * scale_sum
        masks.append(mask_sets)
        errors.append([ev.error for ev in evaluations[r]])
        terms.append(row_terms)
        kept.append(row_kept)

    smoothness_terms = [
        smoothness_loss(inv_depths[r], bundle.target_pyramid[r]) for r in range(cfg.scales)
    ]
    smoothness = 0.0
    for r in range(cfg.scales):
        smoothness += smooth_weights[r] * smoothness_terms[r]

    loss = cfg.eta * photometric + cfg.lambda_ * smoothness
    return LossResult(
        loss=float(loss),
        photometric=float(photometric),
        smoothness=float(smoothness),
        terms=terms,
        kept=kept,
        smoothness_terms=smoothness_terms,
        masks=masks,
        errors=errors,
        stats=stats,
        source_ids=list(bundle.source_ids),
        fully_masked=fully_masked,
        evaluations=evaluations,
    )
