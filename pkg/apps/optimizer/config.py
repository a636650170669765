"""
直接优化的参数
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

from apps.masking.config import LossConfig, MaskFlags, OutlierConfig
from apps.photometric.config import PhotometricConfig
from apps.system.exceptions import ConfigError


@dataclass(frozen=True)
class OptimConfig:
    """梯度下降参数

    深度与位姿分开设步长（平移、旋转各一个）；在 decay_points 所列的迭代比例处
    全部步长除以 decay_factor。pose_init 为 None 时各源帧位姿从单位阵出发。
    """

    max_iters: int = 500
    step_size: float = 1.0
    translation_step: float = 0.01
    rotation_step: float = 5e-4
    decay_points: Tuple[float, ...] = (0.75, 0.9)
    decay_factor: float = 5.0
    init_inv_depth: float = 0.25
    init_jitter: float = 0.0
    pose_init: Optional[tuple] = None
    optimize_depth: bool = True
    optimize_pose: bool = True
    coarse_to_fine: bool = True
    coarse_fraction: float = 0.4
    loss: LossConfig = field(default_factory=LossConfig)
    outlier: OutlierConfig = field(default_factory=OutlierConfig)
    flags: MaskFlags = field(default_factory=MaskFlags)
    photometric: PhotometricConfig = field(default_factory=PhotometricConfig)
    seed: int = 42
    workers: int = 1
    log_every: int = 50

    def __post_init__(self):
        if self.max_iters < 0:
            raise ConfigError('max_iters 不能为负', data={'max_iters': self.max_iters})
        for name in ('step_size', 'translation_step', 'rotation_step', 'init_inv_depth'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'{name} 必须为正', data={name: getattr(self, name)})
        if self.init_jitter < 0:
            raise ConfigError('init_jitter 不能为负', data={'init_jitter': self.init_jitter})
        if not self.decay_factor >= 1:
            raise ConfigError('decay_factor 至少为 1', data={'decay_factor': self.decay_factor})
        if any(not 0 < p < 1 for p in self.decay_points):
            raise ConfigError('decay_points 必须位于 (0, 1)', data={'decay_points': list(self.decay_points)})
        if not 0 <= self.coarse_fraction < 1:
            raise ConfigError('coarse_fraction 必须位于 [0, 1)', data={'coarse_fraction': self.coarse_fraction})
        if self.workers < 1:
            raise ConfigError('workers 至少为 1', data={'workers': self.workers})

    def decay_iterations(self):
        return sorted(int(p * self.max_iters) for p in self.decay_points)

    def step_scale(self, iteration):
        """第 iteration 次迭代相对初始步长的倍率"""
        passed = sum(1 for it in self.decay_iterations() if iteration >= it)
        return self.decay_factor ** -passed

    def stage_plan(self):
        """由粗到细的阶段划分：[(尺度, 迭代数), ...]，最后一段为 (None, 剩余迭代) 的联合优化"""
        scales = self.loss.scales
        if not self.coarse_to_fine or scales == 1:
            return [(None, self.max_iters)]
        per_stage = int(self.coarse_fraction * self.max_iters) // (scales - 1)
        plan = [(r, per_stage) for r in range(scales - 1, 0, -1)]
        plan.append((None, self.max_iters - per_stage * (scales - 1)))
        return plan

    def to_dict(self):
        return {
            'max_iters': self.max_iters,
            'step_size': self.step_size,
            'translation_step': self.translation_step,
            'rotation_step': self.rotation_step,
            'decay_points': list(self.decay_points),
            'decay_factor': self.decay_factor,
            'init_inv_depth': self.init_inv_depth,
            'init_jitter': self.init_jitter,
            'pose_init': None if self.pose_init is None else [p.to_dict() for p in self.pose_init],
            'optimize_depth': self.optimize_depth,
            'optimize_pose': self.optimize_pose,
            'coarse_to_fine': self.coarse_to_fine,
            'coarse_fraction': self.coarse_fraction,
            'loss': self.loss.to_dict(),
            'outlier': self.outlier.to_dict(),
            'flags': self.flags.to_dict(),
            'photometric': self.photometric.to_dict(),
            'seed': self.seed,
            'workers': self.workers,
        }
