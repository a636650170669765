"""
掩码与总损失的参数
"""
import math
from dataclasses import asdict, dataclass

from apps.system.exceptions import ConfigError

STATS_MODES = ('per_scale', 'finest')
MULTISCALE_MODES = ('native', 'full_resolution')


@dataclass(frozen=True)
class OutlierConfig:
    """保留 μ − l·σ < PE < μ + u·σ 的像素"""

    l: float = 1.0
    u: float = 0.5
    sigma_floor: float = 1e-12

    def __post_init__(self):
        if not (self.l >= 0 and self.u >= 0):
            raise ConfigError('l、u 不能为负', data={'l': self.l, 'u': self.u})
        if not self.sigma_floor > 0:
            raise ConfigError('sigma_floor 必须为正', data={'sigma_floor': self.sigma_floor})

    def to_dict(self):
        return {
            'l': self.l if math.isfinite(self.l) else 'inf',
            'u': self.u if math.isfinite(self.u) else 'inf',
            'sigma_floor': self.sigma_floor,
        }


@dataclass(frozen=True)
class LossConfig:
    """L = η Σ_r f^r Σ_s 掩码均值(PE) + λ Σ_r e^r L_es^r"""

    eta: float = 1.0
    lambda_: float = 0.001
    e: float = 0.5
    f: float = 0.25
    scales: int = 4
    stats_mode: str = 'per_scale'
    multiscale_mode: str = 'native'

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError('eta 必须为正', data={'eta': self.eta})
        if self.lambda_ < 0:
            raise ConfigError('lambda 不能为负', data={'lambda': self.lambda_})
        if not (0 < self.e <= 1 and 0 < self.f <= 1):
            raise ConfigError('e、f 必须位于 (0, 1]', data={'e': self.e, 'f': self.f})
        if self.scales < 1:
            raise ConfigError('scales 至少为 1', data={'scales': self.scales})
        if self.stats_mode not in STATS_MODES:
            raise ConfigError(f'未知的统计模式: {self.stats_mode}', data={'choices': list(STATS_MODES)})
        if self.multiscale_mode not in MULTISCALE_MODES:
            raise ConfigError(f'未知的多尺度模式: {self.multiscale_mode}', data={'choices': list(MULTISCALE_MODES)})

    def to_dict(self):
        data = asdict(self)
        data['lambda'] = data.pop('lambda_')
        return data


@dataclass(frozen=True)
class MaskFlags:
    outlier: bool = True
    principled: bool = True
    auto: bool = True
    min_reprojection: bool = True

    @classmethod
    def none(cls):
        return cls(outlier=False, principled=False, auto=False, min_reprojection=False)

    @classmethod
    def for_snippet(cls, n_frames, **overrides):
        """五帧及以上输入时不用最小重投影（t±2 的源视图几乎会被整体剔除）"""
        flags = dict(outlier=True, principled=True, auto=True, min_reprojection=n_frames < 5)
        flags.update(overrides)
        return cls(**flags)

    def to_dict(self):
        return asdict(self)
