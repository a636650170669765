from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from apps.system.exceptions import ConfigError

SCALING_REGIONS = ('all', 'background_only')


@dataclass(frozen=True)
class DepthEvalConfig:
    """深度评估参数

    crop 为 (上, 下, 左, 右) 四个图像尺寸比例；fixed_scale 非空时取代逐图中值缩放。
    """

    cap: float = 80.0
    min_depth: float = 1e-3
    median_scaling: bool = True
    scaling_region: str = 'all'
    crop: Optional[Tuple[float, float, float, float]] = None
    fixed_scale: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.min_depth < self.cap:
            raise ConfigError('需要 0 < min_depth < cap', data={'min_depth': self.min_depth, 'cap': self.cap})
        if self.scaling_region not in SCALING_REGIONS:
            raise ConfigError(f'未知的缩放区域: {self.scaling_region}', data={'choices': list(SCALING_REGIONS)})
        if self.crop is not None:
            top, bottom, left, right = self.crop
            if not (0 <= top < bottom <= 1 and 0 <= left < right <= 1):
                raise ConfigError('裁剪比例不合法', data={'crop': list(self.crop)})
        if self.fixed_scale is not None and not self.fixed_scale > 0:
            raise ConfigError('fixed_scale 必须为正', data={'fixed_scale': self.fixed_scale})

    def crop_mask(self, shape):
        mask = np.ones(shape, dtype=bool)
        if self.crop is None:
            return mask
        height, width = shape
        top, bottom, left, right = self.crop
        mask[:] = False
        mask[int(top * height):int(bottom * height), int(left * width):int(right * width)] = True
        return mask

    def to_dict(self):
        data = asdict(self)
        data['crop'] = None if self.crop is None else list(self.crop)
        return data
