"""
针孔相机模型与深度图
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from apps.system.exceptions import BadShapeError, ConfigError

DEFAULT_MIN_DEPTH = 0.1
DEFAULT_MAX_DEPTH = 100.0


class PixelCoord(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class Intrinsics:
    """相机内参 K（像素单位）；像素 i 的中心位于连续坐标 i"""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError('焦距必须为正', data={'fx': self.fx, 'fy': self.fy})
        if self.width < 2 or self.height < 2:
            raise ConfigError('图像尺寸至少为 2×2', data={'width': self.width, 'height': self.height})
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigError('主点必须位于图像内', data={'cx': self.cx, 'cy': self.cy})

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def matrix(self):
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    @property
    def inverse_matrix(self):
        return np.array([
            [1.0 / self.fx, 0.0, -self.cx / self.fx],
            [0.0, 1.0 / self.fy, -self.cy / self.fy],
            [0.0, 0.0, 1.0],
        ])

    def at_level(self, level):
        """金字塔第 level 层（2×2 均值下采样 level 次）的内参"""
        factor = 2 ** level
        if self.width % factor or self.height % factor:
            raise BadShapeError(
                f'图像尺寸不能被 2^{level} 整除',
                data={'width': self.width, 'height': self.height, 'level': level},
            )
        return Intrinsics(
            fx=self.fx / factor,
            fy=self.fy / factor,
            cx=(self.cx + 0.5) / factor - 0.5,
            cy=(self.cy + 0.5) / factor - 0.5,
            width=self.width // factor,
            height=self.height // factor,
        )

    def pixel_rays(self):
        """返回 (H, W, 3) 的 K^-1 [u, v, 1]"""
        v, u = np.mgrid[0:self.height, 0:self.width].astype(np.float64)
        x = (u - self.cx) / self.fx
        y = (v - self.cy) / self.fy
        return np.stack([x, y, np.ones_like(x)], axis=-1)

    def to_dict(self):
        return {
            'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy,
            'width': self.width, 'height': self.height,
        }


@dataclass(frozen=True)
class DepthMap:
    """逐像素米制深度；valid 之外的数值没有意义"""

    values: np.ndarray
    valid: np.ndarray

    @classmethod
    def from_values(cls, values, valid=None, d_min=DEFAULT_MIN_DEPTH, d_max=DEFAULT_MAX_DEPTH):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise BadShapeError('深度图必须是 H×W', data={'shape': list(values.shape)})
        in_range = np.isfinite(values) & (values >= d_min) & (values <= d_max)
        if valid is not None:
            in_range &= np.asarray(valid, dtype=bool)
        return cls(values=values, valid=in_range)

    @classmethod
    def from_inverse(cls, inv_depth, d_min=DEFAULT_MIN_DEPTH, d_max=DEFAULT_MAX_DEPTH):
        inv_depth = np.asarray(inv_depth, dtype=np.float64)
        with np.errstate(divide='ignore'):
            values = np.where(inv_depth > 0, 1.0 / inv_depth, np.inf)
        return cls.from_values(values, d_min=d_min, d_max=d_max)

    @property
    def shape(self):
        return self.values.shape

    def inverse(self):
        return np.where(self.valid, 1.0 / np.where(self.valid, self.values, 1.0), 0.0)
