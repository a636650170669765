"""
图像金字塔：2×2 均值下采样；最近邻上采样用于逆深度在尺度间的传递
"""
import numpy as np

from apps.system.exceptions import BadShapeError, ConfigError


def downsample(img):
    img = np.asarray(img, dtype=np.float64)
    height, width = img.shape[:2]
    if height % 2 or width % 2:
        raise BadShapeError('尺寸必须为偶数才能 2×2 下采样', data={'shape': list(img.shape)})
    blocks = img.reshape((height // 2, 2, width // 2, 2) + img.shape[2:])
    return blocks.mean(axis=(1, 3))


def build_pyramid(img, levels):
    if levels < 1:
        raise ConfigError('金字塔层数至少为 1', data={'levels': levels})
    img = np.asarray(img, dtype=np.float64)
    factor = 2 ** (levels - 1)
    height, width = img.shape[:2]
    if height % factor or width % factor:
        raise BadShapeError(
            f'图像尺寸不能被 2^{levels - 1} 整除',
            data={'shape': list(img.shape), 'levels': levels},
        )
    pyramid = [img]
    for _ in range(levels - 1):
        pyramid.append(downsample(pyramid[-1]))
    return pyramid


def upsample_nearest(values, factor):
    if factor == 1:
        return np.array(values, dtype=np.float64)
    return np.repeat(np.repeat(values, factor, axis=0), factor, axis=1)


def upsample_adjoint(grad, factor):
    """upsample_nearest 的伴随：把 factor×factor 块内梯度求和"""
    if factor == 1:
        return grad
    height, width = grad.shape[:2]
    blocks = grad.reshape((height // factor, factor, width // factor, factor) + grad.shape[2:])
    return blocks.sum(axis=(1, 3))
