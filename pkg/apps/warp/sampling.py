"""
双线性采样

支撑集为闭区间 [0, W−1]×[0, H−1]。在 u = W−1（或 v = H−1）处使用退化单元：
缺失的邻居权重为 0。导数在插值单元固定的前提下求得（采样器分段光滑）。
"""
import numpy as np

from apps.system.exceptions import BadShapeError, OutOfBoundsError


def as_image(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise BadShapeError('图像必须是 H×W×C', data={'shape': list(img.shape)})
    return img


def _cells(u, v, width, height):
    u0 = np.minimum(np.floor(u), width - 1).astype(np.int64)
    v0 = np.minimum(np.floor(v), height - 1).astype(np.int64)
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    return u0, v0, u1, v1, u - u0, v - v0


def bilinear_sample(img, p):
    """单点采样，返回每个通道的强度 (C,)"""
    img = as_image(img)
    height, width = img.shape[:2]
    u, v = float(p[0]), float(p[1])
    if not (0 <= u <= width - 1 and 0 <= v <= height - 1):
        raise OutOfBoundsError('采样点超出支撑集', data={'u': u, 'v': v, 'width': width, 'height': height})
    u0, v0, u1, v1, a, b = _cells(np.float64(u), np.float64(v), width, height)
    top = (1.0 - a) * img[v0, u0] + a * img[v0, u1]
    bottom = (1.0 - a) * img[v1, u0] + a * img[v1, u1]
    return (1.0 - b) * top + b * bottom


def sample_grid(img, u, v, valid, with_gradient=False):
    """整图采样

    Args:
        img: (H_s, W_s, C) 源图像
        u, v: (H, W) 采样坐标
        valid: (H, W) 只在此处采样，其余输出 0

    Returns:
        values (H, W, C)；with_gradient 时另返回 dI/du、dI/dv（插值单元固定）
    """
    img = as_image(img)
    height, width, channels = img.shape
    out = np.zeros(u.shape + (channels,))
    grad_u = np.zeros_like(out) if with_gradient else None
    grad_v = np.zeros_like(out) if with_gradient else None
    if not valid.any():
        return (out, grad_u, grad_v) if with_gradient else out

    uu, vv = u[valid], v[valid]
    u0, v0, u1, v1, a, b = _cells(uu, vv, width, height)
    a = a[:, None]
    b = b[:, None]
    i00 = img[v0, u0]
    i01 = img[v0, u1]
    i10 = img[v1, u0]
    i11 = img[v1, u1]
    top = (1.0 - a) * i00 + a * i01
    bottom = (1.0 - a) * i10 + a * i11
    out[valid] = (1.0 - b) * top + b * bottom
    if not with_gradient:
        return out
    grad_u[valid] = (1.0 - b) * (i01 - i00) + b * (i11 - i10)
    grad_v[valid] = bottom - top
    return out, grad_u, grad_v
