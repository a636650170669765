"""
局部窗口 SSIM

窗口滤波写成两个一维算子矩阵 Mv (H×H)、Mu (W×W)：F(x) = Mv · x · Muᵀ。
算子矩阵由 scipy.ndimage 的一维滤波作用在单位阵上得到，边界模式 'mirror'
（不重复边缘像素的反射填充）。这样 F 的伴随就是两个矩阵的转置，SSIM 对输入
的反向传播不需要另写一套边界处理。
"""
from functools import lru_cache

import numpy as np
from scipy import ndimage

from apps.system.exceptions import BadShapeError
from apps.warp.sampling import as_image

from .config import PhotometricConfig


def check_pair(a, b):
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise BadShapeError('两幅图像尺寸不一致', data={'a': list(a.shape), 'b': list(b.shape)})
    return a, b


@lru_cache(maxsize=64)
def window_operator(n, window, weighting='mean', sigma=1.5):
    """长度为 n 的一维窗口滤波矩阵（只读）"""
    eye = np.eye(n)
    if weighting == 'gaussian':
        radius = window // 2
        matrix = ndimage.gaussian_filter1d(eye, sigma, axis=0, mode='mirror', truncate=radius / sigma)
    else:
        matrix = ndimage.uniform_filter1d(eye, size=window, axis=0, mode='mirror')
    matrix.setflags(write=False)
    return matrix


class WindowFilter:
    """对 (H, W, C) 图像逐通道施加窗口均值 F 及其伴随 Fᵀ"""

    def __init__(self, height, width, cfg: PhotometricConfig):
        self.mv = window_operator(height, cfg.ssim_window, cfg.weighting, cfg.gaussian_sigma)
        self.mu = window_operator(width, cfg.ssim_window, cfg.weighting, cfg.gaussian_sigma)

    def apply(self, x):
        rows = (self.mv @ x.reshape(x.shape[0], -1)).reshape(x.shape)
        # (W, W) 与 (H, W, C) 按批矩阵乘
        return self.mu @ rows

    def adjoint(self, y):
        rows = (self.mv.T @ y.reshape(y.shape[0], -1)).reshape(y.shape)
        return self.mu.T @ rows


def _terms(a, b, cfg, window_filter):
    mu_a = window_filter.apply(a)
    mu_b = window_filter.apply(b)
    m_aa = window_filter.apply(a * a)
    m_bb = window_filter.apply(b * b)
    m_ab = window_filter.apply(a * b)
    var_a = m_aa - mu_a * mu_a
    var_b = m_bb - mu_b * mu_b
    cov = m_ab - mu_a * mu_b
    a1 = 2 * mu_a * mu_b + cfg.c1
    a2 = 2 * cov + cfg.c2
    b1 = mu_a * mu_a + mu_b * mu_b + cfg.c1
    b2 = var_a + var_b + cfg.c2
    return mu_a, mu_b, a1, a2, b1, b2


def ssim_channels(a, b, cfg: PhotometricConfig, window_filter=None):
    """逐通道 SSIM (H, W, C)"""
    window_filter = window_filter or WindowFilter(a.shape[0], a.shape[1], cfg)
    _, _, a1, a2, b1, b2 = _terms(a, b, cfg, window_filter)
    return (a1 * a2) / (b1 * b2)


def ssim_map(a, b, cfg: PhotometricConfig = None):
    """逐像素 SSIM，通道平均后截断到 [-1, 1]"""
    cfg = cfg or PhotometricConfig()
    a, b = check_pair(a, b)
    return np.clip(ssim_channels(a, b, cfg).mean(axis=-1), -1.0, 1.0)


def ssim_vjp(a, b, upstream, cfg: PhotometricConfig, window_filter=None):
    """∑_p upstream(p,c)·SSIM_c(p) 对 b 的梯度 (H, W, C)

    SSIM_c = N / D，N = A1·A2，D = B1·B2；b 只经由 μ_b、F(ab)、F(b²) 进入。
    """
    window_filter = window_filter or WindowFilter(a.shape[0], a.shape[1], cfg)
    mu_a, mu_b, a1, a2, b1, b2 = _terms(a, b, cfg, window_filter)
    num = a1 * a2
    den = b1 * b2
    den_sq = den * den
    d_num_d_mu_b = 2 * mu_a * a2 - 2 * mu_a * a1
    d_den_d_mu_b = 2 * mu_b * b2 - 2 * mu_b * b1
    d_mu_b = (d_num_d_mu_b * den - num * d_den_d_mu_b) / den_sq
    d_m_ab = 2 * a1 / den
    d_m_bb = -num * b1 / den_sq
    return (
        window_filter.adjoint(upstream * d_mu_b)
        + a * window_filter.adjoint(upstream * d_m_ab)
        + 2 * b * window_filter.adjoint(upstream * d_m_bb)
    )
