from dataclasses import asdict, dataclass

from apps.system.exceptions import ConfigError

SSIM_WEIGHTINGS = ('mean', 'gaussian')


@dataclass(frozen=True)
class PhotometricConfig:
    """光度误差参数

    alpha: SSIM 项权重；ssim_window: 奇数窗口边长；c1/c2: SSIM 稳定常数；
    weighting: 窗口加权方式，'gaussian' 时使用 gaussian_sigma。
    """

    alpha: float = 0.85
    ssim_window: int = 3
    c1: float = 0.01 ** 2
    c2: float = 0.03 ** 2
    weighting: str = 'mean'
    gaussian_sigma: float = 1.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError('alpha 必须位于 [0, 1]', data={'alpha': self.alpha})
        if self.ssim_window < 3 or self.ssim_window % 2 == 0:
            raise ConfigError('SSIM 窗口必须是不小于 3 的奇数', data={'ssim_window': self.ssim_window})
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConfigError('c1、c2 必须为正', data={'c1': self.c1, 'c2': self.c2})
        if self.weighting not in SSIM_WEIGHTINGS:
            raise ConfigError(f'未知的窗口加权方式: {self.weighting}', data={'choices': list(SSIM_WEIGHTINGS)})
        if self.gaussian_sigma <= 0:
            raise ConfigError('gaussian_sigma 必须为正', data={'gaussian_sigma': self.gaussian_sigma})

    def to_dict(self):
        return asdict(self)
