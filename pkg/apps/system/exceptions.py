"""
统一异常定义

所有异常都携带 code / message / data 三个字段，与 ReportWrapper 的输出格式一致。
InputError 家族对应命令行退出码 2，NumericalError 家族对应退出码 3。
"""


class DepthMaskError(Exception):
    """工具箱异常基类"""

    code = 'error'
    exit_code = 1

    def __init__(self, message='', data=None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.data = data

    def as_dict(self):
        return {
            'code': self.code,
            'message': self.message,
            'data': self.data,
        }


# 输入类错误（退出码 2）

class InputError(DepthMaskError):
    code = 'input-error'
    exit_code = 2


class ConfigError(InputError):
    code = 'bad-config'


class BadShapeError(InputError):
    code = 'bad-shape'


class BadSpecError(InputError):
    code = 'bad-spec'


class UnknownPresetError(InputError):
    code = 'unknown-preset'


class OutOfBoundsError(InputError):
    code = 'out-of-bounds'


class EmptySampleError(InputError):
    code = 'empty-sample'


class EmptyRegionError(InputError):
    code = 'empty-region'


class TooShortError(InputError):
    code = 'too-short'


class MissingFileError(InputError):
    code = 'missing-file'


# 数值类错误（退出码 3）

class NumericalError(DepthMaskError):
    code = 'numerical-error'
    exit_code = 3


class BehindCameraError(NumericalError):
    code = 'behind-camera'


class DegenerateDepthError(NumericalError):
    code = 'degenerate-depth'


class DivergedError(NumericalError):
    """损失出现 NaN/inf；state 为最后一个有限迭代的状态"""

    code = 'diverged'

    def __init__(self, message='', state=None, data=None):
        super().__init__(message, data)
        self.state = state
