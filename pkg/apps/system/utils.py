import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import BadSpecError, MissingFileError


def to_builtin(value):
    """把 numpy 标量/数组、Path、dataclass 字典等转成可 JSON 序列化的内置类型"""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ReportWrapper:
    """统一的报告输出格式

    用法示例:
        payload = ReportWrapper.success(report.to_dict())
        write_json_atomic(out_dir / 'metrics.json', payload)
    """

    @staticmethod
    def success(data=None, message='success'):
        """成功结果

        Args:
            data: 报告数据
            message: 提示信息
        """
        return {
            'code': 0,
            'message': message,
            'data': to_builtin(data),
        }


def write_bytes_atomic(path, payload):
    """先写临时文件再 os.replace，保证读者不会看到写了一半的文件"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_json_atomic(path, data):
    text = json.dumps(to_builtin(data), indent=2, sort_keys=True, ensure_ascii=False)
    return write_bytes_atomic(path, (text + '\n').encode('utf-8'))


def read_json(path):
    """读取 JSON；文件缺失或无法读取抛 MissingFileError，内容不是合法 JSON 抛 BadSpecError"""
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as exc:
        raise MissingFileError(f'无法读取文件: {path}', data={'path': str(path), 'error': str(exc)}) from exc
    except ValueError as exc:
        raise BadSpecError(f'JSON 格式错误: {path}', data={'path': str(path), 'error': str(exc)}) from exc
