"""
运行清单（RunManifest）

每个管理命令结束时原子地写出 manifest.json，记录命令、参数快照、种子、版本、
输出路径与耗时。`manage.py replay` 读取清单即可按相同参数重跑。
"""
import logging
import platform
import time
from dataclasses import asdict, dataclass, field

import psutil

import project

from .exceptions import BadSpecError
from .utils import read_json, to_builtin, write_json_atomic

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def system_snapshot():
    """记录运行时的系统资源情况"""
    process = psutil.Process()
    memory = process.memory_info()
    return {
        'python': platform.python_version(),
        'cpu_count': psutil.cpu_count(logical=True),
        'rss_bytes': memory.rss,
        'total_memory_bytes': psutil.virtual_memory().total,
    }


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str = project.__version__
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    system: dict = field(default_factory=dict)
    status: str = 'running'

    def add_output(self, path):
        self.outputs.append(str(path))

    def to_dict(self):
        return to_builtin(asdict(self))

    def write(self, out_dir):
        path = out_dir / MANIFEST_NAME
        write_json_atomic(path, self.to_dict())
        logger.info(f'Manifest written: {path} status={self.status} wall_time={self.wall_time:.3f}s')
        return path

    @classmethod
    def load(cls, path):
        data = read_json(path)
        try:
            return cls(**data)
        except TypeError as exc:
            raise BadSpecError(f'不是有效的运行清单: {path}', data={'path': str(path), 'error': str(exc)}) from exc


class ManifestTimer:
    """with 语句里计时并在退出时补全清单"""

    def __init__(self, manifest):
        self.manifest = manifest
        self.start_time = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self.manifest

    def __exit__(self, exc_type, exc, tb):
        self.manifest.wall_time = time.perf_counter() - self.start_time
        self.manifest.system = system_snapshot()
        if exc_type is None:
            self.manifest.status = 'success'
        else:
            self.manifest.status = getattr(exc, 'code', 'failed')
        return False
