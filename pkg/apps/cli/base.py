"""
管理命令基类

统一处理 --seed / --threads / --format / --out，把工具箱异常翻译成
CommandError（输入错误退出码 2，数值错误退出码 3），并在结束时写出 RunManifest。
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.system.exceptions import DepthMaskError
from apps.system.manifest import ManifestTimer, RunManifest
from apps.system.utils import to_builtin

logger = logging.getLogger(__name__)

# BaseCommand 自带的选项，不进入清单
DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
    'stdout', 'stderr',
}


def translate_errors(exc):
    logger.error('[%s] %s %s', exc.code, exc.message, exc.data or '')
    return CommandError(f'[{exc.code}] {exc.message}', returncode=exc.exit_code)


class DepthMaskCommand(BaseCommand):
    command = None

    def add_arguments(self, parser):
        defaults = settings.DEPTHMASK
        parser.add_argument('--out', required=True, help='输出目录')
        parser.add_argument('--seed', type=int, default=defaults['SEED'], help='随机种子')
        parser.add_argument('--threads', type=int, default=defaults['THREADS'], help='并行线程数上限')
        parser.add_argument('--format', choices=['json', 'csv'], default='json', help='报告格式（csv 时额外写出 CSV）')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def snapshot(self, options):
        return to_builtin({k: v for k, v in options.items() if k not in DJANGO_OPTIONS})

    def handle(self, *args, **options):
        out_dir = Path(options['out'])
        manifest = RunManifest(command=self.command, config=self.snapshot(options), seed=options['seed'])
        try:
            with ManifestTimer(manifest):
                self.run(options, out_dir, manifest)
        except DepthMaskError as exc:
            raise translate_errors(exc) from exc
        finally:
            manifest.write(out_dir)
        self.stdout.write(self.style.SUCCESS(f'{self.command} 完成，输出目录: {out_dir}'))

    def run(self, options, out_dir, manifest):
        raise NotImplementedError
