from pathlib import Path

from django.core.management import call_command
from django.core.management.base import BaseCommand

from apps.cli.base import translate_errors
from apps.system.exceptions import DepthMaskError, MissingFileError
from apps.system.manifest import RunManifest


class Command(BaseCommand):
    help = '按 manifest.json 中记录的命令与参数重跑'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='manifest.json 路径')
        parser.add_argument('--out', help='新的输出目录，缺省为清单中的目录')

    def handle(self, *args, **options):
        path = Path(options['manifest'])
        try:
            if not path.exists():
                raise MissingFileError(f'清单不存在: {path}', data={'path': str(path)})
            manifest = RunManifest.load(path)
        except DepthMaskError as exc:
            raise translate_errors(exc) from exc
        config = dict(manifest.config)
        if options.get('out'):
            config['out'] = options['out']
        self.stdout.write(f'重跑 {manifest.command} -> {config["out"]}')
        call_command(manifest.command, stdout=self.stdout, stderr=self.stderr, **config)
