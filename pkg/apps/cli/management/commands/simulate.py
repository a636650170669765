import logging

from apps.cli.base import DepthMaskCommand
from apps.cli.options import FRAME_SETS, add_scene_arguments
from apps.scenesim.export import export_sample
from apps.scenesim.presets import preset
from apps.scenesim.render import render
from apps.scenesim.serializers import load_scene_spec
from apps.system.utils import read_json

logger = logging.getLogger(__name__)


class Command(DepthMaskCommand):
    help = '渲染合成场景并写出图像、深度、遮挡、标签与位姿'
    command = 'simulate'

    def add_command_arguments(self, parser):
        add_scene_arguments(parser)
        parser.add_argument('--spec', help='场景描述 JSON 文件')

    def run(self, options, out_dir, manifest):
        if options.get('spec'):
            spec = load_scene_spec(read_json(options['spec']))
        else:
            spec = preset(
                options['preset'] or 'static', seed=options['seed'],
                width=options['width'], height=options['height'], frames=FRAME_SETS[options['frames']],
            )
        sample = render(spec)
        for path in export_sample(sample, out_dir):
            manifest.add_output(path)
        logger.info('场景 %s 已写出到 %s', spec.name, out_dir)
