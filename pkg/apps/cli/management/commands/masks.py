import logging

import numpy as np

from apps.cli.base import DepthMaskCommand
from apps.cli.options import add_loss_arguments, add_scene_arguments, load_sample, loss_configs
from apps.evaluation.report import write_report
from apps.geometry.camera import DepthMap
from apps.geometry.pose import Pose, load_trajectory
from apps.masking.loss import total_loss
from apps.optimizer.objective import inverse_depth_pyramid
from apps.scenesim.export import frame_tag
from apps.system.exceptions import BadShapeError
from apps.system.formats import load_depth, save_heatmap_png, save_mask_png

logger = logging.getLogger(__name__)


class Command(DepthMaskCommand):
    help = '在给定深度与位姿下输出各掩码及误差热图'
    command = 'masks'

    def add_command_arguments(self, parser):
        add_scene_arguments(parser)
        add_loss_arguments(parser)
        parser.add_argument('--depth', help='目标帧深度（PFM 或 16 位 PNG），缺省为场景真值')
        parser.add_argument('--poses', help='各源帧 T_{t→s}（每行 12 个数），缺省为场景真值')
        parser.add_argument('--identity', action='store_true', help='所有源帧位姿取单位阵')

    def _inputs(self, options, sample):
        if options.get('depth'):
            values, valid = load_depth(options['depth'])
            depth = DepthMap.from_values(values, valid)
        else:
            depth = sample.depths[0]
        n_sources = len(sample.source_frames)
        if options['identity']:
            poses = [Pose.identity() for _ in range(n_sources)]
        elif options.get('poses'):
            poses = load_trajectory(options['poses'])
            if len(poses) != n_sources:
                raise BadShapeError(
                    f'位姿文件行数与源帧数量不一致: {options["poses"]}',
                    data={'poses': len(poses), 'sources': n_sources},
                )
        else:
            poses = sample.gt_poses()
        return depth, poses

    def run(self, options, out_dir, manifest):
        sample = load_sample(options)
        cfg, ocfg, flags, pcfg = loss_configs(options, len(sample.spec.frames))
        bundle = sample.to_bundle(scales=cfg.scales)
        depth, poses = self._inputs(options, sample)
        inv_depths = inverse_depth_pyramid(depth, cfg.scales)
        result = total_loss(bundle, inv_depths, poses, cfg, ocfg, flags, pcfg, workers=options['threads'])

        rows = []
        for r in range(cfg.scales):
            for s, source_id in enumerate(bundle.source_ids):
                tag = f'{frame_tag(source_id)}_r{r}'
                mask_set = result.masks[r][s]
                components = {**mask_set.components(), 'combined': mask_set.combined}
                row = {'scale': r, 'source': source_id, 'photometric': result.terms[r][s]}
                for name, mask in components.items():
                    manifest.add_output(save_mask_png(out_dir / f'mask_{name}_{tag}.png', mask))
                    row[f'{name}_fraction'] = float(np.mean(mask))
                error = result.errors[r][s]
                manifest.add_output(save_heatmap_png(out_dir / f'error_{tag}.png', error.values, error.valid))
                rows.append(row)

        report = {
            'loss': result.loss,
            'photometric': result.photometric,
            'smoothness': result.smoothness,
            'stats': [None if st is None else st.to_dict() for st in result.stats],
            'fully_masked': [list(item) for item in result.fully_masked],
            'rows': rows,
        }
        for path in write_report(out_dir, 'masks', report, rows, options['format']):
            manifest.add_output(path)
        logger.info('掩码已写出: %d 项', len(rows))
