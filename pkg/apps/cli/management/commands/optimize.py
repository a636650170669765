import csv
import io
import logging

import numpy as np

from apps.cli.base import DepthMaskCommand
from apps.cli.options import add_loss_arguments, add_optim_arguments, add_scene_arguments, load_sample, optim_config
from apps.evaluation.metrics import depth_metrics
from apps.evaluation.regions import region_metrics
from apps.evaluation.report import write_report
from apps.geometry.pose import save_trajectory
from apps.masking.loss import total_loss
from apps.optimizer.gradcheck import pose_gradient_check
from apps.optimizer.objective import inverse_depth_pyramid
from apps.optimizer.optimize import optimize
from apps.scenesim.export import frame_tag
from apps.system.exceptions import DivergedError
from apps.system.formats import save_depth_png16, save_mask_png, save_pfm
from apps.system.utils import write_bytes_atomic

logger = logging.getLogger(__name__)


def loss_csv(state):
    output = io.StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(['iteration', 'loss', 'kept_fraction'])
    for i, (loss, kept) in enumerate(zip(state.loss_history, state.kept_history)):
        writer.writerow([i, repr(loss), repr(kept)])
    return output.getvalue()


class Progress:
    """每 checkpoint_every 次迭代保存一次掩码；进度行只由优化器日志输出"""

    def __init__(self, out_dir, manifest, bundle, checkpoint_every):
        self.out_dir = out_dir
        self.manifest = manifest
        self.bundle = bundle
        self.checkpoint_every = checkpoint_every

    def __call__(self, state, result):
        if self.checkpoint_every and state.iteration % self.checkpoint_every == 0:
            folder = self.out_dir / 'checkpoints' / f'iter_{state.iteration:05d}'
            for s, source_id in enumerate(self.bundle.source_ids):
                path = save_mask_png(folder / f'mask_{frame_tag(source_id)}.png', result.combined_mask(0, s))
                self.manifest.add_output(path)


class Command(DepthMaskCommand):
    help = '在合成场景上直接优化逆深度与位姿'
    command = 'optimize'

    def add_command_arguments(self, parser):
        add_scene_arguments(parser)
        add_loss_arguments(parser)
        add_optim_arguments(parser)
        parser.add_argument('--checkpoint-every', type=int, default=0, help='每隔多少次迭代保存掩码，0 表示不保存')
        parser.add_argument('--gradcheck', action='store_true', help='在最终状态上做位姿梯度的中心差分校验')

    def write_state(self, state, out_dir, manifest):
        depth = state.depth(0)
        values = np.where(depth.valid, depth.values, 0.0)
        for path in (
            save_pfm(out_dir / f'depth_{frame_tag(0)}.pfm', values),
            save_depth_png16(out_dir / f'depth_{frame_tag(0)}.png', values, depth.valid),
            save_trajectory(out_dir / 'poses.txt', state.poses),
            write_bytes_atomic(out_dir / 'loss.csv', loss_csv(state).encode('utf-8')),
        ):
            manifest.add_output(path)

    def run(self, options, out_dir, manifest):
        sample = load_sample(options)
        cfg = optim_config(options, sample)
        bundle = sample.to_bundle(scales=cfg.loss.scales)
        inv_init = inverse_depth_pyramid(sample.depths[0], cfg.loss.scales) if options['fix_depth'] else None
        progress = Progress(out_dir, manifest, bundle, options['checkpoint_every'])
        try:
            state = optimize(bundle, cfg, inv_depths=inv_init, callback=progress)
        except DivergedError as exc:
            if exc.state is not None:
                self.write_state(exc.state, out_dir, manifest)
            raise
        self.write_state(state, out_dir, manifest)

        pred = state.depth(0)
        metrics = depth_metrics(pred, sample.depths[0])
        regions = region_metrics([(pred, sample.depths[0], sample.labels)])
        report = {
            'iterations': state.iteration,
            'initial_loss': state.loss_history[0],
            'final_loss': state.loss_history[-1],
            'kept_fraction': state.kept_history[-1],
            'metrics': metrics.to_dict(),
            'regions': regions.to_dict(),
            'poses': {
                str(source_id): pose.to_dict() for source_id, pose in zip(bundle.source_ids, state.poses)
            },
            'config': cfg.to_dict(),
        }
        if options['gradcheck']:
            result = total_loss(
                bundle, state.inv_depths, state.poses, cfg.loss, cfg.outlier, cfg.flags, cfg.photometric,
                workers=cfg.workers, with_jacobians=True,
            )
            report['gradcheck'] = pose_gradient_check(bundle, state, result, cfg)
        rows = [{'region': 'all', **metrics.to_dict()}] + regions.rows()
        for path in write_report(out_dir, 'metrics', report, rows, options['format']):
            manifest.add_output(path)
        logger.info('abs_rel %.4f rmse %.4f', metrics.abs_rel, metrics.rmse)
