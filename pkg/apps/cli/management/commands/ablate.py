import numpy as np

from apps.cli.base import DepthMaskCommand
from apps.cli.options import add_loss_arguments, add_optim_arguments, add_scene_arguments, load_sample, optim_config
from apps.evaluation.report import write_report
from apps.optimizer.ablate import VARIANT_SETS, GroundTruth, ablate, comparison_rows
from apps.optimizer.objective import inverse_depth_pyramid
from apps.system.formats import save_pfm


class Command(DepthMaskCommand):
    help = '在同一样本上比较不同掩码/多尺度设置的优化结果'
    command = 'ablate'

    def add_command_arguments(self, parser):
        add_scene_arguments(parser)
        add_loss_arguments(parser)
        add_optim_arguments(parser)
        parser.add_argument('--variants', choices=sorted(VARIANT_SETS), default='standard')

    def run(self, options, out_dir, manifest):
        sample = load_sample(options)
        cfg = optim_config(options, sample)
        bundle = sample.to_bundle(scales=cfg.loss.scales)
        inv_init = inverse_depth_pyramid(sample.depths[0], cfg.loss.scales) if options['fix_depth'] else None
        variants = VARIANT_SETS[options['variants']](cfg)
        truth = GroundTruth(depth=sample.depths[0], labels=sample.labels)
        results = ablate(bundle, variants, cfg, truth, inv_depths=inv_init)
        for result in results:
            depth = result.state.depth(0)
            values = np.where(depth.valid, depth.values, 0.0)
            manifest.add_output(save_pfm(out_dir / f'depth_{result.name}.pfm', values))
            self.stdout.write(f'{result.name}: final loss {result.final_loss:.6f}')
        report = {
            'variants': [v.to_dict() for v in variants],
            'results': [r.to_dict() for r in results],
        }
        for path in write_report(out_dir, 'ablation', report, comparison_rows(results), options['format']):
            manifest.add_output(path)
