"""
深度评估：--pred 与 --gt 同为文件或同为目录

目录按文件名配对（优先 .pfm，没有时用 .png）：每个预测都必须有同名真值，否则报错；
没有预测的真值帧跳过。optimize 输出的 depth_t.pfm 因此可直接与场景目录比较。
--labels 为单个标签 PNG（所有样本共用）或与 gt 同名的标签 PNG 所在目录。
"""
import logging
from dataclasses import replace
from pathlib import Path

from apps.cli.base import DepthMaskCommand
from apps.evaluation.benchmark import benchmark_metrics
from apps.evaluation.config import DepthEvalConfig
from apps.evaluation.metrics import depth_metrics, weighted_average
from apps.evaluation.regions import region_metrics
from apps.evaluation.report import write_report
from apps.evaluation.trajectory import ate_snippets
from apps.geometry.camera import DepthMap
from apps.geometry.pose import load_trajectory
from apps.scenesim.scene import LABELS
from apps.system.exceptions import BadShapeError, MissingFileError
from apps.system.formats import load_depth, load_labels_png

logger = logging.getLogger(__name__)


def depth_files(folder):
    files = sorted(folder.glob('*.pfm')) or sorted(folder.glob('*.png'))
    return {path.name: path for path in files}


def match_files(pred, gt):
    pred, gt = Path(pred), Path(gt)
    for path in (pred, gt):
        if not path.exists():
            raise MissingFileError(f'路径不存在: {path}', data={'path': str(path)})
    if pred.is_file() and gt.is_file():
        return [(gt.name, pred, gt)]
    if pred.is_dir() != gt.is_dir():
        raise MissingFileError('--pred 与 --gt 必须同为文件或同为目录')
    pred_files, gt_files = depth_files(pred), depth_files(gt)
    if not pred_files:
        raise MissingFileError(f'目录中没有深度文件: {pred}', data={'path': str(pred)})
    for name in sorted(pred_files):
        if name not in gt_files:
            raise MissingFileError(f'缺少真值文件: {gt / name}', data={'path': str(gt / name)})
    unmatched = sorted(set(gt_files) - set(pred_files))
    if unmatched:
        logger.info('以下真值没有对应预测，跳过: %s', ', '.join(unmatched))
    return [(name, pred_files[name], gt_files[name]) for name in sorted(pred_files)]


def read_depth(path):
    values, valid = load_depth(path)
    return DepthMap(values=values, valid=valid)


class Command(DepthMaskCommand):
    help = '计算深度误差指标、按运动类别的指标以及片段 ATE'
    command = 'evaluate'

    def add_command_arguments(self, parser):
        parser.add_argument('--pred', required=True)
        parser.add_argument('--gt', required=True)
        parser.add_argument('--labels')
        parser.add_argument('--cap', type=float, default=80.0)
        parser.add_argument('--min-depth', type=float, default=1e-3)
        parser.add_argument('--no-median-scaling', action='store_true')
        parser.add_argument('--scaling-region', choices=['all', 'background_only'], default='all')
        parser.add_argument('--crop', type=float, nargs=4, metavar=('TOP', 'BOTTOM', 'LEFT', 'RIGHT'))
        parser.add_argument('--fixed-scale', type=float, help='固定的全局缩放，取代逐图中值缩放')
        parser.add_argument('--benchmark', action='store_true', help='额外计算 SILog 等评测服务器指标')
        parser.add_argument('--pred-traj')
        parser.add_argument('--gt-traj')
        parser.add_argument('--snippet', type=int, default=5)

    def _labels(self, options, name):
        path = Path(options['labels'])
        if path.is_dir():
            path = path / (Path(name).stem + '.png')
        labels, legend = load_labels_png(path)
        vocabulary = {label: index for index, label in legend.items()} if legend else dict(LABELS)
        return labels, vocabulary

    def run(self, options, out_dir, manifest):
        cfg = DepthEvalConfig(
            cap=options['cap'],
            min_depth=options['min_depth'],
            median_scaling=not options['no_median_scaling'],
            scaling_region=options['scaling_region'],
            crop=tuple(options['crop']) if options['crop'] else None,
            fixed_scale=options['fixed_scale'],
        )
        rows, reports, samples, benchmark = [], [], [], []
        vocabulary = None
        for name, pred_path, gt_path in match_files(options['pred'], options['gt']):
            pred, gt = read_depth(pred_path), read_depth(gt_path)
            if pred.shape != gt.shape:
                raise BadShapeError(
                    f'预测与真值尺寸不一致: {name}',
                    data={'file': name, 'pred': list(pred.shape), 'gt': list(gt.shape)},
                )
            if options.get('labels'):
                labels, vocabulary = self._labels(options, name)
                if labels.shape != gt.shape:
                    raise BadShapeError(
                        f'标签图与真值尺寸不一致: {name}',
                        data={'file': name, 'labels': list(labels.shape), 'gt': list(gt.shape)},
                    )
                samples.append((pred, gt, labels))
                background = labels == vocabulary.get('background')
            else:
                background = None
            report = depth_metrics(pred, gt, cfg=cfg, background=background)
            reports.append(report)
            rows.append({'file': name, **report.to_dict()})
            if options['benchmark']:
                benchmark.append({'file': name, **benchmark_metrics(pred, gt, cfg=cfg).to_dict()})

        data = {
            'config': cfg.to_dict(),
            'files': rows,
            'overall': weighted_average(reports).to_dict(),
        }
        if benchmark:
            data['benchmark'] = benchmark
        if samples:
            region_cfg = replace(cfg, scaling_region='background_only')
            regions = region_metrics(samples, region_cfg, vocabulary)
            data['regions'] = regions.to_dict()
            rows = rows + [{'file': 'regions', **row} for row in regions.rows()]
        if options.get('pred_traj') and options.get('gt_traj'):
            ate = ate_snippets(
                load_trajectory(options['pred_traj']), load_trajectory(options['gt_traj']), options['snippet'],
            )
            data['ate'] = ate.to_dict()
            self.stdout.write(f'ATE {ate.mean:.4f} ± {ate.std:.4f}')
        for path in write_report(out_dir, 'evaluation', data, rows, options['format']):
            manifest.add_output(path)
        overall = data['overall']
        self.stdout.write(f'abs_rel {overall["abs_rel"]:.4f} rmse {overall["rmse"]:.4f} delta1 {overall["delta1"]:.4f}')
