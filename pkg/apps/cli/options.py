"""
各命令共用的参数与配置构造

损失相关参数名与公式中的符号一致：--eta --lambda --e --f --u --l。
"""
from django.conf import settings

from apps.masking.config import LossConfig, MaskFlags, OutlierConfig
from apps.optimizer.config import OptimConfig
from apps.photometric.config import PhotometricConfig
from apps.scenesim.export import load_scene_dir
from apps.scenesim.presets import PRESETS, preset
from apps.scenesim.render import render
from apps.system.exceptions import ConfigError

FRAME_SETS = {3: (-1, 0, 1), 5: (-2, -1, 0, 1, 2)}


def add_scene_arguments(parser):
    width, height = settings.DEPTHMASK['PRESET_RESOLUTION']
    parser.add_argument('--scene', help='simulate 命令输出的场景目录')
    parser.add_argument('--preset', help='预置场景名：' + '、'.join(sorted(PRESETS)))
    parser.add_argument('--width', type=int, default=width)
    parser.add_argument('--height', type=int, default=height)
    parser.add_argument('--frames', type=int, choices=sorted(FRAME_SETS), default=3, help='样本帧数')


def load_sample(options):
    if options.get('scene'):
        return load_scene_dir(options['scene'])
    if not options.get('preset'):
        raise ConfigError('需要 --scene 或 --preset 之一')
    spec = preset(
        options['preset'], seed=options['seed'], width=options['width'], height=options['height'],
        frames=FRAME_SETS[options['frames']],
    )
    return render(spec)


def add_loss_arguments(parser):
    parser.add_argument('--eta', type=float, default=1.0, help='光度项权重 η')
    parser.add_argument('--lambda', dest='lambda_', type=float, default=0.001, help='平滑项权重 λ')
    parser.add_argument('--e', type=float, default=0.5, help='平滑项尺度衰减 e')
    parser.add_argument('--f', type=float, default=0.25, help='光度项尺度权重 f')
    parser.add_argument('--u', type=float, default=0.5, help='异常值上界系数 u')
    parser.add_argument('--l', type=float, default=1.0, help='异常值下界系数 l')
    parser.add_argument('--scales', type=int, default=4)
    parser.add_argument('--stats-mode', choices=['per_scale', 'finest'], default='per_scale')
    parser.add_argument('--multiscale-mode', choices=['native', 'full_resolution'], default='native')
    parser.add_argument('--alpha', type=float, default=0.85, help='光度误差中 SSIM 的比重')
    parser.add_argument('--ssim-weighting', choices=['mean', 'gaussian'], default='mean')
    parser.add_argument('--no-outlier-mask', action='store_true')
    parser.add_argument('--no-principled-mask', action='store_true')
    parser.add_argument('--no-auto-mask', action='store_true')
    parser.add_argument('--no-min-reprojection', action='store_true')


def loss_configs(options, n_frames):
    """返回 (LossConfig, OutlierConfig, MaskFlags, PhotometricConfig)"""
    cfg = LossConfig(
        eta=options['eta'], lambda_=options['lambda_'], e=options['e'], f=options['f'],
        scales=options['scales'], stats_mode=options['stats_mode'], multiscale_mode=options['multiscale_mode'],
    )
    ocfg = OutlierConfig(l=options['l'], u=options['u'])
    overrides = {}
    if options['no_outlier_mask']:
        overrides['outlier'] = False
    if options['no_principled_mask']:
        overrides['principled'] = False
    if options['no_auto_mask']:
        overrides['auto'] = False
    if options['no_min_reprojection']:
        overrides['min_reprojection'] = False
    flags = MaskFlags.for_snippet(n_frames, **overrides)
    pcfg = PhotometricConfig(alpha=options['alpha'], weighting=options['ssim_weighting'])
    return cfg, ocfg, flags, pcfg


def add_optim_arguments(parser):
    parser.add_argument('--iters', type=int, default=500)
    parser.add_argument('--step-size', type=float, default=1.0, help='对数逆深度步长')
    parser.add_argument('--translation-step', type=float, default=0.01)
    parser.add_argument('--rotation-step', type=float, default=5e-4)
    parser.add_argument('--init-inv-depth', type=float, default=0.25)
    parser.add_argument('--init-jitter', type=float, default=0.0)
    parser.add_argument('--no-coarse-to-fine', action='store_true')
    parser.add_argument('--fix-pose', action='store_true', help='位姿固定为真值')
    parser.add_argument('--fix-depth', action='store_true', help='深度固定为真值')
    parser.add_argument('--log-every', type=int, default=50)


def optim_config(options, sample):
    cfg, ocfg, flags, pcfg = loss_configs(options, len(sample.spec.frames))
    return OptimConfig(
        max_iters=options['iters'],
        step_size=options['step_size'],
        translation_step=options['translation_step'],
        rotation_step=options['rotation_step'],
        init_inv_depth=options['init_inv_depth'],
        init_jitter=options['init_jitter'],
        pose_init=tuple(sample.gt_poses()) if options['fix_pose'] else None,
        optimize_depth=not options['fix_depth'],
        optimize_pose=not options['fix_pose'],
        coarse_to_fine=not options['no_coarse_to_fine'],
        loss=cfg,
        outlier=ocfg,
        flags=flags,
        photometric=pcfg,
        seed=options['seed'],
        workers=options['threads'],
        log_every=options['log_every'],
    )
