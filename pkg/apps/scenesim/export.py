"""
RenderedSample 的导出与读回

目录结构：
    scene.json                场景描述
    image_<帧>.png            8 位 RGB
    depth_<帧>.pfm / .png     PFM 与 16 位 PNG（米 × 256）
    occlusion_<帧>.png        目标像素在该源帧中被遮挡（255）
    labels.png + labels.json  目标帧运动标签
    poses.txt                 各源帧的 T_{t→s}，每行 12 个数
"""
from pathlib import Path

import numpy as np

from apps.geometry.camera import DepthMap
from apps.geometry.pose import Pose, load_trajectory, save_trajectory
from apps.system.exceptions import MissingFileError
from apps.system.formats import (
    load_image_png, load_labels_png, load_mask_png, load_pfm, save_depth_png16, save_image_png,
    save_labels_png, save_mask_png, save_pfm,
)
from apps.system.utils import read_json, write_json_atomic

from .scene import LABEL_NAMES, RenderedSample
from .serializers import load_scene_spec

SCENE_FILE = 'scene.json'


def frame_tag(frame):
    return 't' if frame == 0 else f't{frame:+d}'


def export_sample(sample, out_dir):
    """写出全部文件并返回路径列表（按写出顺序）"""
    out_dir = Path(out_dir)
    paths = [write_json_atomic(out_dir / SCENE_FILE, sample.spec.to_dict())]
    for frame in sample.spec.frames:
        tag = frame_tag(frame)
        depth = sample.depths[frame]
        paths.append(save_image_png(out_dir / f'image_{tag}.png', sample.images[frame]))
        paths.append(save_pfm(out_dir / f'depth_{tag}.pfm', depth.values))
        paths.append(save_depth_png16(out_dir / f'depth_{tag}.png', depth.values, depth.valid))
    for frame in sample.source_frames:
        paths.append(save_mask_png(out_dir / f'occlusion_{frame_tag(frame)}.png', sample.occlusion[frame]))
    paths.append(save_labels_png(out_dir / 'labels.png', sample.labels, LABEL_NAMES))
    paths.append(save_trajectory(out_dir / 'poses.txt', sample.gt_poses()))
    return paths


def load_scene_dir(scene_dir):
    """读回 export_sample 写出的目录；图像已量化为 8 位"""
    scene_dir = Path(scene_dir)
    for name in (SCENE_FILE, 'poses.txt'):
        if not (scene_dir / name).exists():
            raise MissingFileError(f'场景目录缺少文件: {scene_dir / name}', data={'path': str(scene_dir / name)})
    spec = load_scene_spec(read_json(scene_dir / SCENE_FILE))
    images, depths, occlusion = {}, {}, {}
    for frame in spec.frames:
        tag = frame_tag(frame)
        images[frame] = load_image_png(scene_dir / f'image_{tag}.png')
        values = load_pfm(scene_dir / f'depth_{tag}.pfm')
        depths[frame] = DepthMap(values=values, valid=np.isfinite(values) & (values > 0))
    for frame in spec.source_frames:
        occlusion[frame] = load_mask_png(scene_dir / f'occlusion_{frame_tag(frame)}.png')
    labels, _ = load_labels_png(scene_dir / 'labels.png')
    poses = dict(zip(spec.source_frames, load_trajectory(scene_dir / 'poses.txt')))
    poses[0] = Pose.identity()
    return RenderedSample(
        spec=spec, images=images, depths=depths, poses=poses, occlusion=occlusion, labels=labels,
    )
