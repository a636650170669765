"""
合成场景描述

世界坐标系取目标帧（帧 0）的相机坐标系。camera_motion 是每一帧相机位姿的增量
（相机到世界），第 k 帧相机位姿 C_k = M^k；于是 T_{t→s} = C_s⁻¹。
物体是平行于像平面的平面贴片，第 k 帧的中心为 center + k·velocity。
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from apps.geometry.camera import Intrinsics
from apps.geometry.pose import Pose, compose, invert
from apps.masking.bundle import SampleBundle
from apps.system.exceptions import BadSpecError

LABELS = {
    'background': 0,
    'co_dir': 1,
    'contra_dir': 2,
    'slow': 3,
    'static_object': 4,
}
LABEL_NAMES = {value: name for name, value in LABELS.items()}
SHAPES = ('rectangle', 'disk')
# 相机与平面之间的最小距离（米）
MIN_CLEARANCE = 0.05


@dataclass(frozen=True)
class Background:
    distance: float
    texture_seed: int = 0
    frequency: float = 1.0
    color: Optional[Tuple[float, float, float]] = None


@dataclass(frozen=True)
class SceneObject:
    """size: 矩形为 (宽, 高)，圆盘为 (半径, 半径)，单位米"""

    shape: str
    size: Tuple[float, float]
    depth: float
    center: Tuple[float, float] = (0.0, 0.0)
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    label: str = 'static_object'
    texture_seed: int = 1
    frequency: float = 2.0
    color: Optional[Tuple[float, float, float]] = None

    @property
    def label_id(self):
        return LABELS[self.label]

    def depth_at(self, frame):
        return self.depth + frame * self.velocity[2]

    def center_at(self, frame):
        return (self.center[0] + frame * self.velocity[0], self.center[1] + frame * self.velocity[1])


@dataclass(frozen=True)
class SceneSpec:
    intrinsics: Intrinsics
    background: Background
    objects: Tuple[SceneObject, ...] = ()
    camera_motion: Pose = field(default_factory=Pose.identity)
    frames: Tuple[int, ...] = (-1, 0, 1)
    name: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'objects', tuple(self.objects))
        object.__setattr__(self, 'frames', tuple(int(f) for f in self.frames))
        self.check()

    def check(self):
        if 0 not in self.frames:
            raise BadSpecError('frames 必须包含目标帧 0', data={'frames': list(self.frames)})
        if len(set(self.frames)) != len(self.frames) or len(self.frames) < 2:
            raise BadSpecError('frames 至少两帧且不能重复', data={'frames': list(self.frames)})
        if not self.background.distance > 0:
            raise BadSpecError('背景距离必须为正', data={'distance': self.background.distance})
        for index, obj in enumerate(self.objects):
            if obj.shape not in SHAPES:
                raise BadSpecError(f'未知形状: {obj.shape}', data={'object': index})
            if obj.label not in LABELS:
                raise BadSpecError(f'未知运动标签: {obj.label}', data={'object': index})
            if min(obj.size) <= 0:
                raise BadSpecError('物体尺寸必须为正', data={'object': index})
        for frame in self.frames:
            camera_z = self.camera_pose(frame).translation[2]
            if self.background.distance - camera_z <= MIN_CLEARANCE:
                raise BadSpecError('相机穿过背景平面', data={'frame': frame})
            for index, obj in enumerate(self.objects):
                depth = obj.depth_at(frame)
                if not (0 < depth < self.background.distance):
                    raise BadSpecError(
                        '物体必须位于相机与背景之间',
                        data={'object': index, 'frame': frame, 'depth': depth},
                    )
                if depth - camera_z <= MIN_CLEARANCE:
                    raise BadSpecError('相机穿过物体平面', data={'object': index, 'frame': frame})

    @property
    def source_frames(self):
        return tuple(f for f in self.frames if f != 0)

    def camera_pose(self, frame):
        """第 frame 帧相机到世界（目标相机）的变换 M^frame"""
        step = self.camera_motion if frame >= 0 else invert(self.camera_motion)
        pose = Pose.identity()
        for _ in range(abs(frame)):
            pose = compose(pose, step)
        return pose

    def relative_pose(self, frame):
        """T_{t→s}：目标相机坐标 -> 第 frame 帧相机坐标"""
        return invert(self.camera_pose(frame))

    def to_dict(self):
        k = self.intrinsics
        return {
            'name': self.name,
            'intrinsics': k.to_dict(),
            'frames': list(self.frames),
            'camera_motion': {
                'rotation': self.camera_motion.tangent()[:3].tolist(),
                'translation': self.camera_motion.translation.tolist(),
            },
            'background': {
                'distance': self.background.distance,
                'texture_seed': self.background.texture_seed,
                'frequency': self.background.frequency,
                'color': list(self.background.color) if self.background.color is not None else None,
            },
            'objects': [
                {
                    'shape': obj.shape,
                    'size': list(obj.size),
                    'depth': obj.depth,
                    'center': list(obj.center),
                    'velocity': list(obj.velocity),
                    'label': obj.label,
                    'texture_seed': obj.texture_seed,
                    'frequency': obj.frequency,
                    'color': list(obj.color) if obj.color is not None else None,
                }
                for obj in self.objects
            ],
        }


@dataclass(frozen=True)
class RenderedSample:
    """渲染结果；除 labels 外均按帧号索引"""

    spec: SceneSpec
    images: dict
    depths: dict
    poses: dict
    occlusion: dict
    labels: np.ndarray

    @property
    def target(self):
        return self.images[0]

    @property
    def source_frames(self):
        return self.spec.source_frames

    def to_bundle(self, scales=4):
        frames = self.source_frames
        return SampleBundle.build(
            self.images[0],
            [self.images[f] for f in frames],
            self.spec.intrinsics,
            scales=scales,
            source_ids=frames,
        )

    def gt_poses(self):
        return [self.poses[f] for f in self.source_frames]

    def label_mask(self, name):
        return self.labels == LABELS[name]

    def present_labels(self):
        return [LABEL_NAMES[int(v)] for v in np.unique(self.labels)]
