"""
预置场景

所有预置场景为 128×96、三帧 (-1, 0, 1)，相机每帧前进 0.1 m 并横移 0.05 m。
seed 只影响纹理。
"""
from apps.geometry.camera import Intrinsics
from apps.geometry.pose import Pose
from apps.system.exceptions import UnknownPresetError

from .scene import Background, SceneObject, SceneSpec

CAMERA_STEP = (0.05, 0.0, 0.1)


def preset_intrinsics(width=128, height=96):
    focal = 100.0 * width / 128
    return Intrinsics(
        fx=focal, fy=focal, cx=(width - 1) / 2, cy=(height - 1) / 2, width=width, height=height,
    )


def _static(seed, k):
    return SceneSpec(
        intrinsics=k,
        background=Background(distance=5.0, texture_seed=seed, frequency=1.0),
        objects=[
            SceneObject(
                shape='rectangle', size=(0.9, 0.7), depth=3.0, center=(-0.5, 0.2),
                label='static_object', texture_seed=seed + 1,
            ),
        ],
        camera_motion=Pose.from_translation(CAMERA_STEP),
    )


def _co_dir(seed, k):
    return SceneSpec(
        intrinsics=k,
        background=Background(distance=5.0, texture_seed=seed, frequency=1.0),
        objects=[
            SceneObject(
                shape='rectangle', size=(1.0, 0.7), depth=3.0, center=(0.3, 0.25),
                velocity=CAMERA_STEP, label='co_dir', texture_seed=seed + 1,
            ),
        ],
        camera_motion=Pose.from_translation(CAMERA_STEP),
    )


def _contra_dir(seed, k):
    return SceneSpec(
        intrinsics=k,
        background=Background(distance=5.0, texture_seed=seed, frequency=1.0),
        objects=[
            SceneObject(
                shape='rectangle', size=(1.0, 0.7), depth=3.0, center=(0.3, 0.25),
                velocity=(0.0, 0.0, -0.4), label='contra_dir', texture_seed=seed + 1,
            ),
        ],
        camera_motion=Pose.from_translation(CAMERA_STEP),
    )


def _occlusion(seed, k):
    return SceneSpec(
        intrinsics=k,
        background=Background(distance=5.0, texture_seed=seed, frequency=1.0),
        objects=[
            SceneObject(
                shape='disk', size=(0.4, 0.4), depth=2.0, center=(0.0, 0.0),
                label='static_object', texture_seed=seed + 1,
            ),
        ],
        camera_motion=Pose.from_translation((0.15, 0.0, 0.05)),
    )


def _mixed(seed, k):
    return SceneSpec(
        intrinsics=k,
        background=Background(distance=6.0, texture_seed=seed, frequency=1.0),
        objects=[
            SceneObject(
                shape='rectangle', size=(0.8, 0.6), depth=3.5, center=(-1.0, 0.5),
                velocity=CAMERA_STEP, label='co_dir', texture_seed=seed + 1,
            ),
            SceneObject(
                shape='rectangle', size=(0.8, 0.6), depth=3.0, center=(0.8, 0.45),
                velocity=(0.0, 0.0, -0.4), label='contra_dir', texture_seed=seed + 2,
            ),
            SceneObject(
                shape='rectangle', size=(0.7, 0.5), depth=4.0, center=(0.3, -0.9),
                velocity=(0.01, 0.0, 0.02), label='slow', texture_seed=seed + 3,
            ),
            SceneObject(
                shape='disk', size=(0.3, 0.3), depth=2.5, center=(-0.3, -0.2),
                label='static_object', texture_seed=seed + 4,
            ),
        ],
        camera_motion=Pose.from_translation(CAMERA_STEP),
    )


PRESETS = {
    'static': _static,
    'co_dir': _co_dir,
    'contra_dir': _contra_dir,
    'occlusion': _occlusion,
    'mixed': _mixed,
}


def preset(name, seed=0, width=128, height=96, frames=(-1, 0, 1)):
    try:
        builder = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f'未知的预置场景: {name}', data={'choices': sorted(PRESETS)}) from None
    spec = builder(int(seed), preset_intrinsics(width, height))
    return SceneSpec(
        intrinsics=spec.intrinsics,
        background=spec.background,
        objects=spec.objects,
        camera_motion=spec.camera_motion,
        frames=frames,
        name=name,
    )
