"""
逐像素光线投射渲染

每个像素中心发出一条光线，与背景平面及各物体平面求交，取最近的命中点。
不做抗锯齿；遮挡掩码通过把目标帧命中点重投影到源帧并做深度比较得到。
"""
import logging

import numpy as np

from apps.geometry.camera import DepthMap

from .scene import RenderedSample, SceneSpec

logger = logging.getLogger(__name__)

# 深度比较的相对容差
OCCLUSION_TOLERANCE = 0.01
TEXTURE_TERMS = 4


def texture(seed, frequency, x, y):
    """每个通道在两个轴向上各叠加 4 个正弦，归一化到 [0.1, 0.9]"""
    rng = np.random.default_rng(seed)
    out = np.empty(np.shape(x) + (3,))
    for c in range(3):
        total = np.zeros(np.shape(x))
        norm = 0.0
        for coord in (x, y):
            freqs = frequency * rng.uniform(0.5, 1.5, TEXTURE_TERMS)
            phases = rng.uniform(0.0, 2 * np.pi, TEXTURE_TERMS)
            amps = rng.uniform(0.5, 1.0, TEXTURE_TERMS)
            for f, phi, a in zip(freqs, phases, amps):
                total += a * np.sin(2 * np.pi * f * coord + phi)
            norm += amps.sum()
        out[..., c] = 0.5 + 0.4 * total / norm
    return out


def _inside(obj, local_x, local_y):
    if obj.shape == 'disk':
        return local_x ** 2 + local_y ** 2 <= obj.size[0] ** 2
    return (np.abs(local_x) <= obj.size[0] / 2) & (np.abs(local_y) <= obj.size[1] / 2)


def cast_rays(spec: SceneSpec, frame, u, v):
    """在第 frame 帧对连续像素坐标 (u, v) 投射光线

    Returns:
        depth: 相机坐标系下命中点的 z
        hit: 命中物体的下标，背景为 -1
        points: 世界坐标系中的命中点 (..., 3)
    """
    k = spec.intrinsics
    camera = spec.camera_pose(frame)
    rays = np.stack([(u - k.cx) / k.fx, (v - k.cy) / k.fy, np.ones_like(u)], axis=-1)
    directions = rays @ camera.rotation.T
    origin = camera.translation
    dz = directions[..., 2]
    safe_dz = np.where(dz > 0, dz, 1.0)

    best = np.where(dz > 0, (spec.background.distance - origin[2]) / safe_dz, np.inf)
    hit = np.full(np.shape(u), -1, dtype=np.int64)
    for index, obj in enumerate(spec.objects):
        lam = np.where(dz > 0, (obj.depth_at(frame) - origin[2]) / safe_dz, np.inf)
        center = obj.center_at(frame)
        local_x = origin[0] + lam * directions[..., 0] - center[0]
        local_y = origin[1] + lam * directions[..., 1] - center[1]
        closer = (lam > 0) & (lam < best) & _inside(obj, local_x, local_y)
        best = np.where(closer, lam, best)
        hit = np.where(closer, index, hit)
    points = origin + best[..., None] * directions
    # 光线方向的相机 z 分量为 1，故参数 λ 即深度
    return best, hit, points


def shade(spec: SceneSpec, frame, hit, points):
    image = np.empty(points.shape[:-1] + (3,))
    background = hit < 0
    bg = spec.background
    if bg.color is not None:
        image[background] = bg.color
    else:
        image[background] = texture(bg.texture_seed, bg.frequency, points[background, 0], points[background, 1])
    for index, obj in enumerate(spec.objects):
        selected = hit == index
        if not selected.any():
            continue
        if obj.color is not None:
            image[selected] = obj.color
            continue
        center = obj.center_at(frame)
        image[selected] = texture(
            obj.texture_seed, obj.frequency,
            points[selected, 0] - center[0], points[selected, 1] - center[1],
        )
    return image


def _pixel_grid(spec):
    k = spec.intrinsics
    v, u = np.mgrid[0:k.height, 0:k.width].astype(np.float64)
    return u, v


def occlusion_mask(spec: SceneSpec, frame, target_hit, target_points):
    """目标帧像素在第 frame 帧中被遮挡处为真；投影出界的像素不算遮挡"""
    k = spec.intrinsics
    moved = target_points.copy()
    for index, obj in enumerate(spec.objects):
        selected = target_hit == index
        moved[selected] += frame * np.asarray(obj.velocity, dtype=np.float64)
    camera_points = spec.relative_pose(frame).transform(moved)
    z = camera_points[..., 2]
    in_front = z > 0
    safe_z = np.where(in_front, z, 1.0)
    u = k.fx * camera_points[..., 0] / safe_z + k.cx
    v = k.fy * camera_points[..., 1] / safe_z + k.cy
    in_bounds = in_front & (u >= 0) & (u <= k.width - 1) & (v >= 0) & (v <= k.height - 1)

    occluded = np.zeros(z.shape, dtype=bool)
    if in_bounds.any():
        visible_depth, _, _ = cast_rays(spec, frame, u[in_bounds], v[in_bounds])
        occluded[in_bounds] = z[in_bounds] > visible_depth * (1.0 + OCCLUSION_TOLERANCE)
    return occluded


def render(spec: SceneSpec):
    u, v = _pixel_grid(spec)
    images, depths, poses = {}, {}, {}
    target_hit = target_points = None
    for frame in spec.frames:
        depth, hit, points = cast_rays(spec, frame, u, v)
        images[frame] = shade(spec, frame, hit, points)
        depths[frame] = DepthMap(values=depth, valid=np.isfinite(depth) & (depth > 0))
        poses[frame] = spec.relative_pose(frame)
        if frame == 0:
            target_hit, target_points = hit, points

    labels = np.zeros(spec.intrinsics.shape, dtype=np.uint8)
    for index, obj in enumerate(spec.objects):
        labels[target_hit == index] = obj.label_id

    occlusion = {
        frame: occlusion_mask(spec, frame, target_hit, target_points) for frame in spec.source_frames
    }
    logger.debug(
        '渲染场景 %s: %d 帧, 遮挡像素 %s',
        spec.name, len(spec.frames), {f: int(m.sum()) for f, m in occlusion.items()},
    )
    return RenderedSample(
        spec=spec, images=images, depths=depths, poses=poses, occlusion=occlusion, labels=labels,
    )
