from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from apps.geometry.camera import Intrinsics
from apps.photometric.pyramid import build_pyramid
from apps.system.exceptions import BadShapeError, EmptySampleError
from apps.warp.sampling import as_image


@dataclass(frozen=True)
class SampleBundle:
    """一个训练样本：目标帧、若干源帧、内参及各自的图像金字塔

    source_ids 记录源帧相对目标帧的时间偏移（如 -1、+1）。
    """

    target: np.ndarray
    sources: Tuple[np.ndarray, ...]
    intrinsics: Intrinsics
    scales: int = 4
    source_ids: Tuple[int, ...] = ()
    target_pyramid: List[np.ndarray] = field(default_factory=list, repr=False)
    source_pyramids: List[List[np.ndarray]] = field(default_factory=list, repr=False)
    level_intrinsics: List[Intrinsics] = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, target, sources, intrinsics, scales=4, source_ids=None):
        target = as_image(target)
        sources = tuple(as_image(s) for s in sources)
        if not sources:
            raise EmptySampleError('样本至少需要一个源帧')
        for index, source in enumerate(sources):
            if source.shape != target.shape:
                raise BadShapeError(
                    '源帧与目标帧尺寸不一致',
                    data={'source': index, 'shape': list(source.shape), 'target': list(target.shape)},
                )
        if target.shape[:2] != intrinsics.shape:
            raise BadShapeError(
                '图像与内参尺寸不一致',
                data={'image': list(target.shape), 'intrinsics': list(intrinsics.shape)},
            )
        if source_ids is None:
            source_ids = tuple(range(len(sources)))
        if len(source_ids) != len(sources):
            raise BadShapeError('source_ids 与源帧数量不一致')
        return cls(
            target=target,
            sources=sources,
            intrinsics=intrinsics,
            scales=scales,
            source_ids=tuple(int(i) for i in source_ids),
            target_pyramid=build_pyramid(target, scales),
            source_pyramids=[build_pyramid(s, scales) for s in sources],
            level_intrinsics=[intrinsics.at_level(r) for r in range(scales)],
        )

    @property
    def num_sources(self):
        return len(self.sources)

    def level_shape(self, scale):
        return self.level_intrinsics[scale].shape

    def reordered(self, order):
        """按给定顺序重排源帧"""
        return SampleBundle.build(
            self.target,
            [self.sources[i] for i in order],
            self.intrinsics,
            scales=self.scales,
            source_ids=[self.source_ids[i] for i in order],
        )
