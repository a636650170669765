from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from apps.geometry.camera import DepthMap
from apps.geometry.pose import Pose


@dataclass(frozen=True)
class OptimState:
    """优化变量：各尺度的对数逆深度 ρ = log(1/D) 与各源帧位姿 T_{t→s}

    每一步都生成新的状态对象，旧状态可以安全地保留（发散时返回最后一个有限状态）。
    """

    log_inv_depths: Tuple[np.ndarray, ...]
    poses: Tuple[Pose, ...]
    iteration: int = 0
    loss_history: List[float] = field(default_factory=list)
    kept_history: List[float] = field(default_factory=list)
    last_result: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def inv_depths(self):
        return [np.exp(rho) for rho in self.log_inv_depths]

    @property
    def pose_tangents(self):
        return np.array([pose.tangent() for pose in self.poses])

    def depth(self, scale=0):
        return DepthMap.from_inverse(np.exp(self.log_inv_depths[scale]))

    def is_finite(self):
        return all(np.isfinite(rho).all() for rho in self.log_inv_depths) and all(
            np.isfinite(pose.rotation).all() and np.isfinite(pose.translation).all() for pose in self.poses
        )

    def advanced(self, log_inv_depths, poses, loss, kept_fraction):
        return replace(
            self,
            log_inv_depths=tuple(log_inv_depths),
            poses=tuple(poses),
            iteration=self.iteration + 1,
            loss_history=self.loss_history + [loss],
            kept_history=self.kept_history + [kept_fraction],
        )
