"""
五帧片段 ATE

每个连续窗口（步长 1）内，把预测与真值都表示到窗口第一帧的坐标系下，
用最小二乘求单个尺度 s = Σ g·p / Σ p·p，误差为 mean ‖s·p − g‖。
"""
from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from apps.geometry.pose import compose, invert
from apps.system.exceptions import BadShapeError, TooShortError


@dataclass(frozen=True)
class AteReport:
    mean: float
    std: float
    errors: List[float]
    snippet: int

    def to_dict(self):
        return asdict(self)


def anchored_positions(poses):
    """以第一帧为原点的相机位置 (N, 3)"""
    anchor = invert(poses[0])
    return np.array([compose(anchor, pose).translation for pose in poses])


def snippet_error(pred, gt):
    p = anchored_positions(pred)
    g = anchored_positions(gt)
    denom = float(np.sum(p * p))
    scale = float(np.sum(g * p) / denom) if denom > 0 else 1.0
    return float(np.linalg.norm(scale * p - g, axis=1).mean())


def ate_snippets(pred_traj, gt_traj, snippet=5):
    """轨迹中的位姿为相机到世界的变换"""
    if len(pred_traj) != len(gt_traj):
        raise BadShapeError('预测与真值轨迹长度不一致', data={'pred': len(pred_traj), 'gt': len(gt_traj)})
    if snippet < 2 or len(gt_traj) < snippet:
        raise TooShortError(f'轨迹长度不足 {snippet} 帧', data={'length': len(gt_traj), 'snippet': snippet})
    errors = [
        snippet_error(pred_traj[i:i + snippet], gt_traj[i:i + snippet])
        for i in range(len(gt_traj) - snippet + 1)
    ]
    return AteReport(
        mean=float(np.mean(errors)),
        std=float(np.std(errors)),
        errors=errors,
        snippet=snippet,
    )
