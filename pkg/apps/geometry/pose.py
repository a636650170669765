"""
SE(3) 位姿

Pose 表示 T_{t→s}：把目标相机坐标系中的点变换到源相机坐标系，X_s = R X_t + t。
6 维切向量约定为 (ω, t)，扰动采用左乘：exp(δω)·R，t + δt。
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from apps.system.exceptions import BadShapeError, ConfigError
from apps.system.utils import write_bytes_atomic

ORTHONORMAL_TOL = 1e-9
SMALL_ANGLE = 1e-8


def skew(w):
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def so3_exp(omega):
    """Rodrigues 公式；小角度时取一阶近似"""
    omega = np.asarray(omega, dtype=np.float64)
    theta = float(np.linalg.norm(omega))
    if theta < SMALL_ANGLE:
        return np.eye(3) + skew(omega)
    k = skew(omega / theta)
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def so3_log(rotation):
    return Rotation.from_matrix(rotation).as_rotvec()


def rotation_z(angle):
    return so3_exp([0.0, 0.0, angle])


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise BadShapeError('位姿需要 3×3 旋转与 3 维平移')
        if not np.allclose(rotation.T @ rotation, np.eye(3), atol=ORTHONORMAL_TOL, rtol=0):
            raise ConfigError('旋转矩阵不正交', data={'rotation': rotation.tolist()})
        if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOL:
            raise ConfigError('旋转矩阵行列式不为 +1', data={'rotation': rotation.tolist()})
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation):
        return cls(np.eye(3), translation)

    @classmethod
    def from_tangent(cls, xi):
        """(ω, t) 六维向量 -> 位姿，ω 经指数映射"""
        xi = np.asarray(xi, dtype=np.float64)
        if xi.shape != (6,):
            raise BadShapeError('切向量必须是 6 维', data={'shape': list(xi.shape)})
        return cls(so3_exp(xi[:3]), xi[3:])

    @classmethod
    def from_row(cls, row):
        """行主序 3×4 [R|t] 的 12 个数"""
        matrix = np.asarray(row, dtype=np.float64).reshape(3, 4)
        rotation = matrix[:, :3]
        # 文本文件精度有限，重新正交化
        u, _, vt = np.linalg.svd(rotation)
        rotation = u @ vt
        if np.linalg.det(rotation) < 0:
            u[:, -1] *= -1
            rotation = u @ vt
        return cls(rotation, matrix[:, 3])

    def to_row(self):
        return np.hstack([self.rotation, self.translation[:, None]]).reshape(-1)

    @property
    def matrix(self):
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def tangent(self):
        return np.concatenate([so3_log(self.rotation), self.translation])

    def perturbed(self, delta):
        """左扰动：exp(δω)·R，t + δt"""
        delta = np.asarray(delta, dtype=np.float64)
        return Pose(so3_exp(delta[:3]) @ self.rotation, self.translation + delta[3:])

    def transform(self, points):
        """points: (..., 3)"""
        return points @ self.rotation.T + self.translation

    def to_dict(self):
        return {'rotation': self.rotation.tolist(), 'translation': self.translation.tolist()}


def compose(a, b):
    """a ∘ b：先应用 b 再应用 a"""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(a):
    rotation = a.rotation.T
    return Pose(rotation, -rotation @ a.translation)


def load_trajectory(path):
    path = Path(path)
    rows = np.loadtxt(path, ndmin=2)
    if rows.shape[1] != 12:
        raise BadShapeError(f'轨迹文件每行必须有 12 个数: {path}', data={'columns': int(rows.shape[1])})
    return [Pose.from_row(row) for row in rows]


def save_trajectory(path, poses):
    lines = [' '.join(f'{value:.12e}' for value in pose.to_row()) for pose in poses]
    return write_bytes_atomic(path, ('\n'.join(lines) + '\n').encode('ascii'))
