"""
文件格式读写

- 图像：8 位 PNG（RGB 或灰度），数值范围 [0,1] <-> [0,255]
- 深度：PFM（小端，单通道）以及 16 位 PNG（值 = 米 × 256，0 表示无效）
- 标签：8 位索引 PNG + JSON 图例
- 掩码：8 位 PNG（255 = 保留）
"""
import io
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .exceptions import BadShapeError, MissingFileError
from .utils import read_json, write_bytes_atomic, write_json_atomic

DEPTH_PNG_SCALE = 256.0

# 标签调色板：背景、同向运动、反向运动、慢速运动、静止物体
LABEL_PALETTE = [
    (0, 0, 0),
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
]


def _require(path):
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f'文件不存在: {path}', data={'path': str(path)})
    return path


def _png_bytes(image):
    buffer = io.BytesIO()
    image.save(buffer, format='PNG')
    return buffer.getvalue()


def save_image_png(path, image):
    array = np.asarray(image, dtype=np.float64)
    if array.ndim == 3 and array.shape[2] == 1:
        array = array[:, :, 0]
    pixels = np.round(np.clip(array, 0.0, 1.0) * 255.0).astype(np.uint8)
    return write_bytes_atomic(path, _png_bytes(Image.fromarray(pixels)))


def load_image_png(path):
    with Image.open(_require(path)) as img:
        array = np.asarray(img, dtype=np.float64) / 255.0
    if array.ndim == 2:
        array = array[:, :, None]
    return array


def save_mask_png(path, mask):
    pixels = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    return write_bytes_atomic(path, _png_bytes(Image.fromarray(pixels, mode='L')))


def load_mask_png(path):
    with Image.open(_require(path)) as img:
        return np.asarray(img) > 127


def save_heatmap_png(path, values, valid=None):
    """误差图按最大值归一化后保存为灰度图；无效像素为 0"""
    values = np.asarray(values, dtype=np.float64)
    shown = np.where(valid, values, 0.0) if valid is not None else values
    peak = float(shown.max()) if shown.size else 0.0
    scaled = shown / peak if peak > 0 else np.zeros_like(shown)
    return save_image_png(path, scaled)


def save_depth_png16(path, depth, valid=None):
    depth = np.asarray(depth, dtype=np.float64)
    if valid is None:
        valid = np.isfinite(depth) & (depth > 0)
    encoded = np.where(valid, np.round(depth * DEPTH_PNG_SCALE), 0.0)
    encoded = np.clip(encoded, 0, np.iinfo(np.uint16).max).astype(np.uint16)
    return write_bytes_atomic(path, _png_bytes(Image.fromarray(encoded)))


def load_depth_png16(path):
    """返回 (depth, valid)"""
    with Image.open(_require(path)) as img:
        raw = np.asarray(img).astype(np.float64)
    if raw.ndim != 2:
        raise BadShapeError(f'深度 PNG 必须是单通道: {path}', data={'path': str(path)})
    valid = raw > 0
    return raw / DEPTH_PNG_SCALE, valid


def save_pfm(path, values):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise BadShapeError('PFM 只支持单通道', data={'shape': list(values.shape)})
    height, width = values.shape
    header = f'Pf\n{width} {height}\n-1.0\n'.encode('ascii')
    # PFM 行顺序自下而上
    body = np.flipud(values).astype('<f4').tobytes()
    return write_bytes_atomic(path, header + body)


def load_pfm(path):
    with open(_require(path), 'rb') as handle:
        kind = handle.readline().strip()
        if kind not in (b'Pf', b'PF'):
            raise BadShapeError(f'不是 PFM 文件: {path}', data={'path': str(path)})
        dims = re.findall(rb'\d+', handle.readline())
        width, height = int(dims[0]), int(dims[1])
        scale = float(handle.readline().strip())
        dtype = '<f4' if scale < 0 else '>f4'
        channels = 3 if kind == b'PF' else 1
        data = np.frombuffer(handle.read(), dtype=dtype)
    expected = width * height * channels
    if data.size != expected:
        raise BadShapeError(f'PFM 数据长度不符: {path}', data={'expected': expected, 'got': int(data.size)})
    shape = (height, width, channels) if channels == 3 else (height, width)
    return np.flipud(data.reshape(shape)).astype(np.float64)


def load_depth(path):
    """按扩展名读取深度文件，返回 (depth, valid)"""
    path = Path(path)
    if path.suffix.lower() == '.pfm':
        depth = load_pfm(path)
        return depth, np.isfinite(depth) & (depth > 0)
    return load_depth_png16(path)


def save_labels_png(path, labels, legend):
    labels = np.asarray(labels, dtype=np.uint8)
    img = Image.fromarray(labels, mode='L')
    palette = []
    for index in range(256):
        palette.extend(LABEL_PALETTE[index] if index < len(LABEL_PALETTE) else (index, index, index))
    img.putpalette(palette)
    write_bytes_atomic(path, _png_bytes(img))
    legend_path = Path(path).with_suffix('.json')
    write_json_atomic(legend_path, {str(k): v for k, v in legend.items()})
    return path


def load_labels_png(path):
    """返回 (labels, legend)；legend 为 {索引: 名称}"""
    with Image.open(_require(path)) as img:
        labels = np.asarray(img).astype(np.int64)
    legend_path = Path(path).with_suffix('.json')
    legend = {}
    if legend_path.exists():
        legend = {int(k): v for k, v in read_json(legend_path).items()}
    return labels, legend
