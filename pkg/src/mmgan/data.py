"""Synthetic 2-D mixture datasets and a reader for IDX image files.

The synthetic families are the usual mode-collapse benches: 8 gaussians on
a circle, a 5x5 gaussian grid, and two concentric noisy rings. Each handle
carries the mode centers and noise scale that the coverage metrics need; for
the continuous rings the "centers" are a fine discretization of each circle.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SYNTHETIC_KINDS",
    "RING8_SIGMA",
    "GRID25_SIGMA",
    "RINGS2_SIGMA",
    "RINGS2_CENTERS_PER_RING",
    "IDX_IMAGES_MAGIC",
    "IDX_LABELS_MAGIC",
    "DatasetHandle",
    "make_dataset",
    "sample_batch",
    "load_idx",
    "scale_pixels",
]

SYNTHETIC_KINDS = ("ring8", "grid25", "rings2")

RING8_RADIUS = 2.0
RING8_SIGMA = 0.02
GRID25_SIGMA = 0.05
RINGS2_RADII = (1.0, 2.0)
RINGS2_SIGMA = 0.02
RINGS2_CENTERS_PER_RING = 128

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049


@dataclass
class DatasetHandle:
    """Everything sampling and metrics need to know about one dataset.

    mode_centers is None for image data, where coverage metrics do not
    apply. image_shape keeps (rows, cols) for plotting.
    """

    kind: str
    dim: int
    mode_centers: np.ndarray | None
    mode_sigma: float
    images: np.ndarray | None = None
    labels: np.ndarray | None = None
    image_shape: tuple | None = None


def _ring8_centers() -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(8) / 8.0
    return RING8_RADIUS * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _grid25_centers() -> np.ndarray:
    axis = np.linspace(-2.0, 2.0, 5)
    gx, gy = np.meshgrid(axis, axis)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _rings2_centers() -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(RINGS2_CENTERS_PER_RING) / RINGS2_CENTERS_PER_RING
    unit = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return np.concatenate([r * unit for r in RINGS2_RADII], axis=0)


def make_dataset(kind: str) -> DatasetHandle:
    if kind == "ring8":
        return DatasetHandle("ring8", 2, _ring8_centers(), RING8_SIGMA)
    if kind == "grid25":
        return DatasetHandle("grid25", 2, _grid25_centers(), GRID25_SIGMA)
    if kind == "rings2":
        return DatasetHandle("rings2", 2, _rings2_centers(), RINGS2_SIGMA)
    raise ValueError(f"unknown dataset kind {kind!r}")


def sample_batch(handle: DatasetHandle, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n samples. Consumes the rng, so repeated calls differ but a
    reseeded rng replays the exact sequence."""
    if n < 1:
        raise ValueError(f"batch size must be >= 1, got {n}")
    if handle.kind in ("ring8", "grid25"):
        idx = rng.integers(0, len(handle.mode_centers), size=n)
        return handle.mode_centers[idx] + rng.normal(0.0, handle.mode_sigma, size=(n, 2))
    if handle.kind == "rings2":
        ring = rng.integers(0, len(RINGS2_RADII), size=n)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        radii = np.asarray(RINGS2_RADII)[ring]
        pts = radii[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return pts + rng.normal(0.0, handle.mode_sigma, size=(n, 2))
    if handle.images is not None:
        rows = rng.integers(0, len(handle.images), size=n)
        return handle.images[rows].copy()
    raise ValueError(f"cannot sample from dataset kind {handle.kind!r}")


def scale_pixels(raw: np.ndarray) -> np.ndarray:
    """uint8 pixels to [-1, 1]: v/127.5 - 1, so 0 -> -1 and 255 -> +1."""
    return np.asarray(raw, dtype=np.float64) / 127.5 - 1.0


def _open_maybe_gz(path):
    p = str(path)
    return gzip.open(p, "rb") if p.endswith(".gz") else open(p, "rb")


def _read_u32(f, what: str) -> int:
    data = f.read(4)
    if len(data) != 4:
        raise ValueError(f"truncated idx file while reading {what}")
    return struct.unpack(">I", data)[0]


def load_idx(images_path, labels_path=None) -> DatasetHandle:
    """Read big-endian IDX image (and optional label) files, gzipped or not.

    Magic numbers are enforced: 2051 for images, 2049 for labels. Pixels
    come back scaled to [-1, 1], flattened to (count, rows*cols).
    """
    with _open_maybe_gz(images_path) as f:
        magic = _read_u32(f, "images magic")
        if magic != IDX_IMAGES_MAGIC:
            raise ValueError(
                f"bad images magic {magic}, expected {IDX_IMAGES_MAGIC}")
        count = _read_u32(f, "image count")
        rows = _read_u32(f, "image rows")
        cols = _read_u32(f, "image cols")
        if count < 1 or rows < 1 or cols < 1:
            raise ValueError(f"degenerate idx dimensions {count}x{rows}x{cols}")
        payload = f.read(count * rows * cols)
        if len(payload) != count * rows * cols:
            raise ValueError("truncated idx image payload")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)
    images = scale_pixels(pixels)

    labels = None
    if labels_path is not None:
        with _open_maybe_gz(labels_path) as f:
            magic = _read_u32(f, "labels magic")
            if magic != IDX_LABELS_MAGIC:
                raise ValueError(
                    f"bad labels magic {magic}, expected {IDX_LABELS_MAGIC}")
            lcount = _read_u32(f, "label count")
            if lcount != count:
                raise ValueError(
                    f"label count {lcount} does not match image count {count}")
            raw = f.read(lcount)
            if len(raw) != lcount:
                raise ValueError("truncated idx label payload")
        labels = np.frombuffer(raw, dtype=np.uint8).copy()

    return DatasetHandle("idx", rows * cols, None, 0.0,
                         images=images, labels=labels, image_shape=(rows, cols))
