"""Kernel functions and the kernel trick for feature-space geometry.

Every op here is polymorphic: pass numpy arrays to get floats back, pass
graph Tensors to get differentiable nodes. This keeps the numeric contract
tests and the training graphs on literally the same code path.

Feature-space squared distances are computed without ever materializing the
feature map: ||phi(a) - phi(b)||^2 = K(a,a) - 2 K(a,b) + K(b,b). For rbf and
exp kernels K(x,x) = 1, so per-point self terms are constants with zero
gradient, which the code exploits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmgan.neural import Tensor

__all__ = [
    "KERNEL_KINDS",
    "KernelSpec",
    "kernel_eval",
    "kernel_eval_batch",
    "kernel_self_batch",
    "feature_sq_dist",
    "kernel_radius",
]

KERNEL_KINDS = ("linear", "rbf", "exp", "polynomial")

# below this, a kernel-trick squared distance is a bug, not roundoff
_PSD_SLACK = -1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    gamma=None means "resolve to 1/d from the input dimension at call time"
    (rbf and exp only; ignored elsewhere). "poly" is accepted as an alias
    for "polynomial".
    """

    kind: str
    gamma: float | None = None
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        kind = "polynomial" if self.kind == "poly" else self.kind
        object.__setattr__(self, "kind", kind)
        if kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not (isinstance(self.degree, int) and self.degree >= 1):
            raise ValueError(f"degree must be a positive integer, got {self.degree}")

    def resolve_gamma(self, dim: int) -> float:
        return self.gamma if self.gamma is not None else 1.0 / dim


def _val(x) -> np.ndarray:
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _exp(x):
    return x.exp() if isinstance(x, Tensor) else np.exp(x)


def _sqrt(x):
    return x.sqrt() if isinstance(x, Tensor) else np.sqrt(x)


def _check_vectors(a, b):
    va, vb = _val(a), _val(b)
    if va.ndim != 1 or vb.ndim != 1:
        raise ValueError(f"kernel inputs must be 1-D, got {va.shape} and {vb.shape}")
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return va.shape[0]


def kernel_eval(spec: KernelSpec, a, b):
    """K(a, b) for two d-vectors."""
    d = _check_vectors(a, b)
    if spec.kind == "linear":
        return (a * b).sum()
    if spec.kind == "polynomial":
        return ((a * b).sum() + spec.coef0) ** spec.degree
    gamma = spec.resolve_gamma(d)
    diff = a - b
    sq = (diff * diff).sum()
    if spec.kind == "rbf":
        return _exp(-gamma * sq)
    return _exp(-gamma * _sqrt(sq))  # exp kernel, euclidean not squared


def kernel_eval_batch(spec: KernelSpec, points, c):
    """K(s_i, c) for every row of (n, d) points against a d-vector."""
    vp, vc = _val(points), _val(c)
    if vp.ndim != 2 or vc.ndim != 1 or vp.shape[1] != vc.shape[0]:
        raise ValueError(f"incompatible shapes {vp.shape} and {vc.shape}")
    if spec.kind == "linear":
        return (points * c).sum(axis=1)
    if spec.kind == "polynomial":
        return ((points * c).sum(axis=1) + spec.coef0) ** spec.degree
    gamma = spec.resolve_gamma(vp.shape[1])
    diff = points - c
    sq = (diff * diff).sum(axis=1)
    if spec.kind == "rbf":
        return _exp(-gamma * sq)
    return _exp(-gamma * _sqrt(sq))


def kernel_self_batch(spec: KernelSpec, points):
    """K(s_i, s_i) per row. Constant 1 for rbf/exp, so those carry no
    gradient by construction."""
    vp = _val(points)
    if vp.ndim != 2:
        raise ValueError(f"expected (n, d) points, got {vp.shape}")
    if spec.kind == "linear":
        return (points * points).sum(axis=1)
    if spec.kind == "polynomial":
        return ((points * points).sum(axis=1) + spec.coef0) ** spec.degree
    return np.ones(vp.shape[0])


def feature_sq_dist(spec: KernelSpec, a, b):
    """||phi(a) - phi(b)||^2 via the kernel trick. Non-negative.

    Raises ValueError if roundoff alone cannot explain a negative value,
    since that means the kernel is not positive semidefinite here.
    """
    v = kernel_eval(spec, a, a) - 2.0 * kernel_eval(spec, a, b) \
        + kernel_eval(spec, b, b)
    raw = float(_val(v))
    if raw < _PSD_SLACK:
        raise ValueError(
            f"kernel trick produced {raw}, kernel not positive semidefinite")
    if isinstance(v, Tensor):
        return v.clamp_min(0.0)
    return max(raw, 0.0)


def kernel_radius(spec: KernelSpec, points, c):
    """Mean squared feature-space distance from phi(c) to the mapped points.

    Note the squaring: the plain-space radius is a mean of distances, the
    kernelized one is a mean of squared distances. The two conventions are
    kept deliberately distinct.
    """
    vp = _val(points)
    if vp.ndim != 2 or vp.shape[0] < 1:
        raise ValueError(f"expected non-empty (n, d) points, got {vp.shape}")
    kcc = kernel_eval(spec, c, c)
    cross = kernel_eval_batch(spec, points, c)
    diag = kernel_self_batch(spec, points)
    per_point = kcc - 2.0 * cross + diag
    worst = float(_val(per_point).min())
    if worst < _PSD_SLACK:
        raise ValueError(
            f"kernel trick produced {worst}, kernel not positive semidefinite")
    m = per_point.mean()
    if isinstance(m, Tensor):
        return m.clamp_min(0.0)
    return max(float(m), 0.0)
