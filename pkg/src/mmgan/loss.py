"""Assembly of generator and discriminator objectives.

Two radius conventions coexist and must never be mixed: the plain-space
sphere radius is a mean of distances, while the kernelized radius is a mean
of squared feature-space distances. Which one a loss uses is decided solely
by whether its config carries a kernel.

The generator objective is
    manifold_term + alpha * radius_term + beta * r_g(fake reps)
where manifold_term is the centroid gap (euclidean norm in plain space,
kernel-trick squared distance in feature space) and radius_term the absolute
radius gap. alpha weighs the radius term only in the kernelized loss; the
plain loss carries it unweighted, exactly as the two printed forms differ. The discriminator minimizes bce - (that same quantity), i.e. it
plays the usual classification game while pushing the manifolds apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmgan.kernel import KernelSpec, feature_sq_dist, kernel_radius
from mmgan.manifold import SphereManifold
from mmgan.neural import Tensor
from mmgan.regularizer import r_g

__all__ = [
    "PROB_CLAMP",
    "LossConfig",
    "LossReport",
    "GeneratorTerms",
    "l_orig",
    "bce_d",
    "l_g",
    "l_g_kernel",
    "batch_centroid",
    "batch_radius",
    "generator_terms",
    "l_g_final",
    "l_d_final",
]

PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class LossConfig:
    """Weights and mode switches shared by both objectives.

    kernel=None selects plain sphere geometry. d_includes_rg controls
    whether the discriminator's adversarial part carries the correlation
    penalty too (it does by default).
    """

    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 0.9
    kernel: KernelSpec | None = None
    d_includes_rg: bool = True

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")
        if self.kernel is not None and not isinstance(self.kernel, KernelSpec):
            raise ValueError("kernel must be a KernelSpec or None")


@dataclass(frozen=True)
class LossReport:
    """Per-step scalar record, the unit of history and of metrics.csv rows."""

    step: int
    l_g_final: float
    l_d_final: float
    l_orig: float
    manifold_term: float
    radius_term: float
    r_g: float


@dataclass
class GeneratorTerms:
    """Decomposed generator objective. Fields are Tensors on the graph path
    and floats on the numpy path; rg is None when excluded or beta is 0."""

    manifold: object
    radius: object
    rg: object
    total: object


def _is_graph(*xs) -> bool:
    return any(isinstance(x, Tensor) for x in xs)


def _log(x):
    return x.log() if isinstance(x, Tensor) else np.log(x)


def _sqrt(x):
    return x.sqrt() if isinstance(x, Tensor) else np.sqrt(x)


def _abs(x):
    return x.abs() if isinstance(x, Tensor) else abs(float(x))


def l_orig(d_real, d_fake):
    """mean log D(real) + mean log(1 - D(fake)), probabilities clamped to
    [1e-7, 1 - 1e-7] so the logs stay finite."""
    for name, x in (("d_real", d_real), ("d_fake", d_fake)):
        v = x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
        if v.size < 1:
            raise ValueError(f"{name} is empty")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError(f"{name} must hold probabilities in [0, 1]")
    lo, hi = PROB_CLAMP, 1.0 - PROB_CLAMP
    dr = d_real.clamp(lo, hi) if isinstance(d_real, Tensor) else np.clip(d_real, lo, hi)
    df = d_fake.clamp(lo, hi) if isinstance(d_fake, Tensor) else np.clip(d_fake, lo, hi)
    val = _log(dr).mean() + _log(1.0 - df).mean()
    return val if isinstance(val, Tensor) else float(val)


def bce_d(d_real, d_fake):
    """Discriminator classification loss, the negation of l_orig."""
    v = l_orig(d_real, d_fake)
    return -v


def l_g(m_real: SphereManifold, m_fake: SphereManifold) -> float:
    """Plain manifold-matching loss between two fitted spheres:
    centroid gap norm plus absolute radius gap, unweighted."""
    if m_real.dim != m_fake.dim:
        raise ValueError(f"dimension mismatch: {m_real.dim} vs {m_fake.dim}")
    gap = float(np.linalg.norm(m_real.centroid - m_fake.centroid))
    return gap + abs(m_real.radius - m_fake.radius)


def batch_centroid(reps):
    """Mean representation; polymorphic. Shape (d,)."""
    return reps.mean(axis=0)


def batch_radius(spec: KernelSpec | None, reps, c):
    """Radius of a batch about c under the convention spec selects:
    mean distance when spec is None, mean squared feature distance else."""
    if spec is None:
        diff = reps - c
        return _sqrt((diff * diff).sum(axis=1)).mean()
    return kernel_radius(spec, reps, c)


def _centroid_gap(spec: KernelSpec | None, c_real, c_fake):
    if spec is None:
        diff = c_real - c_fake
        return _sqrt((diff * diff).sum())
    return feature_sq_dist(spec, c_real, c_fake)


def l_g_kernel(spec: KernelSpec, alpha: float, reps_real, reps_fake,
               c_real=None, c_fake=None, radius_real=None, radius_fake=None):
    """Kernelized matching loss: trick-computed centroid distance plus
    alpha-weighted gap of kernelized radii."""
    if c_real is None:
        c_real = batch_centroid(reps_real)
    if c_fake is None:
        c_fake = batch_centroid(reps_fake)
    if radius_real is None:
        radius_real = kernel_radius(spec, reps_real, c_real)
    if radius_fake is None:
        radius_fake = kernel_radius(spec, reps_fake, c_fake)
    return feature_sq_dist(spec, c_real, c_fake) + alpha * _abs(radius_real - radius_fake)


def generator_terms(cfg: LossConfig, reps_real, reps_fake, *,
                    c_real=None, c_fake=None,
                    radius_real=None, radius_fake=None,
                    include_rg: bool = True) -> GeneratorTerms:
    """Build the decomposed generator objective.

    Statistics left as None default to the mini-batch values of the
    matching convention; the trainer passes moving-average blends instead.
    """
    if c_real is None:
        c_real = batch_centroid(reps_real)
    if c_fake is None:
        c_fake = batch_centroid(reps_fake)
    if radius_real is None:
        radius_real = batch_radius(cfg.kernel, reps_real, c_real)
    if radius_fake is None:
        radius_fake = batch_radius(cfg.kernel, reps_fake, c_fake)
    manifold = _centroid_gap(cfg.kernel, c_real, c_fake)
    radius = _abs(radius_real - radius_fake)
    # alpha belongs to the kernelized radius gap only; the plain-space form
    # is an unweighted sum
    radius_weight = cfg.alpha if cfg.kernel is not None else 1.0
    total = manifold + radius_weight * radius
    rg = None
    if include_rg and cfg.beta > 0.0:
        rg = r_g(reps_fake)
        total = total + cfg.beta * rg
    if not _is_graph(total):
        total = float(total)
    return GeneratorTerms(manifold=manifold, radius=radius, rg=rg, total=total)


def l_g_final(cfg: LossConfig, reps_real, reps_fake, **stats):
    """Complete generator objective as a single scalar."""
    return generator_terms(cfg, reps_real, reps_fake, **stats).total


def l_d_final(cfg: LossConfig, d_real, d_fake, reps_real, reps_fake, **stats):
    """Complete discriminator objective: bce minus the adversarial
    manifold-matching quantity (with r_g iff cfg.d_includes_rg)."""
    adv = generator_terms(cfg, reps_real, reps_fake,
                          include_rg=cfg.d_includes_rg, **stats).total
    return bce_d(d_real, d_fake) - adv
