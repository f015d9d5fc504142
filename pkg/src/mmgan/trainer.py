"""Alternating GAN training with moving-average manifold matching.

Each step runs, in this exact order:
  1. one or more discriminator updates on fresh batches,
  2. re-extraction of both feature batches with the freshly updated
     discriminator, folded into the real/fake moving-average trackers,
  3. one generator update using the post-update real statistics and a
     differentiable blend of the pre-update fake tracker with the current
     mini-batch statistic.

The blend delta * stop_grad(tracked) + (1 - delta) * mini keeps gradients
flowing through the mini-batch term only; its value coincides with the
tracker state after step 2, which tests assert. A tracker that has not seen
any batch yet contributes nothing: the raw mini-batch statistic is used.

d_step, update_trackers and g_step are module-level on purpose, so the
sequencing is observable (and patchable) from outside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmgan.data import DatasetHandle, sample_batch
from mmgan.loss import (
    LossConfig,
    LossReport,
    batch_centroid,
    batch_radius,
    bce_d,
    generator_terms,
    l_d_final,
    l_orig,
    PROB_CLAMP,
)
from mmgan.manifold import ManifoldTracker, SphereManifold, estimate, tracker_update
from mmgan.metrics import (
    COVERAGE_DIVISOR,
    HQ_SIGMA_MULTIPLIER,
    MetricsRow,
    manifold_gap,
    mode_coverage,
)
from mmgan.neural import Network, NumericalError, SGD, gradients
from mmgan.regularizer import r_g

__all__ = [
    "TrainConfig",
    "TrainResult",
    "LatentSampler",
    "train",
    "evaluate",
    "draw_eval_batch",
    "score_samples",
    "d_step",
    "g_step",
    "update_trackers",
    "blended_stats",
]

_EVAL_STREAM_TAG = 59297


@dataclass
class TrainConfig:
    """Everything one run needs besides the dataset itself."""

    steps: int = 2000
    batch_size: int = 64
    latent_dim: int = 2
    g_hidden: tuple = (64, 64)
    d_hidden: tuple = (64, 16)
    g_out_activation: str = "identity"
    # G runs hot (momentum) because only the (1-delta) mini-batch share of
    # the blended statistics carries gradient; D runs cold and plain because
    # momentum lets it punch through the bounded-kernel band, after which
    # every matching gradient dies on the plateau.
    lr_g: float = 0.02
    lr_d: float = 0.01
    momentum_g: float = 0.9
    momentum_d: float = 0.0
    d_steps_per_g: int = 1
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)
    baseline_mode: bool = False
    eval_interval: int = 500
    eval_samples: int = 800
    hq_multiplier: float = HQ_SIGMA_MULTIPLIER
    coverage_divisor: float = COVERAGE_DIVISOR

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 2:
            raise ValueError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.latent_dim < 1:
            raise ValueError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.d_steps_per_g < 1:
            raise ValueError(f"d_steps_per_g must be >= 1, got {self.d_steps_per_g}")
        if self.eval_interval < 1 or self.eval_samples < 1:
            raise ValueError("eval_interval and eval_samples must be >= 1")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ValueError("learning rates must be positive")


@dataclass
class TrainResult:
    generator: Network
    discriminator: Network
    history: list
    real_tracker: ManifoldTracker
    fake_tracker: ManifoldTracker


class LatentSampler:
    """Standard normal codes of a fixed dimension."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"latent dim must be >= 1, got {dim}")
        self.dim = dim

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError(f"need n >= 1 codes, got {n}")
        return rng.standard_normal((n, self.dim))


def blended_stats(delta: float, tracker: ManifoldTracker, feats, kernel_spec):
    """Differentiable (centroid, radius) mixing tracker history into the
    mini-batch nodes. History enters as constants: gradients flow only
    through the mini-batch side."""
    c_mini = batch_centroid(feats)
    r_mini = batch_radius(kernel_spec, feats, c_mini)
    if tracker.current is None or delta == 0.0:
        return c_mini, r_mini
    prev = tracker.current
    return (delta * prev.centroid + (1.0 - delta) * c_mini,
            delta * prev.radius + (1.0 - delta) * r_mini)


def d_step(cfg: TrainConfig, g_net: Network, d_net: Network, opt_d: SGD,
           x: np.ndarray, z: np.ndarray,
           real_tracker: ManifoldTracker, fake_tracker: ManifoldTracker) -> tuple:
    """One discriminator update. Returns (loss_d, l_orig, fake_points)."""
    fake_pts = g_net.forward_values(z)[0]
    out_real, feat_real = d_net.forward(x)
    out_fake, feat_fake = d_net.forward(fake_pts)
    l_orig_val = l_orig(out_real.value, out_fake.value)
    if cfg.baseline_mode:
        loss_node = bce_d(out_real, out_fake)
    else:
        lc = cfg.loss
        c_r, r_r = blended_stats(lc.delta, real_tracker, feat_real, lc.kernel)
        c_f, r_f = blended_stats(lc.delta, fake_tracker, feat_fake, lc.kernel)
        loss_node = l_d_final(lc, out_real, out_fake, feat_real, feat_fake,
                              c_real=c_r, c_fake=c_f,
                              radius_real=r_r, radius_fake=r_f)
    opt_d.step(gradients(loss_node, d_net.parameters()))
    return loss_node.item(), l_orig_val, fake_pts


def update_trackers(cfg: TrainConfig, d_net: Network,
                    x: np.ndarray, fake_pts: np.ndarray,
                    real_tracker: ManifoldTracker,
                    fake_tracker: ManifoldTracker) -> tuple:
    """Fold this batch's statistics, measured with the updated
    discriminator, into both trackers. Returns the two feature batches."""
    feat_real = d_net.forward_values(x)[1]
    feat_fake = d_net.forward_values(fake_pts)[1]
    spec = cfg.loss.kernel
    for tracker, feats in ((real_tracker, feat_real), (fake_tracker, feat_fake)):
        c = feats.mean(axis=0)
        tracker_update(tracker, SphereManifold(c, float(batch_radius(spec, feats, c))))
    return feat_real, feat_fake


def g_step(cfg: TrainConfig, g_net: Network, d_net: Network, opt_g: SGD,
           z: np.ndarray, feat_real: np.ndarray | None,
           pre_fake: SphereManifold | None,
           real_tracker: ManifoldTracker, fake_tracker: ManifoldTracker) -> tuple:
    """One generator update through the (fixed) discriminator.

    Returns (loss_g, manifold_term, radius_term, r_g) as floats. pre_fake is
    the fake tracker state from before this step's tracker refresh.
    """
    fake_node, _ = g_net.forward(z)
    out_fake, feat_fake = d_net.forward(fake_node)
    if cfg.baseline_mode:
        # non-saturating objective: push D(G(z)) toward 1
        loss_node = -(out_fake.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).log().mean())
        opt_g.step(gradients(loss_node, g_net.parameters()))
        # matching terms are reported for observability even though the
        # baseline never optimizes them
        fv = feat_fake.value
        c_f = fv.mean(axis=0)
        m_f = SphereManifold(c_f, float(batch_radius(None, fv, c_f)))
        m_r = estimate(feat_real) if feat_real is not None else m_f
        cg, rgap = manifold_gap(m_r, m_f)
        return loss_node.item(), cg, rgap, float(r_g(fv))

    lc = cfg.loss
    # real side: the tracker already folded this batch in, so its current
    # state IS the blend; enters as constants
    c_r = real_tracker.current.centroid
    r_r = real_tracker.current.radius
    # fake side: blend the pre-refresh tracker with the live mini nodes
    shadow = ManifoldTracker(lc.delta)
    shadow.current = pre_fake
    c_f, r_f = blended_stats(lc.delta, shadow, feat_fake, lc.kernel)
    terms = generator_terms(lc, feat_real, feat_fake,
                            c_real=c_r, c_fake=c_f,
                            radius_real=r_r, radius_fake=r_f)
    opt_g.step(gradients(terms.total, g_net.parameters()))
    rg_val = terms.rg.item() if terms.rg is not None else float(r_g(feat_fake.value))
    return (terms.total.item(), float(terms.manifold.item()),
            float(terms.radius.item()), rg_val)


def train(cfg: TrainConfig, data: DatasetHandle, on_eval=None) -> TrainResult:
    """Run the full loop. on_eval(step, generator, report) fires every
    eval_interval steps and on the final step.

    Raises NumericalError tagged with the step index if any loss term,
    activation, or gradient goes non-finite.
    """
    ss = np.random.SeedSequence(cfg.seed)
    ss_data, ss_latent, ss_g, ss_d = ss.spawn(4)
    rng_data = np.random.default_rng(ss_data)
    rng_latent = np.random.default_rng(ss_latent)

    latent = LatentSampler(cfg.latent_dim)
    g_net = Network.create((cfg.latent_dim, *cfg.g_hidden, data.dim),
                           hidden_activation="relu",
                           out_activation=cfg.g_out_activation,
                           feature_tap_index=len(cfg.g_hidden),
                           rng=np.random.default_rng(ss_g))
    d_net = Network.create((data.dim, *cfg.d_hidden, 1),
                           hidden_activation="relu", out_activation="sigmoid",
                           rng=np.random.default_rng(ss_d))
    opt_g = SGD(g_net.parameters(), cfg.lr_g, cfg.momentum_g)
    opt_d = SGD(d_net.parameters(), cfg.lr_d, cfg.momentum_d)
    real_tracker = ManifoldTracker(cfg.loss.delta)
    fake_tracker = ManifoldTracker(cfg.loss.delta)

    history: list = []
    for step in range(1, cfg.steps + 1):
        try:
            for _ in range(cfg.d_steps_per_g):
                x = sample_batch(data, cfg.batch_size, rng_data)
                z = latent.draw(rng_latent, cfg.batch_size)
                loss_d, l_orig_val, fake_pts = d_step(
                    cfg, g_net, d_net, opt_d, x, z, real_tracker, fake_tracker)
            if cfg.baseline_mode:
                feat_real = d_net.forward_values(x)[1]
                pre_fake = None
            else:
                pre_fake = fake_tracker.current
                feat_real, _ = update_trackers(
                    cfg, d_net, x, fake_pts, real_tracker, fake_tracker)
            loss_g, m_term, r_term, rg_val = g_step(
                cfg, g_net, d_net, opt_g, z, feat_real, pre_fake,
                real_tracker, fake_tracker)
        except NumericalError as e:
            raise NumericalError(f"{e} (step {step})") from e

        report = LossReport(step=step, l_g_final=loss_g, l_d_final=loss_d,
                            l_orig=l_orig_val, manifold_term=m_term,
                            radius_term=r_term, r_g=rg_val)
        for name in ("l_g_final", "l_d_final", "l_orig",
                     "manifold_term", "radius_term", "r_g"):
            if not np.isfinite(getattr(report, name)):
                raise NumericalError(f"non-finite {name} (step {step})")
        history.append(report)
        if on_eval is not None and (step % cfg.eval_interval == 0
                                    or step == cfg.steps):
            on_eval(step, g_net, report)

    return TrainResult(g_net, d_net, history, real_tracker, fake_tracker)


def draw_eval_batch(generator: Network, data: DatasetHandle, n_samples: int,
                    *, seed: int = 0, step: int = 0) -> tuple:
    """(fake, real) sample matrices from the evaluation stream, which is
    keyed by (seed, step) and independent of the training streams."""
    if n_samples < 1:
        raise ValueError("empty evaluation: n_samples must be >= 1")
    rng = np.random.default_rng(
        np.random.SeedSequence([seed, step, _EVAL_STREAM_TAG]))
    z = rng.standard_normal((n_samples, generator.in_dim))
    fake = generator.forward_values(z)[0]
    real = sample_batch(data, n_samples, rng)
    return fake, real


def score_samples(fake: np.ndarray, real: np.ndarray, data: DatasetHandle, *,
                  step: int = 0,
                  hq_multiplier: float = HQ_SIGMA_MULTIPLIER,
                  coverage_divisor: float = COVERAGE_DIVISOR) -> MetricsRow:
    """Score one generated batch against a real one.

    Mode metrics are zero for datasets without mode centers (images);
    the sphere gaps are measured in sample space and always present.
    """
    cg, rgap = manifold_gap(estimate(real), estimate(fake))
    if data.mode_centers is not None:
        modes, hq = mode_coverage(fake, data.mode_centers, data.mode_sigma,
                                  hq_multiplier, coverage_divisor)
        frac = modes / len(data.mode_centers)
    else:
        modes, hq, frac = 0, 0.0, 0.0
    return MetricsRow(step=step, modes_covered=modes, coverage_fraction=frac,
                      hq_fraction=hq, centroid_gap=cg, radius_gap=rgap,
                      r_g_value=float(r_g(fake)))


def evaluate(generator: Network, data: DatasetHandle, n_samples: int, *,
             seed: int = 0, step: int = 0,
             hq_multiplier: float = HQ_SIGMA_MULTIPLIER,
             coverage_divisor: float = COVERAGE_DIVISOR) -> MetricsRow:
    """Sample the generator and score it against the dataset."""
    fake, real = draw_eval_batch(generator, data, n_samples,
                                 seed=seed, step=step)
    return score_samples(fake, real, data, step=step,
                         hq_multiplier=hq_multiplier,
                         coverage_divisor=coverage_divisor)
