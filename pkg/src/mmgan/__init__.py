"""Manifold-matching GAN training at desk scale."""

from mmgan.neural import (
    NumericalError,
    Tensor,
    constant,
    parameter,
    backward,
    gradients,
    Network,
    SGD,
    sgd_step,
)
from mmgan.manifold import SphereManifold, ManifoldTracker, estimate
from mmgan.kernel import KernelSpec
from mmgan.loss import LossConfig, LossReport, generator_terms
from mmgan.regularizer import r_g
from mmgan.data import DatasetHandle, make_dataset, load_idx, sample_batch
from mmgan.metrics import MetricsRow, mode_coverage, manifold_gap
from mmgan.trainer import TrainConfig, TrainResult, train, evaluate
from mmgan.config import RunConfig, parse_config_text, manifest_text
from mmgan.persist import save_network, load_network

__version__ = "0.1.0"
