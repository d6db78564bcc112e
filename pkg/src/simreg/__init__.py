"""SIM(2) phase-correlation registration and pose-randomized style training.

The estimator recovers scale, rotation and translation between a moving
and a fixed image via log-polar phase correlation with a differentiable
soft readout; the trainer fits a small parametric style translator on
weakly-paired data using pose randomization and self-supervised heatmap
losses.
"""

from .estimator import (
    EstimatorConfig,
    PoseEstimate,
    apply_estimate,
    estimate_rot_scale,
    estimate_sim2,
    estimate_translation,
    prepare_fixed,
)
from .geometry import IDENTITY, Sim2Pose, compose, inverse, overlap_mask, warp
from .losses import (
    LossReport,
    LossWeights,
    aggregate,
    kld,
    l1_masked,
    loss_theta_s,
    loss_xi_r,
    onepeak_target,
    realness_bce,
)
from .phasecorr import (
    PoseDistribution,
    argmax_refined,
    correlate,
    expectation,
    to_distribution,
)
from .randomization import PoseRange, inject_both, inject_original_only, sample_pose
from .synth import StyleSpec, WeakPair, apply_style, generate_corpus, make_pair
from .trainer import TrainConfig, TranslatorParams, evaluate, forward_losses, grad_fd, train, translate

__version__ = "0.1.0"
