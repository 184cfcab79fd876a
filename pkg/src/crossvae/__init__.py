"""Cross-modal VAE for handwritten characters: trajectories to bitmaps and back."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .errors import (
    CheckpointError,
    CrossVaeError,
    ParseError,
    ShapeError,
    TrainingError,
    ValidationError,
)
from .gradcheck import grad_check
from .losses import LossWeights, kl_loss, recon_loss, space_sharing_loss, total_loss
from .metrics import (
    MetricsReport,
    class_average_baseline,
    dtw,
    evaluate,
    evaluate_baseline,
    psnr,
    ssim,
)
from .model import CrossOutputs, CrossVAE, LatentStats, ModelConfig, reparameterize
from .optim import RmspropState, init_rmsprop, rmsprop_step
from .params import ParamStore
from .render import RenderSpec, figure_grid, render_trajectory
from .strokes import (
    Dataset,
    DatasetItem,
    StrokeSample,
    build_dataset,
    normalize,
    parse_stroke_file,
    rasterize,
    resample,
    split,
    synth_dataset,
    synth_samples,
)
from .training import TrainConfig, TrainResult, model_from_checkpoint, train

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "CrossOutputs",
    "CrossVAE",
    "CrossVaeError",
    "Dataset",
    "DatasetItem",
    "LatentStats",
    "LossWeights",
    "MetricsReport",
    "ModelConfig",
    "ParamStore",
    "ParseError",
    "RenderSpec",
    "RmspropState",
    "ShapeError",
    "StrokeSample",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "ValidationError",
    "build_dataset",
    "class_average_baseline",
    "dtw",
    "evaluate",
    "evaluate_baseline",
    "figure_grid",
    "grad_check",
    "init_rmsprop",
    "kl_loss",
    "load_checkpoint",
    "model_from_checkpoint",
    "normalize",
    "parse_stroke_file",
    "psnr",
    "rasterize",
    "recon_loss",
    "render_trajectory",
    "reparameterize",
    "resample",
    "rmsprop_step",
    "save_checkpoint",
    "space_sharing_loss",
    "split",
    "ssim",
    "synth_dataset",
    "synth_samples",
    "total_loss",
    "train",
]
