"""Mini-batch training loop with seeded determinism and bit-exact resume.

One seed drives three named streams (parameter init, epoch shuffling,
reparameterization noise). Losses are summed over the batch; one RMSProp step
is taken per batch. Parameters and optimizer state are float32 so checkpoints
round-trip losslessly and a resumed run reproduces an uninterrupted one
bit for bit.
"""

from dataclasses import dataclass, field

import numpy as np

from .checkpoint import Checkpoint
from .errors import TrainingError, ValidationError
from .losses import LossWeights, total_loss
from .model import CrossVAE, ModelConfig
from .optim import init_rmsprop, rmsprop_step
from .strokes import Dataset


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 200
    batch_size: int = 32
    weights: LossWeights = field(default_factory=LossWeights)
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8
    seed: int = 0


@dataclass
class TrainResult:
    model: CrossVAE
    history: list          # per-epoch dicts: total, 7 terms, z_gap_mean
    opt_state: object
    rng_shuffle: np.random.Generator
    rng_noise: np.random.Generator

    def to_checkpoint(self, epoch, cfg: TrainConfig) -> Checkpoint:
        return Checkpoint(
            model_config=self.model.config,
            epoch=epoch,
            params={name: p.value for name, p in self.model.params.items()},
            opt_v=dict(self.opt_state.v),
            opt_hyper={"lr": cfg.lr, "rho": cfg.rho, "eps": cfg.eps},
            rng_shuffle=self.rng_shuffle.bit_generator.state,
            rng_noise=self.rng_noise.bit_generator.state,
        )


def _spawn_rngs(seed):
    init_ss, shuffle_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(init_ss),
        np.random.default_rng(shuffle_ss),
        np.random.default_rng(noise_ss),
    )


def train(dataset: Dataset, cfg: TrainConfig, resume: Checkpoint | None = None, log=None) -> TrainResult:
    """Train on paired (trajectory, bitmap) items; deterministic given cfg.seed.

    With ``resume``, training continues from the checkpoint's epoch counter,
    restoring parameters, optimizer state, and both rng streams.
    """
    if len(dataset) == 0:
        raise ValidationError("train: dataset is empty")
    if cfg.epochs < 1 or cfg.batch_size < 1:
        raise ValidationError("train: epochs and batch_size must be >= 1")

    init_rng, shuffle_rng, noise_rng = _spawn_rngs(cfg.seed)
    model = CrossVAE(cfg.model, rng=init_rng, dtype=np.float32)
    opt = init_rmsprop(model.params, lr=cfg.lr, rho=cfg.rho, eps=cfg.eps)
    start_epoch = 0
    if resume is not None:
        if resume.model_config != cfg.model:
            raise TrainingError("resume: checkpoint model config differs from TrainConfig.model")
        for name in model.params.names():
            model.params.set_value(name, resume.params[name])
        for name, v in resume.opt_v.items():
            opt.v[name][...] = v
        shuffle_rng.bit_generator.state = resume.rng_shuffle
        noise_rng.bit_generator.state = resume.rng_noise
        start_epoch = resume.epoch

    n = len(dataset)
    j = cfg.model.latent_dim
    x_t = np.stack([it.traj for it in dataset.items]).astype(np.float32)
    x_b = np.stack([it.bitmap for it in dataset.items]).astype(np.float32)[:, None, :, :]

    history = []
    term_keys = ("kl_t", "kl_b", "re_tt", "re_bb", "re_tb", "re_bt", "ls")
    for epoch in range(start_epoch, cfg.epochs):
        perm = shuffle_rng.permutation(n)
        sums = dict.fromkeys(term_keys, 0.0)
        total_sum = 0.0
        z_gap_sum = 0.0
        for b0 in range(0, n, cfg.batch_size):
            idx = perm[b0:b0 + cfg.batch_size]
            xt = x_t[idx]
            xb = x_b[idx]
            eps_t = noise_rng.standard_normal((len(idx), j)).astype(np.float32)
            eps_b = noise_rng.standard_normal((len(idx), j)).astype(np.float32)
            outputs, caches = model._forward_cross_cached(xt, xb, eps_t, eps_b)
            total, breakdown = total_loss(outputs, xt, xb[:, 0], cfg.weights, cfg.model.eps_out)
            if not np.isfinite(total):
                bad = [k for k, v in breakdown.items() if not np.isfinite(v)]
                raise TrainingError(
                    f"non-finite loss at epoch {epoch + 1}, batch {b0 // cfg.batch_size + 1}: "
                    f"term(s) {', '.join(bad) or 'total'}"
                )
            model.params.zero_grads()
            model._backward_cross(caches, outputs, xt, xb, cfg.weights)
            rmsprop_step(model.params, opt)
            for k in term_keys:
                sums[k] += breakdown[k]
            total_sum += total
            z_gap_sum += float(np.sum(np.linalg.norm(outputs.z_t - outputs.z_b, axis=-1)))
        record = {"epoch": epoch + 1, "total": total_sum, **sums, "z_gap_mean": z_gap_sum / n}
        history.append(record)
        if log is not None:
            log(record)
    return TrainResult(model, history, opt, shuffle_rng, noise_rng)


def model_from_checkpoint(ckpt: Checkpoint) -> CrossVAE:
    """Rebuild a model (float32) from checkpoint parameter tensors."""
    model = CrossVAE(ckpt.model_config, rng=np.random.default_rng(0), dtype=np.float32)
    for name in model.params.names():
        if name not in ckpt.params:
            raise TrainingError(f"checkpoint missing parameter {name!r}")
        model.params.set_value(name, ckpt.params[name])
    return model
