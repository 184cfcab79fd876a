"""Loss terms for the paired-VAE objective and their analytic gradients.

All losses are sums over every element (and over the batch when inputs carry
a batch axis); nothing is averaged. The composite objective is

    total = alpha*KL(stats_t) + beta*KL(stats_b)
          + g_tt*RE(x_t, y_tt) + g_bb*RE(x_b, y_bb)
          + g_tb*RE(x_b, y_tb) + g_bt*RE(x_t, y_bt)
          + latent-agreement term delta/2 * ||z_t - z_b||^2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError

EPS_OUT = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Nonnegative term weights; defaults are the published training weights."""

    alpha: float = 0.5
    beta: float = 0.5
    g_tt: float = 0.4
    g_bb: float = 0.5
    g_tb: float = 0.4
    g_bt: float = 0.2
    delta: float = 1.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v < 0:
                raise ValidationError(f"LossWeights.{name} must be nonnegative, got {v}")


def recon_loss(x, y, eps=EPS_OUT) -> float:
    """Bernoulli cross-entropy, summed over all elements.

    y is clipped to [eps, 1-eps] before the logs; x is the target.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeError(f"recon_loss: target {tuple(x.shape)} vs output {tuple(y.shape)}")
    yc = np.clip(y, eps, 1.0 - eps)
    return float(-np.sum(x * np.log(yc) + (1.0 - x) * np.log1p(-yc)))


def recon_loss_grad(x, y, eps=EPS_OUT) -> np.ndarray:
    """d(recon_loss)/dy; zero where the clip is active."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeError(f"recon_loss_grad: target {tuple(x.shape)} vs output {tuple(y.shape)}")
    yc = np.clip(y, eps, 1.0 - eps)
    g = -x / yc + (1.0 - x) / (1.0 - yc)
    return np.where((y > eps) & (y < 1.0 - eps), g, 0.0)


def kl_loss(stats) -> float:
    """KL divergence of the diagonal-Gaussian posterior from the unit Gaussian.

    -1/2 * sum_j (1 + log sigma^2_j - mu_j^2 - sigma^2_j); zero exactly when
    mu = 0 and sigma^2 = 1 in every dimension.
    """
    mu = np.asarray(stats.mean)
    lv = np.asarray(stats.log_var)
    return float(-0.5 * np.sum(1.0 + lv - mu * mu - np.exp(lv)))


def kl_loss_grads(stats):
    """(d/dmu, d/dlogvar) of kl_loss."""
    mu = np.asarray(stats.mean)
    lv = np.asarray(stats.log_var)
    return mu.copy(), 0.5 * (np.exp(lv) - 1.0)


def space_sharing_loss(z_t, z_b, delta=1.0) -> float:
    """delta/2 * squared Euclidean distance between the two latent codes."""
    z_t = np.asarray(z_t)
    z_b = np.asarray(z_b)
    if z_t.shape != z_b.shape:
        raise ShapeError(f"space_sharing_loss: {tuple(z_t.shape)} vs {tuple(z_b.shape)}")
    d = z_t - z_b
    return float(0.5 * delta * np.sum(d * d))


def total_loss(outputs, x_t, x_b, w: LossWeights, eps=EPS_OUT):
    """Weighted sum of the seven terms; returns (total, per-term breakdown).

    Breakdown values are the weighted contributions and sum exactly to the
    total (the total is computed as their sum, in breakdown order).
    """
    breakdown = {
        "kl_t": w.alpha * kl_loss(outputs.stats_t),
        "kl_b": w.beta * kl_loss(outputs.stats_b),
        "re_tt": w.g_tt * recon_loss(x_t, outputs.y_tt, eps),
        "re_bb": w.g_bb * recon_loss(x_b, outputs.y_bb, eps),
        "re_tb": w.g_tb * recon_loss(x_b, outputs.y_tb, eps),
        "re_bt": w.g_bt * recon_loss(x_t, outputs.y_bt, eps),
        "ls": space_sharing_loss(outputs.z_t, outputs.z_b, w.delta),
    }
    return sum(breakdown.values()), breakdown
