"""Paired-VAE model: image and trajectory encoders/decoders over a shared latent.

The image branch is a conv/pool stack mirrored by an unpool/deconv stack; the
trajectory branch is either a 1-D conv stack (no pooling) or an LSTM. Both
branches end in two affine heads producing the posterior mean and log
variance over a common latent space. All forward passes have hand-chained
backward passes that accumulate parameter gradients into the ParamStore.

Array conventions (batched internally): trajectories (N, T, 2), images
(N, 1, L, L), latents (N, J). Public methods also accept single samples
without the batch axis and return matching ranks; public image shapes carry
no channel axis, i.e. (L, L) or (N, L, L).
"""

from dataclasses import dataclass, field

import numpy as np

from . import layers
from .errors import ValidationError
from .params import ParamStore, glorot_uniform

LOG_VAR_CLIP = 20.0


@dataclass(frozen=True)
class ModelConfig:
    latent_dim: int = 32
    seq_len: int = 64
    variant: str = "conv1d"  # "conv1d" | "lstm"
    img_size: int = 32
    img_channels: tuple = (32, 64, 128, 256)
    img_hidden: int = 256
    seq_channels: tuple = (32, 64)
    seq_hidden: int = 128
    lstm_hidden: int = 64
    eps_out: float = 1e-7

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValidationError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.seq_len < 2:
            raise ValidationError(f"seq_len must be >= 2, got {self.seq_len}")
        if self.variant not in ("conv1d", "lstm"):
            raise ValidationError(f"variant must be 'conv1d' or 'lstm', got {self.variant!r}")
        n = len(self.img_channels)
        if n < 1 or self.img_size % (1 << n) or (self.img_size >> n) < 1:
            raise ValidationError(
                f"img_size {self.img_size} not divisible into {n} pooling stages"
            )

    @property
    def n_stages(self):
        return len(self.img_channels)

    @property
    def final_spatial(self):
        return self.img_size >> self.n_stages

    def to_dict(self):
        return {
            "latent_dim": self.latent_dim,
            "seq_len": self.seq_len,
            "variant": self.variant,
            "img_size": self.img_size,
            "img_channels": list(self.img_channels),
            "img_hidden": self.img_hidden,
            "seq_channels": list(self.seq_channels),
            "seq_hidden": self.seq_hidden,
            "lstm_hidden": self.lstm_hidden,
            "eps_out": self.eps_out,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["img_channels"] = tuple(d["img_channels"])
        d["seq_channels"] = tuple(d["seq_channels"])
        return cls(**d)


@dataclass
class LatentStats:
    """Posterior mean and log variance over the latent space, shape (..., J)."""

    mean: np.ndarray
    log_var: np.ndarray


@dataclass
class CrossOutputs:
    """The four decoder outputs plus both posteriors and sampled codes."""

    y_tt: np.ndarray
    y_bb: np.ndarray
    y_tb: np.ndarray
    y_bt: np.ndarray
    stats_t: LatentStats
    stats_b: LatentStats
    z_t: np.ndarray
    z_b: np.ndarray


def reparameterize(stats: LatentStats, rng: np.random.Generator) -> np.ndarray:
    """z = mu + exp(0.5 * log_var) * eps with eps ~ N(0, I) from rng.

    log_var is clamped to +-LOG_VAR_CLIP before exponentiation.
    """
    mu = np.asarray(stats.mean)
    lv = np.clip(np.asarray(stats.log_var), -LOG_VAR_CLIP, LOG_VAR_CLIP)
    eps = rng.standard_normal(mu.shape).astype(mu.dtype, copy=False)
    return mu + np.exp(0.5 * lv) * eps


def _reparam_cached(stats: LatentStats, eps):
    sigma = np.exp(0.5 * np.clip(stats.log_var, -LOG_VAR_CLIP, LOG_VAR_CLIP))
    z = stats.mean + sigma * eps

    def backward(gz):
        return gz, gz * 0.5 * sigma * eps

    return z, backward


class CrossVAE:
    """Both VAEs plus the cross-decoding paths, over one ParamStore."""

    def __init__(self, config: ModelConfig, rng=None, dtype=np.float64):
        self.config = config
        self.dtype = np.dtype(dtype)
        self.params = ParamStore()
        self._build(rng if rng is not None else np.random.default_rng(0))

    # ---------------------------------------------------------------- build

    def _glorot(self, rng, shape, fan_in, fan_out):
        return glorot_uniform(rng, shape, fan_in, fan_out, dtype=self.dtype)

    def _zeros(self, shape):
        return np.zeros(shape, dtype=self.dtype)

    def _build(self, rng):
        cfg = self.config
        p = self.params
        j = cfg.latent_dim

        chans = (1,) + tuple(cfg.img_channels)
        for s in range(cfg.n_stages):
            ci, co = chans[s], chans[s + 1]
            p.add(f"img_enc.conv{s}.k", self._glorot(rng, (co, ci, 3, 3), ci * 9, co * 9))
            p.add(f"img_enc.conv{s}.b", self._zeros(co))
        flat = chans[-1] * cfg.final_spatial ** 2
        p.add("img_enc.fc.w", self._glorot(rng, (cfg.img_hidden, flat), flat, cfg.img_hidden))
        p.add("img_enc.fc.b", self._zeros(cfg.img_hidden))
        p.add("img_enc.mu.w", self._glorot(rng, (j, cfg.img_hidden), cfg.img_hidden, j))
        p.add("img_enc.mu.b", self._zeros(j))
        p.add("img_enc.logvar.w", self._glorot(rng, (j, cfg.img_hidden), cfg.img_hidden, j))
        p.add("img_enc.logvar.b", self._zeros(j))

        p.add("img_dec.fc.w", self._glorot(rng, (cfg.img_hidden, j), j, cfg.img_hidden))
        p.add("img_dec.fc.b", self._zeros(cfg.img_hidden))
        p.add("img_dec.out.w", self._glorot(rng, (flat, cfg.img_hidden), cfg.img_hidden, flat))
        p.add("img_dec.out.b", self._zeros(flat))
        for s in range(cfg.n_stages - 1, -1, -1):
            ci, co = chans[s], chans[s + 1]
            # deconv kernels mirror the encoder conv shapes and map co back to ci
            p.add(f"img_dec.deconv{s}.k", self._glorot(rng, (co, ci, 3, 3), co * 9, ci * 9))
            p.add(f"img_dec.deconv{s}.b", self._zeros(ci))

        if cfg.variant == "conv1d":
            tchans = (2,) + tuple(cfg.seq_channels)
            for i in range(len(cfg.seq_channels)):
                ci, co = tchans[i], tchans[i + 1]
                p.add(f"seq_enc.conv{i}.k", self._glorot(rng, (co, ci, 3), ci * 3, co * 3))
                p.add(f"seq_enc.conv{i}.b", self._zeros(co))
            tflat = tchans[-1] * cfg.seq_len
            p.add("seq_enc.fc.w", self._glorot(rng, (cfg.seq_hidden, tflat), tflat, cfg.seq_hidden))
            p.add("seq_enc.fc.b", self._zeros(cfg.seq_hidden))
        else:
            m = cfg.lstm_hidden
            p.add("seq_enc.lstm.wx", self._glorot(rng, (4 * m, 2), 2, 4 * m))
            p.add("seq_enc.lstm.wh", self._glorot(rng, (4 * m, m), m, 4 * m))
            b = self._zeros(4 * m)
            b[m:2 * m] = 1.0  # forget-gate bias
            p.add("seq_enc.lstm.b", b)
            p.add("seq_enc.fc.w", self._glorot(rng, (cfg.seq_hidden, m), m, cfg.seq_hidden))
            p.add("seq_enc.fc.b", self._zeros(cfg.seq_hidden))
        p.add("seq_enc.mu.w", self._glorot(rng, (j, cfg.seq_hidden), cfg.seq_hidden, j))
        p.add("seq_enc.mu.b", self._zeros(j))
        p.add("seq_enc.logvar.w", self._glorot(rng, (j, cfg.seq_hidden), cfg.seq_hidden, j))
        p.add("seq_enc.logvar.b", self._zeros(j))

        if cfg.variant == "conv1d":
            tchans = (2,) + tuple(cfg.seq_channels)
            tflat = tchans[-1] * cfg.seq_len
            p.add("seq_dec.fc.w", self._glorot(rng, (cfg.seq_hidden, j), j, cfg.seq_hidden))
            p.add("seq_dec.fc.b", self._zeros(cfg.seq_hidden))
            p.add("seq_dec.out.w", self._glorot(rng, (tflat, cfg.seq_hidden), cfg.seq_hidden, tflat))
            p.add("seq_dec.out.b", self._zeros(tflat))
            rev = tuple(reversed(tchans))  # e.g. (64, 32, 2)
            for i in range(len(cfg.seq_channels)):
                ci, co = rev[i], rev[i + 1]
                p.add(f"seq_dec.conv{i}.k", self._glorot(rng, (co, ci, 3), ci * 3, co * 3))
                p.add(f"seq_dec.conv{i}.b", self._zeros(co))
        else:
            m = cfg.lstm_hidden
            p.add("seq_dec.init.w", self._glorot(rng, (2 * m, j), j, 2 * m))
            p.add("seq_dec.init.b", self._zeros(2 * m))
            p.add("seq_dec.lstm.wx", self._glorot(rng, (4 * m, 2), 2, 4 * m))
            p.add("seq_dec.lstm.wh", self._glorot(rng, (4 * m, m), m, 4 * m))
            b = self._zeros(4 * m)
            b[m:2 * m] = 1.0
            p.add("seq_dec.lstm.b", b)
            p.add("seq_dec.emit.w", self._glorot(rng, (2, m), m, 2))
            p.add("seq_dec.emit.b", self._zeros(2))

    # ------------------------------------------------------- shape adapters

    def _lift_traj(self, x_t):
        x = np.asarray(x_t, dtype=self.dtype)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.ndim != 3 or x.shape[1] != self.config.seq_len or x.shape[2] != 2:
            raise ValidationError(
                f"trajectory input must be (T, 2) or (N, T, 2) with T={self.config.seq_len}, "
                f"got {tuple(np.shape(x_t))}"
            )
        return x, single

    def _lift_bitmap(self, x_b):
        x = np.asarray(x_b, dtype=self.dtype)
        single = x.ndim == 2
        if single:
            x = x[None]
        L = self.config.img_size
        if x.ndim != 3 or x.shape[1] != L or x.shape[2] != L:
            raise ValidationError(
                f"bitmap input must be ({L}, {L}) or (N, {L}, {L}), got {tuple(np.shape(x_b))}"
            )
        return x[:, None, :, :], single

    def _lift_z(self, z):
        z = np.asarray(z, dtype=self.dtype)
        single = z.ndim == 1
        if single:
            z = z[None]
        if z.ndim != 2 or z.shape[1] != self.config.latent_dim:
            raise ValidationError(f"latent code must have dimension {self.config.latent_dim}")
        return z, single

    # ------------------------------------------------------- heads (shared)

    def _heads_cached(self, feat, prefix):
        p = self.params
        mu, b_mu = layers.dense(feat, p.value(f"{prefix}.mu.w"), p.value(f"{prefix}.mu.b"))
        lv_raw, b_lv = layers.dense(feat, p.value(f"{prefix}.logvar.w"), p.value(f"{prefix}.logvar.b"))
        lv = np.clip(lv_raw, -LOG_VAR_CLIP, LOG_VAR_CLIP)
        mask = (lv_raw > -LOG_VAR_CLIP) & (lv_raw < LOG_VAR_CLIP)
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(lv))):
            raise ValidationError(f"{prefix}: non-finite activation in latent heads")

        def backward(gmu, glv):
            gf_mu, gw, gb = b_mu(gmu)
            p.add_grad(f"{prefix}.mu.w", gw)
            p.add_grad(f"{prefix}.mu.b", gb)
            gf_lv, gw, gb = b_lv(np.where(mask, glv, 0.0))
            p.add_grad(f"{prefix}.logvar.w", gw)
            p.add_grad(f"{prefix}.logvar.b", gb)
            return gf_mu + gf_lv

        return LatentStats(mu, lv), backward

    # --------------------------------------------------------- image branch

    def _encode_image_cached(self, xb):
        # Pooling runs on the raw conv outputs and ReLU on the pooled values:
        # identical activations to relu-then-pool (max commutes with a monotone
        # map) but the argmax indices are taken over generic values, free of
        # the exact zero-ties ReLU would create.
        cfg = self.config
        p = self.params
        h = xb
        pool_idx = []
        stack = []
        for s in range(cfg.n_stages):
            h, b_conv = layers.conv2d(h, p.value(f"img_enc.conv{s}.k"), p.value(f"img_enc.conv{s}.b"))
            h, idx, b_pool = layers.maxpool2x2(h)
            h, b_relu = layers.relu(h)
            pool_idx.append(idx)
            stack.append((s, b_conv, b_relu, b_pool))
        n = h.shape[0]
        conv_shape = h.shape
        flat = h.reshape(n, -1)
        fc, b_fc = layers.dense(flat, p.value("img_enc.fc.w"), p.value("img_enc.fc.b"))
        feat, b_act = layers.relu(fc)
        stats, b_heads = self._heads_cached(feat, "img_enc")

        def backward(gmu, glv):
            gfeat = b_heads(gmu, glv)
            gfc = b_act(gfeat)
            gflat, gw, gb = b_fc(gfc)
            p.add_grad("img_enc.fc.w", gw)
            p.add_grad("img_enc.fc.b", gb)
            gh = gflat.reshape(conv_shape)
            for s, b_conv, b_relu, b_pool in reversed(stack):
                gh = b_relu(gh)
                gh = b_pool(gh)
                gh, gk, gbias = b_conv(gh)
                p.add_grad(f"img_enc.conv{s}.k", gk)
                p.add_grad(f"img_enc.conv{s}.b", gbias)
            return gh

        return stats, pool_idx, backward

    def _default_pool_idx(self, n):
        cfg = self.config
        chans = (1,) + tuple(cfg.img_channels)
        out = []
        for s in range(cfg.n_stages):
            sp = cfg.img_size >> (s + 1)
            out.append(np.zeros((n, chans[s + 1], sp, sp), dtype=np.int8))
        return out

    def _decode_image_cached(self, z, pool_idx):
        cfg = self.config
        p = self.params
        n = z.shape[0]
        if pool_idx is None:
            pool_idx = self._default_pool_idx(n)
        h, b_fc = layers.dense(z, p.value("img_dec.fc.w"), p.value("img_dec.fc.b"))
        h, b_r1 = layers.relu(h)
        h, b_out = layers.dense(h, p.value("img_dec.out.w"), p.value("img_dec.out.b"))
        h, b_r2 = layers.relu(h)
        sp = cfg.final_spatial
        h = h.reshape(n, cfg.img_channels[-1], sp, sp)
        stack = []
        for s in range(cfg.n_stages - 1, -1, -1):
            h, b_unpool = layers.max_unpool2x2(h, pool_idx[s])
            h, b_deconv = layers.deconv2d(h, p.value(f"img_dec.deconv{s}.k"), p.value(f"img_dec.deconv{s}.b"))
            if s > 0:
                h, b_act = layers.relu(h)
            else:
                h, b_act = layers.sigmoid(h)
            stack.append((s, b_unpool, b_deconv, b_act))
        y = h

        def backward(gy):
            gh = gy
            for s, b_unpool, b_deconv, b_act in reversed(stack):
                gh = b_act(gh)
                gh, gk, gbias = b_deconv(gh)
                p.add_grad(f"img_dec.deconv{s}.k", gk)
                p.add_grad(f"img_dec.deconv{s}.b", gbias)
                gh = b_unpool(gh)
            gh = gh.reshape(n, -1)
            gh = b_r2(gh)
            gh, gw, gb = b_out(gh)
            p.add_grad("img_dec.out.w", gw)
            p.add_grad("img_dec.out.b", gb)
            gh = b_r1(gh)
            gz, gw, gb = b_fc(gh)
            p.add_grad("img_dec.fc.w", gw)
            p.add_grad("img_dec.fc.b", gb)
            return gz

        return y, backward

    # ---------------------------------------------------- trajectory branch

    def _encode_seq_cached(self, xt):
        cfg = self.config
        p = self.params
        n = xt.shape[0]
        if cfg.variant == "conv1d":
            h = np.ascontiguousarray(xt.transpose(0, 2, 1))  # (N, 2, T)
            stack = []
            for i in range(len(cfg.seq_channels)):
                h, b_conv = layers.conv1d(h, p.value(f"seq_enc.conv{i}.k"), p.value(f"seq_enc.conv{i}.b"))
                h, b_relu = layers.relu(h)
                stack.append((i, b_conv, b_relu))
            conv_shape = h.shape
            flat = h.reshape(n, -1)
            fc, b_fc = layers.dense(flat, p.value("seq_enc.fc.w"), p.value("seq_enc.fc.b"))
            feat, b_act = layers.relu(fc)
            stats, b_heads = self._heads_cached(feat, "seq_enc")

            def backward(gmu, glv):
                gfeat = b_heads(gmu, glv)
                gfc = b_act(gfeat)
                gflat, gw, gb = b_fc(gfc)
                p.add_grad("seq_enc.fc.w", gw)
                p.add_grad("seq_enc.fc.b", gb)
                gh = gflat.reshape(conv_shape)
                for i, b_conv, b_relu in reversed(stack):
                    gh = b_relu(gh)
                    gh, gk, gbias = b_conv(gh)
                    p.add_grad(f"seq_enc.conv{i}.k", gk)
                    p.add_grad(f"seq_enc.conv{i}.b", gbias)
                return gh.transpose(0, 2, 1)

            return stats, backward

        m = cfg.lstm_hidden
        wx, wh, b = p.value("seq_enc.lstm.wx"), p.value("seq_enc.lstm.wh"), p.value("seq_enc.lstm.b")
        h = np.zeros((n, m), dtype=self.dtype)
        c = np.zeros((n, m), dtype=self.dtype)
        cell_backs = []
        for step in range(cfg.seq_len):
            (h, c), b_cell = layers.lstm_cell(xt[:, step, :], h, c, wx, wh, b)
            cell_backs.append(b_cell)
        fc, b_fc = layers.dense(h, p.value("seq_enc.fc.w"), p.value("seq_enc.fc.b"))
        feat, b_act = layers.relu(fc)
        stats, b_heads = self._heads_cached(feat, "seq_enc")

        def backward(gmu, glv):
            gfeat = b_heads(gmu, glv)
            gfc = b_act(gfeat)
            gh, gw, gb_fc = b_fc(gfc)
            p.add_grad("seq_enc.fc.w", gw)
            p.add_grad("seq_enc.fc.b", gb_fc)
            gc = np.zeros_like(gh)
            gwx = np.zeros_like(wx)
            gwh = np.zeros_like(wh)
            gb = np.zeros_like(b)
            gx = np.zeros_like(xt)
            for step in range(cfg.seq_len - 1, -1, -1):
                gx_t, gh, gc, gwx_t, gwh_t, gb_t = cell_backs[step](gh, gc)
                gx[:, step, :] = gx_t
                gwx += gwx_t
                gwh += gwh_t
                gb += gb_t
            p.add_grad("seq_enc.lstm.wx", gwx)
            p.add_grad("seq_enc.lstm.wh", gwh)
            p.add_grad("seq_enc.lstm.b", gb)
            return gx

        return stats, backward

    def _decode_seq_cached(self, z):
        cfg = self.config
        p = self.params
        n = z.shape[0]
        if cfg.variant == "conv1d":
            h, b_fc = layers.dense(z, p.value("seq_dec.fc.w"), p.value("seq_dec.fc.b"))
            h, b_r1 = layers.relu(h)
            h, b_out = layers.dense(h, p.value("seq_dec.out.w"), p.value("seq_dec.out.b"))
            h, b_r2 = layers.relu(h)
            h = h.reshape(n, cfg.seq_channels[-1], cfg.seq_len)
            stack = []
            n_convs = len(cfg.seq_channels)
            for i in range(n_convs):
                h, b_conv = layers.conv1d(h, p.value(f"seq_dec.conv{i}.k"), p.value(f"seq_dec.conv{i}.b"))
                if i < n_convs - 1:
                    h, b_act = layers.relu(h)
                else:
                    h, b_act = layers.sigmoid(h)
                stack.append((i, b_conv, b_act))
            y = np.ascontiguousarray(h.transpose(0, 2, 1))  # (N, T, 2)

            def backward(gy):
                gh = np.ascontiguousarray(np.asarray(gy).transpose(0, 2, 1))
                for i, b_conv, b_act in reversed(stack):
                    gh = b_act(gh)
                    gh, gk, gbias = b_conv(gh)
                    p.add_grad(f"seq_dec.conv{i}.k", gk)
                    p.add_grad(f"seq_dec.conv{i}.b", gbias)
                gh = gh.reshape(n, -1)
                gh = b_r2(gh)
                gh, gw, gb = b_out(gh)
                p.add_grad("seq_dec.out.w", gw)
                p.add_grad("seq_dec.out.b", gb)
                gh = b_r1(gh)
                gz, gw, gb = b_fc(gh)
                p.add_grad("seq_dec.fc.w", gw)
                p.add_grad("seq_dec.fc.b", gb)
                return gz

            return y, backward

        m = cfg.lstm_hidden
        wx, wh, b = p.value("seq_dec.lstm.wx"), p.value("seq_dec.lstm.wh"), p.value("seq_dec.lstm.b")
        ew, eb = p.value("seq_dec.emit.w"), p.value("seq_dec.emit.b")
        hc, b_init = layers.dense(z, p.value("seq_dec.init.w"), p.value("seq_dec.init.b"))
        h, c = hc[:, :m], hc[:, m:]
        inp = np.zeros((n, 2), dtype=self.dtype)
        cell_backs, emit_backs, sig_backs = [], [], []
        ys = np.empty((n, cfg.seq_len, 2), dtype=self.dtype)
        for step in range(cfg.seq_len):
            (h, c), b_cell = layers.lstm_cell(inp, h, c, wx, wh, b)
            e, b_emit = layers.dense(h, ew, eb)
            y_step, b_sig = layers.sigmoid(e)
            ys[:, step, :] = y_step
            inp = y_step
            cell_backs.append(b_cell)
            emit_backs.append(b_emit)
            sig_backs.append(b_sig)

        def backward(gy):
            gy = np.asarray(gy)
            gh = np.zeros((n, m), dtype=gy.dtype)
            gc = np.zeros((n, m), dtype=gy.dtype)
            ginp = np.zeros((n, 2), dtype=gy.dtype)
            gwx = np.zeros_like(wx)
            gwh = np.zeros_like(wh)
            gb = np.zeros_like(b)
            gew = np.zeros_like(ew)
            geb = np.zeros_like(eb)
            for step in range(cfg.seq_len - 1, -1, -1):
                gy_step = gy[:, step, :] + ginp  # emission also fed the next cell
                ge = sig_backs[step](gy_step)
                gh_emit, gew_t, geb_t = emit_backs[step](ge)
                gew += gew_t
                geb += geb_t
                ginp, gh, gc, gwx_t, gwh_t, gb_t = cell_backs[step](gh + gh_emit, gc)
                gwx += gwx_t
                gwh += gwh_t
                gb += gb_t
            p.add_grad("seq_dec.lstm.wx", gwx)
            p.add_grad("seq_dec.lstm.wh", gwh)
            p.add_grad("seq_dec.lstm.b", gb)
            p.add_grad("seq_dec.emit.w", gew)
            p.add_grad("seq_dec.emit.b", geb)
            ghc = np.concatenate([gh, gc], axis=1)
            gz, gw, gb_init = b_init(ghc)
            p.add_grad("seq_dec.init.w", gw)
            p.add_grad("seq_dec.init.b", gb_init)
            return gz

        return ys, backward

    # ------------------------------------------------------------ public API

    def encode_image(self, x_b, return_indices=False):
        xb, single = self._lift_bitmap(x_b)
        stats, pool_idx, _ = self._encode_image_cached(xb)
        if single:
            stats = LatentStats(stats.mean[0], stats.log_var[0])
            pool_idx = [ix[0] for ix in pool_idx]
        return (stats, pool_idx) if return_indices else stats

    def decode_image(self, z, pool_indices=None):
        z2, single = self._lift_z(z)
        if pool_indices is not None and single:
            pool_indices = [np.asarray(ix)[None] for ix in pool_indices]
        y, _ = self._decode_image_cached(z2, pool_indices)
        y = y[:, 0, :, :]
        return y[0] if single else y

    def encode_seq(self, x_t) -> LatentStats:
        xt, single = self._lift_traj(x_t)
        stats, _ = self._encode_seq_cached(xt)
        if single:
            return LatentStats(stats.mean[0], stats.log_var[0])
        return stats

    def decode_seq(self, z):
        z2, single = self._lift_z(z)
        y, _ = self._decode_seq_cached(z2)
        return y[0] if single else y

    def forward_cross(self, x_t, x_b, rng: np.random.Generator) -> CrossOutputs:
        """Encode both modalities, sample each latent once, decode all four paths."""
        xt, single_t = self._lift_traj(x_t)
        xb, single_b = self._lift_bitmap(x_b)
        if xt.shape[0] != xb.shape[0]:
            raise ValidationError("forward_cross: batch sizes disagree between modalities")
        j = self.config.latent_dim
        eps_t = rng.standard_normal((xt.shape[0], j)).astype(self.dtype)
        eps_b = rng.standard_normal((xb.shape[0], j)).astype(self.dtype)
        out, _ = self._forward_cross_cached(xt, xb, eps_t, eps_b)
        if single_t and single_b:
            out = CrossOutputs(
                y_tt=out.y_tt[0],
                y_bb=out.y_bb[0],
                y_tb=out.y_tb[0],
                y_bt=out.y_bt[0],
                stats_t=LatentStats(out.stats_t.mean[0], out.stats_t.log_var[0]),
                stats_b=LatentStats(out.stats_b.mean[0], out.stats_b.log_var[0]),
                z_t=out.z_t[0],
                z_b=out.z_b[0],
            )
        return out

    def _forward_cross_cached(self, xt, xb, eps_t, eps_b):
        # Both image decodes use the deterministic default unpool placement,
        # the same placement inference uses. Decoding y_tb with the paired
        # image's recorded indices trains a path that never exists at
        # inference time and leaves cross-modal image generation untrained.
        stats_t, back_enc_t = self._encode_seq_cached(xt)
        stats_b, pool_idx, back_enc_b = self._encode_image_cached(xb)
        del pool_idx
        z_t, back_rep_t = _reparam_cached(stats_t, eps_t)
        z_b, back_rep_b = _reparam_cached(stats_b, eps_b)
        y_tt, back_dec_tt = self._decode_seq_cached(z_t)
        y_bt, back_dec_bt = self._decode_seq_cached(z_b)
        y_bb4, back_dec_bb = self._decode_image_cached(z_b, None)
        y_tb4, back_dec_tb = self._decode_image_cached(z_t, None)
        outputs = CrossOutputs(
            y_tt=y_tt,
            y_bb=y_bb4[:, 0, :, :],
            y_tb=y_tb4[:, 0, :, :],
            y_bt=y_bt,
            stats_t=stats_t,
            stats_b=stats_b,
            z_t=z_t,
            z_b=z_b,
        )
        caches = {
            "enc_t": back_enc_t,
            "enc_b": back_enc_b,
            "rep_t": back_rep_t,
            "rep_b": back_rep_b,
            "dec_tt": back_dec_tt,
            "dec_bt": back_dec_bt,
            "dec_bb": back_dec_bb,
            "dec_tb": back_dec_tb,
        }
        return outputs, caches

    def _backward_cross(self, caches, outputs, xt, xb, w):
        """Accumulate d(total_loss)/d(params) into the store."""
        from .losses import kl_loss_grads, recon_loss_grad

        eps = self.config.eps_out
        gy_tt = w.g_tt * recon_loss_grad(xt, outputs.y_tt, eps)
        gy_bt = w.g_bt * recon_loss_grad(xt, outputs.y_bt, eps)
        xb3 = xb[:, 0, :, :]
        gy_bb = (w.g_bb * recon_loss_grad(xb3, outputs.y_bb, eps))[:, None, :, :]
        gy_tb = (w.g_tb * recon_loss_grad(xb3, outputs.y_tb, eps))[:, None, :, :]

        gz_t = caches["dec_tt"](gy_tt) + caches["dec_tb"](gy_tb)
        gz_b = caches["dec_bt"](gy_bt) + caches["dec_bb"](gy_bb)
        d = (outputs.z_t - outputs.z_b) * w.delta
        gz_t += d
        gz_b -= d

        gmu_t, glv_t = caches["rep_t"](gz_t)
        gmu_b, glv_b = caches["rep_b"](gz_b)
        kmu_t, klv_t = kl_loss_grads(outputs.stats_t)
        kmu_b, klv_b = kl_loss_grads(outputs.stats_b)
        caches["enc_t"](gmu_t + w.alpha * kmu_t, glv_t + w.alpha * klv_t)
        caches["enc_b"](gmu_b + w.beta * kmu_b, glv_b + w.beta * klv_b)

    # ------------------------------------------------------------ inference

    def traj_to_bitmap(self, x_t):
        """Cross-modal inference from a trajectory alone (posterior mean, default unpooling)."""
        stats = self.encode_seq(x_t)
        return self.decode_image(stats.mean, pool_indices=None)

    def bitmap_to_traj(self, x_b):
        stats = self.encode_image(x_b)
        return self.decode_seq(stats.mean)

    def traj_to_traj(self, x_t):
        stats = self.encode_seq(x_t)
        return self.decode_seq(stats.mean)

    def bitmap_to_bitmap(self, x_b):
        stats = self.encode_image(x_b)
        return self.decode_image(stats.mean)
